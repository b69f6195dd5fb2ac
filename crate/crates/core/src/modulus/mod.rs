//! Discrete p-modulus of finite curve families.
//!
//! A density is a nonnegative cell field `rho`; it is admissible for a family
//! when every curve integral is at least one. With row `j` of `A` holding the
//! cell lengths of curve `j`, the modulus is
//!
//! ```text
//!     minimize   sum_c w_c rho_c^p
//!     subject to A rho >= 1,  rho >= 0
//! ```
//!
//! solved by [`solve_modulus`] with a duality-gap certificate.

mod solver;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{argument, Error, Result};
use crate::geometry::{CurveFamily, Grid, ScalarField, SparseRow};

pub use solver::{solve_modulus, SolverOptions};

/// Constraint rows, cell weights and exponent of a modulus program.
#[derive(Clone, Debug)]
pub struct ModulusProblem {
    grid: Grid,
    rows: Vec<SparseRow>,
    exponent: f64,
}

impl ModulusProblem {
    pub fn new(grid: Grid, rows: Vec<SparseRow>, exponent: f64) -> Result<Self> {
        if !(exponent >= 1.0 && exponent.is_finite()) {
            return argument(format!(
                "exponent p must satisfy 1 <= p < inf, got {exponent}"
            ));
        }
        let n = grid.n_cells();
        for (j, r) in rows.iter().enumerate() {
            if r.cells.iter().any(|&c| c >= n) {
                return argument(format!("row {j} references a cell outside the grid"));
            }
            if r.values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return argument(format!("row {j} has a negative or non-finite entry"));
            }
            if !(r.sum() > 0.0) {
                return argument(format!("row {j} is empty (constant curve)"));
            }
        }
        Ok(ModulusProblem {
            grid,
            rows,
            exponent,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn n_constraints(&self) -> usize {
        self.rows.len()
    }

    /// `sum_c w_c rho_c^p`.
    pub fn objective(&self, rho: &[f64]) -> f64 {
        let w = self.grid.cell_volume();
        rho.iter().map(|r| w * r.max(0.0).powf(self.exponent)).sum()
    }

    /// `A rho`.
    pub fn constraint_values(&self, rho: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.dot(rho)).collect()
    }

    /// Largest shortfall `max_j (1 - (A rho)_j)^+`.
    pub fn max_violation(&self, rho: &[f64]) -> f64 {
        self.constraint_values(rho)
            .into_iter()
            .fold(0.0, |m, v| m.max(1.0 - v))
    }
}

/// Build the modulus program of `fam` on `grid`: row `j` holds the cell
/// lengths of curve `j`. An empty family gives the empty program.
pub fn assemble_problem(fam: &CurveFamily, grid: &Grid, p: f64) -> Result<ModulusProblem> {
    if !(p >= 1.0) {
        return argument(format!("exponent p must be >= 1, got {p}"));
    }
    let rows = fam
        .curves()
        .par_iter()
        .map(|c| grid.cell_lengths(c))
        .collect::<Result<Vec<_>>>()?;
    ModulusProblem::new(grid.clone(), rows, p)
}

/// Output of [`solve_modulus`].
///
/// `value` is the objective of `rho_star`, which is feasible up to rounding;
/// `dual_value` is a lower bound on the true modulus, so the true modulus lies
/// in `[dual_value, value]`.
#[derive(Clone, Debug)]
pub struct ModulusResult {
    pub value: f64,
    pub dual_value: f64,
    pub duality_gap: f64,
    pub rho_star: ScalarField,
    /// One multiplier per curve.
    pub multipliers: Vec<f64>,
    pub max_constraint_violation: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ModulusResult {
    pub fn summary(&self) -> ModulusSummary {
        ModulusSummary {
            value: self.value,
            dual_value: self.dual_value,
            gap: self.duality_gap,
            violation: self.max_constraint_violation,
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// Scalar part of a [`ModulusResult`], as written to reports.
#[derive(Clone, Debug, Serialize)]
pub struct ModulusSummary {
    pub value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub violation: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Modulus of the segments of length `seg_length` parallel to a fixed
/// direction whose lines pass through a set of cross-sectional measure
/// `measure_e`: `measure_e / seg_length^p`.
pub fn analytic_parallel_segments(measure_e: f64, seg_length: f64, p: f64) -> Result<f64> {
    if !(seg_length > 0.0) {
        return argument(format!("segment length must be positive, got {seg_length}"));
    }
    if !(measure_e >= 0.0) {
        return argument(format!("measure must be nonnegative, got {measure_e}"));
    }
    if !(p >= 1.0) {
        return argument(format!("exponent p must be >= 1, got {p}"));
    }
    Ok(measure_e / seg_length.powf(p))
}

/// Upper bound `||h||_p^p / eps^p` for the modulus of any family whose curves
/// all satisfy `int_gamma h ds >= eps`: `h / eps` is admissible for it.
pub fn chebyshev_modulus_bound(h: &ScalarField, eps: f64, p: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return argument(format!("eps must be positive, got {eps}"));
    }
    if !h.is_nonnegative() {
        return argument("h must be nonnegative");
    }
    Ok(h.lp_norm(p)?.powf(p) / eps.powf(p))
}

/// One selected index of a Fuglede subsequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleEntry {
    /// `k`, starting at 1.
    pub k: usize,
    /// 1-based index `n_k` into the norm sequence.
    pub index: usize,
    pub norm: f64,
    /// Modulus bound of `{gamma : int_gamma |g_{n_k} - g| >= eps}`.
    pub modulus_bound: f64,
}

/// Select `n_1 < n_2 < ...` with `norms[n_k] <= 4^-k` (1-based indices) and
/// bound each exceptional family by `norms[n_k]^p / eps^p`.
///
/// A finite sequence ends the schedule once its tail keeps decreasing below
/// the last selected norm without reaching the next threshold. It is an
/// error when nothing falls below `4^-1`, or when the tail after a selection
/// never comes back below the selected norm.
pub fn fuglede_schedule(norms: &[f64], p: f64, eps: f64) -> Result<Vec<ScheduleEntry>> {
    if !(p >= 1.0) {
        return argument(format!("exponent p must be >= 1, got {p}"));
    }
    if !(eps > 0.0) {
        return argument(format!("eps must be positive, got {eps}"));
    }
    if norms.iter().any(|v| !(*v >= 0.0)) {
        return argument("norms must be nonnegative");
    }
    let mut out: Vec<ScheduleEntry> = Vec::new();
    let mut next = 0usize;
    let mut k = 1;
    while next < norms.len() {
        let threshold = 0.25f64.powi(k as i32);
        match (next..norms.len()).find(|&n| norms[n] <= threshold) {
            Some(n) => {
                out.push(ScheduleEntry {
                    k,
                    index: n + 1,
                    norm: norms[n],
                    modulus_bound: norms[n].powf(p) / eps.powf(p),
                });
                next = n + 1;
                k += 1;
            }
            None => {
                let Some(last) = out.last() else {
                    return Err(Error::Schedule("no norm falls below 4^-1".to_string()));
                };
                let tail_min = norms[next..].iter().cloned().fold(f64::INFINITY, f64::min);
                if tail_min > last.norm {
                    return Err(Error::Schedule(format!(
                        "after index {} the norms stay above {} and never reach 4^-{k}",
                        last.index, last.norm
                    )));
                }
                break;
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Schedule("empty norm sequence".to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{curve_integral, Polyline};

    #[test]
    fn unit_segment_on_four_by_four() {
        let g = Grid::unit(2, 4).unwrap();
        let fam = CurveFamily::new(
            "one",
            vec![Polyline::segment(&[0.0, 0.3], &[1.0, 0.3]).unwrap()],
        )
        .unwrap();
        let prob = assemble_problem(&fam, &g, 2.0).unwrap();
        assert_eq!(prob.n_constraints(), 1);
        assert!((prob.rows()[0].sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rows_agree_with_curve_integrals() {
        let g = Grid::unit(2, 9).unwrap();
        let rho = ScalarField::from_fn(g.clone(), |x| (3.0 * x[0]).sin().abs() + x[1]).unwrap();
        let c = Polyline::new(vec![vec![0.05, 0.1], vec![0.93, 0.41], vec![0.2, 0.88]]).unwrap();
        let fam = CurveFamily::new("c", vec![c.clone()]).unwrap();
        let prob = assemble_problem(&fam, &g, 2.0).unwrap();
        let via_row = prob.rows()[0].dot(rho.values());
        assert!((via_row - curve_integral(&rho, &c).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn analytic_formula() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert_eq!(analytic_parallel_segments(1.0, 1.0, p).unwrap(), 1.0);
            assert_eq!(analytic_parallel_segments(0.0, 1.0, p).unwrap(), 0.0);
        }
        assert_eq!(analytic_parallel_segments(0.5, 2.0, 2.0).unwrap(), 0.125);
        assert!(analytic_parallel_segments(1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn chebyshev_zero_and_indicator() {
        let g = Grid::unit(2, 10).unwrap();
        let zero = ScalarField::constant(g.clone(), 0.0).unwrap();
        assert_eq!(chebyshev_modulus_bound(&zero, 0.3, 2.0).unwrap(), 0.0);
        let delta = 0.1;
        let h = ScalarField::from_fn(g, |x| {
            if x[0] < 0.2 && x[1] < 0.2 {
                1.0 / delta
            } else {
                0.0
            }
        })
        .unwrap();
        // |E| = 0.04
        let b = chebyshev_modulus_bound(&h, 1.0, 2.0).unwrap();
        assert!((b - 0.04 / (delta * delta)).abs() < 1e-12);
        assert!(chebyshev_modulus_bound(&h, 0.0, 2.0).is_err());
    }

    #[test]
    fn fuglede_geometric_sequence() {
        let norms: Vec<f64> = (1..=20).map(|n| 0.5f64.powi(n)).collect();
        let s = fuglede_schedule(&norms, 2.0, 0.5).unwrap();
        let idx: Vec<usize> = s.iter().map(|e| e.index).collect();
        assert_eq!(idx, vec![2, 4, 6, 8, 10, 12, 14, 16, 18, 20]);
        for (e, k) in s.iter().zip(1..) {
            let expect = 0.25f64.powi(2 * k) / 0.25;
            assert!((e.modulus_bound - expect).abs() <= 1e-15 * expect);
        }
        assert!(s
            .windows(2)
            .all(|w| w[1].modulus_bound < w[0].modulus_bound));
    }

    #[test]
    fn fuglede_failures() {
        assert!(matches!(
            fuglede_schedule(&[1.0; 10], 2.0, 0.5),
            Err(Error::Schedule(_))
        ));
        let dip = [0.5, 0.2, 0.6, 0.7, 0.8];
        match fuglede_schedule(&dip, 2.0, 0.5) {
            Err(Error::Schedule(msg)) => assert!(msg.contains("4^-2"), "{msg}"),
            other => panic!("expected schedule error, got {other:?}"),
        }
        // a decaying tail that simply ends is not an error
        let norms: Vec<f64> = (1..=21).map(|n| 0.5f64.powi(n)).collect();
        assert_eq!(fuglede_schedule(&norms, 2.0, 0.5).unwrap().len(), 10);
        match fuglede_schedule(&[], 2.0, 0.5) {
            Err(Error::Schedule(_)) => {}
            other => panic!("expected schedule error, got {other:?}"),
        }
    }
}
