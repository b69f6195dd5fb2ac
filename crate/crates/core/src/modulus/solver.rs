//! Primal-dual interior-point method for the modulus program.
//!
//! The objective is scaled by `1 / cell_volume` internally. Only cells that
//! some curve traverses carry a variable; all other cells are zero in any
//! optimal density. Each iteration solves the Newton system through its
//! `m x m` Schur complement (one row per curve) with a Mehrotra
//! predictor-corrector step.
//!
//! Termination is decided by an explicit certificate, independent of the
//! interior-point bookkeeping: the iterate `rho` is rescaled to be exactly
//! admissible (upper bound), and the multipliers `y^+` are plugged into the
//! closed-form Lagrange dual (lower bound).

use nalgebra::{DMatrix, DVector};

use super::{ModulusProblem, ModulusResult};
use crate::error::{argument, Result};
use crate::geometry::ScalarField;

/// Tolerance and iteration cap for [`solve_modulus`].
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Relative duality-gap target: stop once `gap <= tol * (1 + value)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

const STEP_TO_BOUNDARY: f64 = 0.995;

/// Solve the modulus program to relative duality gap `tol`.
///
/// Never fails on a well-formed problem: large densities are always
/// admissible. If the gap target is not reached within `max_iter`
/// iterations the best certified pair is returned with `converged = false`.
pub fn solve_modulus(prob: &ModulusProblem, tol: f64, max_iter: usize) -> Result<ModulusResult> {
    if !(tol > 0.0) {
        return argument(format!("tolerance must be positive, got {tol}"));
    }
    let grid = prob.grid();
    let n_cells = grid.n_cells();
    let w = grid.cell_volume();
    let p = prob.exponent();

    if prob.rows().is_empty() {
        return Ok(ModulusResult {
            value: 0.0,
            dual_value: 0.0,
            duality_gap: 0.0,
            rho_star: ScalarField::constant(grid.clone(), 0.0)?,
            multipliers: Vec::new(),
            max_constraint_violation: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let sys = Compressed::new(prob);
    let n = sys.cells.len();
    let m = sys.rows.len();

    // interior start with A rho >= 2
    let min_row: f64 = sys
        .rows
        .iter()
        .map(|r| r.iter().map(|&(_, a)| a).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let beta = 2.0 / min_row;
    let mut rho = vec![beta; n];
    let mut z: Vec<f64> = sys.apply(&rho).into_iter().map(|v| v - 1.0).collect();
    let scale = if p > 1.0 { p * beta.powf(p - 1.0) } else { 1.0 };
    let mut y = vec![scale; m];
    let mut u = vec![scale; n];

    let mut best: Option<Certificate> = None;
    let mut iterations = 0;
    let mut converged = false;

    for it in 0..=max_iter {
        iterations = it;
        let cert = certify(&sys, p, &rho, &y);
        let done = cert.gap(w) <= tol * (1.0 + cert.upper * w);
        if best.as_ref().map_or(true, |b| cert.gap(w) < b.gap(w)) {
            best = Some(cert);
        }
        if done {
            converged = true;
            break;
        }
        if it == max_iter {
            break;
        }

        let grad: Vec<f64> = rho.iter().map(|&r| objective_grad(p, r)).collect();
        let hess: Vec<f64> = rho.iter().map(|&r| objective_hess(p, r)).collect();
        let aty = sys.apply_t(&y);
        let r_d: Vec<f64> = (0..n).map(|c| grad[c] - aty[c] - u[c]).collect();
        let arho = sys.apply(&rho);
        let r_p: Vec<f64> = (0..m).map(|j| arho[j] - z[j] - 1.0).collect();
        let mu = (dot(&rho, &u) + dot(&z, &y)) / (n + m) as f64;

        let diag: Vec<f64> = (0..n).map(|c| hess[c] + u[c] / rho[c]).collect();
        let schur = sys.schur(&diag, &z, &y);
        let chol = factor(schur);

        let newton = |r_cu: &[f64], r_cz: &[f64]| -> Step {
            let b1: Vec<f64> = (0..n).map(|c| -r_d[c] + r_cu[c] / rho[c]).collect();
            let db1: Vec<f64> = (0..n).map(|c| b1[c] / diag[c]).collect();
            let adb1 = sys.apply(&db1);
            let rhs = DVector::from_fn(m, |j, _| -r_p[j] - adb1[j] + r_cz[j] / y[j]);
            let dy = chol.solve(&rhs);
            let dy: Vec<f64> = dy.iter().cloned().collect();
            let atdy = sys.apply_t(&dy);
            let drho: Vec<f64> = (0..n).map(|c| (b1[c] + atdy[c]) / diag[c]).collect();
            let du: Vec<f64> = (0..n)
                .map(|c| (r_cu[c] - u[c] * drho[c]) / rho[c])
                .collect();
            let dz: Vec<f64> = (0..m).map(|j| (r_cz[j] - z[j] * dy[j]) / y[j]).collect();
            Step { drho, du, dz, dy }
        };

        // predictor
        let r_cu: Vec<f64> = (0..n).map(|c| -rho[c] * u[c]).collect();
        let r_cz: Vec<f64> = (0..m).map(|j| -z[j] * y[j]).collect();
        let aff = newton(&r_cu, &r_cz);
        let a_aff = aff.max_step(&rho, &u, &z, &y);
        let mu_aff = ((0..n)
            .map(|c| (rho[c] + a_aff * aff.drho[c]) * (u[c] + a_aff * aff.du[c]))
            .sum::<f64>()
            + (0..m)
                .map(|j| (z[j] + a_aff * aff.dz[j]) * (y[j] + a_aff * aff.dy[j]))
                .sum::<f64>())
            / (n + m) as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let tau = sigma * mu;
        let r_cu: Vec<f64> = (0..n)
            .map(|c| tau - rho[c] * u[c] - aff.drho[c] * aff.du[c])
            .collect();
        let r_cz: Vec<f64> = (0..m)
            .map(|j| tau - z[j] * y[j] - aff.dz[j] * aff.dy[j])
            .collect();
        let step = newton(&r_cu, &r_cz);
        let alpha = (STEP_TO_BOUNDARY * step.max_step(&rho, &u, &z, &y)).min(1.0);

        for c in 0..n {
            rho[c] += alpha * step.drho[c];
            u[c] += alpha * step.du[c];
        }
        for j in 0..m {
            z[j] += alpha * step.dz[j];
            y[j] += alpha * step.dy[j];
        }
    }

    let cert = best.expect("at least one certificate is computed");
    let mut rho_star = vec![0.0; n_cells];
    for (local, &cell) in sys.cells.iter().enumerate() {
        rho_star[cell] = cert.rho[local];
    }
    let value = prob.objective(&rho_star);
    let violation = prob.max_violation(&rho_star);
    let dual_value = cert.lower * w;
    Ok(ModulusResult {
        value,
        dual_value,
        duality_gap: value - dual_value,
        rho_star: ScalarField::new(grid.clone(), rho_star)?,
        multipliers: cert.multipliers.iter().map(|l| l * w).collect(),
        max_constraint_violation: violation,
        iterations,
        converged,
    })
}

fn objective_grad(p: f64, r: f64) -> f64 {
    if p == 1.0 {
        1.0
    } else {
        p * r.powf(p - 1.0)
    }
}

fn objective_hess(p: f64, r: f64) -> f64 {
    if p == 1.0 {
        0.0
    } else if p == 2.0 {
        2.0
    } else {
        p * (p - 1.0) * r.powf(p - 2.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Constraint matrix restricted to the traversed cells.
struct Compressed {
    /// Global index of each local column.
    cells: Vec<usize>,
    /// Per row: `(local column, entry)`.
    rows: Vec<Vec<(usize, f64)>>,
    /// Per local column: `(row, entry)`.
    cols: Vec<Vec<(usize, f64)>>,
}

impl Compressed {
    fn new(prob: &ModulusProblem) -> Self {
        let mut local = vec![usize::MAX; prob.grid().n_cells()];
        let mut cells = Vec::new();
        let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut rows = Vec::with_capacity(prob.rows().len());
        for (j, r) in prob.rows().iter().enumerate() {
            let mut row = Vec::with_capacity(r.nnz());
            for (cell, a) in r.iter() {
                if a == 0.0 {
                    continue;
                }
                if local[cell] == usize::MAX {
                    local[cell] = cells.len();
                    cells.push(cell);
                    cols.push(Vec::new());
                }
                row.push((local[cell], a));
                cols[local[cell]].push((j, a));
            }
            rows.push(row);
        }
        Compressed { cells, rows, cols }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(c, a)| a * x[c]).sum())
            .collect()
    }

    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        self.cols
            .iter()
            .map(|col| col.iter().map(|&(j, a)| a * y[j]).sum())
            .collect()
    }

    /// `A diag(1/d) A^T + diag(z / y)`.
    fn schur(&self, d: &[f64], z: &[f64], y: &[f64]) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut k = DMatrix::<f64>::zeros(m, m);
        for (c, col) in self.cols.iter().enumerate() {
            let inv = 1.0 / d[c];
            for &(j, a) in col {
                for &(l, b) in col {
                    k[(j, l)] += a * b * inv;
                }
            }
        }
        for j in 0..m {
            k[(j, j)] += z[j] / y[j];
        }
        k
    }
}

/// Cholesky factor, with diagonal regularization added until it succeeds.
fn factor(k: DMatrix<f64>) -> nalgebra::Cholesky<f64, nalgebra::Dyn> {
    let scale = (0..k.nrows())
        .map(|j| k[(j, j)].abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut delta = 0.0;
    loop {
        let mut kk = k.clone();
        for j in 0..kk.nrows() {
            kk[(j, j)] += delta;
        }
        if let Some(ch) = kk.cholesky() {
            return ch;
        }
        delta = if delta == 0.0 {
            1e-14 * scale
        } else {
            delta * 10.0
        };
    }
}

struct Step {
    drho: Vec<f64>,
    du: Vec<f64>,
    dz: Vec<f64>,
    dy: Vec<f64>,
}

impl Step {
    /// Largest `alpha <= 1` keeping every variable nonnegative.
    fn max_step(&self, rho: &[f64], u: &[f64], z: &[f64], y: &[f64]) -> f64 {
        let mut a: f64 = 1.0;
        for (x, dx) in [
            (rho, &self.drho),
            (u, &self.du),
            (z, &self.dz),
            (y, &self.dy),
        ] {
            for (xi, di) in x.iter().zip(dx.iter()) {
                if *di < 0.0 {
                    a = a.min(-xi / di);
                }
            }
        }
        a
    }
}

/// Certified bracket in scaled units (objective divided by the cell volume).
struct Certificate {
    /// Objective of `rho` (admissible).
    upper: f64,
    /// Lagrange dual value at `multipliers`.
    lower: f64,
    rho: Vec<f64>,
    multipliers: Vec<f64>,
}

impl Certificate {
    /// Gap in unscaled units.
    fn gap(&self, w: f64) -> f64 {
        (self.upper - self.lower) * w
    }
}

fn certify(sys: &Compressed, p: f64, rho: &[f64], y: &[f64]) -> Certificate {
    let arho = sys.apply(rho);
    let smin = arho.iter().cloned().fold(f64::INFINITY, f64::min);
    let rho_adm: Vec<f64> = rho.iter().map(|r| r / smin).collect();
    let upper: f64 = rho_adm.iter().map(|r| r.powf(p)).sum();

    let lambda: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
    let s = sys.apply_t(&lambda);
    let sum_l: f64 = lambda.iter().sum();
    let (lower, multipliers) = if p == 1.0 {
        // dual of the LP: max sum(lambda) subject to A^T lambda <= 1
        let t = s.iter().cloned().fold(0.0, f64::max).max(1.0);
        (sum_l / t, lambda.iter().map(|l| l / t).collect())
    } else {
        // inf over rho >= 0 of rho^p - s rho, attained at (s/p)^(1/(p-1))
        let inner: f64 = s
            .iter()
            .map(|&sc| {
                let r = (sc / p).powf(1.0 / (p - 1.0));
                r.powf(p) - sc * r
            })
            .sum();
        (sum_l + inner, lambda)
    };
    Certificate {
        upper,
        lower,
        rho: rho_adm,
        multipliers,
    }
}
