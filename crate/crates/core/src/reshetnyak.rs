//! The Reshetnyak side: scalarizations over the dual ball, the minimal
//! upper-bound function `g*`, the R-norm and absolute continuity along curves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{argument, Result};
use crate::geometry::{curve_integral, Polyline, ScalarField};
use crate::report::Check;
use crate::sobolev::{finite_diff_gradient, gradient_length, GradientField};
use crate::vectorvalues::{
    dual_ball_extreme_points, lp_norm, value_norm, DualFunctional, NormTag, VectorField,
    MAX_SIGN_VECTOR_DIM,
};

/// Functionals drawn when no exact recipe applies.
pub const DEFAULT_SAMPLES: usize = 256;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 1000;

/// How the supremum over the dual ball was realized.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DualSet {
    /// Maximum over the extreme points of the dual ball.
    ExtremePoints { count: usize },
    /// Largest singular value of the Jacobian.
    Spectral,
    /// Maximum over seeded random functionals: a lower bound only.
    Sampled {
        count: usize,
        seed: u64,
        /// Set when an exact mode was requested but is intractable.
        fallback: bool,
    },
}

impl DualSet {
    pub fn is_exact(&self) -> bool {
        !matches!(self, DualSet::Sampled { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            DualSet::ExtremePoints { .. } => "extreme_points",
            DualSet::Spectral => "spectral",
            DualSet::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperBoundField {
    pub gstar: ScalarField,
    pub dual_set: DualSet,
}

/// `g*(x) = sup_{||v*|| <= 1} |grad <v*, f>(x)|`, exact for every tag except
/// L1 with more than 16 value components, which falls back to sampling.
pub fn upper_gradient_star(f: &VectorField) -> Result<UpperBoundField> {
    let grad = finite_diff_gradient(f)?;
    let m = f.dim_m();
    match f.norm() {
        NormTag::L1 if m > MAX_SIGN_VECTOR_DIM => sampled(f, &grad, DEFAULT_SAMPLES, 0, true),
        NormTag::Linf | NormTag::L1 => {
            let set = dual_ball_extreme_points(f.norm(), m)?;
            let gstar = sup_over(&grad, &set);
            Ok(UpperBoundField {
                gstar,
                dual_set: DualSet::ExtremePoints { count: set.len() },
            })
        }
        NormTag::L2 => {
            let n = grad.components().len();
            let vals = (0..grad.grid().n_cells())
                .into_par_iter()
                .map(|c| spectral_norm(&grad.jacobian(c), m, n))
                .collect();
            Ok(UpperBoundField {
                gstar: ScalarField::new(grad.grid().clone(), vals)?,
                dual_set: DualSet::Spectral,
            })
        }
    }
}

/// `g*` over `count` seeded random functionals of dual norm one. A prefix of
/// a larger draw with the same seed, so raising `count` never lowers `g*`.
pub fn upper_gradient_star_sampled(
    f: &VectorField,
    count: usize,
    seed: u64,
) -> Result<UpperBoundField> {
    let grad = finite_diff_gradient(f)?;
    sampled(f, &grad, count, seed, false)
}

/// The functionals used by sampled mode.
pub fn sample_functionals(tag: NormTag, m: usize, count: usize, seed: u64) -> Vec<DualFunctional> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let coeffs: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Ok(v) = DualFunctional::normalized(coeffs, tag) {
            out.push(v);
        }
    }
    out
}

fn sampled(
    f: &VectorField,
    grad: &GradientField,
    count: usize,
    seed: u64,
    fallback: bool,
) -> Result<UpperBoundField> {
    if count == 0 {
        return argument("sampled mode needs at least one functional");
    }
    let set = sample_functionals(f.norm(), f.dim_m(), count, seed);
    Ok(UpperBoundField {
        gstar: sup_over(grad, &set),
        dual_set: DualSet::Sampled {
            count,
            seed,
            fallback,
        },
    })
}

/// Pointwise `max_v |J^T v|` over a finite set of functionals.
pub fn sup_over(grad: &GradientField, set: &[DualFunctional]) -> ScalarField {
    let n = grad.components().len();
    let m = grad.dim_m();
    let vals = (0..grad.grid().n_cells())
        .into_par_iter()
        .map(|c| {
            let jac = grad.jacobian(c);
            set.iter()
                .map(|v| {
                    (0..n)
                        .map(|i| {
                            let d: f64 = (0..m).map(|k| v.coeffs()[k] * jac[k * n + i]).sum();
                            d * d
                        })
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    ScalarField::new(grad.grid().clone(), vals).expect("finite by construction")
}

/// Largest singular value of the row-major `m x n` matrix by power iteration
/// on `J^T J`, started at the column of largest norm.
fn spectral_norm(jac: &[f64], m: usize, n: usize) -> f64 {
    let mut ata = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            ata[i * n + j] = (0..m).map(|k| jac[k * n + i] * jac[k * n + j]).sum();
        }
    }
    let start = (0..n)
        .max_by(|&a, &b| ata[a * n + a].total_cmp(&ata[b * n + b]))
        .unwrap_or(0);
    let mut v = vec![0.0; n];
    v[start] = 1.0;
    let mut lambda = ata[start * n + start];
    if lambda == 0.0 {
        return 0.0;
    }
    let mut w = vec![0.0; n];
    for _ in 0..POWER_MAX_ITER {
        for i in 0..n {
            w[i] = (0..n).map(|j| ata[i * n + j] * v[j]).sum();
        }
        let len = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len == 0.0 {
            break;
        }
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / len);
        let rq: f64 = (0..n)
            .map(|i| v[i] * (0..n).map(|j| ata[i * n + j] * v[j]).sum::<f64>())
            .sum();
        let done = (rq - lambda).abs() <= POWER_TOL * rq.abs();
        lambda = lambda.max(rq);
        if done {
            break;
        }
    }
    lambda.sqrt()
}

/// `||f||_p + ||g*||_p`.
pub fn r_norm(f: &VectorField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return argument(format!("exponent p must be >= 1, got {p}"));
    }
    let ub = upper_gradient_star(f)?;
    Ok(lp_norm(f, p)? + ub.gstar.lp_norm(p)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct NormEquivalence {
    pub p: f64,
    pub lp: f64,
    pub w_norm: f64,
    pub r_norm: f64,
    /// `w / r`.
    pub ratio: f64,
    /// `w + tol - r`.
    pub lower_margin: f64,
    /// `sqrt(N) r + tol - w`.
    pub sqrt_n_margin: f64,
    pub sqrt_n: f64,
    pub dual_set: DualSet,
    /// Only `r <= w` is checked because `g*` was sampled.
    pub one_sided: bool,
    pub tol: f64,
    pub pass: bool,
}

impl NormEquivalence {
    pub fn checks(&self) -> Vec<Check> {
        let mut out = vec![Check::upper(
            "r_norm <= w_norm",
            self.r_norm,
            self.w_norm + self.tol,
        )];
        if !self.one_sided {
            out.push(Check::upper(
                "w_norm <= sqrt(N) r_norm",
                self.w_norm,
                self.sqrt_n * self.r_norm + self.tol,
            ));
        }
        out
    }
}

/// Compare `||f||_R <= ||f||_W <= sqrt(N) ||f||_R` with additive slack `tol`.
pub fn norm_equivalence_check(f: &VectorField, p: f64, tol: f64) -> Result<NormEquivalence> {
    if !(p >= 1.0) {
        return argument(format!("exponent p must be >= 1, got {p}"));
    }
    if !(tol >= 0.0) {
        return argument(format!("tolerance must be nonnegative, got {tol}"));
    }
    let grad = finite_diff_gradient(f)?;
    let ub = upper_gradient_star(f)?;
    let lp = lp_norm(f, p)?;
    let w = lp + gradient_length(&grad).lp_norm(p)?;
    let r = lp + ub.gstar.lp_norm(p)?;
    let sqrt_n = (f.grid().dim() as f64).sqrt();
    let lower_margin = w + tol - r;
    let sqrt_n_margin = sqrt_n * r + tol - w;
    let one_sided = !ub.dual_set.is_exact();
    let pass = lower_margin >= 0.0 && (one_sided || sqrt_n_margin >= 0.0);
    Ok(NormEquivalence {
        p,
        lp,
        w_norm: w,
        r_norm: r,
        ratio: if r > 0.0 { w / r } else { 1.0 },
        lower_margin,
        sqrt_n_margin,
        sqrt_n,
        dual_set: ub.dual_set,
        one_sided,
        tol,
        pass,
    })
}

/// Nodes per curve for [`ac_bound_check`]; every pair `s <= t` is tested.
pub const AC_NODES: usize = 32;

#[derive(Clone, Debug, Serialize)]
pub struct AcBoundReport {
    pub pairs: usize,
    /// `max (||f(c(t)) - f(c(s))|| - int_{c|[s,t]} g)`.
    pub max_excess: f64,
    /// `(s, t)` attaining `max_excess`.
    pub worst_pair: (f64, f64),
    pub tol: f64,
    pub pass: bool,
}

impl AcBoundReport {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::upper("ac bound excess", self.max_excess, self.tol).with_values(vec![
                self.max_excess,
                self.worst_pair.0,
                self.worst_pair.1,
            ]),
        ]
    }
}

/// Verify `||f(c(t)) - f(c(s))|| <= int_{c|[s,t]} g + tol` on a lattice of
/// arclength nodes, with `f` interpolated multilinearly and `g` cell-constant.
pub fn ac_bound_check(
    f: &VectorField,
    g: &ScalarField,
    c: &Polyline,
    tol: f64,
) -> Result<AcBoundReport> {
    if g.grid() != f.grid() {
        return argument("g must live on the grid of f");
    }
    if !g.is_nonnegative() {
        return argument("upper bound g must be nonnegative");
    }
    f.grid().check_curve(c)?;
    let len = c.length();
    let nodes: Vec<f64> = (0..=AC_NODES)
        .map(|k| len * k as f64 / AC_NODES as f64)
        .collect();
    let values = nodes
        .iter()
        .map(|&t| f.sample(&c.point_at(t)))
        .collect::<Result<Vec<_>>>()?;
    let mut cumulative = vec![0.0; nodes.len()];
    for k in 1..nodes.len() {
        cumulative[k] =
            cumulative[k - 1] + curve_integral(g, &c.restrict(nodes[k - 1], nodes[k])?)?;
    }
    let mut max_excess = f64::NEG_INFINITY;
    let mut worst_pair = (0.0, 0.0);
    let mut pairs = 0;
    for a in 0..nodes.len() {
        for b in a..nodes.len() {
            let diff: Vec<f64> = values[b]
                .iter()
                .zip(&values[a])
                .map(|(x, y)| x - y)
                .collect();
            let excess = value_norm(&diff, f.norm()) - (cumulative[b] - cumulative[a]);
            if excess > max_excess {
                max_excess = excess;
                worst_pair = (nodes[a], nodes[b]);
            }
            pairs += 1;
        }
    }
    Ok(AcBoundReport {
        pairs,
        max_excess,
        worst_pair,
        tol,
        pass: max_excess <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Grid;
    use crate::sobolev::w_norm;

    fn identity(tag: NormTag) -> VectorField {
        VectorField::from_fn(Grid::unit(2, 16).unwrap(), 2, tag, |x| x.to_vec()).unwrap()
    }

    #[test]
    fn identity_gstar_in_every_exact_mode() {
        // For L1 values the sign vectors give |(1, 1)| = sqrt(2).
        for (tag, expect) in [
            (NormTag::Linf, 1.0),
            (NormTag::L2, 1.0),
            (NormTag::L1, 2f64.sqrt()),
        ] {
            let ub = upper_gradient_star(&identity(tag)).unwrap();
            assert!(ub.dual_set.is_exact());
            assert!(
                ub.gstar.values().iter().all(|v| (v - expect).abs() < 1e-12),
                "{tag:?}"
            );
        }
    }

    #[test]
    fn spectral_norm_matches_closed_form() {
        // [[3, 0], [4, 5]] has singular values sqrt(45) and sqrt(5).
        let s = spectral_norm(&[3.0, 0.0, 4.0, 5.0], 2, 2);
        assert!((s - 45f64.sqrt()).abs() < 1e-9);
        assert_eq!(spectral_norm(&[0.0; 6], 3, 2), 0.0);
        let row = spectral_norm(&[1.0, 2.0, 2.0], 1, 3);
        assert!((row - 3.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_r_norm_equals_w_norm() {
        let f = VectorField::from_fn(Grid::unit(2, 20).unwrap(), 1, NormTag::L2, |x| {
            vec![(3.0 * x[0]).sin() * x[1]]
        })
        .unwrap();
        for p in [1.0, 2.0] {
            let (r, w) = (r_norm(&f, p).unwrap(), w_norm(&f, p).unwrap());
            assert!((r - w).abs() <= 1e-9 * (1.0 + w));
        }
        assert!(r_norm(&f, 0.5).is_err());
    }

    #[test]
    fn identity_linf_strict_gap() {
        let rep = norm_equivalence_check(&identity(NormTag::Linf), 2.0, 1e-9).unwrap();
        assert!(rep.pass);
        assert!((rep.r_norm - rep.lp - 1.0).abs() < 1e-12);
        assert!((rep.w_norm - rep.lp - 2f64.sqrt()).abs() < 1e-12);
        assert!(rep.ratio > 1.0 && rep.ratio < 2f64.sqrt());
    }

    #[test]
    fn wide_l1_falls_back_to_sampling() {
        let f = VectorField::from_fn(Grid::unit(1, 8).unwrap(), 17, NormTag::L1, |x| {
            (0..17).map(|k| x[0] * k as f64).collect()
        })
        .unwrap();
        let ub = upper_gradient_star(&f).unwrap();
        assert!(matches!(
            ub.dual_set,
            DualSet::Sampled { fallback: true, .. }
        ));
        let rep = norm_equivalence_check(&f, 1.0, 1e-9).unwrap();
        assert!(rep.one_sided && rep.checks().len() == 1);
    }

    #[test]
    fn sampled_prefix_is_monotone() {
        let f = VectorField::from_fn(Grid::unit(2, 8).unwrap(), 3, NormTag::L2, |x| {
            vec![x[0] * x[1], x[0].sin(), x[1] * x[1]]
        })
        .unwrap();
        let small = upper_gradient_star_sampled(&f, 10, 7).unwrap();
        let large = upper_gradient_star_sampled(&f, 40, 7).unwrap();
        let exact = upper_gradient_star(&f).unwrap();
        for ((s, l), e) in small
            .gstar
            .values()
            .iter()
            .zip(large.gstar.values())
            .zip(exact.gstar.values())
        {
            assert!(s <= l && *l <= e * (1.0 + 1e-9));
        }
    }

    #[test]
    fn ac_bound_lipschitz_and_jump() {
        let g = Grid::unit(2, 32).unwrap();
        let f =
            VectorField::from_fn(g.clone(), 2, NormTag::Linf, |x| vec![x[0], 0.5 * x[1]]).unwrap();
        let lip = ScalarField::constant(g.clone(), f.interpolant_lipschitz_bound()).unwrap();
        let c = Polyline::new(vec![vec![0.1, 0.1], vec![0.9, 0.3], vec![0.2, 0.95]]).unwrap();
        assert!(ac_bound_check(&f, &lip, &c, 1e-12).unwrap().pass);

        let jump = VectorField::from_fn(g.clone(), 1, NormTag::L2, |x| {
            vec![if x[0] < 0.5 { 0.0 } else { 1.0 }]
        })
        .unwrap();
        let one = ScalarField::constant(g, 1.0).unwrap();
        let across = Polyline::segment(&[0.2, 0.5], &[0.8, 0.5]).unwrap();
        let rep = ac_bound_check(&jump, &one, &across, 1e-6).unwrap();
        assert!(!rep.pass);
        assert!(rep.worst_pair.0 < 0.3 + 1e-12 && rep.worst_pair.1 > 0.3 - 1e-12);
    }
}
