//! The classical Sobolev side: finite-difference gradients of vector fields,
//! a verifier for weak partial derivatives, gradient length, the W-norm and
//! the fundamental theorem of calculus along curves.

use serde::Serialize;

use crate::error::{argument, Result};
use crate::geometry::{Grid, Polyline, ScalarField};
use crate::report::Check;
use crate::vectorvalues::{lp_norm, value_norm, VectorField};

/// Partial derivatives `d f / d x_i`, one vector field per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    components: Vec<VectorField>,
}

impl GradientField {
    pub fn new(components: Vec<VectorField>) -> Result<Self> {
        let Some(first) = components.first() else {
            return argument("a gradient needs at least one component");
        };
        if components.len() != first.grid().dim() {
            return argument("one gradient component per axis is required");
        }
        for c in &components[1..] {
            first.check_compatible(c)?;
        }
        Ok(GradientField { components })
    }

    pub fn components(&self) -> &[VectorField] {
        &self.components
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn dim_m(&self) -> usize {
        self.components[0].dim_m()
    }

    /// `M x N` Jacobian at `cell`, row-major (`jac[m * N + i] = d_i f_m`).
    pub fn jacobian(&self, cell: usize) -> Vec<f64> {
        let n = self.components.len();
        let m = self.dim_m();
        let mut jac = vec![0.0; m * n];
        for (i, comp) in self.components.iter().enumerate() {
            for (k, v) in comp.value(cell).iter().enumerate() {
                jac[k * n + i] = *v;
            }
        }
        jac
    }
}

/// Smooth bump `exp(1 - 1/(1 - |x-c|^2/r^2))` supported in the open ball B(c, r).
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct TestFunction {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl TestFunction {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|x| !x.is_finite()) {
            return argument("test function needs a finite center and positive radius");
        }
        Ok(TestFunction { center, radius })
    }

    fn q(&self, x: &[f64]) -> f64 {
        let r2 = self.radius * self.radius;
        self.center
            .iter()
            .zip(x)
            .map(|(c, xi)| (xi - c) * (xi - c))
            .sum::<f64>()
            / r2
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let q = self.q(x);
        if q >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - q)).exp()
        }
    }

    /// `d phi / d x_axis`.
    pub fn partial(&self, x: &[f64], axis: usize) -> f64 {
        let q = self.q(x);
        if q >= 1.0 {
            return 0.0;
        }
        let phi = (1.0 - 1.0 / (1.0 - q)).exp();
        let dq = 2.0 * (x[axis] - self.center[axis]) / (self.radius * self.radius);
        -phi * dq / ((1.0 - q) * (1.0 - q))
    }

    /// The closed support must avoid the outermost layer of cells.
    pub fn check_interior(&self, grid: &Grid) -> Result<()> {
        if self.center.len() != grid.dim() {
            return argument("test function dimension does not match the grid");
        }
        for k in 0..grid.dim() {
            let lo = grid.box_min()[k] + grid.spacing()[k];
            let hi = grid.box_max()[k] - grid.spacing()[k];
            if self.center[k] - self.radius < lo || self.center[k] + self.radius > hi {
                return argument(format!(
                    "support of bump at {:?} (radius {}) reaches the boundary cells along axis {k}",
                    self.center, self.radius
                ));
            }
        }
        Ok(())
    }
}

/// Central differences inside, second-order one-sided differences in the
/// first and last cell of each axis. Exact for componentwise quadratics.
pub fn finite_diff_gradient(f: &VectorField) -> Result<GradientField> {
    let g = f.grid();
    if let Some(k) = g.resolution().iter().position(|&r| r < 3) {
        return argument(format!(
            "finite differences need resolution >= 3 (axis {k})"
        ));
    }
    let m = f.dim_m();
    let vals = f.values();
    let comps = (0..g.dim())
        .map(|axis| {
            let h = g.spacing()[axis];
            let n = g.resolution()[axis];
            let stride = g.stride(axis);
            let mut out = vec![0.0; vals.len()];
            for cell in 0..g.n_cells() {
                let i = (cell / stride) % n;
                let at = |off: isize, k: usize| {
                    vals[(cell as isize + off * stride as isize) as usize * m + k]
                };
                for k in 0..m {
                    out[cell * m + k] = if i == 0 {
                        (-3.0 * at(0, k) + 4.0 * at(1, k) - at(2, k)) / (2.0 * h)
                    } else if i + 1 == n {
                        (3.0 * at(0, k) - 4.0 * at(-1, k) + at(-2, k)) / (2.0 * h)
                    } else {
                        (at(1, k) - at(-1, k)) / (2.0 * h)
                    };
                }
            }
            VectorField::new(g.clone(), m, out, f.norm())
        })
        .collect::<Result<Vec<_>>>()?;
    GradientField::new(comps)
}

/// `|grad f| = (sum_i ||d_i f||^2)^(1/2)` cell by cell.
pub fn gradient_length(grad: &GradientField) -> ScalarField {
    let g = grad.grid();
    let vals = (0..g.n_cells())
        .map(|c| {
            grad.components
                .iter()
                .map(|comp| value_norm(comp.value(c), comp.norm()).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    ScalarField::new(g.clone(), vals).expect("finite by construction")
}

/// `||f||_p + || |grad f| ||_p` with the finite-difference gradient.
pub fn w_norm(f: &VectorField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return argument(format!("exponent p must be >= 1, got {p}"));
    }
    let grad = finite_diff_gradient(f)?;
    Ok(lp_norm(f, p)? + gradient_length(&grad).lp_norm(p)?)
}

/// Residual of the integration-by-parts identity for one bump.
#[derive(Clone, Debug, Serialize)]
pub struct BumpResidual {
    pub center: Vec<f64>,
    pub radius: f64,
    /// `int d_i phi f`.
    pub lhs: Vec<f64>,
    /// `int phi f_i`.
    pub rhs: Vec<f64>,
    /// `|| lhs + rhs ||`.
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakDerivativeReport {
    pub axis: usize,
    pub tol: f64,
    pub bumps: Vec<BumpResidual>,
    pub pass: bool,
}

impl WeakDerivativeReport {
    pub fn checks(&self) -> Vec<Check> {
        self.bumps
            .iter()
            .enumerate()
            .map(|(k, b)| {
                Check::upper(
                    format!("bump {k} residual"),
                    b.residual,
                    self.tol * (1.0 + b.scale),
                )
            })
            .collect()
    }
}

/// Check `int d_i phi f = - int phi cand` for each bump.
///
/// Both sides are Bochner integrals of cell-constant fields. Along `axis`
/// each cell is integrated with its two face values (exact for `d_i phi`,
/// trapezoidal for `phi`); the other axes use the cell center. The two rules
/// are summation-by-parts partners, so the residual vanishes up to rounding
/// for componentwise-affine `f` with its exact derivative. Boundary cells
/// are skipped.
pub fn weak_derivative_check(
    f: &VectorField,
    cand: &VectorField,
    axis: usize,
    tests: &[TestFunction],
    tol: f64,
) -> Result<WeakDerivativeReport> {
    f.check_compatible(cand)?;
    let g = f.grid();
    if axis >= g.dim() {
        return argument(format!("axis {axis} out of range for a {}-D grid", g.dim()));
    }
    if !(tol > 0.0) {
        return argument(format!("tolerance must be positive, got {tol}"));
    }
    for t in tests {
        t.check_interior(g)?;
    }
    let m = f.dim_m();
    let h = g.spacing()[axis];
    let vol = g.cell_volume();
    let section = vol / h;
    let interior: Vec<usize> = (0..g.n_cells())
        .filter(|&c| !g.is_boundary_cell(c))
        .collect();

    let bumps = tests
        .iter()
        .map(|phi| {
            let mut lhs = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            let mut scale = 0.0;
            for &c in &interior {
                let mut x = g.cell_center(c);
                let xc = x[axis];
                x[axis] = xc - 0.5 * h;
                let lo = phi.eval(&x);
                x[axis] = xc + 0.5 * h;
                let hi = phi.eval(&x);
                if lo == 0.0 && hi == 0.0 {
                    continue;
                }
                let d = (hi - lo) * section;
                let avg = 0.5 * (lo + hi) * vol;
                let (fv, cv) = (f.value(c), cand.value(c));
                for k in 0..m {
                    lhs[k] += d * fv[k];
                    rhs[k] += avg * cv[k];
                }
                scale += d.abs() * value_norm(fv, f.norm()) + avg * value_norm(cv, f.norm());
            }
            let sum: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a + b).collect();
            let residual = value_norm(&sum, f.norm());
            BumpResidual {
                center: phi.center.clone(),
                radius: phi.radius,
                lhs,
                rhs,
                residual,
                scale,
                pass: residual <= tol * (1.0 + scale),
            }
        })
        .collect::<Vec<_>>();
    let pass = bumps.iter().all(|b| b.pass);
    Ok(WeakDerivativeReport {
        axis,
        tol,
        bumps,
        pass,
    })
}

/// Outcome of [`ftc_along_curve_check`].
#[derive(Clone, Debug, Serialize)]
pub struct FtcReport {
    pub pairs: usize,
    /// `max ||f(g(t)) - f(g(s)) - int_s^t (G o g) . g' ||` over the sampled pairs.
    pub max_residual: f64,
    /// Largest `||(G o g) . g'|| - |G o g|` seen at the quadrature nodes; nonpositive when the
    /// chain-rule bound holds.
    pub chain_excess: f64,
    pub tol: f64,
    pub pass: bool,
}

impl FtcReport {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::upper("ftc residual", self.max_residual, self.tol),
            Check::upper("chain-rule excess", self.chain_excess, 1e-12),
        ]
    }
}

/// Nodes per curve at which increments are compared.
const FTC_NODES: usize = 16;

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Compare increments of `f` along `c` with integrals of the directional
/// derivative `(G o c) . c'`, using the multilinear interpolants of `f` and
/// `G`, and check `||(G o c) . c'|| <= |G o c|` at every quadrature node.
pub fn ftc_along_curve_check(
    f: &VectorField,
    grad: &GradientField,
    c: &Polyline,
    tol: f64,
) -> Result<FtcReport> {
    let g = f.grid();
    if grad.grid() != g || grad.dim_m() != f.dim_m() {
        return argument("gradient must live on the grid of f with the same value dimension");
    }
    g.check_curve(c)?;
    let len = c.length();
    let m = f.dim_m();
    let norm = f.norm();

    let nodes: Vec<f64> = (0..=FTC_NODES)
        .map(|k| len * k as f64 / FTC_NODES as f64)
        .collect();
    let mut breaks: Vec<f64> = nodes.clone();
    breaks.extend(c.cumulative_arclength().iter().cloned());
    let step = 0.5 * g.min_spacing();
    let pieces = (len / step).ceil() as usize;
    breaks.extend((0..=pieces).map(|k| len * k as f64 / pieces.max(1) as f64));
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * len.max(1.0));

    // cumulative integral at each break
    let mut cumulative = vec![vec![0.0; m]; breaks.len()];
    let mut chain_excess = f64::NEG_INFINITY;
    let mut x = vec![0.0; g.dim()];
    for b in 1..breaks.len() {
        let (s0, s1) = (breaks[b - 1], breaks[b]);
        let mut acc = cumulative[b - 1].clone();
        if s1 > s0 {
            let tangent = c.tangent_at(0.5 * (s0 + s1));
            for (xi, wi) in GAUSS3 {
                let s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * xi;
                c.point_at_into(s, &mut x);
                let mut dir = vec![0.0; m];
                let mut len_sq = 0.0;
                for (i, comp) in grad.components.iter().enumerate() {
                    let gi = comp.sample(&x)?;
                    len_sq += value_norm(&gi, norm).powi(2);
                    for k in 0..m {
                        dir[k] += gi[k] * tangent[i];
                    }
                }
                let excess = value_norm(&dir, norm) - len_sq.sqrt();
                chain_excess = chain_excess.max(excess / (1.0 + len_sq.sqrt()));
                for k in 0..m {
                    acc[k] += 0.5 * (s1 - s0) * wi * dir[k];
                }
            }
        }
        cumulative[b] = acc;
    }
    if chain_excess == f64::NEG_INFINITY {
        chain_excess = 0.0;
    }

    let node_pos: Vec<usize> = nodes
        .iter()
        .map(|t| {
            breaks
                .iter()
                .position(|b| (b - t).abs() <= 1e-14 * len.max(1.0))
                .expect("nodes are breaks")
        })
        .collect();
    let values: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&t| f.sample(&c.point_at(t)))
        .collect::<Result<_>>()?;

    let mut max_residual: f64 = 0.0;
    let mut pairs = 0;
    for a in 0..nodes.len() {
        for b in a..nodes.len() {
            let diff: Vec<f64> = (0..m)
                .map(|k| {
                    (values[b][k] - values[a][k])
                        - (cumulative[node_pos[b]][k] - cumulative[node_pos[a]][k])
                })
                .collect();
            max_residual = max_residual.max(value_norm(&diff, norm));
            pairs += 1;
        }
    }
    Ok(FtcReport {
        pairs,
        max_residual,
        chain_excess,
        tol,
        pass: max_residual <= tol && chain_excess <= 1e-12,
    })
}
