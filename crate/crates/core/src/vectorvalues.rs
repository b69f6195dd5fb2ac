//! R^M with an l1, l2 or l-infinity norm as a finite-dimensional value space,
//! vector-valued cell fields, their Bochner integrals and L^p norms, and dual
//! functionals.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::geometry::{Grid, ScalarField};

/// Largest value dimension for which the sign-vector extreme points of the
/// l-infinity unit ball are enumerated.
pub const MAX_SIGN_VECTOR_DIM: usize = 16;

/// Norm carried by the value space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormTag {
    L1,
    L2,
    #[serde(rename = "LINF")]
    Linf,
}

impl NormTag {
    pub const ALL: [NormTag; 3] = [NormTag::L1, NormTag::L2, NormTag::Linf];

    /// Tag of the dual norm: l1 and l-infinity are dual to each other.
    pub fn dual(self) -> NormTag {
        match self {
            NormTag::L1 => NormTag::Linf,
            NormTag::L2 => NormTag::L2,
            NormTag::Linf => NormTag::L1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormTag::L1 => "L1",
            NormTag::L2 => "L2",
            NormTag::Linf => "LINF",
        }
    }
}

impl std::str::FromStr for NormTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Ok(NormTag::L1),
            "L2" => Ok(NormTag::L2),
            "LINF" => Ok(NormTag::Linf),
            other => Err(Error::Parse(format!("unknown norm tag {other:?}"))),
        }
    }
}

pub fn value_norm(v: &[f64], n: NormTag) -> f64 {
    match n {
        NormTag::L1 => v.iter().map(|x| x.abs()).sum(),
        NormTag::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormTag::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// Norm of `coeffs` as a functional on `(R^M, n)`.
pub fn dual_norm(coeffs: &[f64], n: NormTag) -> f64 {
    value_norm(coeffs, n.dual())
}

/// A linear functional of dual norm at most one.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFunctional {
    coeffs: Vec<f64>,
}

impl DualFunctional {
    /// Accepts `coeffs` when its dual norm for values tagged `n` is at most `1 + 1e-12`.
    pub fn new(coeffs: Vec<f64>, n: NormTag) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return argument("functional coefficients must be finite and nonempty");
        }
        let d = dual_norm(&coeffs, n);
        if d > 1.0 + 1e-12 {
            return argument(format!(
                "functional has dual norm {d} > 1 for {} values",
                n.name()
            ));
        }
        Ok(DualFunctional { coeffs })
    }

    /// Rescale an arbitrary nonzero vector onto the dual unit sphere.
    pub fn normalized(coeffs: Vec<f64>, n: NormTag) -> Result<Self> {
        let d = dual_norm(&coeffs, n);
        if !(d > 0.0) {
            return argument("cannot normalize the zero functional");
        }
        Ok(DualFunctional {
            coeffs: coeffs.into_iter().map(|c| c / d).collect(),
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn apply(&self, v: &[f64]) -> f64 {
        self.coeffs.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// Extreme points of the dual unit ball for values tagged `n` in R^M.
///
/// `Linf` values give `{±e_i}`, `L1` values give the sign vectors `{±1}^M`
/// (at most [`MAX_SIGN_VECTOR_DIM`] coordinates). The Euclidean ball has a
/// continuum of extreme points and yields an empty list; callers handle it
/// through spectral norms.
pub fn dual_ball_extreme_points(n: NormTag, m: usize) -> Result<Vec<DualFunctional>> {
    if m == 0 {
        return argument("value dimension must be at least 1");
    }
    match n {
        NormTag::Linf => Ok((0..m)
            .flat_map(|i| {
                [1.0, -1.0].into_iter().map(move |s| {
                    let mut c = vec![0.0; m];
                    c[i] = s;
                    DualFunctional { coeffs: c }
                })
            })
            .collect()),
        NormTag::L1 => {
            if m > MAX_SIGN_VECTOR_DIM {
                return Err(Error::Capacity(format!(
                    "2^{m} sign vectors requested; at most {MAX_SIGN_VECTOR_DIM} coordinates are enumerated"
                )));
            }
            Ok((0..1usize << m)
                .map(|bits| DualFunctional {
                    coeffs: (0..m)
                        .map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 })
                        .collect(),
                })
                .collect())
        }
        NormTag::L2 => Ok(Vec::new()),
    }
}

/// Cell-centered field with values in `(R^M, norm)`.
///
/// Values are stored cell-major: `values[cell * M + m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    dim_m: usize,
    values: Vec<f64>,
    norm: NormTag,
}

impl VectorField {
    pub fn new(grid: Grid, dim_m: usize, values: Vec<f64>, norm: NormTag) -> Result<Self> {
        if dim_m == 0 {
            return argument("value dimension must be at least 1");
        }
        if values.len() != grid.n_cells() * dim_m {
            return argument(format!(
                "expected {} entries ({} cells x {dim_m}), got {}",
                grid.n_cells() * dim_m,
                grid.n_cells(),
                values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return argument("vector field entries must be finite");
        }
        Ok(VectorField {
            grid,
            dim_m,
            values,
            norm,
        })
    }

    pub fn zeros(grid: Grid, dim_m: usize, norm: NormTag) -> Result<Self> {
        let n = grid.n_cells() * dim_m;
        Self::new(grid, dim_m, vec![0.0; n], norm)
    }

    /// Sample `f` at cell centers.
    pub fn from_fn(
        grid: Grid,
        dim_m: usize,
        norm: NormTag,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.n_cells() * dim_m);
        for c in 0..grid.n_cells() {
            let v = f(&grid.cell_center(c));
            if v.len() != dim_m {
                return argument(format!(
                    "sampler returned {} values, expected {dim_m}",
                    v.len()
                ));
            }
            values.extend(v);
        }
        Self::new(grid, dim_m, values, norm)
    }

    /// A scalar field viewed as an R^1-valued field.
    pub fn from_scalar(s: &ScalarField, norm: NormTag) -> Self {
        VectorField {
            grid: s.grid().clone(),
            dim_m: 1,
            values: s.values().to_vec(),
            norm,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim_m(&self) -> usize {
        self.dim_m
    }

    pub fn norm(&self) -> NormTag {
        self.norm
    }

    pub fn with_norm(mut self, norm: NormTag) -> Self {
        self.norm = norm;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.dim_m..(cell + 1) * self.dim_m]
    }

    /// Component `m` as a scalar field.
    pub fn component(&self, m: usize) -> ScalarField {
        let vals = (0..self.grid.n_cells())
            .map(|c| self.values[c * self.dim_m + m])
            .collect();
        ScalarField::new(self.grid.clone(), vals).expect("finite by construction")
    }

    /// Pointwise value norms.
    pub fn norm_field(&self) -> ScalarField {
        let vals = (0..self.grid.n_cells())
            .map(|c| value_norm(self.value(c), self.norm))
            .collect();
        ScalarField::new(self.grid.clone(), vals).expect("finite by construction")
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.dim_m,
            self.values.iter().map(|v| v * s).collect(),
            self.norm,
        )
    }

    pub fn add(&self, other: &VectorField) -> Result<Self> {
        self.check_compatible(other)?;
        Self::new(
            self.grid.clone(),
            self.dim_m,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            self.norm,
        )
    }

    pub fn check_compatible(&self, other: &VectorField) -> Result<()> {
        if self.grid != other.grid || self.dim_m != other.dim_m || self.norm != other.norm {
            return argument("fields must share grid, value dimension and norm tag");
        }
        Ok(())
    }

    /// Multilinear interpolation of the cell-center samples at `x`.
    ///
    /// Outside the hull of the cell centers (the half-cell strip along the
    /// box boundary) the outermost interpolation cell is extended linearly,
    /// so componentwise-affine fields are reproduced everywhere in the box.
    pub fn sample(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.grid.contains(x) {
            return Err(Error::Domain(format!(
                "point {x:?} lies outside the grid box"
            )));
        }
        let mut out = vec![0.0; self.dim_m];
        let st = Stencil::at(&self.grid, x);
        st.interpolate(self, &mut out);
        Ok(out)
    }

    /// Derivatives of the multilinear interpolant at `x`, one R^M vector per axis.
    pub fn sample_gradient(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if !self.grid.contains(x) {
            return Err(Error::Domain(format!(
                "point {x:?} lies outside the grid box"
            )));
        }
        let st = Stencil::at(&self.grid, x);
        Ok((0..self.grid.dim())
            .map(|axis| {
                let mut out = vec![0.0; self.dim_m];
                st.derivative(self, axis, &mut out);
                out
            })
            .collect())
    }

    /// Upper bound on the Lipschitz constant of the interpolant, measured
    /// as `sup |grad|` with `|grad|^2 = sum_i ||d_i f||^2`.
    ///
    /// On each interpolation piece `d_i f` is affine in every coordinate, so
    /// its norm peaks at a corner of the piece.
    pub fn interpolant_lipschitz_bound(&self) -> f64 {
        let g = &self.grid;
        let n = g.dim();
        let pieces: Vec<usize> = g
            .resolution()
            .iter()
            .map(|&r| r.saturating_sub(1).max(1))
            .collect();
        let total: usize = pieces.iter().product();
        let mut best: f64 = 0.0;
        let mut base = vec![0usize; n];
        let mut local = vec![0.0; n];
        let mut tmp = vec![0.0; self.dim_m];
        for p in 0..total {
            let mut rem = p;
            for k in (0..n).rev() {
                base[k] = rem % pieces[k];
                rem /= pieces[k];
            }
            let mut max_sq = vec![0.0f64; n];
            for corner in 0..(1usize << n) {
                for k in 0..n {
                    let res = g.resolution()[k];
                    let hi = corner >> k & 1 == 1;
                    local[k] = if res == 1 {
                        0.0
                    } else if hi {
                        if base[k] + 2 == res {
                            1.5
                        } else {
                            1.0
                        }
                    } else if base[k] == 0 {
                        -0.5
                    } else {
                        0.0
                    };
                }
                let st = Stencil {
                    base: base.clone(),
                    local: local.clone(),
                    grid: g,
                };
                for axis in 0..n {
                    st.derivative(self, axis, &mut tmp);
                    let v = value_norm(&tmp, self.norm);
                    max_sq[axis] = max_sq[axis].max(v * v);
                }
            }
            best = best.max(max_sq.iter().sum::<f64>().sqrt());
        }
        best
    }
}

/// Interpolation cell and local coordinates of a point.
struct Stencil<'a> {
    base: Vec<usize>,
    local: Vec<f64>,
    grid: &'a Grid,
}

impl<'a> Stencil<'a> {
    fn at(grid: &'a Grid, x: &[f64]) -> Self {
        let n = grid.dim();
        let mut base = vec![0; n];
        let mut local = vec![0.0; n];
        for k in 0..n {
            let res = grid.resolution()[k];
            if res == 1 {
                continue;
            }
            // position in units of spacing, measured from the first center
            let u = (x[k] - grid.box_min()[k]) / grid.spacing()[k] - 0.5;
            let b = (u.floor().max(0.0) as usize).min(res - 2);
            base[k] = b;
            local[k] = u - b as f64;
        }
        Stencil { base, local, grid }
    }

    fn corners(&self) -> impl Iterator<Item = (usize, Vec<bool>)> + '_ {
        let n = self.grid.dim();
        (0..(1usize << n)).filter_map(move |mask| {
            let mut idx = vec![0; n];
            let mut hi = vec![false; n];
            for k in 0..n {
                let up = mask >> k & 1 == 1;
                if up && self.grid.resolution()[k] == 1 {
                    return None;
                }
                idx[k] = self.base[k] + usize::from(up);
                hi[k] = up;
            }
            Some((self.grid.linear_index(&idx), hi))
        })
    }

    fn interpolate(&self, f: &VectorField, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (cell, hi) in self.corners() {
            let w: f64 = (0..self.grid.dim())
                .filter(|&k| self.grid.resolution()[k] > 1)
                .map(|k| {
                    if hi[k] {
                        self.local[k]
                    } else {
                        1.0 - self.local[k]
                    }
                })
                .product();
            for (o, v) in out.iter_mut().zip(f.value(cell)) {
                *o += w * v;
            }
        }
    }

    fn derivative(&self, f: &VectorField, axis: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        if self.grid.resolution()[axis] == 1 {
            return;
        }
        let h = self.grid.spacing()[axis];
        for (cell, hi) in self.corners() {
            let mut w = if hi[axis] { 1.0 / h } else { -1.0 / h };
            for k in 0..self.grid.dim() {
                if k != axis && self.grid.resolution()[k] > 1 {
                    w *= if hi[k] {
                        self.local[k]
                    } else {
                        1.0 - self.local[k]
                    };
                }
            }
            for (o, v) in out.iter_mut().zip(f.value(cell)) {
                *o += w * v;
            }
        }
    }
}

/// `sum_c cell_volume * f(c)`, summed in cell order.
pub fn bochner_integral(f: &VectorField) -> Vec<f64> {
    let mut acc = vec![0.0; f.dim_m];
    for c in 0..f.grid.n_cells() {
        for (a, v) in acc.iter_mut().zip(f.value(c)) {
            *a += v;
        }
    }
    let w = f.grid.cell_volume();
    acc.into_iter().map(|a| a * w).collect()
}

/// `(int ||f||^p)^(1/p)`.
pub fn lp_norm(f: &VectorField, p: f64) -> Result<f64> {
    f.norm_field().lp_norm(p)
}

/// The scalar field `<v, f>`.
pub fn scalarize(f: &VectorField, v: &DualFunctional) -> Result<ScalarField> {
    if v.dim() != f.dim_m {
        return argument(format!(
            "functional has {} coefficients, field has {} components",
            v.dim(),
            f.dim_m
        ));
    }
    if dual_norm(v.coeffs(), f.norm) > 1.0 + 1e-12 {
        return argument("functional lies outside the dual unit ball for this norm tag");
    }
    let vals = (0..f.grid.n_cells()).map(|c| v.apply(f.value(c))).collect();
    ScalarField::new(f.grid.clone(), vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norms_of_three_four() {
        let v = [3.0, 4.0];
        assert_eq!(value_norm(&v, NormTag::L2), 5.0);
        assert_eq!(value_norm(&v, NormTag::Linf), 4.0);
        assert_eq!(value_norm(&v, NormTag::L1), 7.0);
        for n in NormTag::ALL {
            assert_eq!(value_norm(&[0.0, 0.0, 0.0], n), 0.0);
        }
    }

    #[test]
    fn bochner_of_constant_and_two_cells() {
        let g = Grid::new(vec![0.0, 0.0], vec![2.0, 1.0], vec![3, 5]).unwrap();
        let f = VectorField::from_fn(g, 2, NormTag::L2, |_| vec![1.5, -2.0]).unwrap();
        let i = bochner_integral(&f);
        assert!((i[0] - 3.0).abs() < 1e-12 && (i[1] + 4.0).abs() < 1e-12);

        let g = Grid::new(vec![0.0], vec![3.0], vec![2]).unwrap();
        let f = VectorField::new(g, 2, vec![1.0, 2.0, -4.0, 0.5], NormTag::L1).unwrap();
        // each cell has volume 1.5
        assert_eq!(
            bochner_integral(&f),
            vec![1.5 * 1.0 + 1.5 * -4.0, 1.5 * 2.0 + 1.5 * 0.5]
        );
    }

    #[test]
    fn lp_norm_of_constant_on_unit_box() {
        let g = Grid::unit(2, 7).unwrap();
        let f = VectorField::from_fn(g, 3, NormTag::L1, |_| vec![1.0, -2.0, 0.5]).unwrap();
        for p in [1.0, 1.5, 2.0, 4.0] {
            assert!((lp_norm(&f, p).unwrap() - 3.5).abs() < 1e-12);
        }
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn scalarize_coordinate_and_zero() {
        let g = Grid::unit(1, 4).unwrap();
        let f = VectorField::from_fn(g, 2, NormTag::Linf, |x| vec![x[0], 2.0 * x[0]]).unwrap();
        let e1 = DualFunctional::new(vec![0.0, 1.0], NormTag::Linf).unwrap();
        assert_eq!(scalarize(&f, &e1).unwrap(), f.component(1));
        let zero = DualFunctional::new(vec![0.0, 0.0], NormTag::Linf).unwrap();
        assert!(scalarize(&f, &zero)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        assert!(DualFunctional::new(vec![0.8, 0.8], NormTag::Linf).is_err());
        assert!(DualFunctional::new(vec![0.8, 0.8], NormTag::L1).is_ok());
    }

    #[test]
    fn extreme_point_sets() {
        let pts = dual_ball_extreme_points(NormTag::Linf, 2).unwrap();
        let coeffs: Vec<_> = pts.iter().map(|p| p.coeffs().to_vec()).collect();
        assert_eq!(
            coeffs,
            vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0]
            ]
        );
        let pts = dual_ball_extreme_points(NormTag::L1, 2).unwrap();
        assert_eq!(pts.len(), 4);
        assert!(pts
            .iter()
            .all(|p| p.coeffs().iter().all(|c| c.abs() == 1.0)));
        assert!(dual_ball_extreme_points(NormTag::L2, 3).unwrap().is_empty());
        assert!(matches!(
            dual_ball_extreme_points(NormTag::L1, 17),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn sup_over_extreme_points_is_the_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let m = rng.gen_range(1..=6);
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
            for tag in [NormTag::L1, NormTag::Linf] {
                let sup = dual_ball_extreme_points(tag, m)
                    .unwrap()
                    .iter()
                    .map(|v| v.apply(&w))
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!((sup - value_norm(&w, tag)).abs() <= 1e-12 * (1.0 + sup));
            }
        }
    }

    #[test]
    fn interpolation_reproduces_affine_fields() {
        let g = Grid::new(vec![-1.0, 0.0], vec![1.0, 3.0], vec![5, 4]).unwrap();
        let f = VectorField::from_fn(g, 2, NormTag::L2, |x| {
            vec![1.0 + 2.0 * x[0] - x[1], 0.5 * x[1]]
        })
        .unwrap();
        for x in [[-1.0, 0.0], [0.97, 2.99], [0.1, 1.3], [1.0, 3.0]] {
            let v = f.sample(&x).unwrap();
            assert!((v[0] - (1.0 + 2.0 * x[0] - x[1])).abs() < 1e-12);
            assert!((v[1] - 0.5 * x[1]).abs() < 1e-12);
            let d = f.sample_gradient(&x).unwrap();
            assert!((d[0][0] - 2.0).abs() < 1e-12 && (d[1][0] + 1.0).abs() < 1e-12);
            assert!(d[0][1].abs() < 1e-12 && (d[1][1] - 0.5).abs() < 1e-12);
        }
        assert!(f.sample(&[1.5, 0.0]).is_err());
        // |grad| = sqrt(||(2,0)||^2 + ||(-1,0.5)||^2)
        let expect = (4.0 + 1.25f64).sqrt();
        assert!((f.interpolant_lipschitz_bound() - expect).abs() < 1e-12);
    }
}
