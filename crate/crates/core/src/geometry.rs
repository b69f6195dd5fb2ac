//! Box grids over a domain in R^N, polylines with arc-length structure, and
//! line integrals of cell-constant densities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};

/// Relative slack used when deciding whether a point lies in the closed box.
const BOX_SLACK: f64 = 1e-12;

/// Axis-aligned box `[box_min, box_max]` split into `resolution[k]` cells per axis.
///
/// Cells are numbered in row-major order: the last axis varies fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    box_min: Vec<f64>,
    box_max: Vec<f64>,
    resolution: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    cell_volume: f64,
}

/// Wire form of a [`Grid`]: `{box_min, box_max, resolution}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub box_min: Vec<f64>,
    pub box_max: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.box_min, spec.box_max, spec.resolution)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            box_min: g.box_min,
            box_max: g.box_max,
            resolution: g.resolution,
        }
    }
}

impl Grid {
    pub fn new(box_min: Vec<f64>, box_max: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        let n = box_min.len();
        if n == 0 || box_max.len() != n || resolution.len() != n {
            return argument("box_min, box_max and resolution must share a nonzero dimension");
        }
        for k in 0..n {
            if !(box_min[k].is_finite() && box_max[k].is_finite() && box_min[k] < box_max[k]) {
                return argument(format!("axis {k}: need finite box_min < box_max"));
            }
            if resolution[k] == 0 {
                return argument(format!("axis {k}: resolution must be at least 1"));
            }
        }
        let spacing: Vec<f64> = (0..n)
            .map(|k| (box_max[k] - box_min[k]) / resolution[k] as f64)
            .collect();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * resolution[k + 1];
        }
        let cell_volume = spacing.iter().product();
        Ok(Grid {
            box_min,
            box_max,
            resolution,
            spacing,
            strides,
            cell_volume,
        })
    }

    /// The unit cube `[0,1]^dim` with `res` cells per axis.
    pub fn unit(dim: usize, res: usize) -> Result<Self> {
        Grid::new(vec![0.0; dim], vec![1.0; dim], vec![res; dim])
    }

    pub fn dim(&self) -> usize {
        self.box_min.len()
    }

    pub fn box_min(&self) -> &[f64] {
        &self.box_min
    }

    pub fn box_max(&self) -> &[f64] {
        &self.box_max
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn volume(&self) -> f64 {
        self.cell_volume * self.n_cells() as f64
    }

    pub fn n_cells(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn linear_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in 0..self.dim() {
            out[k] = idx / self.strides[k];
            idx %= self.strides[k];
        }
        out
    }

    /// Stride of one step along `axis` in the linear cell numbering.
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.box_min[k] + (i as f64 + 0.5) * self.spacing[k])
            .collect()
    }

    /// Coordinate of the center of cell `i` along `axis`.
    pub fn center_coord(&self, axis: usize, i: usize) -> f64 {
        self.box_min[axis] + (i as f64 + 0.5) * self.spacing[axis]
    }

    /// A cell is a boundary cell when it touches the box boundary along some axis.
    pub fn is_boundary_cell(&self, idx: usize) -> bool {
        self.multi_index(idx)
            .iter()
            .zip(&self.resolution)
            .any(|(&i, &n)| i == 0 || i + 1 == n)
    }

    /// Whether `x` lies in the closed box.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && (0..self.dim()).all(|k| {
                let slack = BOX_SLACK * (self.box_max[k] - self.box_min[k]);
                x[k].is_finite()
                    && x[k] >= self.box_min[k] - slack
                    && x[k] <= self.box_max[k] + slack
            })
    }

    /// Cell containing `x`; points on a shared face go to the upper cell,
    /// points on the upper box face to the last cell.
    pub fn locate(&self, x: &[f64]) -> Result<usize> {
        if !self.contains(x) {
            return Err(Error::Domain(format!(
                "point {x:?} lies outside the grid box"
            )));
        }
        Ok(self.locate_clamped(x))
    }

    pub(crate) fn locate_clamped(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for k in 0..self.dim() {
            let u = ((x[k] - self.box_min[k]) / self.spacing[k]).floor();
            let i = if u < 0.0 {
                0
            } else {
                (u as usize).min(self.resolution[k] - 1)
            };
            idx += i * self.strides[k];
        }
        idx
    }

    /// Parameters in `(0, 1)` where the segment `a -> b` crosses an interior cell face.
    pub(crate) fn face_crossings(&self, a: &[f64], b: &[f64], out: &mut Vec<f64>) {
        for k in 0..self.dim() {
            let d = b[k] - a[k];
            if d == 0.0 {
                continue;
            }
            let ua = (a[k] - self.box_min[k]) / self.spacing[k];
            let ub = (b[k] - self.box_min[k]) / self.spacing[k];
            let (lo, hi) = if ua < ub { (ua, ub) } else { (ub, ua) };
            let first = (lo.floor() as i64 + 1).max(1);
            let last = (hi.ceil() as i64 - 1).min(self.resolution[k] as i64 - 1);
            for j in first..=last {
                let plane = self.box_min[k] + j as f64 * self.spacing[k];
                let t = (plane - a[k]) / d;
                if t > 0.0 && t < 1.0 {
                    out.push(t);
                }
            }
        }
    }

    /// Check that every vertex of `c` lies in the closed box.
    pub fn check_curve(&self, c: &Polyline) -> Result<()> {
        if c.dim() != self.dim() {
            return argument(format!(
                "curve dimension {} does not match grid dimension {}",
                c.dim(),
                self.dim()
            ));
        }
        for k in 0..c.num_vertices() {
            if !self.contains(c.vertex(k)) {
                return Err(Error::Domain(format!(
                    "curve vertex {k} at {:?} lies outside the grid box",
                    c.vertex(k)
                )));
            }
        }
        Ok(())
    }

    /// Arc length of `c` inside each cell it traverses.
    pub fn cell_lengths(&self, c: &Polyline) -> Result<SparseRow> {
        self.check_curve(c)?;
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        let mut params = Vec::new();
        let mut mid = vec![0.0; self.dim()];
        for (a, b, seg_len) in c.segments() {
            if seg_len == 0.0 {
                continue;
            }
            params.clear();
            params.push(0.0);
            params.push(1.0);
            self.face_crossings(a, b, &mut params);
            sort_dedup(&mut params);
            for w in params.windows(2) {
                let tm = 0.5 * (w[0] + w[1]);
                for k in 0..self.dim() {
                    mid[k] = a[k] + tm * (b[k] - a[k]);
                }
                *acc.entry(self.locate_clamped(&mid)).or_insert(0.0) += (w[1] - w[0]) * seg_len;
            }
        }
        let (cells, values) = acc.into_iter().unzip();
        Ok(SparseRow { cells, values })
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
}

/// Sparse nonnegative row over grid cells, sorted by cell index.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub cells: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn nnz(&self) -> usize {
        self.cells.len()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.cells
            .iter()
            .zip(&self.values)
            .map(|(&c, &v)| v * dense[c])
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.cells.iter().cloned().zip(self.values.iter().cloned())
    }
}

/// A chain of straight segments in R^N with cumulative arc length.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    dim: usize,
    coords: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Polyline {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = match vertices.first() {
            Some(v) if !v.is_empty() => v.len(),
            _ => return argument("a polyline needs at least one vertex of positive dimension"),
        };
        let mut coords = Vec::with_capacity(dim * vertices.len());
        for (k, v) in vertices.iter().enumerate() {
            if v.len() != dim {
                return argument(format!(
                    "vertex {k} has dimension {}, expected {dim}",
                    v.len()
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return argument(format!("vertex {k} is not finite"));
            }
            coords.extend_from_slice(v);
        }
        Ok(Self::from_coords(dim, coords))
    }

    /// Straight segment from `a` to `b`.
    pub fn segment(a: &[f64], b: &[f64]) -> Result<Self> {
        Self::new(vec![a.to_vec(), b.to_vec()])
    }

    fn from_coords(dim: usize, coords: Vec<f64>) -> Self {
        let nv = coords.len() / dim;
        let mut cumulative = Vec::with_capacity(nv);
        cumulative.push(0.0);
        for k in 1..nv {
            let d = euclid(
                &coords[(k - 1) * dim..k * dim],
                &coords[k * dim..(k + 1) * dim],
            );
            cumulative.push(cumulative[k - 1] + d);
        }
        Polyline {
            dim,
            coords,
            cumulative,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.cumulative.len()
    }

    pub fn vertex(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks(self.dim)
    }

    pub fn cumulative_arclength(&self) -> &[f64] {
        &self.cumulative
    }

    /// Sum of the Euclidean segment lengths; for a polyline this is the
    /// supremum over partitions.
    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// `(start, end, length)` for each segment.
    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64], f64)> {
        (1..self.num_vertices()).map(move |k| {
            (
                self.vertex(k - 1),
                self.vertex(k),
                self.cumulative[k] - self.cumulative[k - 1],
            )
        })
    }

    /// Drop zero-length segments so that the parameter `t` in `[0, length]`
    /// maps to the point at distance `t` along the chain.
    pub fn arclength_parametrize(&self) -> Result<Polyline> {
        if !(self.length() > 0.0) {
            return Err(Error::DegenerateCurve);
        }
        let mut coords = self.vertex(0).to_vec();
        for k in 1..self.num_vertices() {
            if self.cumulative[k] > self.cumulative[k - 1] {
                coords.extend_from_slice(self.vertex(k));
            }
        }
        Ok(Self::from_coords(self.dim, coords))
    }

    /// Point at arc-length parameter `t`, clamped to `[0, length]`.
    pub fn point_at(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.point_at_into(t, &mut out);
        out
    }

    pub(crate) fn point_at_into(&self, t: f64, out: &mut [f64]) {
        let nv = self.num_vertices();
        if nv == 1 || t <= 0.0 {
            out.copy_from_slice(self.vertex(0));
            return;
        }
        if t >= self.length() {
            out.copy_from_slice(self.vertex(nv - 1));
            return;
        }
        // first vertex strictly beyond t
        let k = self
            .cumulative
            .partition_point(|&c| c <= t)
            .clamp(1, nv - 1);
        let (s0, s1) = (self.cumulative[k - 1], self.cumulative[k]);
        let lam = if s1 > s0 { (t - s0) / (s1 - s0) } else { 0.0 };
        let (a, b) = (self.vertex(k - 1), self.vertex(k));
        for i in 0..self.dim {
            out[i] = a[i] + lam * (b[i] - a[i]);
        }
    }

    /// Unit tangent of the segment containing parameter `t` (zero for constant curves).
    pub fn tangent_at(&self, t: f64) -> Vec<f64> {
        let nv = self.num_vertices();
        let mut out = vec![0.0; self.dim];
        if nv < 2 || self.length() == 0.0 {
            return out;
        }
        let t = t.clamp(0.0, self.length());
        let mut k = self
            .cumulative
            .partition_point(|&c| c <= t)
            .clamp(1, nv - 1);
        while k + 1 < nv && self.cumulative[k] == self.cumulative[k - 1] {
            k += 1;
        }
        let len = self.cumulative[k] - self.cumulative[k - 1];
        if len > 0.0 {
            let (a, b) = (self.vertex(k - 1), self.vertex(k));
            for i in 0..self.dim {
                out[i] = (b[i] - a[i]) / len;
            }
        }
        out
    }

    /// Sub-curve between arc-length parameters `s <= t`.
    pub fn restrict(&self, s: f64, t: f64) -> Result<Polyline> {
        let len = self.length();
        let slack = 1e-12 * len.max(1.0);
        if !(s.is_finite() && t.is_finite()) || s > t || s < -slack || t > len + slack {
            return argument(format!(
                "restrict: need 0 <= s <= t <= {len}, got s={s}, t={t}"
            ));
        }
        let (s, t) = (s.clamp(0.0, len), t.clamp(0.0, len));
        let mut coords = self.point_at(s);
        for k in 0..self.num_vertices() {
            if self.cumulative[k] > s && self.cumulative[k] < t {
                coords.extend_from_slice(self.vertex(k));
            }
        }
        coords.extend(self.point_at(t));
        Ok(Self::from_coords(self.dim, coords))
    }
}

/// Length of a polyline.
pub fn length(c: &Polyline) -> f64 {
    c.length()
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A labelled finite family of nonconstant curves.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveFamily {
    pub label: String,
    curves: Vec<Polyline>,
}

impl CurveFamily {
    pub fn new(label: impl Into<String>, curves: Vec<Polyline>) -> Result<Self> {
        for (j, c) in curves.iter().enumerate() {
            if !(c.length() > 0.0) {
                return argument(format!("curve {j} is constant"));
            }
        }
        Ok(CurveFamily {
            label: label.into(),
            curves,
        })
    }

    pub fn empty(label: impl Into<String>) -> Self {
        CurveFamily {
            label: label.into(),
            curves: Vec::new(),
        }
    }

    pub fn curves(&self) -> &[Polyline] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn push(&mut self, c: Polyline) -> Result<()> {
        if !(c.length() > 0.0) {
            return argument("curve is constant");
        }
        self.curves.push(c);
        Ok(())
    }

    /// Union of two families (curves of `self` first).
    pub fn union(&self, other: &CurveFamily) -> CurveFamily {
        let mut curves = self.curves.clone();
        curves.extend(other.curves.iter().cloned());
        CurveFamily {
            label: format!("{}+{}", self.label, other.label),
            curves,
        }
    }
}

/// Cell-centered real field on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return argument(format!(
                "expected {} cell values, got {}",
                grid.n_cells(),
                values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return argument("scalar field values must be finite");
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: Grid, v: f64) -> Result<Self> {
        let n = grid.n_cells();
        Self::new(grid, vec![v; n])
    }

    /// Sample `f` at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.n_cells())
            .map(|c| f(&grid.cell_center(c)))
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Value of the cell containing `x`.
    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        Ok(self.values[self.grid.locate(x)?])
    }

    /// `(sum_c w_c |v_c|^p)^(1/p)` with cell volumes as weights.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return argument(format!("exponent p must be >= 1, got {p}"));
        }
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        Ok((s * self.grid.cell_volume()).powf(1.0 / p))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `int_c rho ds` with the default step (half the smallest grid spacing).
pub fn curve_integral(rho: &ScalarField, c: &Polyline) -> Result<f64> {
    curve_integral_with_step(rho, c, 0.5 * rho.grid().min_spacing())
}

/// Composite midpoint rule for `rho` along `c`.
///
/// Each segment is cut at a uniform step no larger than `step` and at every
/// cell face it crosses, so a cell-constant density is integrated exactly.
pub fn curve_integral_with_step(rho: &ScalarField, c: &Polyline, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return argument(format!("quadrature step must be positive, got {step}"));
    }
    if !rho.is_nonnegative() {
        return argument("density must be nonnegative");
    }
    let grid = rho.grid();
    grid.check_curve(c)?;
    let mut total = 0.0;
    let mut params = Vec::new();
    let mut mid = vec![0.0; grid.dim()];
    for (a, b, seg_len) in c.segments() {
        if seg_len == 0.0 {
            continue;
        }
        params.clear();
        let pieces = (seg_len / step).ceil().max(1.0) as usize;
        params.extend((0..=pieces).map(|k| k as f64 / pieces as f64));
        grid.face_crossings(a, b, &mut params);
        sort_dedup(&mut params);
        for w in params.windows(2) {
            let tm = 0.5 * (w[0] + w[1]);
            for k in 0..grid.dim() {
                mid[k] = a[k] + tm * (b[k] - a[k]);
            }
            total += rho.values[grid.locate_clamped(&mid)] * (w[1] - w[0]) * seg_len;
        }
    }
    Ok(total)
}
