//! The Lipschitz curve `t -> (sin(nt)/n)_n` into l-infinity, truncated to
//! `M` coordinates. Everything here is evaluated in closed form: the
//! interesting behavior happens below any grid scale.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{argument, Result};
use crate::geometry::Grid;
use crate::report::{Check, Series};
use crate::vectorvalues::{NormTag, VectorField};

/// Cells used for the analytic L^p norms in [`dichotomy_report`].
pub const DICHOTOMY_RESOLUTION: usize = 64;

/// Pair lags examined by [`lipschitz_certificate`].
pub const CERTIFICATE_LAGS: usize = 4;

/// Coordinates represented per unit of `1/hprime` under [`Truncation::TailScaled`].
pub const TAIL_FACTOR: f64 = 10.0;

const CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SinFamilyField {
    m: usize,
    grid: Grid,
}

/// `f(t) = (sin(nt)/n)_{n=1..M}` on `(0, 1)` with l-infinity values.
pub fn sin_family(m: usize, resolution: usize) -> Result<SinFamilyField> {
    if m == 0 {
        return argument("truncation dimension M must be >= 1");
    }
    if resolution < 16 {
        return argument(format!("resolution must be >= 16, got {resolution}"));
    }
    Ok(SinFamilyField {
        m,
        grid: Grid::unit(1, resolution)?,
    })
}

impl SinFamilyField {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        (1..=self.m)
            .map(|n| (n as f64 * t).sin() / n as f64)
            .collect()
    }

    /// `||f(t)||_inf`.
    pub fn value_norm_at(&self, t: f64) -> f64 {
        (1..=self.m)
            .map(|n| ((n as f64 * t).sin() / n as f64).abs())
            .fold(0.0, f64::max)
    }

    /// `g*(t) = max_n |cos(nt)|`, the exact upper-bound function.
    pub fn gstar_at(&self, t: f64) -> f64 {
        (1..=self.m)
            .map(|n| (n as f64 * t).cos().abs())
            .fold(0.0, f64::max)
    }

    /// Cell-center samples as a grid field.
    pub fn to_vector_field(&self) -> Result<VectorField> {
        VectorField::from_fn(self.grid.clone(), self.m, NormTag::Linf, |x| {
            self.eval(x[0])
        })
    }

    /// `(||f||_p, ||g*||_p)` with cell-center values.
    pub fn analytic_norms(&self, p: f64) -> Result<(f64, f64)> {
        if !(p >= 1.0) {
            return argument(format!("exponent p must be >= 1, got {p}"));
        }
        let h = self.grid.cell_volume();
        let per_cell: Vec<(f64, f64)> = (0..self.grid.n_cells())
            .into_par_iter()
            .map(|c| {
                let t = self.grid.center_coord(0, c);
                (self.value_norm_at(t).powf(p), self.gstar_at(t).powf(p))
            })
            .collect();
        let (a, b) = per_cell
            .iter()
            .fold((0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
        Ok(((a * h).powf(1.0 / p), (b * h).powf(1.0 / p)))
    }

    /// `||f||_p + ||g*||_p`, evaluated in closed form.
    pub fn r_norm(&self, p: f64) -> Result<f64> {
        let (lp, g) = self.analytic_norms(p)?;
        Ok(lp + g)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzCertificate {
    pub value: f64,
    pub pairs: usize,
    pub pass: bool,
}

impl LipschitzCertificate {
    pub fn checks(&self) -> Vec<Check> {
        vec![Check::upper(
            "lipschitz certificate",
            self.value,
            1.0 + CERTIFICATE_TOL,
        )]
    }
}

/// Largest `||f(t) - f(s)||_inf / |t - s|` over cell centers at most
/// [`CERTIFICATE_LAGS`] cells apart.
pub fn lipschitz_certificate(f: &SinFamilyField) -> LipschitzCertificate {
    let n = f.grid.n_cells();
    let t = |c: usize| f.grid.center_coord(0, c);
    let (value, pairs) = (0..n)
        .into_par_iter()
        .map(|a| {
            let fa = f.eval(t(a));
            let mut best: f64 = 0.0;
            let mut pairs = 0;
            for b in (a + 1)..(a + 1 + CERTIFICATE_LAGS).min(n) {
                let dt = t(b) - t(a);
                let num = (1..=f.m)
                    .map(|k| ((k as f64 * t(b)).sin() / k as f64 - fa[k - 1]).abs())
                    .fold(0.0, f64::max);
                best = best.max(num / dt);
                pairs += 1;
            }
            (best, pairs)
        })
        .reduce(|| (0.0, 0), |x, y| (x.0.max(y.0), x.1 + y.1));
    LipschitzCertificate {
        value,
        pairs,
        pass: value <= 1.0 + CERTIFICATE_TOL,
    }
}

fn check_step(t: f64, h: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return argument(format!("t = {t} must lie in (0, 1)"));
    }
    if !(h != 0.0 && h.is_finite() && t + h > 0.0 && t + h < 1.0) {
        return argument(format!(
            "t + h = {} must lie in (0, 1) with h nonzero",
            t + h
        ));
    }
    Ok(())
}

fn quotient(n: usize, t: f64, h: f64) -> f64 {
    let n = n as f64;
    2.0 * (n * (t + 0.5 * h)).cos() * (0.5 * n * h).sin() / (n * h)
}

/// `(f(t + h) - f(t)) / h`, coordinatewise.
pub fn difference_quotient(f: &SinFamilyField, t: f64, h: f64) -> Result<Vec<f64>> {
    check_step(t, h)?;
    Ok((1..=f.m).map(|n| quotient(n, t, h)).collect())
}

/// `||Q(h) - Q(h')||_inf` together with the coordinate attaining it.
pub fn noncauchy_gap_at(f: &SinFamilyField, t: f64, h: f64, hprime: f64) -> Result<(f64, usize)> {
    if !(hprime > 0.0 && hprime <= h) {
        return argument(format!(
            "need 0 < hprime <= h, got h = {h}, hprime = {hprime}"
        ));
    }
    check_step(t, h)?;
    Ok((1..=f.m)
        .into_par_iter()
        .map(|n| ((quotient(n, t, h) - quotient(n, t, hprime)).abs(), n))
        .reduce(
            || (0.0, 0),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        ))
}

/// `||Q(h) - Q(h')||_inf` where `Q` is the difference quotient at `t`.
pub fn noncauchy_gap(f: &SinFamilyField, t: f64, h: f64, hprime: f64) -> Result<f64> {
    Ok(noncauchy_gap_at(f, t, h, hprime)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    /// The same `M` on every rung.
    Fixed { m: usize },
    /// `M = ceil(10 / hprime)`, so coordinates oscillating at scale `hprime` are kept.
    TailScaled,
}

impl Truncation {
    pub fn dimension(self, hprime: f64) -> usize {
        match self {
            Truncation::Fixed { m } => m,
            Truncation::TailScaled => (TAIL_FACTOR / hprime).ceil() as usize,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Rung {
    pub h: f64,
    pub hprime: f64,
    pub m: usize,
    pub gap: f64,
    pub argmax_n: usize,
    pub lp: f64,
    pub r_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NonCauchy,
    Converging,
    Inconclusive,
}

impl Verdict {
    pub fn line(self) -> &'static str {
        match self {
            Verdict::NonCauchy => "R-side bounded, W-side quotients non-Cauchy",
            Verdict::Converging => "RNP-like: quotients converge",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DichotomyReport {
    pub t: f64,
    pub p: f64,
    pub truncation: Truncation,
    pub gap_floor: f64,
    pub rungs: Vec<Rung>,
    /// Relative spread `(max - min) / max` of the R-norm column.
    pub r_spread: f64,
    /// `None` for an empty ladder.
    pub verdict: Option<Verdict>,
}

/// Allowed relative spread of the R-norm column.
pub const R_SPREAD_TOL: f64 = 0.05;
/// Slack in `r_norm <= ||f||_p + 1`.
pub const R_BOUND_TOL: f64 = 1e-6;

impl DichotomyReport {
    pub fn r_bounded(&self) -> bool {
        self.r_spread <= R_SPREAD_TOL
            && self
                .rungs
                .iter()
                .all(|r| r.r_norm <= r.lp + 1.0 + R_BOUND_TOL)
    }

    pub fn checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        for r in &self.rungs {
            out.push(Check::upper(
                format!("h={:e} r_norm bound", r.h),
                r.r_norm,
                r.lp + 1.0 + R_BOUND_TOL,
            ));
        }
        if !self.rungs.is_empty() {
            out.push(Check::upper("r_norm spread", self.r_spread, R_SPREAD_TOL));
        }
        if self.truncation == Truncation::TailScaled {
            for r in &self.rungs {
                out.push(Check::lower(
                    format!("h={:e} gap floor", r.h),
                    r.gap,
                    self.gap_floor,
                ));
            }
        }
        out
    }

    /// Columns `h, M, gap, r_norm`.
    pub fn series(&self) -> Series {
        let mut s = Series::new("dichotomy", &["h", "M", "gap", "r_norm"]);
        for r in &self.rungs {
            s.push(vec![r.h, r.m as f64, r.gap, r.r_norm]);
        }
        s
    }
}

/// Walk a strictly decreasing ladder of steps `h` with `hprime = h/2`,
/// recording the non-Cauchy gap and the R-norm of the truncated family.
pub fn dichotomy_report(
    t: f64,
    ladder: &[f64],
    truncation: Truncation,
    p: f64,
    gap_floor: f64,
) -> Result<DichotomyReport> {
    if ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return argument("ladder must be strictly decreasing");
    }
    if let Truncation::Fixed { m: 0 } = truncation {
        return argument("truncation dimension M must be >= 1");
    }
    let mut rungs = Vec::with_capacity(ladder.len());
    for &h in ladder {
        let hprime = 0.5 * h;
        let m = truncation.dimension(hprime);
        let f = sin_family(m, DICHOTOMY_RESOLUTION)?;
        let (gap, argmax_n) = noncauchy_gap_at(&f, t, h, hprime)?;
        let (lp, g) = f.analytic_norms(p)?;
        rungs.push(Rung {
            h,
            hprime,
            m,
            gap,
            argmax_n,
            lp,
            r_norm: lp + g,
        });
    }
    let (lo, hi) = rungs.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
        (lo.min(r.r_norm), hi.max(r.r_norm))
    });
    let r_spread = if rungs.is_empty() || hi == 0.0 {
        0.0
    } else {
        (hi - lo) / hi
    };
    let mut report = DichotomyReport {
        t,
        p,
        truncation,
        gap_floor,
        rungs,
        r_spread,
        verdict: None,
    };
    if !report.rungs.is_empty() {
        let gaps: Vec<f64> = report.rungs.iter().map(|r| r.gap).collect();
        let floor_held = gaps.iter().all(|&g| g >= gap_floor);
        let shrinking = gaps.windows(2).all(|w| w[1] <= w[0]) && *gaps.last().unwrap() < gap_floor;
        report.verdict = Some(if report.r_bounded() && floor_held {
            Verdict::NonCauchy
        } else if shrinking {
            Verdict::Converging
        } else {
            Verdict::Inconclusive
        });
    }
    Ok(report)
}
