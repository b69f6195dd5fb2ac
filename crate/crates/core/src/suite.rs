//! The acceptance battery. Each criterion builds its own deterministic
//! fixtures, runs the library and returns named checks.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{curve_integral, CurveFamily, Grid, Polyline, ScalarField};
use crate::modulus::{
    analytic_parallel_segments, assemble_problem, chebyshev_modulus_bound, fuglede_schedule,
    solve_modulus, ModulusResult, SolverOptions,
};
use crate::report::{Check, Series};
use crate::reshetnyak::{ac_bound_check, norm_equivalence_check};
use crate::rnp_lab::{dichotomy_report, noncauchy_gap, sin_family, Truncation, Verdict};
use crate::sobolev::{
    finite_diff_gradient, ftc_along_curve_check, weak_derivative_check, TestFunction,
};
use crate::vectorvalues::{NormTag, VectorField};

/// Gap floor fixture for the dichotomy ladder.
pub const DICHOTOMY_FIXTURE: &str = include_str!("../fixtures/dichotomy_c0.json");

#[derive(Clone, Debug, Deserialize)]
pub struct FixtureRung {
    pub h: f64,
    pub m: usize,
    pub gap: f64,
    pub argmax_n: usize,
}

#[derive(Clone, Debug, Deserialize)]
pub struct DichotomyFixture {
    pub t: f64,
    pub rungs: Vec<FixtureRung>,
    pub c0: f64,
}

pub fn dichotomy_fixture() -> Result<DichotomyFixture> {
    serde_json::from_str(DICHOTOMY_FIXTURE).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
    pub elapsed_s: f64,
}

impl CriterionOutcome {
    fn new(id: u8, title: &str) -> Self {
        CriterionOutcome {
            id,
            title: title.to_string(),
            checks: Vec::new(),
            series: Vec::new(),
            notes: Vec::new(),
            elapsed_s: 0.0,
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `criterion N: PASS|FAIL  title`, followed by any failing checks.
    pub fn summary_lines(&self) -> Vec<String> {
        let mut out = vec![format!(
            "criterion {}: {}  {} ({:.2} s)",
            self.id,
            if self.pass() { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed_s
        )];
        for c in self.checks.iter().filter(|c| !c.pass) {
            out.push(format!(
                "    failed: {} values={:?} bound={} margin={}",
                c.name, c.values, c.bound, c.margin
            ));
        }
        out
    }
}

pub const CRITERIA: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

pub fn run_criterion(id: u8) -> Result<CriterionOutcome> {
    let start = Instant::now();
    let mut out = match id {
        1 => segment_modulus(),
        2 => outer_measure(),
        3 => chebyshev_bounds(),
        4 => weak_derivative(),
        5 => norm_equivalence(),
        6 => ftc_and_ac(),
        7 => rnp_dichotomy(),
        8 => fuglede(),
        _ => Err(Error::Argument(format!("no criterion {id}"))),
    }?;
    out.elapsed_s = start.elapsed().as_secs_f64();
    Ok(out)
}

pub fn run_all() -> Result<Vec<CriterionOutcome>> {
    CRITERIA.iter().map(|&id| run_criterion(id)).collect()
}

fn solve(fam: &CurveFamily, grid: &Grid, p: f64) -> Result<ModulusResult> {
    let opts = SolverOptions::default();
    solve_modulus(&assemble_problem(fam, grid, p)?, opts.tol, opts.max_iter)
}

fn horizontal_segments(label: &str, heights: impl Iterator<Item = f64>) -> Result<CurveFamily> {
    let curves = heights
        .map(|y| Polyline::segment(&[0.0, y], &[1.0, y]))
        .collect::<Result<Vec<_>>>()?;
    CurveFamily::new(label, curves)
}

const SEGMENT_REL_TOL: f64 = 0.05;
const SOLVE_TIME_LIMIT_S: f64 = 30.0;

fn segment_modulus() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(1, "segment-family modulus");
    let mut refinement = Series::new("segment_refinement", &["resolution", "value", "abs_error"]);
    let mut errors = Vec::new();
    for res in [64usize, 128] {
        let grid = Grid::unit(2, res)?;
        let fam = horizontal_segments(
            "unit segments",
            (0..res).map(|i| (i as f64 + 0.5) / res as f64),
        )?;
        let start = Instant::now();
        let r = solve(&fam, &grid, 2.0)?;
        let secs = start.elapsed().as_secs_f64();
        let exact = analytic_parallel_segments(1.0, 1.0, 2.0)?;
        out.checks.push(Check::within(
            format!("{res}^2 value vs analytic"),
            r.value,
            exact,
            SEGMENT_REL_TOL * exact,
        ));
        out.checks.push(Check::flag(
            format!("{res}^2 solver converged"),
            r.converged,
        ));
        out.checks.push(Check::upper(
            format!("{res}^2 solve time (s)"),
            secs,
            SOLVE_TIME_LIMIT_S,
        ));
        refinement.push(vec![res as f64, r.value, (r.value - exact).abs()]);
        errors.push(((r.value - exact).abs(), r.value));
    }
    let slack = SolverOptions::default().tol * (1.0 + errors[1].1);
    out.checks.push(Check::upper(
        "128^2 error <= 64^2 error",
        errors[1].0,
        errors[0].0 + slack,
    ));
    out.series.push(refinement);

    let grid = Grid::unit(2, 64)?;
    let half = horizontal_segments("lower half", (0..32).map(|i| (i as f64 + 0.5) / 64.0))?;
    for p in [1.5, 2.0, 3.0] {
        let r = solve(&half, &grid, p)?;
        let exact = analytic_parallel_segments(0.5, 1.0, p)?;
        out.checks.push(Check::within(
            format!("E=[0,1/2] p={p}"),
            r.value,
            exact,
            SEGMENT_REL_TOL * exact,
        ));
    }
    Ok(out)
}

fn random_segment(rng: &mut ChaCha8Rng, x: (f64, f64), y: (f64, f64), min_len: f64) -> Polyline {
    loop {
        let a = [rng.gen_range(x.0..x.1), rng.gen_range(y.0..y.1)];
        let b = [rng.gen_range(x.0..x.1), rng.gen_range(y.0..y.1)];
        if let Ok(c) = Polyline::segment(&a, &b) {
            if c.length() >= min_len {
                return c;
            }
        }
    }
}

fn random_family(
    rng: &mut ChaCha8Rng,
    label: &str,
    x: (f64, f64),
    y: (f64, f64),
) -> Result<CurveFamily> {
    let n = rng.gen_range(3..=8);
    CurveFamily::new(
        label,
        (0..n).map(|_| random_segment(rng, x, y, 0.2)).collect(),
    )
}

const AXIOM_TOL: f64 = 1e-4;
const DISJOINT_REL_TOL: f64 = 1e-3;

fn outer_measure() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(2, "outer-measure axioms");
    let grid = Grid::unit(2, 32)?;
    let empty = solve(&CurveFamily::empty("empty"), &grid, 2.0)?;
    out.checks
        .push(Check::within("Mod(empty) = 0", empty.value, 0.0, 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let full = (0.0, 1.0);
    let cases = (0..50)
        .map(|_| {
            Ok((
                random_family(&mut rng, "a", full, full)?,
                random_family(&mut rng, "b", full, full)?,
                random_family(&mut rng, "left", (0.02, 0.4), full)?,
                random_family(&mut rng, "right", (0.6, 0.98), full)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let results = cases
        .par_iter()
        .map(|(a, b, l, r)| {
            let va = solve(a, &grid, 2.0)?.value;
            let vb = solve(b, &grid, 2.0)?.value;
            let vab = solve(&a.union(b), &grid, 2.0)?.value;
            let vl = solve(l, &grid, 2.0)?.value;
            let vr = solve(r, &grid, 2.0)?.value;
            let vlr = solve(&l.union(r), &grid, 2.0)?.value;
            Ok([
                vab - va.max(vb),
                va + vb - vab,
                (vlr - vl - vr).abs() / (vl + vr),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let worst =
        |k: usize, f: fn(f64, f64) -> f64, init: f64| results.iter().map(|r| r[k]).fold(init, f);
    out.checks.push(Check::lower(
        "monotonicity margin",
        worst(0, f64::min, f64::INFINITY),
        -AXIOM_TOL,
    ));
    out.checks.push(Check::lower(
        "subadditivity margin",
        worst(1, f64::min, f64::INFINITY),
        -AXIOM_TOL,
    ));
    out.checks.push(Check::upper(
        "disjoint-support relative defect",
        worst(2, f64::max, 0.0),
        DISJOINT_REL_TOL,
    ));
    out.notes.push(format!(
        "{} randomized family pairs at 32^2, p = 2",
        results.len()
    ));
    Ok(out)
}

const CHEBYSHEV_SLACK: f64 = 1e-6;

fn chebyshev_bounds() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(3, "Chebyshev and Gamma_E^+ bounds");
    let grid = Grid::unit(2, 24)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    for k in 0..20 {
        let p = [1.5, 2.0, 3.0][k % 3];
        let vals: Vec<f64> = (0..grid.n_cells())
            .map(|_| {
                if rng.gen_bool(0.2) {
                    0.0
                } else {
                    rng.gen_range(0.0..1.0)
                }
            })
            .collect();
        let h = ScalarField::new(grid.clone(), vals)?;
        let mut curves = Vec::new();
        while curves.len() < 6 {
            let c = random_segment(&mut rng, (0.0, 1.0), (0.0, 1.0), 0.3);
            if curve_integral(&h, &c)? > 0.0 {
                curves.push(c);
            }
        }
        let eps = curves
            .iter()
            .map(|c| curve_integral(&h, c))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let fam = CurveFamily::new(format!("triple {k}"), curves)?;
        let bound = chebyshev_modulus_bound(&h, eps, p)?;
        let value = solve(&fam, &grid, p)?.value;
        worst = worst.min(bound + CHEBYSHEV_SLACK - value);
    }
    out.checks
        .push(Check::lower("worst margin over 20 triples", worst, 0.0));

    // E = [0.4, 0.5]^2 is a union of 4 x 4 cells at resolution 40.
    let grid = Grid::unit(2, 40)?;
    let (lo, hi, delta, p) = (0.4, 0.5, 0.1, 2.0);
    let chi = ScalarField::from_fn(grid.clone(), |x| {
        if (lo..hi).contains(&x[0]) && (lo..hi).contains(&x[1]) {
            1.0 / delta
        } else {
            0.0
        }
    })?;
    let mut fam = CurveFamily::empty("Gamma_E^+");
    let mut tried = 0;
    while fam.len() < 40 {
        tried += 1;
        let theta = rng.gen_range(-0.3f64..0.3)
            + if rng.gen_bool(0.5) {
                0.0
            } else {
                std::f64::consts::FRAC_PI_2
            };
        let center = [rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
        let half = rng.gen_range(0.1..0.3);
        let (dx, dy) = (half * theta.cos(), half * theta.sin());
        let c = Polyline::segment(
            &[center[0] - dx, center[1] - dy],
            &[center[0] + dx, center[1] + dy],
        )?;
        if curve_integral(&chi, &c)? >= 1.0 {
            fam.push(c)?;
        }
    }
    let measure_e = (hi - lo) * (hi - lo);
    let bound = measure_e / delta.powf(p);
    let value = solve(&fam, &grid, p)?.value;
    out.checks
        .push(Check::upper("Mod(Gamma_E^+) <= |E|/delta^p", value, bound));
    out.notes.push(format!(
        "Gamma_E^+: {} of {tried} sampled segments kept",
        fam.len()
    ));
    Ok(out)
}

fn weak_derivative() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(4, "weak-derivative verifier");
    let grid = Grid::unit(1, 256)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let bumps = (0..20)
        .map(|_| TestFunction::new(vec![rng.gen_range(0.25..0.75)], rng.gen_range(0.1..0.2)))
        .collect::<Result<Vec<_>>>()?;
    let f = VectorField::from_fn(grid.clone(), 1, NormTag::L2, |x| vec![x[0] * x[0]])?;
    let cand = VectorField::from_fn(grid.clone(), 1, NormTag::L2, |x| vec![2.0 * x[0]])?;
    let zero = VectorField::zeros(grid.clone(), 1, NormTag::L2)?;

    let good = weak_derivative_check(&f, &cand, 0, &bumps, 5e-3)?;
    let worst = good
        .checks()
        .into_iter()
        .map(|c| c.margin)
        .fold(f64::INFINITY, f64::min);
    out.checks
        .push(Check::lower("x^2 with 2x: worst margin", worst, 0.0));
    let bad = weak_derivative_check(&f, &zero, 0, &bumps, 5e-3)?;
    let failures = bad.bumps.iter().filter(|b| !b.pass).count();
    out.checks.push(Check::lower(
        "x^2 with 0: failing bumps",
        failures as f64,
        bumps.len() as f64,
    ));
    let constant = VectorField::from_fn(grid, 1, NormTag::L2, |_| vec![3.0])?;
    let flat = weak_derivative_check(&constant, &zero, 0, &bumps, 1e-12)?;
    out.checks
        .push(Check::flag("constant with 0 at 1e-12", flat.pass));
    Ok(out)
}

fn random_smooth_field(
    rng: &mut ChaCha8Rng,
    grid: &Grid,
    m: usize,
    tag: NormTag,
) -> Result<VectorField> {
    let terms: Vec<[f64; 4]> = (0..3 * m)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            ]
        })
        .collect();
    VectorField::from_fn(grid.clone(), m, tag, |x| {
        (0..m)
            .map(|k| {
                terms[3 * k..3 * k + 3]
                    .iter()
                    .map(|t| t[0] * (t[1] * x[0] + t[2] * x[1] + t[3]).sin())
                    .sum()
            })
            .collect()
    })
}

const EQUIVALENCE_MARGIN: f64 = -1e-6;
const SCALAR_REL_TOL: f64 = 1e-9;

fn norm_equivalence() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(5, "R-norm vs W-norm equivalence");
    let grid = Grid::unit(2, 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tags = [NormTag::L1, NormTag::L2, NormTag::Linf];
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    let mut exact = true;
    for k in 0..500 {
        let m = [1, 2, 4][k % 3];
        let tag = tags[(k / 3) % 3];
        let p = [1.0, 2.0][(k / 9) % 2];
        let f = random_smooth_field(&mut rng, &grid, m, tag)?;
        let rep = norm_equivalence_check(&f, p, 0.0)?;
        exact &= !rep.one_sided;
        lower = lower.min(rep.lower_margin);
        upper = upper.min(rep.sqrt_n_margin);
    }
    out.checks.push(Check::lower(
        "worst margin of r <= w",
        lower,
        EQUIVALENCE_MARGIN,
    ));
    out.checks.push(Check::lower(
        "worst margin of w <= sqrt(N) r",
        upper,
        EQUIVALENCE_MARGIN,
    ));
    out.checks.push(Check::flag("every g* exact", exact));

    let mut scalar_defect: f64 = 0.0;
    for k in 0..30 {
        let f = random_smooth_field(&mut rng, &grid, 1, tags[k % 3])?;
        let rep = norm_equivalence_check(&f, [1.0, 2.0][k % 2], 0.0)?;
        scalar_defect = scalar_defect.max((rep.r_norm - rep.w_norm).abs() / (1.0 + rep.w_norm));
    }
    out.checks.push(Check::upper(
        "scalar |r - w| / (1 + w)",
        scalar_defect,
        SCALAR_REL_TOL,
    ));

    let id = VectorField::from_fn(grid, 2, NormTag::Linf, |x| x.to_vec())?;
    let rep = norm_equivalence_check(&id, 2.0, 0.0)?;
    out.checks.push(
        Check::lower("identity ratio > 1", rep.ratio - 1.0, f64::MIN_POSITIVE)
            .with_values(vec![rep.ratio]),
    );
    out.checks.push(
        Check::lower(
            "identity ratio < sqrt(2)",
            2f64.sqrt() - rep.ratio,
            f64::MIN_POSITIVE,
        )
        .with_values(vec![rep.ratio]),
    );
    Ok(out)
}

fn random_polyline(rng: &mut ChaCha8Rng) -> Result<Polyline> {
    let n = rng.gen_range(2..=5);
    loop {
        let verts: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        if let Ok(c) = Polyline::new(verts) {
            if c.length() > 1e-3 {
                return Ok(c);
            }
        }
    }
}

const FTC_TOL: f64 = 1e-3;

fn ftc_and_ac() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(6, "FTC and absolute-continuity bounds");
    let grid = Grid::unit(2, 256)?;
    let fixtures = [
        VectorField::from_fn(grid.clone(), 2, NormTag::L2, |x| {
            vec![(2.0 * x[0]).sin() * (3.0 * x[1]).cos(), x[0] * x[1] * x[1]]
        })?,
        VectorField::from_fn(grid.clone(), 3, NormTag::Linf, |x| {
            vec![(x[0] - x[1]).exp(), (4.0 * x[0] * x[1]).cos(), x[0] * x[0]]
        })?,
        VectorField::from_fn(grid, 1, NormTag::L1, |x| {
            vec![(5.0 * x[0]).sin() + x[1] * x[1]]
        })?,
    ];
    let curves = [
        Polyline::segment(&[0.0, 0.0], &[1.0, 1.0])?,
        Polyline::new(vec![
            vec![0.1, 0.9],
            vec![0.5, 0.2],
            vec![0.95, 0.6],
            vec![0.3, 0.05],
        ])?,
        Polyline::new(
            (0..=64)
                .map(|k| {
                    let s = k as f64 / 64.0 * std::f64::consts::TAU;
                    vec![0.5 + 0.4 * s.cos(), 0.5 + 0.4 * s.sin()]
                })
                .collect(),
        )?,
    ];
    let mut worst: f64 = 0.0;
    let mut chain: f64 = f64::NEG_INFINITY;
    for f in &fixtures {
        let grad = finite_diff_gradient(f)?;
        for c in &curves {
            let rep = ftc_along_curve_check(f, &grad, c, FTC_TOL)?;
            worst = worst.max(rep.max_residual);
            chain = chain.max(rep.chain_excess);
        }
    }
    out.checks
        .push(Check::upper("worst FTC residual at 256^2", worst, FTC_TOL));
    out.checks
        .push(Check::upper("worst chain-rule excess", chain, 1e-12));

    let grid = Grid::unit(2, 64)?;
    let f = VectorField::from_fn(grid.clone(), 2, NormTag::L2, |x| {
        vec![(3.0 * x[0]).sin() * x[1], (x[0] + 2.0 * x[1]).cos()]
    })?;
    let g = ScalarField::constant(grid.clone(), f.interpolant_lipschitz_bound())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let polylines = (0..100)
        .map(|_| random_polyline(&mut rng))
        .collect::<Result<Vec<_>>>()?;
    let reports = polylines
        .par_iter()
        .map(|c| ac_bound_check(&f, &g, c, 1e-12))
        .collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().filter(|r| r.pass).count();
    let excess = reports
        .iter()
        .map(|r| r.max_excess)
        .fold(f64::NEG_INFINITY, f64::max);
    out.checks.push(Check::lower(
        "Lipschitz fixture: passing polylines",
        passed as f64,
        100.0,
    ));
    out.checks.push(Check::upper(
        "Lipschitz fixture: worst excess",
        excess,
        1e-12,
    ));

    let jump = VectorField::from_fn(grid.clone(), 1, NormTag::L2, |x| {
        vec![if x[0] < 0.5 { 0.0 } else { 1.0 }]
    })?;
    let one = ScalarField::constant(grid, 1.0)?;
    let across = Polyline::segment(&[0.2, 0.5], &[0.8, 0.5])?;
    let rep = ac_bound_check(&jump, &one, &across, 1e-6)?;
    out.checks.push(
        Check::flag(
            "jump fixture fails across the jump",
            !rep.pass && rep.worst_pair.0 < 0.3 && rep.worst_pair.1 > 0.3,
        )
        .with_values(vec![rep.max_excess, rep.worst_pair.0, rep.worst_pair.1]),
    );
    Ok(out)
}

pub const DICHOTOMY_LADDER: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
const DICHOTOMY_TIME_LIMIT_S: f64 = 10.0;
const FIXTURE_GAP_TOL: f64 = 1e-9;

fn rnp_dichotomy() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(7, "RNP dichotomy");
    let start = Instant::now();
    let fx = dichotomy_fixture()?;
    let t = std::f64::consts::FRAC_1_SQRT_2;
    let rep = dichotomy_report(t, &DICHOTOMY_LADDER, Truncation::TailScaled, 2.0, fx.c0)?;
    out.checks.extend(rep.checks());
    for (r, f) in rep.rungs.iter().zip(&fx.rungs) {
        out.checks.push(
            Check::within(
                format!("h={:e} gap vs fixture", r.h),
                r.gap,
                f.gap,
                FIXTURE_GAP_TOL,
            )
            .with_values(vec![r.gap, f.gap, r.argmax_n as f64, f.argmax_n as f64]),
        );
    }
    out.checks.push(Check::flag(
        "verdict non-Cauchy",
        rep.verdict == Some(Verdict::NonCauchy),
    ));

    let scalar = sin_family(1, 16)?;
    let coarse = noncauchy_gap(&scalar, t, 1e-3, 5e-4)?;
    let fine = noncauchy_gap(&scalar, t, 1e-6, 5e-7)?;
    out.checks.push(
        Check::upper("M=1 gap(1e-6) <= 10 gap(1e-3)", fine, 10.0 * coarse)
            .with_values(vec![fine, coarse]),
    );
    out.checks.push(Check::upper(
        "runtime (s)",
        start.elapsed().as_secs_f64(),
        DICHOTOMY_TIME_LIMIT_S,
    ));
    out.series.push(rep.series());
    if let Some(v) = rep.verdict {
        out.notes.push(v.line().to_string());
    }
    Ok(out)
}

const FUGLEDE_SUM_LIMIT: f64 = 1e-2;

fn fuglede() -> Result<CriterionOutcome> {
    let mut out = CriterionOutcome::new(8, "Fuglede schedule");
    let norms: Vec<f64> = (1..=60).map(|n| 0.5f64.powi(n)).collect();
    let sched = fuglede_schedule(&norms, 2.0, 0.5)?;
    let decreasing = sched
        .windows(2)
        .all(|w| w[1].modulus_bound < w[0].modulus_bound);
    let bounds: Vec<f64> = sched.iter().map(|e| e.modulus_bound).collect();
    out.checks
        .push(Check::flag("bounds strictly decreasing", decreasing).with_values(bounds.clone()));
    out.checks.push(Check::upper(
        "sum of bounds",
        bounds.iter().sum(),
        FUGLEDE_SUM_LIMIT,
    ));
    let mut s = Series::new("fuglede_schedule", &["k", "index", "norm", "modulus_bound"]);
    for e in &sched {
        s.push(vec![e.k as f64, e.index as f64, e.norm, e.modulus_bound]);
    }
    out.series.push(s);
    Ok(out)
}
