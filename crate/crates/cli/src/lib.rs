//! Command dispatch for the `modlab` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use modlab_core::io;
use modlab_core::modulus::{assemble_problem, solve_modulus, SolverOptions};
use modlab_core::report::{Check, Report};
use modlab_core::reshetnyak::{
    ac_bound_check, norm_equivalence_check, upper_gradient_star_sampled,
};
use modlab_core::rnp_lab::{dichotomy_report, Truncation};
use modlab_core::sobolev::weak_derivative_check;
use modlab_core::suite::{dichotomy_fixture, run_criterion, CRITERIA};
use modlab_core::vectorvalues::lp_norm;
use modlab_core::{Error, NormTag, Result, VectorField};
use serde_json::json;
use sha2::{Digest, Sha256};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "MODLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "modlab",
    version,
    about = "Curve-family modulus and vector-valued Sobolev checks"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write one CSV per report series into this directory.
    #[arg(long, global = true)]
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the discrete p-modulus of a curve family.
    Modulus {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = SolverOptions::default().tol)]
        tol: f64,
        #[arg(long, default_value_t = SolverOptions::default().max_iter)]
        max_iter: usize,
        /// Dump the optimal density as a one-component field CSV.
        #[arg(long)]
        rho_out: Option<PathBuf>,
    },
    /// Compare the W-norm and the R-norm of a field.
    Norms {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Also report a sampled g* over this many random functionals.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify a candidate weak partial derivative against bump test functions.
    Weakcheck {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        cand: PathBuf,
        #[arg(long)]
        axis: usize,
        #[arg(long)]
        bumps: PathBuf,
        #[arg(long, default_value_t = 5e-3)]
        tol: f64,
    },
    /// Check the absolute-continuity bound of a field along a polyline.
    Acbound {
        #[arg(long)]
        f: PathBuf,
        /// One-component field CSV holding the upper bound g.
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Difference-quotient ladder for the sin(nt)/n family.
    Counterexample {
        #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
        t: f64,
        /// Comma-separated steps, strictly decreasing; may be empty.
        #[arg(long, default_value = "1e-1,1e-2,1e-3,1e-4")]
        ladder: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Fixed truncation dimension; the default scales M with 1/h.
        #[arg(long)]
        m: Option<usize>,
        /// Gap floor; defaults to the bundled fixture.
        #[arg(long)]
        c0: Option<f64>,
    },
    /// Run the acceptance battery.
    Suite {
        /// Criteria to run; all when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Modulus { .. } => "modulus",
            Command::Norms { .. } => "norms",
            Command::Weakcheck { .. } => "weakcheck",
            Command::Acbound { .. } => "acbound",
            Command::Counterexample { .. } => "counterexample",
            Command::Suite { .. } => "suite",
        }
    }

    fn inputs(&self) -> Vec<&Path> {
        match self {
            Command::Modulus { family, grid, .. } => vec![family, grid],
            Command::Norms { f, .. } => vec![f],
            Command::Weakcheck { f, cand, bumps, .. } => vec![f, cand, bumps],
            Command::Acbound { f, g, curve, .. } => vec![f, g, curve],
            Command::Counterexample { .. } | Command::Suite { .. } => vec![],
        }
        .into_iter()
        .map(PathBuf::as_path)
        .collect()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("{name} must be positive, got {v}")))
    }
}

fn digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Read a field CSV and its sidecar, including the sidecar in the digest list.
fn read_field(path: &Path, digests: &mut BTreeMap<String, String>) -> Result<VectorField> {
    let side = io::sidecar_path(path);
    if side.exists() {
        digests.insert(side.display().to_string(), digest(&side)?);
    }
    io::read_vector_field(path)
}

/// Execute one command. Errors are input or precondition failures; check
/// failures are recorded in the returned report.
pub fn run(config: &RunConfig) -> Result<Report> {
    let cmd = &config.command;
    let mut report = Report::new(cmd.name());
    for path in cmd.inputs() {
        report
            .input_digests
            .insert(path.display().to_string(), digest(path)?);
    }
    match cmd {
        Command::Modulus {
            family,
            grid,
            p,
            tol,
            max_iter,
            rho_out,
        } => {
            positive("tol", *tol)?;
            let grid = io::read_grid(grid)?;
            let fam = io::read_family(family)?;
            let res = solve_modulus(&assemble_problem(&fam, &grid, *p)?, *tol, *max_iter)?;
            let s = res.summary();
            report.summary.insert("value".into(), json!(s.value));
            report
                .summary
                .insert("dual_value".into(), json!(s.dual_value));
            report.summary.insert("gap".into(), json!(s.gap));
            report
                .summary
                .insert("violation".into(), json!(s.violation));
            report
                .summary
                .insert("iterations".into(), json!(s.iterations));
            report.summary.insert("curves".into(), json!(fam.len()));
            report.checks.push(Check::flag("converged", s.converged));
            report
                .checks
                .push(Check::upper("duality gap", s.gap, tol * (1.0 + s.value)));
            report
                .checks
                .push(Check::upper("constraint violation", s.violation, *tol));
            if let Some(path) = rho_out {
                io::write_vector_field(
                    path,
                    &VectorField::from_scalar(&res.rho_star, NormTag::L2),
                )?;
                report
                    .notes
                    .push(format!("density written to {}", path.display()));
            }
        }
        Command::Norms {
            f,
            p,
            tol,
            samples,
            seed,
        } => {
            let field = read_field(f, &mut report.input_digests)?;
            let rep = norm_equivalence_check(&field, *p, *tol)?;
            report.summary.insert("lp".into(), json!(rep.lp));
            report.summary.insert("w_norm".into(), json!(rep.w_norm));
            report.summary.insert("r_norm".into(), json!(rep.r_norm));
            report.summary.insert("ratio".into(), json!(rep.ratio));
            report
                .summary
                .insert("sqrtN_margin".into(), json!(rep.sqrt_n_margin));
            report
                .summary
                .insert("gstar_mode".into(), json!(rep.dual_set));
            if rep.one_sided {
                report
                    .notes
                    .push("g* was sampled: only r_norm <= w_norm is checked".into());
            }
            report.checks.extend(rep.checks());
            if let Some(count) = samples {
                let ub = upper_gradient_star_sampled(&field, *count, *seed)?;
                let r_lower = lp_norm(&field, *p)? + ub.gstar.lp_norm(*p)?;
                report
                    .summary
                    .insert("r_norm_sampled".into(), json!(r_lower));
                report.checks.push(Check::upper(
                    "sampled r_norm <= r_norm",
                    r_lower,
                    rep.r_norm + tol,
                ));
            }
        }
        Command::Weakcheck {
            f,
            cand,
            axis,
            bumps,
            tol,
        } => {
            positive("tol", *tol)?;
            let field = read_field(f, &mut report.input_digests)?;
            let cand = read_field(cand, &mut report.input_digests)?;
            let tests = io::read_bumps(bumps)?;
            let rep = weak_derivative_check(&field, &cand, *axis, &tests, *tol)?;
            report.checks.extend(rep.checks());
            report.summary.insert("axis".into(), json!(rep.axis));
            report.summary.insert("bumps".into(), json!(rep.bumps));
        }
        Command::Acbound { f, g, curve, tol } => {
            let field = read_field(f, &mut report.input_digests)?;
            let g = read_field(g, &mut report.input_digests)?;
            if g.dim_m() != 1 {
                return Err(Error::Argument(
                    "g must have exactly one value column".into(),
                ));
            }
            let c = io::read_polyline(curve)?;
            let rep = ac_bound_check(&field, &g.component(0), &c, *tol)?;
            report.summary.insert("pairs".into(), json!(rep.pairs));
            report
                .summary
                .insert("max_excess".into(), json!(rep.max_excess));
            report.checks.extend(rep.checks());
        }
        Command::Counterexample {
            t,
            ladder,
            p,
            m,
            c0,
        } => {
            let floor = match c0 {
                Some(v) => *v,
                None => dichotomy_fixture()?.c0,
            };
            let truncation = match m {
                Some(m) => Truncation::Fixed { m: *m },
                None => Truncation::TailScaled,
            };
            let ladder = parse_ladder(ladder)?;
            let rep = dichotomy_report(*t, &ladder, truncation, *p, floor)?;
            report.checks.extend(rep.checks());
            report.series.push(rep.series());
            report.summary.insert("t".into(), json!(rep.t));
            report
                .summary
                .insert("gap_floor".into(), json!(rep.gap_floor));
            report
                .summary
                .insert("r_spread".into(), json!(rep.r_spread));
            report.summary.insert("rungs".into(), json!(rep.rungs));
            report
                .summary
                .insert("verdict".into(), json!(rep.verdict.map(|v| v.line())));
        }
        Command::Suite { only } => {
            let ids: Vec<u8> = if only.is_empty() {
                CRITERIA.to_vec()
            } else {
                only.clone()
            };
            for id in ids {
                let out = run_criterion(id)?;
                report.notes.extend(out.summary_lines());
                for mut c in out.checks {
                    c.name = format!("criterion {id}: {}", c.name);
                    report.checks.push(c);
                }
                report.series.extend(out.series);
            }
        }
    }
    Ok(report)
}

fn parse_ladder(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad ladder entry {x:?}")))
        })
        .collect()
}

/// One CSV per series in `dir`, named after the series. Returns the files written.
pub fn export_plot_data(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.series.is_empty() {
        eprintln!("notice: report has no series; nothing exported");
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir)?;
    report
        .series
        .iter()
        .map(|s| {
            let stem: String = s
                .name
                .chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                        c
                    } else {
                        '_'
                    }
                })
                .collect();
            let path = dir.join(format!("{stem}.csv"));
            io::write_series_csv(&path, s)?;
            Ok(path)
        })
        .collect()
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Argument(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}
