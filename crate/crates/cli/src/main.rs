use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use modlab_cli::{export_plot_data, run, thread_cap, RunConfig};
use modlab_core::report::write_json;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match execute(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_BAD_INPUT)
        }
    }
}

fn execute(config: &RunConfig) -> modlab_core::Result<bool> {
    if let Some(n) = thread_cap()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| modlab_core::Error::Argument(e.to_string()))?;
    }
    let start = Instant::now();
    let mut report = run(config)?;
    report.wall_time_s = start.elapsed().as_secs_f64();

    match &config.out {
        Some(path) => {
            let mut file = fs::File::create(path)?;
            write_json(&mut file, &report)?;
            writeln!(file)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            write_json(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    if let Some(dir) = &config.plot_dir {
        for path in export_plot_data(&report, dir)? {
            eprintln!("wrote {}", path.display());
        }
    }
    for note in &report.notes {
        eprintln!("{note}");
    }
    for c in report.failed() {
        eprintln!(
            "FAIL {}: values={:?} bound={} margin={}",
            c.name, c.values, c.bound, c.margin
        );
    }
    Ok(report.pass())
}
