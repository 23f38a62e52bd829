use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use nullgeo::cli::{parse_config, run_scenario};
use nullgeo::Error;

/// Numerical toolkit for null hypersurface geometry: scenario runner.
#[derive(Parser)]
#[command(name = "nullgeo", version, about)]
struct Args {
    /// Scenario to run: curvature, geodesic, congruence, focusing-sweep,
    /// cone, graph-theta, solve, maxprin or splitting-verify.
    scenario: String,
    /// Configuration file (flat `key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSVs, plots and the run manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also emit static SVG plots.
    #[arg(long)]
    plot: bool,
}

/// Exit codes: 0 pass, 1 assertion failure, 2 usage/config error,
/// 3 numeric failure.
fn error_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::UnknownHypersurface(_)
        | Error::ChartMismatch { .. }
        | Error::LatticeMismatch(_)
        | Error::Io(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("nullgeo: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match parse_config(&text, Some(&args.scenario)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("nullgeo: config error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_scenario(&cfg, &args.out, args.plot) {
        Ok(outcome) => {
            for (name, pass) in &outcome.assertions {
                println!("{}: {name}", if *pass { "PASS" } else { "FAIL" });
            }
            println!("manifest: {}", outcome.manifest_path.display());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("nullgeo: scenario `{}` failed: {e}", cfg.scenario);
            ExitCode::from(error_code(&e))
        }
    }
}
