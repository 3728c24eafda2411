//! Command-line front end: scenario runs, verification suites, run comparison.

use clap::{Parser, Subcommand};
use mcfobs::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mcfobs", about = "Mean curvature flow with obstacles", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config and emit artifacts.
    Run {
        config: PathBuf,
        /// Output directory (defaults to the config name without extension).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named verification suite.
    Verify {
        suite: String,
        /// Reduced sizes for a quick smoke pass.
        #[arg(long)]
        quick: bool,
    },
    /// Compare two run manifests step by step.
    Compare {
        manifest_a: PathBuf,
        manifest_b: PathBuf,
        /// Assert a per-step inclusion direction ("a-in-b" or "b-in-a").
        #[arg(long)]
        assert_inclusion: Option<String>,
    },
}

const EXIT_OK: u8 = 0;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out.as_deref()),
        Command::Verify { suite, quick } => cmd_verify(&suite, quick),
        Command::Compare { manifest_a, manifest_b, assert_inclusion } => {
            cmd_compare(&manifest_a, &manifest_b, assert_inclusion.as_deref())
        }
    };
    ExitCode::from(code)
}

fn classify_error(e: &Error) -> u8 {
    match e {
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        Error::StepFailed { source, .. } => classify_error(source),
        _ => EXIT_VALIDATION,
    }
}

fn cmd_run(config: &std::path::Path, out: Option<&std::path::Path>) -> u8 {
    let text = match std::fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return EXIT_VALIDATION;
        }
    };
    let scenario = match mcfobs::scenario::Scenario::from_json(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let out_dir = out
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from(format!("out_{}", scenario.name)));
    match scenario.execute() {
        Ok((traj, _, _)) => {
            for w in &traj.warnings {
                println!("warning: {w}");
            }
            match mcfobs::scenario::write_run_artifacts(&out_dir, &scenario, &traj) {
                Ok(path) => {
                    println!(
                        "run '{}': {} steps{}, manifest {}",
                        scenario.name,
                        traj.states.len() - 1,
                        traj.extinction_step
                            .map(|n| format!(" (extinct at step {n})"))
                            .unwrap_or_default(),
                        path.display()
                    );
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_VALIDATION
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            classify_error(&e)
        }
    }
}

fn cmd_verify(suite: &str, quick: bool) -> u8 {
    let suite = match mcfobs::verify::Suite::parse(suite) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let report = mcfobs::verify::run_suite(suite, quick);
    report.print();
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

fn cmd_compare(
    manifest_a: &std::path::Path,
    manifest_b: &std::path::Path,
    assert_inclusion: Option<&str>,
) -> u8 {
    match mcfobs::verify::compare_runs(manifest_a, manifest_b, assert_inclusion) {
        Ok(rows) => {
            println!("step,time,symmetric_difference,hausdorff");
            for r in &rows {
                println!("{},{:.6},{:.6e},{:.6e}", r.step, r.time, r.symdiff, r.hausdorff);
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
    }
}
