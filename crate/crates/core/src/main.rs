use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tfg_slam::harness::{cmd_infomap, cmd_run, cmd_verify, RunOptions, SigmaLevel};
use tfg_slam::planner::GoalPolicy;
use tfg_slam::Error;

#[derive(Parser)]
#[command(
    name = "tfgslam",
    version,
    about = "Active SLAM on a topological feature graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    ActiveTfg,
    NearestFrontier,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sigma {
    High,
    Medium,
    Low,
}

#[derive(Subcommand)]
enum Command {
    /// Run a policy on a scenario for one or more seeds.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "active-tfg")]
        policy: Policy,
        /// Comma-separated seeds; defaults to the scenario's list.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        dump_graph: bool,
        #[arg(long)]
        dump_roadmap: bool,
        #[arg(long)]
        dump_scores: bool,
    },
    /// Score a grid of candidate goals against the scenario's partial map.
    Infomap {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
        #[arg(long, value_enum, default_value = "high")]
        sigma_u: Sigma,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in validation suites.
    Verify,
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::ScenarioParse(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            policy,
            seeds,
            out,
            dump_graph,
            dump_roadmap,
            dump_scores,
        } => {
            let opts = RunOptions {
                scenario,
                policy: match policy {
                    Policy::ActiveTfg => GoalPolicy::InformationGain,
                    Policy::NearestFrontier => GoalPolicy::NearestFrontier,
                },
                seeds,
                out,
                dump_graph,
                dump_roadmap,
                dump_scores,
            };
            match cmd_run(&opts) {
                Ok(report) => {
                    print!("{}", report.to_text());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code(&e)
                }
            }
        }
        Command::Infomap {
            scenario,
            step,
            sigma_u,
            out,
        } => {
            let level = match sigma_u {
                Sigma::High => SigmaLevel::High,
                Sigma::Medium => SigmaLevel::Medium,
                Sigma::Low => SigmaLevel::Low,
            };
            let result = cmd_infomap(&scenario, step, level).and_then(|map| {
                let text = map.to_text();
                match out {
                    Some(path) => std::fs::write(&path, text)
                        .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
                    None => {
                        print!("{text}");
                        Ok(())
                    }
                }
            });
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code(&e)
                }
            }
        }
        Command::Verify => {
            let results = cmd_verify();
            for r in &results {
                println!(
                    "{} {} {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
            }
            if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
