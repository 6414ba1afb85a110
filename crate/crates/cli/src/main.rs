use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use prolong_cli::scenario::{exit, load_scenario, run_scenario};
use prolong_cli::suite::run_property_suite;

#[derive(Parser)]
#[command(name = "prolong", version, about = "Equivariant extension of subbundles from a closed subset of a grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write diagnostics.csv, edges.csv and summary.json
    Run {
        config: PathBuf,
        /// report directory (overrides the config's `output.dir`)
        #[arg(long)]
        out: Option<PathBuf>,
        /// report a degenerate neighborhood W = Z with exit status 3
        #[arg(long)]
        strict: bool,
    },
    /// Validate a scenario without running it
    Validate { config: PathBuf },
    /// Run the seeded property suite and print its JSON report
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        trials: usize,
        /// also write the report to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, strict } => {
            let mut scenario = match load_scenario(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return code(exit::CONFIG_ERROR);
                }
            };
            scenario.config.strict |= strict;
            let dir = out.unwrap_or_else(|| scenario.config.output_dir());
            match run_scenario(&scenario, &dir) {
                Ok(outcome) => {
                    print!("{}", outcome.summary.to_json());
                    code(outcome.exit_code)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    code(exit::INVARIANT_FAILURE)
                }
            }
        }
        Command::Validate { config } => match load_scenario(&config) {
            Ok(s) => {
                println!(
                    "{}: ok ({} vertices, {} in Z)",
                    s.config.name,
                    s.base.vertex_count(),
                    s.base.z_vertices().len()
                );
                code(exit::SUCCESS)
            }
            Err(e) => {
                eprintln!("error: {e}");
                code(exit::CONFIG_ERROR)
            }
        },
        Command::Suite { seed, trials, out } => {
            let report = run_property_suite(seed, trials);
            let json = report.to_json();
            print!("{json}");
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, &json) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return code(exit::INVARIANT_FAILURE);
                }
            }
            code(if report.passed { exit::SUCCESS } else { exit::INVARIANT_FAILURE })
        }
    }
}
