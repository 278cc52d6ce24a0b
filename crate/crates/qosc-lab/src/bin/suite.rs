use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qosc_lab::suite::{explain, run_suite, workers_from_env, SuiteConfig, REGISTRY, WORKERS_ENV};

/// Numerical verification suites for q-oscillator L-operators and Q-operators.
#[derive(Parser)]
#[command(name = "suite", version, after_help = format!("Worker threads: set {WORKERS_ENV} (default: all cores)."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites selected by a key-value config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed given in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the full JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Describe a check: the relation, the identity and the tolerance policy.
    Explain { check_id: String },
    /// List all suites and check ids.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for c in REGISTRY {
                println!("{:<22} {:<17} {}", c.id, c.suite.name(), c.anchor);
            }
            ExitCode::SUCCESS
        }
        Command::Explain { check_id } => match explain(&check_id) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Run { config, seed, json } => {
            let setup = SuiteConfig::from_file(&config).and_then(|mut cfg| {
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                Ok((cfg, workers_from_env()?))
            });
            let (cfg, workers) = match setup {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            let report = match run_suite(&cfg, workers) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(2);
                }
            };
            print!("{}", report.text_summary());
            if let Some(path) = json {
                if let Err(e) = std::fs::write(&path, report.to_json()) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
