use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pme_lab::lab::{list_experiments, plots, run_experiment, ExperimentConfig};

/// Runs the verification suites of the porous-medium travelling-wave laboratory.
#[derive(Parser)]
#[command(name = "pme-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite named in a TOML config and write CSV reports.
    Run {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render SVG plots.
        #[arg(long)]
        plots: bool,
    },
    /// List suites, their checks and anchors.
    List,
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("PME_LAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("PME_LAB_THREADS must be a positive integer, got {v:?}")),
        },
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", list_experiments());
            ExitCode::SUCCESS
        }
        Command::Run { config, seed, out, plots: want_plots } => {
            match threads_from_env() {
                Ok(Some(n)) => pme_lab::par::init_threads(n),
                Ok(None) => {}
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(2);
                }
            }
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.output = o;
            }
            if let Err(e) = std::fs::create_dir_all(&cfg.output) {
                eprintln!("error: output directory {}: {e}", cfg.output.display());
                return ExitCode::from(2);
            }
            let report = run_experiment(&cfg);
            print!("{}", report.summary());
            if let Err(e) = report.write(&cfg.output) {
                eprintln!("error: writing reports: {e}");
                return ExitCode::from(2);
            }
            if want_plots {
                match plots::render_all(&report.series, &cfg.output) {
                    Ok(paths) => eprintln!("wrote {} plots", paths.len()),
                    Err(e) => eprintln!("warning: {e}"),
                }
            }
            eprintln!("reports in {}", cfg.output.display());
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
