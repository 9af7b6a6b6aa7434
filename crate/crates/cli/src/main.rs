use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pacgibbs_cli::commands::{self, SimulateArgs};
use pacgibbs_cli::{run_experiment, CliResult, ExperimentConfig, KvConfig};

#[derive(Parser)]
#[command(name = "pacgibbs", version, about = "Sparse Gibbs estimator for time series prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a benchmark process and write it as index,value CSV.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// align1, align2 or align3.
        #[arg(long)]
        model: Option<String>,
        /// uniform or gaussian.
        #[arg(long)]
        innovation: Option<String>,
        #[arg(long)]
        length: Option<usize>,
    },
    /// Fit gibbs, aic or full on a series CSV and print a key=value report.
    Fit {
        series: PathBuf,
        #[arg(long, default_value = "gibbs")]
        method: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full simulation study, writing results.csv and summary.csv.
    Experiment {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides experiment.master_seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Baseline estimator (yule_walker or ols); overrides baseline.method.
        #[arg(long)]
        method: Option<String>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Evaluate the oracle-inequality quantities for inputs in a key=value file.
    Bounds {
        inputs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            out,
            model,
            innovation,
            length,
        } => {
            let kv = KvConfig::load_opt(config.as_deref())?;
            let args = SimulateArgs {
                model,
                innovation,
                length,
                seed,
            };
            emit(&commands::cmd_simulate(kv, &args)?, out.as_deref())
        }
        Command::Fit {
            series,
            method,
            config,
            seed,
            out,
        } => {
            let method = commands::parse_fit_method(&method)?;
            let kv = KvConfig::load_opt(config.as_deref())?;
            let series = commands::read_series(&series)?;
            emit(&commands::cmd_fit(kv, &series, method, seed)?, out.as_deref())
        }
        Command::Experiment {
            config,
            seed,
            out,
            method,
            jobs,
        } => {
            let kv = KvConfig::load_opt(config.as_deref())?;
            let mut cfg = ExperimentConfig::from_kv(kv)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(m) = method {
                cfg.baseline = commands::parse_baseline(&m)?;
            }
            let output = run_experiment(&cfg, jobs, &out)?;
            println!(
                "wrote {} result rows to {} and {} summary rows to {}",
                output.results.len(),
                output.results_path.display(),
                output.summary.len(),
                output.summary_path.display()
            );
            Ok(())
        }
        Command::Bounds { inputs, out } => {
            let kv = KvConfig::load(&inputs)?;
            emit(&commands::cmd_bounds(kv)?, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pacgibbs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
