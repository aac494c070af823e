use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use o2nc_core::analysis::Flavor;
use o2nc_lab::experiment::{cmd_compare, cmd_run};
use o2nc_lab::params::{cmd_params, ParamsRequest};
use o2nc_lab::regret_check::{regret_check, write_report, GridSpec};
use o2nc_lab::{ExperimentConfig, LabError};

const EXIT_ERROR: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const DEFAULT_OUT: &str = "o2nc-out";

#[derive(Parser)]
#[command(name = "o2nc-lab", version, about = "Experiments for the online-to-nonconvex conversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the theorem-derived discount, radius and horizon.
    Params(ParamsArgs),
    /// Run every seed of a config and write CSV and JSON artifacts.
    Run(RunArgs),
    /// Compare learner modes by iterations to a stationarity threshold.
    Compare(RunArgs),
    /// Check the deterministic regret bound on generated sequences.
    RegretCheck(RegretArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    L2,
    L1,
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    c: f64,
    /// Upper bound on F(x0) − inf F.
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, value_enum, default_value_t = FlavorArg::L2)]
    flavor: FlavorArg,
    /// Per-coordinate G_i (one value broadcasts).
    #[arg(long, value_delimiter = ',')]
    lipschitz: Vec<f64>,
    /// Per-coordinate σ_i (one value broadcasts).
    #[arg(long, value_delimiter = ',')]
    noise: Vec<f64>,
    /// Print JSON instead of key = value lines.
    #[arg(long)]
    json: bool,
    /// Also write params.json into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the config's seed list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Lift the desk caps on dimension, horizon and seed count.
    #[arg(long)]
    large: bool,
}

#[derive(Args)]
struct RegretArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,8")]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10,100,500")]
    horizons: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99,1.0")]
    betas: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_file(path: &Path, text: &str) -> Result<(), LabError> {
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), LabError> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seeds) = &args.seeds {
        config.seeds = seeds.clone();
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok((config, out))
}

fn execute(cli: Cli) -> Result<bool, LabError> {
    match cli.command {
        Command::Params(a) => {
            let report = cmd_params(&ParamsRequest {
                epsilon: a.epsilon,
                lambda: a.lambda,
                c: a.c,
                delta: a.delta,
                dim: a.dim,
                flavor: match a.flavor {
                    FlavorArg::L2 => Flavor::L2,
                    FlavorArg::L1 => Flavor::L1,
                },
                lipschitz: a.lipschitz,
                noise: a.noise,
            })?;
            let json = serde_json::to_string_pretty(&report)?;
            if a.json {
                println!("{json}");
            } else {
                print!("{}", report.lines());
            }
            if let Some(dir) = a.out {
                std::fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
                write_file(&dir.join("params.json"), &(json + "\n"))?;
            }
            Ok(true)
        }
        Command::Run(a) => {
            let (config, out) = load(&a)?;
            let file = cmd_run(&config, &out, a.large)?;
            let agg = &file.aggregate;
            println!(
                "{} seeds, T = {}: mean stationarity {} ± {}, final {}",
                agg.seeds,
                file.plan.horizon,
                agg.mean_stationarity_mean,
                agg.mean_stationarity_stderr,
                agg.final_stationarity_mean
            );
            println!("status {} ({})", file.status, out.join("summary.json").display());
            Ok(file.passed())
        }
        Command::Compare(a) => {
            let (config, out) = load(&a)?;
            let file = cmd_compare(&config, &out, a.large)?;
            println!("target {}", file.target);
            for m in &file.modes {
                println!(
                    "{:<16} median {:>8}  reached {}/{}",
                    m.plan.mode,
                    m.median_iterations,
                    m.reached,
                    m.runs.len()
                );
            }
            println!("status {} ({})", file.status, out.join("compare.json").display());
            Ok(file.passed())
        }
        Command::RegretCheck(a) => {
            let report = regret_check(&GridSpec {
                dims: a.dims,
                horizons: a.horizons,
                betas: a.betas,
                trials: a.trials,
                seed: a.seed,
            })?;
            print!("{}", report.table());
            println!(
                "{} sequences, max ratio {}, {} violations",
                report.sequences,
                report.max_ratio,
                report.violations.len()
            );
            // Failures are always written so the sequence can be replayed.
            let out = match a.out {
                Some(dir) => Some(dir),
                None if !report.passed() => Some(PathBuf::from(DEFAULT_OUT)),
                None => None,
            };
            if let Some(dir) = out {
                for p in write_report(&report, &dir)? {
                    println!("wrote {}", p.display());
                }
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
