use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use penreg::harness::{self, FitOptions, RunConfig, ScenarioSource};
use penreg::model::Method;
use penreg::simulate::builtin_scenarios;
use penreg::tuning::DEFAULT_FOLDS;
use penreg::Error;

#[derive(Parser)]
#[command(name = "penreg", version, about = "Penalized linear regression estimators and simulation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Built-in scenario family.
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// JSON scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated method tags (default: all).
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    #[arg(long, default_value = "out")]
    outdir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one method to a CSV file and print a JSON record.
    Fit {
        #[arg(long)]
        method: Method,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        response: String,
        /// Fixed penalty level instead of the method's tuning rule.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a scenario family across methods and write aggregate CSVs.
    Bench(RunArgs),
    /// Per-method wall-clock study.
    Time(RunArgs),
    /// List the built-in scenario families, or show a config file.
    Scenarios {
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, conflicts_with = "scenario")]
        config: Option<PathBuf>,
    },
}

fn run_config(a: RunArgs, default_scenario: Option<&str>) -> Result<RunConfig, Error> {
    let scenario = match (a.scenario, a.config, default_scenario) {
        (Some(name), _, _) => ScenarioSource::Builtin(name),
        (None, Some(path), _) => ScenarioSource::Config(path),
        (None, None, Some(name)) => ScenarioSource::Builtin(name.into()),
        (None, None, None) => return Err(Error::InvalidParameter("give --scenario or --config".into())),
    };
    let mut cfg = RunConfig::new(scenario, a.outdir);
    if !a.method.is_empty() {
        cfg.methods = a.method;
    }
    cfg.replications = a.replications;
    cfg.base_seed = a.seed;
    cfg.workers = a.workers;
    cfg.folds = a.folds;
    Ok(cfg)
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("penreg: {e}");
    ExitCode::from(if e.is_numerical() { 3 } else { 2 })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Fit { method, input, response, lambda, folds, seed } => {
            let opts = FitOptions { folds, fold_seed: seed, lambda };
            let rec = harness::fit_csv(&input, &response, method, &opts)?;
            println!("{}", serde_json::to_string_pretty(&rec).map_err(|e| Error::Parse(e.to_string()))?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench(args) => {
            let cfg = run_config(args, None)?;
            let out = harness::cmd_bench(&cfg)?;
            for path in out.metric_files.values() {
                println!("{}", path.display());
            }
            if out.failures > 0 {
                eprintln!("penreg: {} fits failed, see the errors CSV", out.failures);
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Time(args) => {
            let cfg = run_config(args, Some("timing"))?;
            let out = harness::cmd_time(&cfg)?;
            print!("{}", harness::timing_csv(&out.rows));
            println!("# {}", out.hardware);
            if !out.failures.is_empty() {
                for f in &out.failures {
                    eprintln!("penreg: {} replication {}: {}", f.method, f.replication, f.message);
                }
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Scenarios { scenario, config } => {
            let families = match (scenario, config) {
                (Some(name), _) => vec![ScenarioSource::Builtin(name).resolve()?],
                (None, Some(path)) => vec![ScenarioSource::Config(path).resolve()?],
                (None, None) => builtin_scenarios(),
            };
            print!("{}", harness::describe_families(&families));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    run(cli).unwrap_or_else(|e| exit_for(&e))
}
