mod experiment;
mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use eigengap::Error;
use experiment::{ExperimentConfig, Overrides};

/// Run a seeded Monte Carlo experiment described by a JSON config.
///
/// Exit status is 0 on success, 1 for configuration or I/O problems and 2
/// when the data fall outside the regime the estimators support.
#[derive(Debug, Parser)]
#[command(name = "eigengap", version)]
struct Args {
    /// Experiment to run; must match the config's `command` key.
    #[arg(value_parser = ["coverage", "sweep", "symasym", "sympipe", "crlb-check", "neumann-check"])]
    command: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides run.base_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides run.out_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides run.n_trials.
    #[arg(long)]
    trials: Option<usize>,
}

enum Failure {
    Config(String),
    Numerical(String),
}

fn classify(e: Error) -> Failure {
    if e.is_regime_violation() {
        Failure::Numerical(e.to_string())
    } else {
        Failure::Config(e.to_string())
    }
}

fn run(args: &Args) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text).map_err(|e| Failure::Config(e.to_string()))?;
    if cfg.name() != args.command {
        return Err(Failure::Config(format!(
            "config describes `{}` but `{}` was requested",
            cfg.name(),
            args.command
        )));
    }
    cfg.apply(&Overrides {
        seed: args.seed,
        trials: args.trials,
        out: args.out.clone(),
    });
    cfg.validate().map_err(classify)?;
    let out_dir = cfg.out_dir();
    let rendered = report::execute(&cfg).map_err(classify)?;
    let names: Vec<String> = rendered.files.names().map(str::to_string).collect();
    rendered
        .files
        .commit(&out_dir)
        .map_err(|e| Failure::Config(format!("cannot write to {}: {e}", out_dir.display())))?;
    print!("{}", rendered.table);
    println!("wrote {} to {}", names.join(", "), out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical error: {}", msg.replace('\n', " "));
            ExitCode::from(2)
        }
    }
}
