//! `memrep`: run, validate and reproduce delayed imitation experiments.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.
//! Every outcome is reported as one JSON line on stdout (success) or
//! stderr (failure).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use memrep::config::{parse_config, validate, ExperimentConfig, Finding};
use memrep::experiment::{preset, run_experiment, RunSummary, PRESETS};
use memrep::Error;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "memrep",
    version,
    about = "Finite-population imitation dynamics with memory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        config: PathBuf,
        /// Worker threads for replicate loops.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory; defaults to the config's `output` or `memrep-out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration file and list every problem found.
    Validate { config: PathBuf },
    /// Run a built-in experiment.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

enum Failure {
    Invalid(Vec<Finding>),
    Runtime(Error),
}

fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::from_file(path).map_err(Failure::Invalid)
}

fn execute(cfg: &ExperimentConfig, out: &Path, jobs: Option<usize>) -> Result<RunSummary, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Runtime(Error::Config(e.to_string())))?;
    pool.install(|| run_experiment(cfg, out))
        .map_err(Failure::Runtime)
}

fn report_success(summary: &RunSummary) {
    let files: Vec<String> = summary
        .files
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    println!(
        "{}",
        json!({"status": "ok", "out": summary.out_dir.display().to_string(), "files": files})
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, jobs, out } => load(&config).and_then(|cfg| {
            let out = out
                .or_else(|| {
                    cfg.output
                        .as_ref()
                        .map(|o| config.parent().unwrap_or(Path::new(".")).join(o))
                })
                .unwrap_or_else(|| PathBuf::from("memrep-out"));
            execute(&cfg, &out, jobs).map(|s| report_success(&s))
        }),
        Command::Validate { config } => validate_file(&config).map(|()| {
            println!("{}", json!({"status": "ok", "findings": []}));
        }),
        Command::Preset { name, out, jobs } => preset(&name)
            .map_err(Failure::Invalid)
            .and_then(|cfg| execute(&cfg, &out, jobs))
            .map(|s| report_success(&s)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(findings)) => {
            eprintln!("{}", json!({"status": "invalid", "findings": findings}));
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("{}", json!({"status": "error", "message": e.to_string()}));
            ExitCode::from(2)
        }
    }
}

fn validate_file(path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Failure::Invalid(vec![Finding {
            field: "config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        }])
    })?;
    let raw = parse_config(&text).map_err(|e| {
        Failure::Invalid(vec![Finding {
            field: "config".into(),
            message: e.to_string(),
        }])
    })?;
    let findings = validate(&raw, path.parent().unwrap_or(Path::new(".")));
    if findings.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invalid(findings))
    }
}
