use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coopbif::config::TValue;
use coopbif::{run_experiment, Experiment, ExperimentConfig, RunError, OUTPUT_ROOT_ENV};

#[derive(Parser)]
#[command(name = "coopbif", version, about = "Bifurcation experiments for cooperative nonlocal logistic systems")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Multi-start Newton solve at a single value of t.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// A number or a multiple of t₁ such as `1.01t1`.
        #[arg(long)]
        t: TValue,
    },
    /// Continue the positive branch from (t₁, 0).
    Branch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t_max: Option<TValue>,
    },
    /// Bisect for the existence threshold of positive solutions.
    Threshold {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        bisect_tol: Option<f64>,
    },
    /// Kernel of the linearization at t = 1.
    LemmaE {
        #[arg(long)]
        config: PathBuf,
    },
    /// Continue the branch and audit every point.
    Audit {
        #[arg(long)]
        config: PathBuf,
    },
}

fn prepare(verb: Verb) -> Result<ExperimentConfig, RunError> {
    let (path, experiment) = match &verb {
        Verb::Solve { config, .. } => (config, Experiment::Solve),
        Verb::Branch { config, .. } => (config, Experiment::Branch),
        Verb::Threshold { config, .. } => (config, Experiment::Threshold),
        Verb::LemmaE { config } => (config, Experiment::LemmaE),
        Verb::Audit { config } => (config, Experiment::Audit),
    };
    let mut config = ExperimentConfig::load(path)?;
    config.experiment = Some(experiment);
    match verb {
        Verb::Solve { t, .. } => config.knobs.t = Some(t),
        Verb::Branch { t_max: Some(t), .. } => config.knobs.t_max = t,
        Verb::Threshold { bisect_tol: Some(tol), .. } => config.knobs.bisect_tol = tol,
        _ => {}
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let root = std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from);
    let result = prepare(cli.verb).and_then(|config| run_experiment(&config, root.as_deref()));
    match result {
        Ok(manifest) => {
            for v in &manifest.verdicts {
                let tag = if v.passed { "PASS" } else { "FAIL" };
                if v.detail.is_empty() {
                    println!("{tag}  {}", v.name);
                } else {
                    println!("{tag}  {}  ({})", v.name, v.detail);
                }
            }
            println!("{} artifacts, {:.2} s", manifest.artifacts.len(), manifest.wall_clock_seconds);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("coopbif: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
