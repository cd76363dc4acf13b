use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use plcp::data::{dataset_paths, load_dataset};
use plcp::experiment::{
    cmd_generate, cmd_run, cmd_sweep, inspect, resolve_output_dir, ExperimentConfig, OUTPUT_DIR_ENV,
};

/// Partial-label learning with a partner classifier.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a TOML spec.
    Generate {
        spec: PathBuf,
        #[arg(short, long, default_value = "data")]
        out: PathBuf,
    },
    /// Paired base vs. PLCP runs over the configured seeds.
    Run {
        config: PathBuf,
        #[arg(short, long, env = OUTPUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
    /// Cartesian hyper-parameter sweep.
    Sweep {
        config: PathBuf,
        #[arg(short, long, env = OUTPUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
    /// Print dataset statistics. Takes a directory holding
    /// features.csv / candidates.csv / truth.csv.
    Inspect { dir: PathBuf },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Generate { spec, out } => {
            let ds = cmd_generate(&spec, &out)
                .with_context(|| format!("generating from {}", spec.display()))?;
            println!("wrote {} samples to {}", ds.len(), out.display());
        }
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let dir = resolve_output_dir(out.as_deref(), &cfg);
            let run = cmd_run(&cfg, &dir)?;
            for s in &run.summary {
                println!(
                    "{:<16} test {:.4} ± {:.4}   transductive {:.4} ± {:.4}   ({} runs)",
                    s.method,
                    s.test_accuracy_mean,
                    s.test_accuracy_std,
                    s.transductive_accuracy_mean,
                    s.transductive_accuracy_std,
                    s.runs
                );
            }
            if !run.failures.is_empty() {
                bail!(
                    "{} seed(s) failed; see {}",
                    run.failures.len(),
                    dir.join("failures.csv").display()
                );
            }
        }
        Command::Sweep { config, out } => {
            let cfg = ExperimentConfig::from_file(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let dir = resolve_output_dir(out.as_deref(), &cfg);
            let sweep = cmd_sweep(&cfg, &dir)?;
            println!(
                "{} rows written to {}",
                sweep.rows.len(),
                dir.join("sweep.csv").display()
            );
            if !sweep.failures.is_empty() {
                bail!(
                    "{} run(s) failed; see {}",
                    sweep.failures.len(),
                    dir.join("failures.csv").display()
                );
            }
        }
        Command::Inspect { dir } => {
            let (f, c, t) = dataset_paths(&dir);
            let truth = t.exists().then_some(t.as_path());
            let ds = load_dataset(&f, &c, truth)
                .with_context(|| format!("loading dataset from {}", dir.display()))?;
            println!("{}", inspect(&ds));
        }
    }
    Ok(())
}
