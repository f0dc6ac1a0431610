//! Experiment runner: reads a TOML config, runs one analysis, and writes CSV
//! outputs plus a `manifest.toml` that is enough to replay the run.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::Task;
use config::{ExperimentConfig, CONFIG_ENV};
use error::CliError;
use manifest::{RunManifest, Seeds, MANIFEST_FILE, MANIFEST_FORMAT};

#[derive(Debug, Parser)]
#[command(
    name = "latent-battleship",
    version,
    about = "Adversarial latent-state Battleship experiments"
)]
struct Cli {
    /// TOML config; every key is optional.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; also replaces the stage seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (overrides `workers`).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the configured attacker on each listed defender family.
    Eval {
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Nominal-versus-stress robustness gaps of the configured attacker.
    Gaps {
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Exact minimax value by double oracle on an enumerable board.
    SolveMinimax,
    /// Geometric shift metrics of the listed defender families.
    ShiftMetrics {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Single-attacker training under regime A, B or C.
    RunStage1,
    /// Restricted iterative best response with per-generation diagnostics.
    RunStage2 {
        #[arg(long)]
        generations: Option<usize>,
    },
    /// Two-bit example where equal marginals give different losses.
    DemoMarginal,
    /// Scalarization sweep between the nominal and stress families.
    ParetoSweep,
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (task, mut cfg) = match &cli.command {
        Command::Replay { manifest } => {
            let m = RunManifest::load(manifest)?;
            let task = Task::from_name(&m.command)
                .ok_or_else(|| CliError::Config(format!("command: unknown command `{}`", m.command)))?;
            (task, m.config)
        }
        other => {
            let cfg = match &cli.config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            (task_of(other), cfg)
        }
    };
    apply_overrides(&cli, &mut cfg)?;
    if cfg.workers > 0 {
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global();
    }
    let dir = cfg.output_dir.clone();
    let started = Instant::now();
    let outcome = commands::run(task, &cfg, &dir)?;
    let elapsed = started.elapsed().as_secs_f64();
    for line in &outcome.summary {
        println!("{line}");
    }
    let manifest = RunManifest {
        format: MANIFEST_FORMAT,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        command: task.name().to_string(),
        seeds: Seeds {
            master: cfg.seed,
            stage1: cfg.stage1.seed,
            stage2: cfg.stage2.seed,
        },
        outputs: outcome.outputs,
        results: outcome.results,
        timings: [("total_seconds".to_string(), elapsed)].into_iter().collect(),
        config: cfg,
    };
    manifest.write(&dir)?;
    println!("wrote {}", Path::new(&dir).join(MANIFEST_FILE).display());
    Ok(())
}

fn task_of(command: &Command) -> Task {
    match command {
        Command::Eval { .. } => Task::Eval,
        Command::Gaps { .. } => Task::Gaps,
        Command::SolveMinimax => Task::SolveMinimax,
        Command::ShiftMetrics { .. } => Task::ShiftMetrics,
        Command::RunStage1 => Task::RunStage1,
        Command::RunStage2 { .. } => Task::RunStage2,
        Command::DemoMarginal => Task::DemoMarginal,
        Command::ParetoSweep => Task::ParetoSweep,
        Command::Replay { .. } => unreachable!("replay resolves its own task"),
    }
}

fn apply_overrides(cli: &Cli, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.stage1.seed = seed;
        cfg.stage2.seed = seed;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    match cli.command {
        Command::Eval { episodes: Some(n) } | Command::Gaps { episodes: Some(n) } => cfg.eval.episodes = n,
        Command::ShiftMetrics { samples: Some(n) } => cfg.shift.samples = n,
        Command::RunStage2 { generations: Some(g) } => cfg.stage2.generations = g,
        _ => {}
    }
    cfg.validate()
}
