use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use werewolf_arena::report::{log_files, report_dir, write_ablation, write_report};
use werewolf_arena::runner::open_pool;
use werewolf_arena::{replay_file, Arena, ExperimentConfig, RunError};

/// Exit status: 0 success, 1 partial failure, 2 configuration error.
const PARTIAL: u8 = 1;
const CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "werewolf", version, about = "Seeded werewolf tournaments, replay checks and metric reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every game of an experiment.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        parallelism: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of games.
        #[arg(long)]
        games: Option<u64>,
    },
    /// Re-run logged inputs through a fresh engine and compare events.
    Replay {
        /// Log files or run directories.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Compute metric tables from a run directory.
    Report {
        dir: PathBuf,
        /// A second run with the experience pool enabled; adds an ablation table.
        #[arg(long)]
        pooled: Option<PathBuf>,
        /// Where to write report files; defaults to `<dir>/report`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        guard_literal: bool,
    },
    /// Move an experiment's experience pool in or out.
    Pool {
        #[command(subcommand)]
        action: PoolAction,
    },
}

#[derive(Subcommand)]
enum PoolAction {
    /// Write the pool as JSON lines to a file or stdout.
    Export {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Append experiences from a pool file to the experiment's pool.
    Import {
        #[arg(short, long)]
        config: PathBuf,
        file: PathBuf,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(CONFIG)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(PARTIAL)
        }
    }
}

enum Failure {
    Config(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::load(path).map_err(|e| Failure::Config(e.into()))
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Run {
            config,
            seed,
            parallelism,
            out,
            games,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if let Some(g) = games {
                cfg.n_games = g;
            }
            cfg.validate().map_err(|e| Failure::Config(e.into()))?;
            let arena = Arena::new(cfg).map_err(|e| match e {
                RunError::Config(m) => Failure::Config(anyhow::anyhow!(m)),
                other => Failure::Other(other.into()),
            })?;
            let summary = arena.run().map_err(anyhow::Error::from)?;
            let aborted = summary.aborted();
            println!(
                "{} games, {} aborted, logs in {}",
                summary.games.len(),
                aborted,
                arena.config().output_dir.join("logs").display()
            );
            Ok(if aborted > 0 { PARTIAL } else { 0 })
        }
        Command::Replay { paths } => {
            let mut files = Vec::new();
            for p in paths {
                if p.is_dir() {
                    files.extend(log_files(&p).with_context(|| format!("listing {}", p.display()))?);
                } else {
                    files.push(p);
                }
            }
            let mut failed = 0;
            for f in &files {
                match replay_file(f) {
                    Ok(v) => {
                        if !v.passed() {
                            failed += 1;
                        }
                        println!("{}: {v}", f.display());
                    }
                    Err(e) => {
                        failed += 1;
                        println!("{}: FAIL {e:#}", f.display());
                    }
                }
            }
            println!("{} logs, {failed} failed", files.len());
            Ok(if failed > 0 { PARTIAL } else { 0 })
        }
        Command::Report {
            dir,
            pooled,
            out,
            guard_literal,
        } => {
            let out = out.unwrap_or_else(|| dir.join("report"));
            let (report, loaded) = report_dir(&dir, guard_literal)?;
            let mut problems = loaded.skipped.len();
            for (path, reason) in &loaded.skipped {
                eprintln!("warning: skipped {}: {reason}", path.display());
            }
            if !loaded.aborted.is_empty() {
                eprintln!("note: {} aborted games excluded", loaded.aborted.len());
            }
            write_report(&out, &report).with_context(|| format!("writing {}", out.display()))?;
            print!("{}", werewolf_core::metrics::render_table(&report));
            if let Some(pooled) = pooled {
                let (with, loaded) = report_dir(&pooled, guard_literal)?;
                problems += loaded.skipped.len();
                write_ablation(&out, &report, &with).with_context(|| format!("writing {}", out.display()))?;
                println!();
                print!("{}", werewolf_core::metrics::render_ablation(&report, &with));
            }
            Ok(if problems > 0 { PARTIAL } else { 0 })
        }
        Command::Pool { action } => match action {
            PoolAction::Export { config, out } => {
                let cfg = load_config(&config)?;
                let pool = open_pool(&cfg).map_err(anyhow::Error::from)?;
                let text = pool.export_jsonl();
                match out {
                    Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                    None => print!("{text}"),
                }
                Ok(0)
            }
            PoolAction::Import { config, file } => {
                let cfg = load_config(&config)?;
                let pool = open_pool(&cfg).map_err(anyhow::Error::from)?;
                let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
                let added = pool.import_jsonl(&text).map_err(anyhow::Error::from)?;
                let path = cfg.pool_path();
                if let Some(dir) = path.parent() {
                    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                }
                pool.save(&path).map_err(anyhow::Error::from)?;
                println!("imported {added} experiences into {}", path.display());
                Ok(0)
            }
        },
    }
}
