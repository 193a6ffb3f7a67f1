use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use parlor_cli::{commands, server};
use parlor_core::gateway::{SessionManager, DEFAULT_MAX_SESSIONS};
use parlor_core::telemetry::{JsonlSink, SynthConfig};

#[derive(Parser)]
#[command(name = "parlor", about = "Open-domain social chat engine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter a forum post dump into a content pack.
    Ingest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Summarize conversation logs into a module report.
    Analyze {
        #[arg(long)]
        logs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Chat in the terminal.
    Chat {
        #[arg(long)]
        packs: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "PARLOR_LOG_DIR")]
        logdir: Option<PathBuf>,
    },
    /// Serve the chat protocol over websocket and HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        packs: Option<PathBuf>,
        #[arg(long, env = "PARLOR_LOG_DIR")]
        logdir: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_SESSIONS)]
        max_sessions: usize,
    },
    /// Replay a transcript and print each system turn.
    Replay {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        packs: Option<PathBuf>,
    },
    /// Write a synthetic conversation log.
    SynthLogs {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        per_module: usize,
    },
}

fn manager(packs: Option<&std::path::Path>, seed: u64, logdir: Option<PathBuf>, max: usize) -> Result<SessionManager> {
    let engine = commands::build_engine(packs, seed)?;
    let mut m = SessionManager::new(Arc::new(engine), max);
    if let Some(dir) = logdir {
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let file = dir.join(format!("conversations-{}.jsonl", unix_ms()));
        m = m.with_sink(Arc::new(JsonlSink::open(&file)?));
    }
    Ok(m)
}

fn unix_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or_default()
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest {
            input,
            config,
            out,
            report,
        } => {
            let s = commands::ingest(&input, config.as_deref(), &out, &report)?;
            println!("accepted {}, rejected {}, wrote {} items to {}", s.accepted, s.rejected, s.items, out.display());
        }
        Command::Analyze { logs, out } => {
            let report = commands::analyze(&logs, &out)?;
            print!("{}", report.render_table());
        }
        Command::Chat { packs, seed, logdir } => {
            let m = manager(packs.as_deref(), seed, logdir, 1)?;
            commands::chat(&m, io::stdin().lock(), io::stdout().lock())?;
        }
        Command::Serve {
            port,
            packs,
            logdir,
            seed,
            max_sessions,
        } => {
            let m = Arc::new(manager(packs.as_deref(), seed, logdir, max_sessions)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], port))).await?;
                eprintln!("listening on {}", listener.local_addr()?);
                axum::serve(listener, server::router(m))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
        Command::Replay { transcript, packs } => {
            let engine = commands::build_engine(packs.as_deref(), 0)?;
            print!("{}", commands::replay_file(&engine, &transcript)?);
        }
        Command::SynthLogs { out, seed, per_module } => {
            let cfg = SynthConfig {
                conversations_per_module: per_module,
                seed,
                ..Default::default()
            };
            let n = commands::synth_logs(&cfg, &out)?;
            println!("wrote {n} records to {}", out.display());
        }
    }
    Ok(())
}
