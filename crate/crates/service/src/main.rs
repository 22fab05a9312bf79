use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand};
use socialrag::agent::SystemClock;
use socialrag::sim::ReportFormat;
use socialrag_service::{cli, router, Service, ServiceConfig};

#[derive(Parser)]
#[command(name = "socialrag", version, about = "Paper recommendations grounded in group-chat activity")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service and the posting scheduler.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Replay a transcript in virtual time.
    Replay {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the engagement report here (.json/.jsonl for json-lines, else csv).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print a channel's engagement report from an event log.
    Report {
        #[arg(long)]
        channel: String,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
        /// Event log to read; defaults to the one named in --config.
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

async fn serve(config: PathBuf, port: u16) -> anyhow::Result<()> {
    let cfg = ServiceConfig::load(&config)?;
    let service = Arc::new(Service::open(&cfg, Arc::new(SystemClock))?);
    let ticker = service.clone();
    let period = Duration::from_secs(cfg.tick_seconds.max(1));
    tokio::spawn(async move {
        let mut every = tokio::time::interval(period);
        loop {
            every.tick().await;
            let s = ticker.clone();
            if let Err(e) = tokio::task::spawn_blocking(move || s.tick()).await {
                log::error!("scheduler tick panicked: {e}");
            }
        }
    });
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port))
        .await
        .with_context(|| format!("binding port {port}"))?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service)).await?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Args::parse().command {
        Command::Serve { config, port } => tokio::runtime::Runtime::new()?.block_on(serve(config, port)),
        Command::Replay {
            transcript,
            seed,
            report,
        } => {
            let r = cli::run_replay(&transcript, seed, report.as_deref())?;
            print!("{}", cli::replay_summary(&r));
            Ok(())
        }
        Command::Report {
            channel,
            format,
            events,
            config,
        } => {
            let events = match (events, config) {
                (Some(e), _) => e,
                (None, Some(c)) => ServiceConfig::load(c)?.event_log,
                (None, None) => ServiceConfig::default().event_log,
            };
            let out = cli::run_report(&events, &channel, format)?;
            std::io::Write::write_all(&mut std::io::stdout(), &out)?;
            Ok(())
        }
    }
}
