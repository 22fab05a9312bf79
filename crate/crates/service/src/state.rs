use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter};
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, Utc};
use socialrag::agent::{AgentError, Clock, JsonlSink, LoopbackConnector};
use socialrag::clients::live::{AcademicGraphClient, LiveCompletion};
use socialrag::clients::{CachedPaperSource, ClientError, CorpusError, CorpusFixture, MockCompletion};
use socialrag::kb::{read_events, KbError};
use socialrag::{Agent, ChannelConfig, CompletionClient, CycleResult, PaperSource, Recommender};
use thiserror::Error;

use crate::config::ServiceConfig;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("event log {path}: {msg}")]
    Log { path: String, msg: String },
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Client(#[from] ClientError),
}

/// The agent behind a lock, plus the clock the service reads.
///
/// All mutation goes through the one lock, so events of a channel are
/// committed in the order requests arrive and cycles never overlap.
pub struct Service {
    agent: Mutex<Agent>,
    clock: Arc<dyn Clock>,
}

pub type SharedService = Arc<Service>;

type Clients = (Arc<dyn PaperSource>, Arc<dyn Recommender>, Arc<dyn CompletionClient>);

fn clients(cfg: &ServiceConfig) -> Result<Clients, ServiceError> {
    if let Some(path) = &cfg.corpus {
        let corpus = Arc::new(CorpusFixture::load(path)?);
        return Ok((corpus.clone(), corpus, Arc::new(MockCompletion::new())));
    }
    let papers: Arc<dyn PaperSource> = match &cfg.metadata_cache {
        Some(p) => Arc::new(CachedPaperSource::with_file(AcademicGraphClient::from_env(), p)?),
        None => Arc::new(CachedPaperSource::new(AcademicGraphClient::from_env())),
    };
    Ok((
        papers,
        Arc::new(AcademicGraphClient::from_env()),
        Arc::new(LiveCompletion::from_env()?),
    ))
}

impl Service {
    pub fn new(agent: Agent, clock: Arc<dyn Clock>) -> Self {
        Service {
            agent: Mutex::new(agent),
            clock,
        }
    }

    /// Builds the agent from `cfg`: replays the event log, then appends a
    /// config event for every channel whose stored config differs.
    pub fn open(cfg: &ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ServiceError> {
        let (papers, recommender, llm) = clients(cfg)?;
        let connector = Box::new(LoopbackConnector::new());
        let mut agent = Agent::new(papers, recommender, llm, connector, cfg.seed);

        let path = &cfg.event_log;
        let log_err = |msg: String| ServiceError::Log {
            path: path.display().to_string(),
            msg,
        };
        if path.exists() {
            let f = File::open(path).map_err(|e| log_err(e.to_string()))?;
            let events = read_events(BufReader::new(f))?;
            log::info!("restoring {} events from {}", events.len(), path.display());
            agent.restore(events)?;
        } else if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| log_err(e.to_string()))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| log_err(e.to_string()))?;
        let mut agent = agent.with_sink(Box::new(JsonlSink(BufWriter::new(file))));

        let now = clock.now();
        for c in &cfg.channels {
            let current = agent.kb().channel(&c.channel).filter(|s| s.configured).map(|s| &s.config);
            if current != Some(c) {
                agent.set_config(c.clone(), now)?;
            }
        }
        Ok(Self::new(agent, clock))
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    pub fn agent(&self) -> MutexGuard<'_, Agent> {
        // a panic mid-request leaves the agent consistent: commits are atomic
        self.agent.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn config(&self, channel: &str) -> ChannelConfig {
        self.agent().config(channel)
    }

    /// Runs every due cycle at the clock's current time.
    pub fn tick(&self) -> Vec<(String, Result<CycleResult, AgentError>)> {
        let now = self.now();
        let results = self.agent().tick(now);
        for (channel, r) in &results {
            match r {
                Ok(CycleResult { posted_seq: Some(seq), .. }) => log::info!("posted #{seq} in {channel}"),
                Ok(c) => log::debug!("cycle {channel}: {:?}", c.status),
                Err(e) => log::error!("cycle {channel}: {e}"),
            }
        }
        results
    }
}
