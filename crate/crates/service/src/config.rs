use std::path::{Path, PathBuf};

use serde::Deserialize;
use socialrag::agent::ConfigError;
use socialrag::ChannelConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceConfigError {
    #[error("reading config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("channel {channel}: {source}")]
    Channel { channel: String, source: ConfigError },
    #[error("channel {0} is configured twice")]
    DuplicateChannel(String),
}

fn default_log() -> PathBuf {
    PathBuf::from("events.jsonl")
}

fn default_tick() -> u64 {
    60
}

/// Settings for `serve`. Each `[[channels]]` table holds the fields of a
/// channel config; omitted fields take their defaults.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    /// Append-only event log, replayed on start.
    #[serde(default = "default_log")]
    pub event_log: PathBuf,
    /// Corpus file for the in-process clients. Without one the service
    /// talks to the live metadata and completion APIs.
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    /// Where fetched paper metadata is cached, for live clients.
    #[serde(default)]
    pub metadata_cache: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Seconds between scheduler ticks.
    #[serde(default = "default_tick")]
    pub tick_seconds: u64,
    #[serde(default)]
    pub channels: Vec<ChannelConfig>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            event_log: default_log(),
            corpus: None,
            metadata_cache: None,
            seed: 0,
            tick_seconds: default_tick(),
            channels: Vec::new(),
        }
    }
}

impl ServiceConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads a config file; relative paths in it resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ServiceConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ServiceConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text).map_err(|source| ServiceConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        fix(&mut self.event_log);
        if let Some(p) = self.corpus.as_mut() {
            fix(p);
        }
        if let Some(p) = self.metadata_cache.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), ServiceConfigError> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.channels {
            c.validate().map_err(|source| ServiceConfigError::Channel {
                channel: c.channel.clone(),
                source,
            })?;
            if !seen.insert(c.channel.as_str()) {
                return Err(ServiceConfigError::DuplicateChannel(c.channel.clone()));
            }
        }
        Ok(())
    }
}
