use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{ChannelConfig, ConfigError};
use crate::clients::{CorpusError, CorpusFixture, PaperRecord};
use crate::kb::{extract_item_refs, ChannelId, MemberId, Payload, SocialEvent};

/// Span replayed when the transcript gives no end.
pub const DEFAULT_SPAN_DAYS: i64 = 30;

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("invalid transcript: {0}")]
    Invalid(String),
    #[error("reading transcript: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing transcript: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Simulated members reacting to and discussing bot posts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audience {
    pub members: Vec<MemberId>,
    pub react_prob: f64,
    #[serde(default)]
    pub reply_prob: f64,
    /// Chance that a reaction is a positive emoji.
    #[serde(default = "default_positive_share")]
    pub positive_share: f64,
}

fn default_positive_share() -> f64 {
    0.7
}

/// A recorded chat history to replay against the agent in virtual time.
///
/// Events use the wire format with transcript-local seqs (1, 2, ...);
/// replay renumbers them around the bot posts it interleaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub channel: ChannelId,
    pub start: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<DateTime<Utc>>,
    pub config: ChannelConfig,
    /// Corpus file, relative to the transcript's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub corpus: Vec<PaperRecord>,
    #[serde(default)]
    pub events: Vec<SocialEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audience: Option<Audience>,
}

impl Transcript {
    /// Reads a transcript, resolving `corpus_path` against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TranscriptError> {
        let path = path.as_ref();
        let mut t: Transcript = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        if let (Some(rel), Some(dir)) = (t.corpus_path.as_ref(), path.parent()) {
            if rel.is_relative() {
                t.corpus_path = Some(dir.join(rel));
            }
        }
        Ok(t)
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.end
            .unwrap_or(self.start + TimeDelta::days(DEFAULT_SPAN_DAYS))
    }

    /// Inline records plus those in `corpus_path`.
    pub fn corpus(&self) -> Result<CorpusFixture, TranscriptError> {
        let mut records = self.corpus.clone();
        if let Some(p) = &self.corpus_path {
            records.extend(CorpusFixture::load(p)?.records().cloned());
        }
        Ok(CorpusFixture::new(records)?)
    }

    /// Checks everything replay relies on, before any processing.
    pub fn validate(&self, corpus: &CorpusFixture) -> Result<(), TranscriptError> {
        let bad = |m: String| Err(TranscriptError::Invalid(m));
        if self.config.channel != self.channel {
            return bad(format!(
                "config is for channel {}, transcript for {}",
                self.config.channel, self.channel
            ));
        }
        self.config.validate()?;
        if self.end() <= self.start {
            return bad("end must be after start".into());
        }
        let mut prev_ts = None;
        for (i, e) in self.events.iter().enumerate() {
            let at = format!("event {}", i + 1);
            if e.seq != i as u64 + 1 {
                return bad(format!("{at}: seq {} out of order", e.seq));
            }
            if e.channel != self.channel {
                return bad(format!("{at}: channel {}", e.channel));
            }
            if e.actor == self.config.agent_id {
                return bad(format!("{at}: actor is the agent"));
            }
            if prev_ts.is_some_and(|p| e.ts < p) {
                return bad(format!("{at}: timestamp goes backwards"));
            }
            prev_ts = Some(e.ts);
            match &e.payload {
                Payload::Message(m) => {
                    if let Some(r) = extract_item_refs(&m.text).into_iter().find(|r| !corpus.contains(r)) {
                        return bad(format!("{at}: {r} is not in the corpus"));
                    }
                }
                Payload::Reaction(_) | Payload::Reply(_) => {
                    let t = e.target_seq().unwrap_or(0);
                    if t == 0 || t >= e.seq {
                        return bad(format!("{at}: target {t} is not an earlier event"));
                    }
                }
                Payload::BotPost(_) | Payload::Config(_) => {
                    return bad(format!("{at}: {:?} events are generated by replay", e.kind()));
                }
            }
        }
        if let Some(a) = &self.audience {
            for p in [a.react_prob, a.reply_prob, a.positive_share] {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("audience probability {p} outside [0, 1]"));
                }
            }
            let uniq: BTreeSet<&MemberId> = a.members.iter().collect();
            if uniq.len() != a.members.len() || uniq.contains(&self.config.agent_id) {
                return bad("audience members must be distinct humans".into());
            }
        }
        Ok(())
    }
}
