//! Scheduling and running recommendation cycles per channel, posting
//! through a connector and feeding reactions back into the knowledge base.

mod config;
mod connector;
mod schedule;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{ChannelConfig, ConfigError, Frequency, ParseFrequencyError, Windows};
pub use connector::{permalink, Connector, ConnectorError, LoopbackConnector};
pub use schedule::{next_post_time, Clock, ManualClock, SystemClock};

use crate::clients::{ClientError, CompletionClient, PaperRecord, PaperSource, Recommender};
use crate::generation::Generator;
use crate::kb::{
    write_event, ChannelState, IndexUpdate, KbError, KnowledgeBase, MemberId, Payload, PaperRef,
    SocialEvent,
};
use crate::signals::{detect_all, rank_and_select, SelectedSignals, SignalContext};

/// Actor recorded on config events.
pub const CONFIG_ACTOR: &str = "config";

/// Largest pool requested from the recommender when widening a search.
const MAX_POOL: usize = 1000;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Connector(#[from] ConnectorError),
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("seq {seq} in channel {channel} is not a bot post")]
    NotBotPost { channel: String, seq: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleStatus {
    Posted,
    SkippedNoCandidates,
    SkippedGenerationFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleResult {
    pub status: CycleStatus,
    pub posted_seq: Option<u64>,
    pub candidate: Option<PaperRef>,
    pub selected: SelectedSignals,
    /// Papers handed to the recommender as positives.
    #[serde(default)]
    pub seeds: Vec<PaperRef>,
}

impl CycleResult {
    fn skipped(status: CycleStatus, seeds: Vec<PaperRef>) -> Self {
        CycleResult {
            status,
            posted_seq: None,
            candidate: None,
            selected: SelectedSignals::default(),
            seeds,
        }
    }
}

/// Receives every committed event, e.g. to persist the log.
pub trait EventSink: Send {
    fn persist(&mut self, event: &SocialEvent) -> Result<(), KbError>;
}

/// Appends events to a line-per-record writer.
pub struct JsonlSink<W: Write + Send>(pub W);

impl<W: Write + Send> EventSink for JsonlSink<W> {
    fn persist(&mut self, event: &SocialEvent) -> Result<(), KbError> {
        write_event(&mut self.0, event)?;
        self.0.flush().map_err(|e| KbError::Persistence(e.to_string()))
    }
}

/// Members mention-tokenized in the last `n` bot posts of the channel.
pub fn recently_mentioned(channel: &ChannelState, n: usize) -> BTreeSet<MemberId> {
    channel
        .bot_posts()
        .rev()
        .take(n)
        .flat_map(|(_, m)| m.mentioned_members())
        .collect()
}

pub fn mention_allowed(channel: &ChannelState, member: &str) -> bool {
    !recently_mentioned(channel, channel.config.mention_cooldown).contains(member)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

pub struct Agent {
    kb: KnowledgeBase,
    papers: Arc<dyn PaperSource>,
    recommender: Arc<dyn Recommender>,
    llm: Arc<dyn CompletionClient>,
    connector: Box<dyn Connector>,
    sink: Option<Box<dyn EventSink>>,
    seed: u64,
    // None marks refs the source could not resolve
    records: BTreeMap<PaperRef, Option<PaperRecord>>,
}

impl Agent {
    pub fn new(
        papers: Arc<dyn PaperSource>,
        recommender: Arc<dyn Recommender>,
        llm: Arc<dyn CompletionClient>,
        connector: Box<dyn Connector>,
        seed: u64,
    ) -> Self {
        Agent {
            kb: KnowledgeBase::new(),
            papers,
            recommender,
            llm,
            connector,
            sink: None,
            seed,
            records: BTreeMap::new(),
        }
    }

    pub fn with_sink(mut self, sink: Box<dyn EventSink>) -> Self {
        self.sink = Some(sink);
        self
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn channel(&self, id: &str) -> Option<&ChannelState> {
        self.kb.channel(id)
    }

    pub fn connector(&self) -> &dyn Connector {
        self.connector.as_ref()
    }

    /// Rebuilds state from a persisted log without re-persisting it.
    pub fn restore(&mut self, events: impl IntoIterator<Item = SocialEvent>) -> Result<(), AgentError> {
        for e in events {
            self.commit(e, false)?;
        }
        Ok(())
    }

    fn commit(&mut self, event: SocialEvent, persist: bool) -> Result<IndexUpdate, AgentError> {
        let update = self.kb.ingest_event(event.clone())?;
        if persist {
            if let Some(sink) = self.sink.as_mut() {
                sink.persist(&event)?;
            }
        }
        self.connector.observe(&event);
        self.enrich(&event.channel, update.created.clone());
        Ok(update)
    }

    /// Ingests an event that already carries its seq.
    pub fn ingest(&mut self, event: SocialEvent) -> Result<IndexUpdate, AgentError> {
        self.commit(event, true)
    }

    /// Assigns the next seq in `channel` and commits the event.
    pub fn append(
        &mut self,
        channel: &str,
        ts: DateTime<Utc>,
        actor: &str,
        payload: Payload,
    ) -> Result<SocialEvent, AgentError> {
        let seq = self.kb.channel(channel).map_or(1, ChannelState::next_seq);
        let event = SocialEvent {
            seq,
            ts,
            channel: channel.to_string(),
            actor: actor.to_string(),
            payload,
        };
        self.commit(event.clone(), true)?;
        Ok(event)
    }

    pub fn post_message(
        &mut self,
        channel: &str,
        ts: DateTime<Utc>,
        actor: &str,
        text: &str,
    ) -> Result<SocialEvent, AgentError> {
        self.append(channel, ts, actor, Payload::message(text))
    }

    pub fn react(
        &mut self,
        channel: &str,
        ts: DateTime<Utc>,
        actor: &str,
        target_seq: u64,
        emoji: &str,
    ) -> Result<SocialEvent, AgentError> {
        self.append(channel, ts, actor, Payload::reaction(target_seq, emoji))
    }

    pub fn reply(
        &mut self,
        channel: &str,
        ts: DateTime<Utc>,
        actor: &str,
        parent_seq: u64,
        text: &str,
    ) -> Result<SocialEvent, AgentError> {
        self.append(channel, ts, actor, Payload::reply(parent_seq, text))
    }

    /// Reaction or reply aimed at a bot post; rejected for any other target.
    pub fn apply_feedback(&mut self, event: SocialEvent) -> Result<IndexUpdate, AgentError> {
        let target = event.target_seq().ok_or_else(|| AgentError::NotBotPost {
            channel: event.channel.clone(),
            seq: 0,
        })?;
        let is_bot_post = self
            .kb
            .channel(&event.channel)
            .and_then(|c| c.event(c.thread_root(target)))
            .is_some_and(|e| matches!(e.payload, Payload::BotPost(_)));
        if !is_bot_post {
            return Err(AgentError::NotBotPost {
                channel: event.channel,
                seq: target,
            });
        }
        self.ingest(event)
    }

    pub fn set_config(&mut self, config: ChannelConfig, ts: DateTime<Utc>) -> Result<SocialEvent, AgentError> {
        config.validate()?;
        let channel = config.channel.clone();
        self.append(&channel, ts, CONFIG_ACTOR, Payload::Config(Box::new(config)))
    }

    /// Current config, or the defaults for a channel never configured.
    pub fn config(&self, channel: &str) -> ChannelConfig {
        self.kb
            .channel(channel)
            .map_or_else(|| ChannelConfig::new(channel), |c| c.config.clone())
    }

    /// Events with seq greater than `since`.
    pub fn feed(&self, channel: &str, since: u64) -> Vec<SocialEvent> {
        self.kb.channel(channel).map_or_else(Vec::new, |c| {
            let from = usize::try_from(since).unwrap_or(usize::MAX).min(c.log().len());
            c.log()[from..].to_vec()
        })
    }

    pub fn mention_allowed(&self, channel: &str, member: &str) -> bool {
        self.kb.channel(channel).is_none_or(|c| mention_allowed(c, member))
    }

    fn lookup(&mut self, r: &PaperRef) -> Option<PaperRecord> {
        if let Some(hit) = self.records.get(r) {
            return hit.clone();
        }
        let got = match self.papers.fetch_paper_metadata(r) {
            Ok(rec) => Some(rec.with_degradation()),
            Err(ClientError::NotFound(_)) => None,
            Err(e) => {
                // transient: try again on a later event
                log::warn!("metadata for {r}: {e}");
                return None;
            }
        };
        self.records.insert(r.clone(), got.clone());
        got
    }

    fn enrich(&mut self, channel: &str, refs: Vec<PaperRef>) {
        for r in refs {
            if let Some(rec) = self.lookup(&r) {
                self.kb.attach_record(channel, rec);
            }
        }
    }

    /// Seed for the generation run of the cycle that would post `seq`.
    pub fn cycle_seed(&self, channel: &str, seq: u64) -> u64 {
        self.seed ^ fnv1a(channel) ^ seq.wrapping_mul(0x9e37_79b9_7f4a_7c15)
    }

    fn first_unseen(&self, channel: &ChannelState, seeds: &[PaperRef]) -> Option<PaperRecord> {
        let mut excluded = channel.mentioned_refs();
        excluded.extend(channel.recommended_refs());
        excluded.extend(seeds.iter().cloned());
        let mut k = channel.config.recommend_k.max(1);
        loop {
            let recs = match self.recommender.fetch_recommendations(seeds, k) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("recommender failed for {}: {e}", channel.id);
                    return None;
                }
            };
            let exhausted = recs.len() < k;
            if let Some(hit) = recs.into_iter().find(|p| !excluded.contains(&p.paper_ref)) {
                return Some(hit.with_degradation());
            }
            if exhausted || k >= MAX_POOL {
                return None;
            }
            k = (k * 4).min(MAX_POOL);
        }
    }

    fn member_publications(&self, channel: &ChannelState) -> BTreeMap<MemberId, Vec<PaperRecord>> {
        channel
            .members()
            .into_values()
            .filter_map(|m| {
                let id = m.linked_author_id.as_deref().filter(|a| !a.is_empty())?;
                match self.papers.author_papers(id) {
                    Ok(p) => Some((m.member_id.clone(), p)),
                    Err(e) => {
                        log::warn!("publications of {}: {e}", m.member_id);
                        None
                    }
                }
            })
            .collect()
    }

    /// One full cycle for `channel` at `now`. Either exactly one bot post is
    /// appended or nothing is.
    pub fn run_cycle(&mut self, channel_id: &str, now: DateTime<Utc>) -> Result<CycleResult, AgentError> {
        self.kb.ensure_channel(channel_id);
        let channel = self.kb.channel_or_err(channel_id)?;
        let seeds = channel.candidate_seeds(channel.config.windows.seed(), now);
        if seeds.is_empty() {
            return Ok(CycleResult::skipped(CycleStatus::SkippedNoCandidates, seeds));
        }
        let Some(candidate) = self.first_unseen(channel, &seeds) else {
            return Ok(CycleResult::skipped(CycleStatus::SkippedNoCandidates, seeds));
        };
        let ctx = SignalContext::new(channel, now).with_publications(self.member_publications(channel));
        let selected = rank_and_select(&detect_all(&candidate, &ctx));
        let seed = self.cycle_seed(channel_id, channel.next_seq());
        let link = |seq: u64| self.connector.permalink(channel_id, seq);
        let generated = Generator::for_channel(channel, self.llm.as_ref(), &link, seed)
            .generate(&candidate, &selected);
        let msg = match generated {
            Ok(m) => m,
            Err(e) => {
                log::warn!("generation failed for {channel_id}: {e}");
                return Ok(CycleResult {
                    candidate: Some(candidate.paper_ref),
                    selected,
                    ..CycleResult::skipped(CycleStatus::SkippedGenerationFailed, seeds)
                });
            }
        };
        let agent_id = channel.config.agent_id.clone();
        self.connector.post_message(channel_id, &msg)?;
        self.records
            .insert(candidate.paper_ref.clone(), Some(candidate.clone()));
        let ev = self.append(channel_id, now, &agent_id, Payload::BotPost(Box::new(msg)))?;
        Ok(CycleResult {
            status: CycleStatus::Posted,
            posted_seq: Some(ev.seq),
            candidate: Some(candidate.paper_ref),
            selected,
            seeds,
        })
    }

    /// When the channel's next post is due.
    pub fn next_post_time(&self, channel: &str, now: DateTime<Utc>) -> DateTime<Utc> {
        let cfg = self.config(channel);
        let last = self.kb.channel(channel).and_then(ChannelState::last_bot_post_ts);
        next_post_time(cfg.frequency, last, now)
    }

    /// Runs a cycle in every configured channel whose next post is due.
    pub fn tick(&mut self, now: DateTime<Utc>) -> Vec<(String, Result<CycleResult, AgentError>)> {
        let due: Vec<String> = self
            .kb
            .channels()
            .filter(|c| c.configured && self.next_post_time(&c.id, now) <= now)
            .map(|c| c.id.clone())
            .collect();
        due.into_iter()
            .map(|id| {
                let r = self.run_cycle(&id, now);
                (id, r)
            })
            .collect()
    }
}
