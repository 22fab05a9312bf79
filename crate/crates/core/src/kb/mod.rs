//! Event-sourced social knowledge base.
//!
//! Every channel keeps its raw event log plus an index from each mentioned
//! paper to the posts, reactions, comments and members around it. The index
//! is a pure function of the log: [`KnowledgeBase::from_events`] rebuilds the
//! same state that incremental [`KnowledgeBase::ingest_event`] calls produce.

mod event;
mod refs;
mod sentiment;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use event::{
    read_events, write_event, ChannelId, EventKind, Member, MemberId, MessagePayload, Payload,
    ReactionPayload, ReplyPayload, SocialEvent,
};
pub use refs::{extract_item_refs, ParseRefError, PaperRef, RefSource};
pub use sentiment::{classify_reaction, normalize_emoji_name, EmojiLexicon, Sentiment};

use crate::agent::ChannelConfig;
use crate::clients::PaperRecord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("channel {channel}: expected seq {expected}, got {got}")]
    NonMonotoneSeq { channel: String, expected: u64, got: u64 },
    #[error("channel {channel}: seq {seq} references missing event {target}")]
    DanglingTarget { channel: String, seq: u64, target: u64 },
    #[error("config payload for channel {payload} delivered on channel {channel}")]
    ConfigChannelMismatch { channel: String, payload: String },
    #[error("unknown channel {0}")]
    UnknownChannel(String),
    #[error("paper {paper} is not indexed in channel {channel}")]
    UnknownPaper { channel: String, paper: String },
    #[error("event log: {0}")]
    Persistence(String),
}

/// Trailing time window for engagement queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    All,
    Trailing(TimeDelta),
}

impl Window {
    pub fn days(days: u32) -> Self {
        Window::Trailing(TimeDelta::days(i64::from(days)))
    }

    /// Whether `ts` falls inside the window ending at `now` (both ends inclusive).
    pub fn contains(&self, ts: DateTime<Utc>, now: DateTime<Utc>) -> bool {
        match self {
            Window::All => true,
            Window::Trailing(d) => ts <= now && ts >= now - *d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionPost {
    pub seq: u64,
    pub actor: String,
    pub ts: DateTime<Utc>,
    pub by_agent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReactionRecord {
    pub seq: u64,
    pub target_seq: u64,
    pub emoji_name: String,
    pub sentiment: Sentiment,
    pub actor: String,
    pub ts: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub seq: u64,
    /// Root post of the thread the comment belongs to.
    pub thread_seq: u64,
    pub actor: String,
    pub ts: DateTime<Utc>,
    pub text: String,
}

/// A paper joined with every post, reaction, comment and member that touched it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedPaper {
    pub paper_ref: PaperRef,
    pub record: Option<PaperRecord>,
    pub mention_posts: Vec<MentionPost>,
    pub reactions: Vec<ReactionRecord>,
    pub comments: Vec<CommentRecord>,
    pub interested_members: BTreeSet<MemberId>,
}

impl IndexedPaper {
    fn new(paper_ref: PaperRef) -> Self {
        IndexedPaper {
            paper_ref,
            record: None,
            mention_posts: Vec::new(),
            reactions: Vec::new(),
            comments: Vec::new(),
            interested_members: BTreeSet::new(),
        }
    }

    /// First post that shared the paper; the thread later messages cite.
    pub fn first_mention(&self) -> Option<&MentionPost> {
        self.mention_posts.first()
    }

    pub fn engagement_count(&self) -> usize {
        self.reactions.len() + self.comments.len()
    }

    /// Seqs of every event attached to this paper, ascending.
    pub fn evidence_seqs(&self) -> Vec<u64> {
        let mut seqs: Vec<u64> = self
            .mention_posts
            .iter()
            .map(|m| m.seq)
            .chain(self.reactions.iter().map(|r| r.seq))
            .chain(self.comments.iter().map(|c| c.seq))
            .collect();
        seqs.sort_unstable();
        seqs
    }

    /// Whether a human posted, reacted to or commented on the paper inside the window.
    pub fn human_engaged_within(&self, window: Window, now: DateTime<Utc>) -> bool {
        self.mention_posts
            .iter()
            .any(|m| !m.by_agent && window.contains(m.ts, now))
            || self.reactions.iter().any(|r| window.contains(r.ts, now))
            || self.comments.iter().any(|c| window.contains(c.ts, now))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngagementSummary {
    pub paper: PaperRef,
    pub mentions: usize,
    pub positive_reactions: usize,
    pub negative_reactions: usize,
    pub neutral_reactions: usize,
    pub comments: usize,
    pub last_activity_ts: Option<DateTime<Utc>>,
}

/// Papers created or touched by one ingested event.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexUpdate {
    pub created: Vec<PaperRef>,
    pub updated: Vec<PaperRef>,
}

impl IndexUpdate {
    pub fn is_empty(&self) -> bool {
        self.created.is_empty() && self.updated.is_empty()
    }

    pub fn touched(&self) -> impl Iterator<Item = &PaperRef> {
        self.created.iter().chain(&self.updated)
    }
}

/// State of one channel: config, raw log and the paper index derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub id: ChannelId,
    pub config: ChannelConfig,
    /// Set once a config event has been applied; only configured channels
    /// take part in scheduled cycles.
    pub configured: bool,
    log: Vec<SocialEvent>,
    papers: BTreeMap<PaperRef, IndexedPaper>,
    post_papers: BTreeMap<u64, Vec<PaperRef>>,
    thread_root: BTreeMap<u64, u64>,
    actors: BTreeSet<String>,
    lexicon: EmojiLexicon,
}

impl ChannelState {
    pub fn new(id: impl Into<ChannelId>) -> Self {
        let id = id.into();
        let config = ChannelConfig::new(id.clone());
        let lexicon = EmojiLexicon::with_overrides(&config.emoji_overrides);
        ChannelState {
            id,
            config,
            configured: false,
            log: Vec::new(),
            papers: BTreeMap::new(),
            post_papers: BTreeMap::new(),
            thread_root: BTreeMap::new(),
            actors: BTreeSet::new(),
            lexicon,
        }
    }

    pub fn log(&self) -> &[SocialEvent] {
        &self.log
    }

    pub fn last_seq(&self) -> u64 {
        self.log.last().map_or(0, |e| e.seq)
    }

    pub fn next_seq(&self) -> u64 {
        self.last_seq() + 1
    }

    pub fn event(&self, seq: u64) -> Option<&SocialEvent> {
        let idx = usize::try_from(seq.checked_sub(1)?).ok()?;
        self.log.get(idx)
    }

    pub fn lexicon(&self) -> &EmojiLexicon {
        &self.lexicon
    }

    pub fn papers(&self) -> impl Iterator<Item = &IndexedPaper> {
        self.papers.values()
    }

    pub fn paper(&self, r: &PaperRef) -> Option<&IndexedPaper> {
        self.papers.get(r)
    }

    /// Papers shared in the post with sequence number `seq`.
    pub fn post_papers(&self, seq: u64) -> &[PaperRef] {
        self.post_papers.get(&seq).map_or(&[], Vec::as_slice)
    }

    /// Root post of the thread containing `seq`.
    pub fn thread_root(&self, seq: u64) -> u64 {
        self.thread_root.get(&seq).copied().unwrap_or(seq)
    }

    pub fn is_agent(&self, actor: &str) -> bool {
        actor == self.config.agent_id
    }

    /// Roster members plus every human who has acted in the channel.
    pub fn members(&self) -> BTreeMap<MemberId, Member> {
        let mut out: BTreeMap<MemberId, Member> = self
            .config
            .roster
            .iter()
            .map(|m| (m.member_id.clone(), m.clone()))
            .collect();
        for a in &self.actors {
            out.entry(a.clone()).or_insert_with(|| Member::new(a.clone()));
        }
        out
    }

    pub fn member(&self, id: &str) -> Option<Member> {
        self.config
            .roster
            .iter()
            .find(|m| m.member_id == id)
            .cloned()
            .or_else(|| self.actors.contains(id).then(|| Member::new(id)))
    }

    pub fn bot_posts(&self) -> impl DoubleEndedIterator<Item = (&SocialEvent, &crate::generation::BotMessage)> {
        self.log.iter().filter_map(|e| match &e.payload {
            Payload::BotPost(m) => Some((e, m.as_ref())),
            _ => None,
        })
    }

    pub fn last_bot_post_ts(&self) -> Option<DateTime<Utc>> {
        self.bot_posts().next_back().map(|(e, _)| e.ts)
    }

    /// Every paper ever shared in the channel, by members or the agent.
    pub fn mentioned_refs(&self) -> BTreeSet<PaperRef> {
        self.papers.keys().cloned().collect()
    }

    pub fn recommended_refs(&self) -> Vec<PaperRef> {
        self.bot_posts()
            .filter_map(|(_, m)| m.recommended_ref())
            .collect()
    }

    /// Reaction and comment counts for `paper` inside `window` ending at `now`,
    /// aggregated over every post that mentions it.
    pub fn engagement_summary(
        &self,
        paper: &PaperRef,
        window: Window,
        now: DateTime<Utc>,
    ) -> Result<EngagementSummary, KbError> {
        let ip = self.papers.get(paper).ok_or_else(|| KbError::UnknownPaper {
            channel: self.id.clone(),
            paper: paper.to_string(),
        })?;
        let mut s = EngagementSummary {
            paper: paper.clone(),
            mentions: 0,
            positive_reactions: 0,
            negative_reactions: 0,
            neutral_reactions: 0,
            comments: 0,
            last_activity_ts: None,
        };
        let mut bump = |ts: DateTime<Utc>| {
            s.last_activity_ts = Some(s.last_activity_ts.map_or(ts, |t: DateTime<Utc>| t.max(ts)));
        };
        let mut mentions = 0;
        let mut counts = [0usize; 3];
        let mut comments = 0;
        for m in ip.mention_posts.iter().filter(|m| window.contains(m.ts, now)) {
            mentions += 1;
            bump(m.ts);
        }
        for r in ip.reactions.iter().filter(|r| window.contains(r.ts, now)) {
            counts[r.sentiment as usize] += 1;
            bump(r.ts);
        }
        for c in ip.comments.iter().filter(|c| window.contains(c.ts, now)) {
            comments += 1;
            bump(c.ts);
        }
        s.mentions = mentions;
        s.positive_reactions = counts[Sentiment::Positive as usize];
        s.negative_reactions = counts[Sentiment::Negative as usize];
        s.neutral_reactions = counts[Sentiment::Neutral as usize];
        s.comments = comments;
        Ok(s)
    }

    /// Papers mentioned inside the window that drew at least one positive
    /// reaction or comment there, most recently active first.
    pub fn candidate_seeds(&self, window: Window, now: DateTime<Utc>) -> Vec<PaperRef> {
        let mut seeds: Vec<(DateTime<Utc>, PaperRef)> = self
            .papers
            .values()
            .filter(|ip| ip.mention_posts.iter().any(|m| window.contains(m.ts, now)))
            .filter_map(|ip| {
                let s = self.engagement_summary(&ip.paper_ref, window, now).ok()?;
                (s.positive_reactions >= 1 || s.comments >= 1)
                    .then(|| (s.last_activity_ts.unwrap_or(now), ip.paper_ref.clone()))
            })
            .collect();
        seeds.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        seeds.into_iter().map(|(_, r)| r).collect()
    }

    fn validate(&self, event: &SocialEvent) -> Result<(), KbError> {
        let expected = self.next_seq();
        if event.seq != expected {
            return Err(KbError::NonMonotoneSeq {
                channel: self.id.clone(),
                expected,
                got: event.seq,
            });
        }
        if let Some(target) = event.target_seq() {
            if target == 0 || target >= event.seq || self.event(target).is_none() {
                return Err(KbError::DanglingTarget {
                    channel: self.id.clone(),
                    seq: event.seq,
                    target,
                });
            }
        }
        if let Payload::Config(cfg) = &event.payload {
            if cfg.channel != self.id {
                return Err(KbError::ConfigChannelMismatch {
                    channel: self.id.clone(),
                    payload: cfg.channel.clone(),
                });
            }
        }
        Ok(())
    }

    fn apply(&mut self, event: SocialEvent) -> IndexUpdate {
        let mut update = IndexUpdate::default();
        let is_agent = event.kind() == EventKind::BotPost || self.is_agent(&event.actor);
        if !is_agent && event.kind() != EventKind::Config {
            self.actors.insert(event.actor.clone());
        }
        match &event.payload {
            Payload::Message(_) | Payload::BotPost(_) => {
                let refs = match &event.payload {
                    Payload::Message(m) => extract_item_refs(&m.text),
                    Payload::BotPost(b) => b.recommended_ref().into_iter().collect(),
                    _ => unreachable!(),
                };
                for r in &refs {
                    let created = !self.papers.contains_key(r);
                    let ip = self
                        .papers
                        .entry(r.clone())
                        .or_insert_with(|| IndexedPaper::new(r.clone()));
                    ip.mention_posts.push(MentionPost {
                        seq: event.seq,
                        actor: event.actor.clone(),
                        ts: event.ts,
                        by_agent: is_agent,
                    });
                    if !is_agent {
                        ip.interested_members.insert(event.actor.clone());
                    }
                    if created {
                        update.created.push(r.clone());
                    } else {
                        update.updated.push(r.clone());
                    }
                }
                if !refs.is_empty() {
                    self.post_papers.insert(event.seq, refs);
                }
            }
            Payload::Reaction(r) => {
                let sentiment = self.lexicon.classify(&r.emoji_name);
                let targets = self.post_papers(r.target_seq).to_vec();
                for p in targets {
                    let ip = self.papers.get_mut(&p).expect("post_papers entries are indexed");
                    ip.reactions.push(ReactionRecord {
                        seq: event.seq,
                        target_seq: r.target_seq,
                        emoji_name: r.emoji_name.clone(),
                        sentiment,
                        actor: event.actor.clone(),
                        ts: event.ts,
                    });
                    if sentiment == Sentiment::Positive && !is_agent {
                        ip.interested_members.insert(event.actor.clone());
                    }
                    update.updated.push(p);
                }
            }
            Payload::Reply(r) => {
                let root = self.thread_root(r.parent_seq);
                self.thread_root.insert(event.seq, root);
                let targets = self.post_papers(root).to_vec();
                for p in targets {
                    let ip = self.papers.get_mut(&p).expect("post_papers entries are indexed");
                    ip.comments.push(CommentRecord {
                        seq: event.seq,
                        thread_seq: root,
                        actor: event.actor.clone(),
                        ts: event.ts,
                        text: r.text.clone(),
                    });
                    if !is_agent {
                        ip.interested_members.insert(event.actor.clone());
                    }
                    update.updated.push(p);
                }
            }
            Payload::Config(cfg) => {
                self.config = (**cfg).clone();
                self.lexicon = EmojiLexicon::with_overrides(&self.config.emoji_overrides);
                self.configured = true;
            }
        }
        self.log.push(event);
        update
    }
}

/// All channels' state, keyed by channel id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeBase {
    channels: BTreeMap<ChannelId, ChannelState>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds state by ingesting `events` in order.
    pub fn from_events<I: IntoIterator<Item = SocialEvent>>(events: I) -> Result<Self, KbError> {
        let mut kb = Self::new();
        for e in events {
            kb.ingest_event(e)?;
        }
        Ok(kb)
    }

    /// Validates `event` against the channel's current state, appends it to
    /// the log and updates the paper index.
    pub fn ingest_event(&mut self, event: SocialEvent) -> Result<IndexUpdate, KbError> {
        let state = self
            .channels
            .entry(event.channel.clone())
            .or_insert_with(|| ChannelState::new(event.channel.clone()));
        state.validate(&event)?;
        Ok(state.apply(event))
    }

    pub fn channel(&self, id: &str) -> Option<&ChannelState> {
        self.channels.get(id)
    }

    pub fn channel_or_err(&self, id: &str) -> Result<&ChannelState, KbError> {
        self.channel(id)
            .ok_or_else(|| KbError::UnknownChannel(id.to_string()))
    }

    pub fn channels(&self) -> impl Iterator<Item = &ChannelState> {
        self.channels.values()
    }

    /// Registers an empty channel so events can be assigned seqs against it.
    pub fn ensure_channel(&mut self, id: &str) -> &mut ChannelState {
        self.channels
            .entry(id.to_string())
            .or_insert_with(|| ChannelState::new(id))
    }

    /// Attaches external metadata to an indexed paper. Metadata is not part
    /// of the event log; callers re-attach it after a rebuild.
    pub fn attach_record(&mut self, channel: &str, record: PaperRecord) -> bool {
        match self
            .channels
            .get_mut(channel)
            .and_then(|c| c.papers.get_mut(&record.paper_ref))
        {
            Some(ip) => {
                ip.record = Some(record);
                true
            }
            None => false,
        }
    }

    pub fn engagement_summary(
        &self,
        paper: &PaperRef,
        channel: &str,
        window: Window,
        now: DateTime<Utc>,
    ) -> Result<EngagementSummary, KbError> {
        self.channel_or_err(channel)?
            .engagement_summary(paper, window, now)
    }

    pub fn candidate_seeds(&self, channel: &str, window: Window, now: DateTime<Utc>) -> Vec<PaperRef> {
        self.channel(channel)
            .map(|c| c.candidate_seeds(window, now))
            .unwrap_or_default()
    }
}
