//! Social signals relating a candidate paper to a channel, and their
//! selection for message generation.
//!
//! Heuristics h1-h4 look at the candidate's own metadata, h5-h7 at papers
//! already shared in the channel, and h8-h9 at individual members. Scores:
//!
//! | heuristic | score |
//! |-----------|-------|
//! | h1 author is a member | 1.0 |
//! | h2 author on K recently engaged papers | K / (K + 1) |
//! | h3 affiliation shared with a member | 0.5 |
//! | h4 venue on K recently engaged papers | K / (K + 1) |
//! | h5 cites / cited by | 1.0 |
//! | h5 shared authors | 0.8 |
//! | h5 embedding similarity `c` ≥ τ | 0.75 · c |
//! | h6 prior with E reactions + comments | h5 score · E / (E + 1) |
//! | h7 prior authored by a member | 0.5 |
//! | h8 best similarity `c` to a member's papers ≥ τ | c |
//! | h9 best variant (see [`InterestVariant`]) | 1.0 / 0.8 / 0.6 / c |

mod connections;
mod members;
mod metadata;
mod select;
mod types;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

pub use connections::detect_paper_connection_signals;
pub use members::detect_member_signals;
pub use metadata::detect_metadata_signals;
pub use select::{rank_and_select, ranking_order};
pub use types::{
    Category, CommentBrief, Heuristic, InterestVariant, PaperBrief, PriorThread, ReactionCounts,
    Relation, SelectedSignals, SignalPayload, SocialSignal,
};

use crate::clients::{Author, PaperRecord};
use crate::kb::{ChannelState, IndexedPaper, Member, MemberId, Payload, Window};
use crate::Scalar;

/// Read-only view of a channel used by the detectors.
pub struct SignalContext<'a> {
    pub channel: &'a ChannelState,
    pub now: DateTime<Utc>,
    pub window: Window,
    pub tau: Scalar,
    /// Publications of members with a linked author id.
    pub member_publications: BTreeMap<MemberId, Vec<PaperRecord>>,
}

impl<'a> SignalContext<'a> {
    /// Context using the channel's configured window and threshold.
    pub fn new(channel: &'a ChannelState, now: DateTime<Utc>) -> Self {
        SignalContext {
            channel,
            now,
            window: channel.config.windows.heuristic(),
            tau: channel.config.tau,
            member_publications: BTreeMap::new(),
        }
    }

    pub fn with_publications(mut self, pubs: BTreeMap<MemberId, Vec<PaperRecord>>) -> Self {
        self.member_publications = pubs;
        self
    }

    /// Indexed papers with metadata, other than `candidate`.
    pub fn priors<'b>(
        &'b self,
        candidate: &'b PaperRecord,
    ) -> impl Iterator<Item = (&'a IndexedPaper, &'a PaperRecord)> + 'b {
        self.channel
            .papers()
            .filter(move |ip| ip.paper_ref != candidate.paper_ref)
            .filter_map(|ip| ip.record.as_ref().map(|r| (ip, r)))
    }

    /// Human members; the agent never counts.
    pub fn members(&self) -> Vec<Member> {
        self.channel
            .members()
            .into_values()
            .filter(|m| !self.channel.is_agent(&m.member_id))
            .collect()
    }

    pub fn prior_thread(&self, ip: &IndexedPaper, record: &PaperRecord) -> PriorThread {
        let first = ip.first_mention();
        let thread_seq = first.map_or(0, |m| m.seq);
        let share_message = match self.channel.event(thread_seq).map(|e| &e.payload) {
            Some(Payload::Message(m)) => m.text.clone(),
            Some(Payload::BotPost(b)) => b.body.clone(),
            _ => String::new(),
        };
        PriorThread {
            paper: PaperBrief::of(record),
            thread_seq,
            sharer: first.map(|m| m.actor.clone()).unwrap_or_default(),
            share_message,
            comments: ip
                .comments
                .iter()
                .map(|c| CommentBrief {
                    actor: c.actor.clone(),
                    text: c.text.clone(),
                })
                .collect(),
            reactions: ip.reactions.iter().map(|r| r.emoji_name.clone()).collect(),
        }
    }
}

/// Runs every detector; output is sorted by heuristic, then subject.
pub fn detect_all(candidate: &PaperRecord, ctx: &SignalContext) -> Vec<SocialSignal> {
    let mut out = detect_metadata_signals(candidate, ctx);
    out.extend(detect_paper_connection_signals(candidate, ctx));
    out.extend(detect_member_signals(candidate, ctx));
    out.sort_by(|a, b| {
        a.heuristic
            .cmp(&b.heuristic)
            .then_with(|| a.payload.key().cmp(&b.payload.key()))
    });
    out
}

pub(crate) fn normalize_text(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Same person: ids when both sides have one, normalized names otherwise.
pub(crate) fn same_author(a: &Author, b: &Author) -> bool {
    if !a.author_id.is_empty() && !b.author_id.is_empty() {
        a.author_id == b.author_id
    } else {
        !a.name.trim().is_empty() && normalize_text(&a.name) == normalize_text(&b.name)
    }
}

pub(crate) fn cosine(a: &PaperRecord, b: &PaperRecord) -> Option<Scalar> {
    let (x, y) = (a.embedding.as_ref()?, b.embedding.as_ref()?);
    crate::scalar::cosine_similarity(x, y).ok()
}
