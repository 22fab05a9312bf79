use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clients::PaperRecord;
use crate::kb::{MemberId, PaperRef};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    /// Facts about the recommended paper itself.
    #[serde(rename = "metadata")]
    I,
    /// Links to a paper already discussed in the channel.
    #[serde(rename = "paper_connection")]
    II,
    /// Links to a channel member's interests.
    #[serde(rename = "member_connection")]
    III,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    H1,
    H2,
    H3,
    H4,
    H5,
    H6,
    H7,
    H8,
    H9,
}

impl Heuristic {
    pub const ALL: [Heuristic; 9] = [
        Heuristic::H1,
        Heuristic::H2,
        Heuristic::H3,
        Heuristic::H4,
        Heuristic::H5,
        Heuristic::H6,
        Heuristic::H7,
        Heuristic::H8,
        Heuristic::H9,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn category(self) -> Category {
        match self {
            Heuristic::H1 | Heuristic::H2 | Heuristic::H3 | Heuristic::H4 => Category::I,
            Heuristic::H5 | Heuristic::H6 | Heuristic::H7 => Category::II,
            Heuristic::H8 | Heuristic::H9 => Category::III,
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.number())
    }
}

/// Title and abstract of a paper, as quoted in prompts and templates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperBrief {
    #[serde(rename = "ref")]
    pub paper_ref: PaperRef,
    pub title: String,
    #[serde(rename = "abstract", default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
}

impl PaperBrief {
    pub fn of(record: &PaperRecord) -> Self {
        PaperBrief {
            paper_ref: record.paper_ref.clone(),
            title: record.title.clone(),
            abstract_text: record.abstract_text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentBrief {
    pub actor: MemberId,
    pub text: String,
}

/// A previously shared paper and the thread it was first shared in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorThread {
    pub paper: PaperBrief,
    pub thread_seq: u64,
    pub sharer: MemberId,
    pub share_message: String,
    pub comments: Vec<CommentBrief>,
    /// Emoji names of every reaction, in log order.
    pub reactions: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Cites,
    CitedBy,
    SharedAuthors,
    Semantic,
}

impl Relation {
    pub fn label(self) -> &'static str {
        match self {
            Relation::Cites => "Cites",
            Relation::CitedBy => "Cited by",
            Relation::SharedAuthors => "Shared authors",
            Relation::Semantic => "Related paper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReactionCounts {
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
}

impl ReactionCounts {
    pub fn total(&self) -> usize {
        self.positive + self.negative + self.neutral
    }
}

/// How a member's history relates to the candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterestVariant {
    LikedSimilar,
    LikedAuthor,
    LikedVenue,
    OwnPublicationsSimilar,
    CitesRelated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SignalPayload {
    /// h1
    AuthorIsMember { member_id: MemberId, author_name: String },
    /// h2
    AuthorRecent {
        author_name: String,
        count: usize,
        papers: Vec<PaperRef>,
    },
    /// h3
    Affiliation {
        affiliation: String,
        member_ids: Vec<MemberId>,
    },
    /// h4
    VenueRecent {
        venue: String,
        count: usize,
        papers: Vec<PaperRef>,
    },
    /// h5
    PaperConnection {
        prior: PriorThread,
        relation: Relation,
        citation_contexts: Vec<String>,
        shared_authors: Vec<String>,
        similarity: Option<Scalar>,
    },
    /// h6
    PriorEngagement {
        prior: PriorThread,
        relation: Relation,
        reply_count: usize,
        reaction_counts: ReactionCounts,
        reactors: Vec<MemberId>,
        sample_comment: Option<CommentBrief>,
    },
    /// h7
    PriorByMember {
        prior: PriorThread,
        member_ids: Vec<MemberId>,
    },
    /// h8
    MemberInterest {
        member_id: MemberId,
        interest: PaperBrief,
        similarity: Scalar,
    },
    /// h9
    MemberRelation {
        member_id: MemberId,
        variant: InterestVariant,
        related: Option<PaperBrief>,
        detail: Option<String>,
        similarity: Option<Scalar>,
    },
}

impl SignalPayload {
    /// Prior thread for category II payloads.
    pub fn prior(&self) -> Option<&PriorThread> {
        match self {
            SignalPayload::PaperConnection { prior, .. }
            | SignalPayload::PriorEngagement { prior, .. }
            | SignalPayload::PriorByMember { prior, .. } => Some(prior),
            _ => None,
        }
    }

    /// Member a category III or h1 payload is about.
    pub fn member(&self) -> Option<&MemberId> {
        match self {
            SignalPayload::AuthorIsMember { member_id, .. }
            | SignalPayload::MemberInterest { member_id, .. }
            | SignalPayload::MemberRelation { member_id, .. } => Some(member_id),
            _ => None,
        }
    }

    /// Member-interest paper quoted alongside a category III payload.
    pub fn interest_paper(&self) -> Option<&PaperBrief> {
        match self {
            SignalPayload::MemberInterest { interest, .. } => Some(interest),
            SignalPayload::MemberRelation { related, .. } => related.as_ref(),
            _ => None,
        }
    }

    /// String identifying the payload's subject; last resort tie-breaker.
    pub fn key(&self) -> String {
        match self {
            SignalPayload::AuthorIsMember { member_id, author_name } => format!("{member_id}/{author_name}"),
            SignalPayload::AuthorRecent { author_name, .. } => author_name.clone(),
            SignalPayload::Affiliation { affiliation, .. } => affiliation.clone(),
            SignalPayload::VenueRecent { venue, .. } => venue.clone(),
            SignalPayload::PaperConnection { prior, .. }
            | SignalPayload::PriorEngagement { prior, .. }
            | SignalPayload::PriorByMember { prior, .. } => prior.paper.paper_ref.to_string(),
            SignalPayload::MemberInterest { member_id, .. } => member_id.clone(),
            SignalPayload::MemberRelation { member_id, .. } => member_id.clone(),
        }
    }
}

/// One fired heuristic relating a candidate paper to a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialSignal {
    pub heuristic: Heuristic,
    pub category: Category,
    pub payload: SignalPayload,
    pub score: Scalar,
    /// Count of interactions backing the signal; ranks ties on score.
    pub engagement: usize,
    pub evidence_seqs: Vec<u64>,
}

impl SocialSignal {
    pub fn new(heuristic: Heuristic, payload: SignalPayload, score: Scalar) -> Self {
        SocialSignal {
            heuristic,
            category: heuristic.category(),
            payload,
            score,
            engagement: 0,
            evidence_seqs: Vec::new(),
        }
    }

    pub fn with_engagement(mut self, engagement: usize) -> Self {
        self.engagement = engagement;
        self
    }

    pub fn with_evidence(mut self, mut seqs: Vec<u64>) -> Self {
        seqs.sort_unstable();
        seqs.dedup();
        self.evidence_seqs = seqs;
        self
    }

    pub fn latest_evidence(&self) -> u64 {
        self.evidence_seqs.last().copied().unwrap_or(0)
    }
}

/// At most one signal per category.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectedSignals {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<SocialSignal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paper_connection: Option<SocialSignal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member_connection: Option<SocialSignal>,
}

impl SelectedSignals {
    pub fn get(&self, category: Category) -> Option<&SocialSignal> {
        match category {
            Category::I => self.metadata.as_ref(),
            Category::II => self.paper_connection.as_ref(),
            Category::III => self.member_connection.as_ref(),
        }
    }

    pub(crate) fn slot(&mut self, category: Category) -> &mut Option<SocialSignal> {
        match category {
            Category::I => &mut self.metadata,
            Category::II => &mut self.paper_connection,
            Category::III => &mut self.member_connection,
        }
    }

    /// Selected signals in category order.
    pub fn iter(&self) -> impl Iterator<Item = &SocialSignal> {
        [&self.metadata, &self.paper_connection, &self.member_connection]
            .into_iter()
            .flatten()
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn heuristics(&self) -> Vec<Heuristic> {
        self.iter().map(|s| s.heuristic).collect()
    }
}
