//! Pluggable clients for paper metadata, recommendations and text completion.
//!
//! Each client has a deterministic in-process implementation ([`CorpusFixture`]
//! and [`MockCompletion`]) and a live HTTP implementation configured from the
//! environment ([`live`]).

mod cache;
mod corpus;
pub mod live;
mod mock_llm;
mod ratelimit;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::CachedPaperSource;
pub use corpus::{CorpusError, CorpusFixture};
pub use mock_llm::MockCompletion;
pub use ratelimit::{Backoff, TokenBucket};

use crate::kb::PaperRef;
use crate::Embedding;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("transport failure (retryable): {0}")]
    Transport(String),
    #[error("configuration: {0}")]
    Configuration(String),
    #[error("malformed response: {0}")]
    Decode(String),
}

impl ClientError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ClientError::Transport(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    #[serde(default)]
    pub author_id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub affiliations: Vec<String>,
}

impl Author {
    pub fn new(author_id: &str, name: &str) -> Self {
        Author {
            author_id: author_id.to_string(),
            name: name.to_string(),
            affiliations: Vec::new(),
        }
    }
}

/// Scholarly metadata for one paper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    #[serde(rename = "ref")]
    pub paper_ref: PaperRef,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tldr: Option<String>,
    #[serde(default)]
    pub authors: Vec<Author>,
    #[serde(default)]
    pub venue: Option<String>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub citations: Vec<PaperRef>,
    #[serde(default)]
    pub cited_by: Vec<PaperRef>,
    /// Sentences of this paper that cite the keyed paper.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub citation_contexts: BTreeMap<PaperRef, Vec<String>>,
    #[serde(default)]
    pub embedding: Option<Embedding>,
    /// Set when the abstract is missing; such records carry no embedding.
    #[serde(default)]
    pub degraded: bool,
}

impl PaperRecord {
    pub fn new(paper_ref: PaperRef, title: impl Into<String>) -> Self {
        PaperRecord {
            paper_ref,
            title: title.into(),
            abstract_text: None,
            tldr: None,
            authors: Vec::new(),
            venue: None,
            year: None,
            citations: Vec::new(),
            cited_by: Vec::new(),
            citation_contexts: BTreeMap::new(),
            embedding: None,
            degraded: false,
        }
    }

    /// Applies the missing-abstract rule: no abstract means no embedding.
    pub fn with_degradation(mut self) -> Self {
        let missing = self
            .abstract_text
            .as_deref()
            .is_none_or(|a| a.trim().is_empty());
        if missing {
            self.embedding = None;
            self.degraded = true;
        }
        self
    }

    pub fn author_names(&self) -> Vec<&str> {
        self.authors.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn has_author(&self, author_id: &str) -> bool {
        !author_id.is_empty() && self.authors.iter().any(|a| a.author_id == author_id)
    }

    pub fn cites(&self, other: &PaperRef) -> bool {
        self.citations.contains(other)
    }
}

pub trait PaperSource: Send + Sync {
    fn fetch_paper_metadata(&self, paper: &PaperRef) -> Result<PaperRecord, ClientError>;

    /// Publications of an external author id. Sources without an author
    /// index return nothing.
    fn author_papers(&self, _author_id: &str) -> Result<Vec<PaperRecord>, ClientError> {
        Ok(Vec::new())
    }
}

pub trait Recommender: Send + Sync {
    /// Up to `k` papers related to `positives`, never including them.
    fn fetch_recommendations(
        &self,
        positives: &[PaperRef],
        k: usize,
    ) -> Result<Vec<PaperRecord>, ClientError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_output_chars: usize,
    pub seed: u64,
}

pub trait CompletionClient: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ClientError>;
}

impl<T: PaperSource + ?Sized> PaperSource for Box<T> {
    fn fetch_paper_metadata(&self, paper: &PaperRef) -> Result<PaperRecord, ClientError> {
        (**self).fetch_paper_metadata(paper)
    }
    fn author_papers(&self, author_id: &str) -> Result<Vec<PaperRecord>, ClientError> {
        (**self).author_papers(author_id)
    }
}

impl<T: PaperSource + ?Sized> PaperSource for std::sync::Arc<T> {
    fn fetch_paper_metadata(&self, paper: &PaperRef) -> Result<PaperRecord, ClientError> {
        (**self).fetch_paper_metadata(paper)
    }
    fn author_papers(&self, author_id: &str) -> Result<Vec<PaperRecord>, ClientError> {
        (**self).author_papers(author_id)
    }
}

impl<T: Recommender + ?Sized> Recommender for std::sync::Arc<T> {
    fn fetch_recommendations(
        &self,
        positives: &[PaperRef],
        k: usize,
    ) -> Result<Vec<PaperRecord>, ClientError> {
        (**self).fetch_recommendations(positives, k)
    }
}
