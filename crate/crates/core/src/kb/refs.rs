//! Scholarly paper references and link extraction from chat text.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefSource {
    Arxiv,
    Doi,
    SemanticId,
}

impl RefSource {
    fn prefix(self) -> &'static str {
        match self {
            RefSource::Arxiv => "arxiv",
            RefSource::Doi => "doi",
            RefSource::SemanticId => "s2",
        }
    }
}

/// Canonical identifier of a scholarly paper.
///
/// Serialized as `"<source>:<id>"`, e.g. `arxiv:2301.00001` or
/// `doi:10.1145/3544548.3581024`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PaperRef {
    pub source: RefSource,
    pub external_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a paper reference: {0:?}")]
pub struct ParseRefError(pub String);

static ARXIV_VERSION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"v\d+$").unwrap());

impl PaperRef {
    pub fn new(source: RefSource, external_id: impl Into<String>) -> Self {
        PaperRef {
            source,
            external_id: external_id.into(),
        }
        .canonicalize()
    }

    pub fn arxiv(id: &str) -> Self {
        Self::new(RefSource::Arxiv, id)
    }

    pub fn doi(id: &str) -> Self {
        Self::new(RefSource::Doi, id)
    }

    pub fn semantic(id: &str) -> Self {
        Self::new(RefSource::SemanticId, id)
    }

    /// Arxiv ids lose their version suffix, DOIs are lowercased, and
    /// surrounding whitespace and trailing punctuation are dropped.
    pub fn canonicalize(self) -> Self {
        // Every step only shortens or lowercases, so this reaches a fixpoint.
        let mut id = self.external_id;
        loop {
            let next = Self::canonical_step(self.source, &id);
            if next == id {
                break;
            }
            id = next;
        }
        PaperRef {
            source: self.source,
            external_id: id,
        }
    }

    fn canonical_step(source: RefSource, id: &str) -> String {
        let trimmed = id.trim_matches(|c: char| {
            c.is_whitespace() || matches!(c, '.' | ',' | ';' | ')' | '>' | '"' | '\'')
        });
        match source {
            RefSource::Arxiv => {
                let lower = trimmed.to_lowercase();
                let id = lower.strip_suffix(".pdf").unwrap_or(&lower);
                ARXIV_VERSION.replace(id, "").into_owned()
            }
            RefSource::Doi => trimmed.to_lowercase(),
            RefSource::SemanticId => trimmed.to_string(),
        }
    }

    /// Browsable URL for the paper.
    pub fn url(&self) -> String {
        match self.source {
            RefSource::Arxiv => format!("https://arxiv.org/abs/{}", self.external_id),
            RefSource::Doi => format!("https://doi.org/{}", self.external_id),
            RefSource::SemanticId => {
                format!("https://www.semanticscholar.org/paper/{}", self.external_id)
            }
        }
    }
}

impl fmt::Display for PaperRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.source.prefix(), self.external_id)
    }
}

impl FromStr for PaperRef {
    type Err = ParseRefError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (prefix, id) = s.split_once(':').ok_or_else(|| ParseRefError(s.to_string()))?;
        let source = match prefix.to_ascii_lowercase().as_str() {
            "arxiv" => RefSource::Arxiv,
            "doi" => RefSource::Doi,
            "s2" => RefSource::SemanticId,
            _ => return Err(ParseRefError(s.to_string())),
        };
        if id.trim().is_empty() {
            return Err(ParseRefError(s.to_string()));
        }
        Ok(PaperRef::new(source, id))
    }
}

impl Serialize for PaperRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PaperRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// One alternation so matches come back in order of appearance.
static LINK: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(concat!(
        r"(?i)",
        r"(?:https?://)?(?:www\.|export\.)?arxiv\.org/(?:abs|pdf|html)/(?P<arxiv_url>\d{4}\.\d{4,5}(?:v\d+)?|[a-z\-]+(?:\.[a-z]{2})?/\d{7}(?:v\d+)?)",
        r"|\barxiv:\s?(?P<arxiv_bare>\d{4}\.\d{4,5}(?:v\d+)?)",
        r"|(?:https?://)?(?:dx\.)?doi\.org/(?P<doi_url>10\.\d{4,9}/[^\s<>|]+)",
        r"|(?:https?://)?dl\.acm\.org/doi/(?:abs/|pdf/|full/|fullHtml/)?(?P<doi_acm>10\.\d{4,9}/[^\s<>|?#]+)",
        r"|(?:https?://)?link\.springer\.com/(?:article|chapter)/(?P<doi_springer>10\.\d{4,9}/[^\s<>|?#]+)",
        r"|\bdoi:\s?(?P<doi_bare>10\.\d{4,9}/[^\s<>|]+)",
        r"|(?:https?://)?(?:www\.)?semanticscholar\.org/paper/(?:[^\s/<>|]+/)?(?P<s2_url>[0-9a-f]{40})",
        r"|(?:https?://)?api\.semanticscholar\.org/(?P<s2_corpus>CorpusID:\d+)",
    ))
    .unwrap()
});

/// Recognized paper references in `text`, in order of first appearance,
/// without duplicates. Unrecognized links are ignored.
pub fn extract_item_refs(text: &str) -> Vec<PaperRef> {
    let mut out: Vec<PaperRef> = Vec::new();
    for caps in LINK.captures_iter(text) {
        let found = [
            ("arxiv_url", RefSource::Arxiv),
            ("arxiv_bare", RefSource::Arxiv),
            ("doi_url", RefSource::Doi),
            ("doi_acm", RefSource::Doi),
            ("doi_springer", RefSource::Doi),
            ("doi_bare", RefSource::Doi),
            ("s2_url", RefSource::SemanticId),
            ("s2_corpus", RefSource::SemanticId),
        ]
        .into_iter()
        .find_map(|(name, source)| caps.name(name).map(|m| PaperRef::new(source, m.as_str())));
        if let Some(r) = found {
            if !out.contains(&r) {
                out.push(r);
            }
        }
    }
    out
}
