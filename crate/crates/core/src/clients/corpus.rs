//! Self-contained paper corpus backing the mock metadata and recommendation
//! clients.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Author, ClientError, PaperRecord, PaperSource, Recommender};
use crate::kb::PaperRef;
use crate::scalar::{cosine_similarity, normalize};
use crate::{Embedding, Scalar};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{paper}: embedding has dimension {got}, corpus uses {expected}")]
    Dimension {
        paper: PaperRef,
        expected: usize,
        got: usize,
    },
    #[error("{0}: zero embedding")]
    ZeroEmbedding(PaperRef),
    #[error("duplicate paper {0}")]
    Duplicate(PaperRef),
}

// On-disk record; `cited_by` is derived, never stored.
#[derive(Serialize, Deserialize)]
struct FixtureLine {
    #[serde(rename = "ref")]
    paper_ref: PaperRef,
    title: String,
    #[serde(rename = "abstract", default)]
    abstract_text: Option<String>,
    #[serde(default)]
    authors: Vec<Author>,
    #[serde(default)]
    venue: Option<String>,
    #[serde(default)]
    year: Option<i32>,
    #[serde(default)]
    citations: Vec<PaperRef>,
    #[serde(default)]
    embedding: Option<Embedding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tldr: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    citation_contexts: BTreeMap<PaperRef, Vec<String>>,
}

/// Small corpus with citation edges and unit-norm embeddings.
///
/// `cited_by` lists are derived from `citations` on construction, so
/// A cites B exactly when B is cited by A.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusFixture {
    papers: BTreeMap<PaperRef, PaperRecord>,
    dim: Option<usize>,
}

impl CorpusFixture {
    pub fn new(records: impl IntoIterator<Item = PaperRecord>) -> Result<Self, CorpusError> {
        let mut papers = BTreeMap::new();
        let mut dim = None;
        for mut r in records {
            if let Some(e) = r.embedding.as_mut() {
                match dim {
                    None => dim = Some(e.len()),
                    Some(d) if d != e.len() => {
                        return Err(CorpusError::Dimension {
                            paper: r.paper_ref.clone(),
                            expected: d,
                            got: e.len(),
                        })
                    }
                    _ => {}
                }
                normalize(e).map_err(|_| CorpusError::ZeroEmbedding(r.paper_ref.clone()))?;
            }
            r.cited_by.clear();
            let key = r.paper_ref.clone();
            if papers.insert(key.clone(), r).is_some() {
                return Err(CorpusError::Duplicate(key));
            }
        }
        let edges: Vec<(PaperRef, PaperRef)> = papers
            .values()
            .flat_map(|p| p.citations.iter().map(|c| (p.paper_ref.clone(), c.clone())))
            .collect();
        for (citing, cited) in edges {
            if let Some(target) = papers.get_mut(&cited) {
                if !target.cited_by.contains(&citing) {
                    target.cited_by.push(citing);
                }
            }
        }
        Ok(CorpusFixture { papers, dim })
    }

    /// Reads one JSON record per line.
    pub fn from_reader<R: BufRead>(input: R) -> Result<Self, CorpusError> {
        let mut records = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: FixtureLine = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            records.push(PaperRecord {
                paper_ref: f.paper_ref,
                title: f.title,
                abstract_text: f.abstract_text,
                tldr: f.tldr,
                authors: f.authors,
                venue: f.venue,
                year: f.year,
                citations: f.citations,
                cited_by: Vec::new(),
                citation_contexts: f.citation_contexts,
                embedding: f.embedding,
                degraded: false,
            });
        }
        Self::new(records)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<(), CorpusError> {
        for r in self.papers.values() {
            let line = FixtureLine {
                paper_ref: r.paper_ref.clone(),
                title: r.title.clone(),
                abstract_text: r.abstract_text.clone(),
                authors: r.authors.clone(),
                venue: r.venue.clone(),
                year: r.year,
                citations: r.citations.clone(),
                embedding: r.embedding.clone(),
                tldr: r.tldr.clone(),
                citation_contexts: r.citation_contexts.clone(),
            };
            serde_json::to_writer(&mut out, &line).map_err(|e| CorpusError::Parse {
                line: 0,
                message: e.to_string(),
            })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn dimension(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn contains(&self, r: &PaperRef) -> bool {
        self.papers.contains_key(r)
    }

    pub fn get(&self, r: &PaperRef) -> Option<&PaperRecord> {
        self.papers.get(r)
    }

    pub fn records(&self) -> impl Iterator<Item = &PaperRecord> {
        self.papers.values()
    }

    /// Highest cosine between `candidate` and any positive with an embedding.
    fn affinity(&self, candidate: &PaperRecord, positives: &[&PaperRecord]) -> Option<Scalar> {
        let e = candidate.embedding.as_ref()?;
        positives
            .iter()
            .filter_map(|p| p.embedding.as_ref())
            .filter_map(|pe| cosine_similarity(e, pe).ok())
            .reduce(Scalar::max)
    }
}

impl PaperSource for CorpusFixture {
    fn fetch_paper_metadata(&self, paper: &PaperRef) -> Result<PaperRecord, ClientError> {
        self.papers
            .get(paper)
            .cloned()
            .map(PaperRecord::with_degradation)
            .ok_or_else(|| ClientError::NotFound(paper.to_string()))
    }

    fn author_papers(&self, author_id: &str) -> Result<Vec<PaperRecord>, ClientError> {
        Ok(self
            .papers
            .values()
            .filter(|p| p.has_author(author_id))
            .cloned()
            .map(PaperRecord::with_degradation)
            .collect())
    }
}

impl Recommender for CorpusFixture {
    /// Ranks every non-positive paper by its best cosine to a positive;
    /// papers without embeddings trail, ties go to the smaller ref.
    fn fetch_recommendations(
        &self,
        positives: &[PaperRef],
        k: usize,
    ) -> Result<Vec<PaperRecord>, ClientError> {
        if positives.is_empty() {
            return Err(ClientError::InvalidInput("no positive papers".into()));
        }
        let excluded: BTreeSet<&PaperRef> = positives.iter().collect();
        let pos: Vec<&PaperRecord> = positives.iter().filter_map(|r| self.papers.get(r)).collect();
        let mut ranked: Vec<(Option<Scalar>, &PaperRecord)> = self
            .papers
            .values()
            .filter(|p| !excluded.contains(&p.paper_ref))
            .map(|p| (self.affinity(p, &pos), p))
            .collect();
        ranked.sort_by(|a, b| match (a.0, b.0) {
            (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.1.paper_ref.cmp(&b.1.paper_ref)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.1.paper_ref.cmp(&b.1.paper_ref),
        });
        Ok(ranked
            .into_iter()
            .take(k)
            .map(|(_, p)| p.clone().with_degradation())
            .collect())
    }
}
