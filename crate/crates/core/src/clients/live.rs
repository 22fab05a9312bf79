//! HTTP clients for a public academic graph API and an OpenAI-compatible
//! completion endpoint.
//!
//! Configuration comes from the environment:
//!
//! | variable              | used by                  | default                            |
//! |-----------------------|--------------------------|------------------------------------|
//! | `PAPER_API_BASE_URL`  | [`AcademicGraphClient`]  | `https://api.semanticscholar.org`  |
//! | `PAPER_API_KEY`       | [`AcademicGraphClient`]  | unset (anonymous)                  |
//! | `LLM_BASE_URL`        | [`LiveCompletion`]       | `https://api.openai.com/v1`        |
//! | `LLM_API_KEY`         | [`LiveCompletion`]       | required                           |
//! | `LLM_MODEL`           | [`LiveCompletion`]       | `gpt-4-turbo`                      |

use std::collections::BTreeMap;
use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{
    Author, Backoff, ClientError, CompletionClient, CompletionRequest, PaperRecord, PaperSource,
    Recommender, TokenBucket,
};
use crate::kb::{PaperRef, RefSource};
use crate::scalar::normalize;

pub const PAPER_API_BASE_URL: &str = "PAPER_API_BASE_URL";
pub const PAPER_API_KEY: &str = "PAPER_API_KEY";
pub const LLM_BASE_URL: &str = "LLM_BASE_URL";
pub const LLM_API_KEY: &str = "LLM_API_KEY";
pub const LLM_MODEL: &str = "LLM_MODEL";

const PAPER_FIELDS: &str = "title,abstract,authors.authorId,authors.name,authors.affiliations,\
venue,year,externalIds,references.externalIds,citations.externalIds,embedding.specter_v2,tldr";

fn http_agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(30)))
        .build()
        .into()
}

fn map_err(e: ureq::Error, what: &str) -> ClientError {
    match e {
        ureq::Error::StatusCode(404) => ClientError::NotFound(what.to_string()),
        ureq::Error::StatusCode(401 | 403) => {
            ClientError::Configuration(format!("{what}: credentials rejected"))
        }
        ureq::Error::StatusCode(code) if code == 429 || code >= 500 => {
            ClientError::Transport(format!("{what}: http {code}"))
        }
        ureq::Error::StatusCode(code) => ClientError::InvalidInput(format!("{what}: http {code}")),
        other => ClientError::Transport(format!("{what}: {other}")),
    }
}

/// Identifier the graph API accepts for a canonical ref.
pub fn api_paper_id(r: &PaperRef) -> String {
    match r.source {
        RefSource::Arxiv => format!("ARXIV:{}", r.external_id),
        RefSource::Doi => format!("DOI:{}", r.external_id),
        RefSource::SemanticId => r.external_id.clone(),
    }
}

#[derive(Deserialize)]
struct ApiAuthor {
    #[serde(rename = "authorId")]
    author_id: Option<String>,
    name: Option<String>,
    #[serde(default)]
    affiliations: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct ApiRefLink {
    #[serde(rename = "paperId")]
    paper_id: Option<String>,
    #[serde(rename = "externalIds")]
    external_ids: Option<BTreeMap<String, Value>>,
    #[serde(default)]
    contexts: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct ApiPaper {
    #[serde(rename = "paperId")]
    paper_id: Option<String>,
    title: Option<String>,
    #[serde(rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    authors: Option<Vec<ApiAuthor>>,
    venue: Option<String>,
    year: Option<i32>,
    #[serde(rename = "externalIds")]
    external_ids: Option<BTreeMap<String, Value>>,
    #[serde(default)]
    references: Option<Vec<ApiRefLink>>,
    #[serde(default)]
    citations: Option<Vec<ApiRefLink>>,
    embedding: Option<ApiEmbedding>,
    tldr: Option<ApiTldr>,
}

#[derive(Deserialize)]
struct ApiEmbedding {
    vector: Vec<f64>,
}

#[derive(Deserialize)]
struct ApiTldr {
    text: Option<String>,
}

fn ref_from_ids(paper_id: Option<&str>, ids: Option<&BTreeMap<String, Value>>) -> Option<PaperRef> {
    let get = |k: &str| ids.and_then(|m| m.get(k)).and_then(Value::as_str);
    if let Some(a) = get("ArXiv") {
        return Some(PaperRef::arxiv(a));
    }
    if let Some(d) = get("DOI") {
        return Some(PaperRef::doi(d));
    }
    paper_id.map(PaperRef::semantic)
}

fn to_record(p: ApiPaper, requested: Option<&PaperRef>) -> Option<PaperRecord> {
    let paper_ref = requested
        .cloned()
        .or_else(|| ref_from_ids(p.paper_id.as_deref(), p.external_ids.as_ref()))?;
    let links = |v: Option<Vec<ApiRefLink>>| -> Vec<PaperRef> {
        v.unwrap_or_default()
            .iter()
            .filter_map(|l| ref_from_ids(l.paper_id.as_deref(), l.external_ids.as_ref()))
            .collect()
    };
    let embedding = p.embedding.map(|e| e.vector).and_then(|mut v| {
        normalize(&mut v).ok()?;
        Some(v)
    });
    let record = PaperRecord {
        paper_ref,
        title: p.title.unwrap_or_default(),
        abstract_text: p.abstract_text,
        tldr: p.tldr.and_then(|t| t.text),
        authors: p
            .authors
            .unwrap_or_default()
            .into_iter()
            .map(|a| Author {
                author_id: a.author_id.unwrap_or_default(),
                name: a.name.unwrap_or_default(),
                affiliations: a.affiliations.unwrap_or_default(),
            })
            .collect(),
        venue: p.venue.filter(|v| !v.is_empty()),
        year: p.year,
        citations: links(p.references),
        cited_by: links(p.citations),
        citation_contexts: BTreeMap::new(),
        embedding,
        degraded: false,
    };
    Some(record.with_degradation())
}

/// Metadata, author and recommendation client for the public academic graph.
pub struct AcademicGraphClient {
    base_url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
    bucket: TokenBucket,
    backoff: Backoff,
}

impl AcademicGraphClient {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
        AcademicGraphClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            agent: http_agent(),
            bucket: TokenBucket::new(5, 1.0),
            backoff: Backoff::default(),
        }
    }

    pub fn from_env() -> Self {
        let base = std::env::var(PAPER_API_BASE_URL)
            .unwrap_or_else(|_| "https://api.semanticscholar.org".to_string());
        Self::new(base, std::env::var(PAPER_API_KEY).ok())
    }

    fn get_json<T: serde::de::DeserializeOwned>(&self, url: &str, what: &str) -> Result<T, ClientError> {
        self.backoff.run(|| {
            self.bucket.acquire();
            let mut req = self.agent.get(url);
            if let Some(k) = &self.api_key {
                req = req.header("x-api-key", k);
            }
            let mut resp = req.call().map_err(|e| map_err(e, what))?;
            resp.body_mut()
                .read_json::<T>()
                .map_err(|e| ClientError::Decode(e.to_string()))
        })
    }

    fn citation_contexts(&self, paper: &PaperRef) -> BTreeMap<PaperRef, Vec<String>> {
        #[derive(Deserialize)]
        struct Page {
            data: Vec<Entry>,
        }
        #[derive(Deserialize)]
        struct Entry {
            contexts: Option<Vec<String>>,
            #[serde(rename = "citedPaper")]
            cited: ApiRefLink,
        }
        let url = format!(
            "{}/graph/v1/paper/{}/references?fields=contexts,externalIds&limit=500",
            self.base_url,
            api_paper_id(paper)
        );
        match self.get_json::<Page>(&url, &paper.to_string()) {
            Ok(page) => page
                .data
                .into_iter()
                .filter_map(|e| {
                    let r = ref_from_ids(e.cited.paper_id.as_deref(), e.cited.external_ids.as_ref())?;
                    let ctx = e.contexts.or(e.cited.contexts).unwrap_or_default();
                    (!ctx.is_empty()).then_some((r, ctx))
                })
                .collect(),
            Err(e) => {
                log::warn!("citation contexts for {paper}: {e}");
                BTreeMap::new()
            }
        }
    }
}

impl PaperSource for AcademicGraphClient {
    fn fetch_paper_metadata(&self, paper: &PaperRef) -> Result<PaperRecord, ClientError> {
        let url = format!(
            "{}/graph/v1/paper/{}?fields={PAPER_FIELDS}",
            self.base_url,
            api_paper_id(paper)
        );
        let api: ApiPaper = self.get_json(&url, &paper.to_string())?;
        let mut record =
            to_record(api, Some(paper)).ok_or_else(|| ClientError::Decode("paper without id".into()))?;
        record.citation_contexts = self.citation_contexts(paper);
        Ok(record)
    }

    fn author_papers(&self, author_id: &str) -> Result<Vec<PaperRecord>, ClientError> {
        #[derive(Deserialize)]
        struct Page {
            data: Vec<ApiPaper>,
        }
        let url = format!(
            "{}/graph/v1/author/{author_id}/papers?fields=title,abstract,authors.authorId,authors.name,venue,year,externalIds&limit=100",
            self.base_url
        );
        let page: Page = self.get_json(&url, author_id)?;
        Ok(page.data.into_iter().filter_map(|p| to_record(p, None)).collect())
    }
}

impl Recommender for AcademicGraphClient {
    fn fetch_recommendations(
        &self,
        positives: &[PaperRef],
        k: usize,
    ) -> Result<Vec<PaperRecord>, ClientError> {
        if positives.is_empty() {
            return Err(ClientError::InvalidInput("no positive papers".into()));
        }
        #[derive(Deserialize)]
        struct Recs {
            #[serde(rename = "recommendedPapers")]
            recommended: Vec<ApiPaper>,
        }
        let url = format!(
            "{}/recommendations/v1/papers?fields={PAPER_FIELDS}&limit={k}",
            self.base_url
        );
        let body = json!({
            "positivePaperIds": positives.iter().map(api_paper_id).collect::<Vec<_>>(),
            "negativePaperIds": [],
        });
        let recs: Recs = self.backoff.run(|| {
            self.bucket.acquire();
            let mut req = self.agent.post(&url);
            if let Some(key) = &self.api_key {
                req = req.header("x-api-key", key);
            }
            let mut resp = req.send_json(&body).map_err(|e| map_err(e, "recommendations"))?;
            resp.body_mut()
                .read_json::<Recs>()
                .map_err(|e| ClientError::Decode(e.to_string()))
        })?;
        Ok(recs
            .recommended
            .into_iter()
            .filter_map(|p| to_record(p, None))
            .filter(|r| !positives.contains(&r.paper_ref))
            .take(k)
            .collect())
    }
}

/// Completion client for an OpenAI-compatible chat completions endpoint.
pub struct LiveCompletion {
    base_url: String,
    api_key: String,
    model: String,
    agent: ureq::Agent,
    backoff: Backoff,
}

impl std::fmt::Debug for LiveCompletion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LiveCompletion")
            .field("base_url", &self.base_url)
            .field("model", &self.model)
            .finish_non_exhaustive()
    }
}

impl LiveCompletion {
    /// Fails with a configuration error when no API key is given.
    pub fn new(
        base_url: Option<String>,
        api_key: Option<String>,
        model: Option<String>,
    ) -> Result<Self, ClientError> {
        let api_key = api_key
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| ClientError::Configuration(format!("{LLM_API_KEY} is not set")))?;
        Ok(LiveCompletion {
            base_url: base_url
                .unwrap_or_else(|| "https://api.openai.com/v1".to_string())
                .trim_end_matches('/')
                .to_string(),
            api_key,
            model: model.unwrap_or_else(|| "gpt-4-turbo".to_string()),
            agent: http_agent(),
            backoff: Backoff::default(),
        })
    }

    pub fn from_env() -> Result<Self, ClientError> {
        Self::new(
            std::env::var(LLM_BASE_URL).ok(),
            std::env::var(LLM_API_KEY).ok(),
            std::env::var(LLM_MODEL).ok(),
        )
    }
}

impl CompletionClient for LiveCompletion {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ClientError> {
        if request.prompt.trim().is_empty() {
            return Err(ClientError::InvalidInput("empty prompt".into()));
        }
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "seed": request.seed,
            "temperature": 0,
            // roughly four characters per token, with headroom for markup
            "max_tokens": request.max_output_chars / 3 + 16,
        });
        let url = format!("{}/chat/completions", self.base_url);
        let v: Value = self.backoff.run(|| {
            let mut resp = self
                .agent
                .post(&url)
                .header("Authorization", &format!("Bearer {}", self.api_key))
                .send_json(&body)
                .map_err(|e| map_err(e, "completion"))?;
            resp.body_mut()
                .read_json::<Value>()
                .map_err(|e| ClientError::Decode(e.to_string()))
        })?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(|s| s.trim().to_string())
            .ok_or_else(|| ClientError::Decode("no completion content".into()))
    }
}
