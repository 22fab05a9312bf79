//! HTTP routes over a [`Service`].
//!
//! | route | body | reply |
//! |---|---|---|
//! | `GET /channels/{id}/feed?since={seq}` | | events after `seq` |
//! | `POST /channels/{id}/messages` | `{actor, text, ts?}` | 201, the event |
//! | `POST /channels/{id}/messages/{seq}/reactions` | `{actor, emoji, ts?}` | 201, the event |
//! | `POST /channels/{id}/messages/{seq}/replies` | `{actor, text, ts?}` | 201, the event |
//! | `GET /channels/{id}/config` | | the channel config |
//! | `PUT /channels/{id}/config` | any subset of config fields | the new config |
//! | `POST /channels/{id}/cycle` | optional `{now}` | the cycle result |
//! | `GET /channels/{id}/report?format=json\|csv\|jsonl` | | engagement report |
//!
//! Omitted timestamps default to the service clock.

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use socialrag::agent::{AgentError, CONFIG_ACTOR};
use socialrag::kb::{ChannelState, KbError, Payload, PaperRef};
use socialrag::sim::{engagement_report, export_report, ReportFormat, SeriesRow};
use socialrag::{ChannelConfig, CycleResult, SelectedSignals, SocialEvent};

use crate::state::SharedService;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<AgentError> for ApiError {
    fn from(e: AgentError) -> Self {
        let status = match &e {
            AgentError::Kb(KbError::DanglingTarget { .. } | KbError::UnknownChannel(_) | KbError::UnknownPaper { .. }) => {
                StatusCode::NOT_FOUND
            }
            AgentError::Kb(KbError::NonMonotoneSeq { .. }) => StatusCode::CONFLICT,
            AgentError::Kb(KbError::ConfigChannelMismatch { .. }) | AgentError::NotBotPost { .. } => {
                StatusCode::BAD_REQUEST
            }
            AgentError::Config(_) => StatusCode::UNPROCESSABLE_ENTITY,
            AgentError::Connector(_) => StatusCode::BAD_GATEWAY,
            AgentError::Kb(KbError::Persistence(_)) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Deserialize)]
pub struct FeedQuery {
    #[serde(default)]
    pub since: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessageBody {
    pub actor: String,
    pub text: String,
    #[serde(default)]
    pub ts: Option<DateTime<Utc>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionBody {
    pub actor: String,
    pub emoji: String,
    #[serde(default)]
    pub ts: Option<DateTime<Utc>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleBody {
    #[serde(default)]
    pub now: Option<DateTime<Utc>>,
}

#[derive(Debug, Deserialize)]
pub struct ReportQuery {
    #[serde(default)]
    pub format: Option<String>,
}

/// One bot recommendation and the signals it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostView {
    pub seq: u64,
    pub ts: DateTime<Utc>,
    pub paper_ref: PaperRef,
    pub provenance: SelectedSignals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportView {
    pub channel: String,
    pub as_of: DateTime<Utc>,
    pub next_post: DateTime<Utc>,
    /// Papers the next cycle would hand to the recommender.
    pub seeds: Vec<PaperRef>,
    pub posts: Vec<PostView>,
    pub series: Vec<SeriesRow>,
}

pub fn router(service: SharedService) -> Router {
    Router::new()
        .route("/channels/{id}/feed", get(feed))
        .route("/channels/{id}/messages", post(post_message))
        .route("/channels/{id}/messages/{seq}/reactions", post(post_reaction))
        .route("/channels/{id}/messages/{seq}/replies", post(post_reply))
        .route("/channels/{id}/config", get(get_config).put(put_config))
        .route("/channels/{id}/cycle", post(cycle))
        .route("/channels/{id}/report", get(report))
        .with_state(service)
}

fn parse_body<T: serde::de::DeserializeOwned + Default>(body: &Bytes) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

fn check_actor(s: &SharedService, channel: &str, actor: &str) -> ApiResult<()> {
    if actor.trim().is_empty() {
        return Err(ApiError::bad_request("actor is empty"));
    }
    if actor == CONFIG_ACTOR || actor == s.config(channel).agent_id {
        return Err(ApiError::new(
            StatusCode::FORBIDDEN,
            format!("{actor} is reserved for the service"),
        ));
    }
    Ok(())
}

fn created(event: SocialEvent) -> Response {
    (StatusCode::CREATED, Json(event)).into_response()
}

async fn feed(State(s): State<SharedService>, Path(id): Path<String>, Query(q): Query<FeedQuery>) -> Json<Vec<SocialEvent>> {
    Json(s.agent().feed(&id, q.since))
}

async fn post_message(
    State(s): State<SharedService>,
    Path(id): Path<String>,
    Json(b): Json<MessageBody>,
) -> ApiResult<Response> {
    check_actor(&s, &id, &b.actor)?;
    if b.text.trim().is_empty() {
        return Err(ApiError::bad_request("message text is empty"));
    }
    let ts = b.ts.unwrap_or_else(|| s.now());
    let ev = s.agent().append(&id, ts, &b.actor, Payload::message(b.text))?;
    Ok(created(ev))
}

async fn post_reaction(
    State(s): State<SharedService>,
    Path((id, seq)): Path<(String, u64)>,
    Json(b): Json<ReactionBody>,
) -> ApiResult<Response> {
    check_actor(&s, &id, &b.actor)?;
    if b.emoji.trim().is_empty() {
        return Err(ApiError::bad_request("emoji name is empty"));
    }
    let ts = b.ts.unwrap_or_else(|| s.now());
    let ev = s.agent().append(&id, ts, &b.actor, Payload::reaction(seq, b.emoji))?;
    Ok(created(ev))
}

async fn post_reply(
    State(s): State<SharedService>,
    Path((id, seq)): Path<(String, u64)>,
    Json(b): Json<MessageBody>,
) -> ApiResult<Response> {
    check_actor(&s, &id, &b.actor)?;
    if b.text.trim().is_empty() {
        return Err(ApiError::bad_request("reply text is empty"));
    }
    let ts = b.ts.unwrap_or_else(|| s.now());
    let ev = s.agent().append(&id, ts, &b.actor, Payload::reply(seq, b.text))?;
    Ok(created(ev))
}

async fn get_config(State(s): State<SharedService>, Path(id): Path<String>) -> Json<ChannelConfig> {
    Json(s.config(&id))
}

/// Merges the given fields over the current config.
async fn put_config(
    State(s): State<SharedService>,
    Path(id): Path<String>,
    Json(patch): Json<Value>,
) -> ApiResult<Json<ChannelConfig>> {
    let Value::Object(patch) = patch else {
        return Err(ApiError::bad_request("config must be a JSON object"));
    };
    if patch.get("channel").is_some_and(|c| c.as_str() != Some(id.as_str())) {
        return Err(ApiError::bad_request("channel in body differs from the path"));
    }
    let mut agent = s.agent();
    let mut merged = serde_json::to_value(agent.config(&id)).expect("config serializes");
    merged
        .as_object_mut()
        .expect("config is an object")
        .extend(patch);
    let config: ChannelConfig = serde_json::from_value(merged)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    agent.set_config(config.clone(), s.now())?;
    Ok(Json(config))
}

async fn cycle(State(s): State<SharedService>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<CycleResult>> {
    let b: CycleBody = parse_body(&body)?;
    let now = b.now.unwrap_or_else(|| s.now());
    // live clients block on the network
    let result = tokio::task::spawn_blocking(move || s.agent().run_cycle(&id, now))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(result))
}

pub fn report_view(channel: &ChannelState, next_post: DateTime<Utc>, now: DateTime<Utc>) -> ReportView {
    ReportView {
        channel: channel.id.clone(),
        as_of: now,
        next_post,
        seeds: channel.candidate_seeds(channel.config.windows.seed(), now),
        posts: channel
            .bot_posts()
            .map(|(e, m)| PostView {
                seq: e.seq,
                ts: e.ts,
                paper_ref: m.metadata.paper_ref.clone(),
                provenance: m.provenance.clone(),
            })
            .collect(),
        series: engagement_report(channel).rows,
    }
}

async fn report(State(s): State<SharedService>, Path(id): Path<String>, Query(q): Query<ReportQuery>) -> ApiResult<Response> {
    let now = s.now();
    let agent = s.agent();
    let empty = ChannelState::new(id.as_str());
    let channel = agent.channel(&id).unwrap_or(&empty);
    let (format, content_type) = match q.format.as_deref().unwrap_or("json") {
        "json" => {
            let next = agent.next_post_time(&id, now);
            return Ok(Json(report_view(channel, next, now)).into_response());
        }
        "csv" => (ReportFormat::Csv, "text/csv"),
        "jsonl" => (ReportFormat::JsonLines, "application/x-ndjson"),
        other => return Err(ApiError::bad_request(format!("unknown report format {other:?}"))),
    };
    let bytes = export_report(&engagement_report(channel), format)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, content_type)], bytes).into_response())
}
