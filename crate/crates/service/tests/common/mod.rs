#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use chrono::{DateTime, TimeDelta, Utc};
use http_body_util::BodyExt;
use serde_json::Value;
use socialrag::agent::{LoopbackConnector, ManualClock};
use socialrag::clients::{Author, CorpusFixture, MockCompletion, PaperRecord};
use socialrag::kb::{PaperRef, Payload, SocialEvent};
use socialrag::sim::Transcript;
use socialrag::{Agent, ChannelConfig, Frequency};
use socialrag_service::{router, Service, SharedService};
use tower::ServiceExt;

pub fn t0() -> DateTime<Utc> {
    "2024-05-06T09:00:00Z".parse().unwrap()
}

pub fn day(n: i64) -> DateTime<Utc> {
    t0() + TimeDelta::days(n)
}

pub fn p(n: u32) -> PaperRef {
    PaperRef::arxiv(&format!("2402.{n:05}"))
}

pub fn link(n: u32) -> String {
    format!("https://arxiv.org/abs/2402.{n:05}")
}

/// `n` papers in three topics; neighbours in a topic share an author and cite each other.
pub fn corpus(n: u32) -> Vec<PaperRecord> {
    (1..=n)
        .map(|i| {
            let topic = (i % 3) as usize;
            let mut r = PaperRecord::new(p(i), format!("Field notes {i} on theme {topic}"));
            r.abstract_text = Some(format!("We look at case {i} in theme {topic} and report what changed."));
            r.authors = vec![
                Author::new(&format!("w{topic}"), &format!("Writer {topic}")),
                Author::new(&format!("s{i}"), &format!("Student {i}")),
            ];
            r.venue = Some(["CHI", "CSCW", "UIST"][topic].to_string());
            r.year = Some(2021 + (i % 3) as i32);
            if i > 3 {
                r.citations.push(p(i - 3));
            }
            let mut e = vec![0.1; 6];
            e[topic] = 1.0;
            e[3 + (i % 3) as usize] += 0.05 * f64::from(i % 7);
            r.embedding = Some(e);
            r
        })
        .collect()
}

pub fn fixture() -> CorpusFixture {
    CorpusFixture::new(corpus(40)).unwrap()
}

/// Service over the fixture corpus with a hand-driven clock at `t0`.
pub fn service() -> (SharedService, Arc<ManualClock>) {
    let corpus = Arc::new(fixture());
    let agent = Agent::new(
        corpus.clone(),
        corpus,
        Arc::new(MockCompletion::new()),
        Box::new(LoopbackConnector::new()),
        11,
    );
    let clock = Arc::new(ManualClock::new(t0()));
    (Arc::new(Service::new(agent, clock.clone())), clock)
}

pub struct Reply {
    pub status: StatusCode,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        text: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

pub fn app(s: &SharedService) -> Router {
    router(s.clone())
}

/// Shares, reactions, replies and chatter from five days before `t0` to day 20.
pub fn history(n: usize) -> Vec<SocialEvent> {
    let mut out: Vec<SocialEvent> = Vec::new();
    let mut last_share = 0;
    for i in 0..n {
        let seq = i as u64 + 1;
        let ts = day(-5) + TimeDelta::minutes(37 * i as i64 * 10);
        let actor = format!("u{}", i % 5);
        let payload = match i % 5 {
            _ if last_share == 0 || i % 5 == 0 => {
                last_share = seq;
                Payload::message(format!("have a look {}", link(1 + (i as u32 * 7) % 15)))
            }
            1 => Payload::reaction(last_share, "thumbsup"),
            2 => Payload::reaction(last_share, if i % 2 == 0 { "eyes" } else { "heart" }),
            3 => Payload::reply(last_share, format!("notes {i}")),
            _ => Payload::message("coffee at three?"),
        };
        out.push(SocialEvent {
            seq,
            ts,
            channel: "team".into(),
            actor,
            payload,
        });
    }
    out
}

pub fn transcript(n: usize) -> Transcript {
    Transcript {
        channel: "team".into(),
        start: t0(),
        end: Some(day(20)),
        config: ChannelConfig::new("team").with_frequency(Frequency::EveryOtherDay),
        corpus_path: None,
        corpus: corpus(40),
        events: history(n),
        audience: None,
    }
}
