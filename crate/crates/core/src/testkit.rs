//! Shared fixtures for unit tests.

use chrono::{DateTime, TimeDelta, Utc};

use crate::agent::ChannelConfig;
use crate::clients::{Author, PaperRecord};
use crate::kb::{KnowledgeBase, Member, PaperRef, Payload, SocialEvent};

pub fn t0() -> DateTime<Utc> {
    "2024-03-01T12:00:00Z".parse().unwrap()
}

pub fn day(n: i64) -> DateTime<Utc> {
    t0() + TimeDelta::days(n)
}

pub fn p(n: u32) -> PaperRef {
    PaperRef::arxiv(&format!("2401.{n:05}"))
}

pub fn link(n: u32) -> String {
    format!("https://arxiv.org/abs/2401.{n:05}")
}

/// Unit vector at cosine `c` to the first axis.
pub fn emb(c: f64) -> Vec<f64> {
    let mut v = vec![0.0; 8];
    v[0] = c;
    v[1] = (1.0 - c * c).max(0.0).sqrt();
    v
}

pub fn rec(n: u32, authors: &[(&str, &str)], venue: Option<&str>, cos: f64) -> PaperRecord {
    let mut r = PaperRecord::new(p(n), format!("Paper {n}"));
    r.abstract_text = Some(format!(
        "We study topic {n} with a field survey. Across 12 sites the effect holds. Data are released."
    ));
    r.authors = authors.iter().map(|(id, name)| Author::new(id, name)).collect();
    r.venue = venue.map(str::to_string);
    r.year = Some(2024);
    r.embedding = Some(emb(cos));
    r
}

pub fn named(id: &str, name: &str) -> Member {
    let mut m = Member::new(id);
    m.display_name = name.into();
    m
}

pub fn roster() -> Vec<Member> {
    let mut ada = named("ada", "Ada Lovelace");
    ada.linked_author_id = Some("a100".into());
    vec![ada, named("bo", "Bo Chen"), named("cy", "Cy Young")]
}

/// Candidate authored by member `ada`, citing paper 1.
pub fn candidate() -> PaperRecord {
    let mut c = rec(100, &[("a100", "Ada Lovelace"), ("z9", "Zoe Park")], Some("CHI"), 1.0);
    c.citations = vec![p(1)];
    c.citation_contexts
        .insert(p(1), vec!["We extend the survey protocol of prior work [3].".into()]);
    c
}

/// Config at seq 1, then `events` as (day, actor, payload) from seq 2.
pub fn channel_kb(events: Vec<(i64, &str, Payload)>, records: &[PaperRecord]) -> KnowledgeBase {
    let mut k = KnowledgeBase::new();
    let cfg = ChannelConfig::new("lab").with_roster(roster());
    let mut all = vec![(0, "config", Payload::Config(Box::new(cfg)))];
    all.extend(events);
    for (i, (d, actor, payload)) in all.into_iter().enumerate() {
        k.ingest_event(SocialEvent {
            seq: i as u64 + 1,
            ts: day(d),
            channel: "lab".into(),
            actor: actor.into(),
            payload,
        })
        .unwrap();
    }
    for r in records {
        k.attach_record("lab", r.clone());
    }
    k
}

/// Paper 1 shared by cy, thumbed up by bo and discussed in a reply.
pub fn rich_kb() -> KnowledgeBase {
    channel_kb(
        vec![
            (10, "cy", Payload::message(format!("Worth a look {}", link(1)))),
            (10, "bo", Payload::reaction(2, "thumbsup")),
            (11, "bo", Payload::reply(2, "The sampling design is neat")),
        ],
        &[rec(1, &[("x1", "Xu Li")], Some("CHI"), 0.9)],
    )
}
