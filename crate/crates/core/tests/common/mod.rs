//! Synthetic channels and brute-force recounts shared by the integration
//! tests. Nothing here calls the crate's own indexing or scoring code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeDelta, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use socialrag::agent::ChannelConfig;
use socialrag::clients::{Author, PaperRecord};
use socialrag::kb::{Member, PaperRef, Payload, SocialEvent};
use socialrag::sim::{Audience, Transcript};
use socialrag::signals::Heuristic;

pub const DIM: usize = 8;

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
pub fn emb_at(c: f64) -> Vec<f64> {
    let mut v = vec![0.0; DIM];
    v[0] = c;
    v[1] = (1.0 - c * c).max(0.0).sqrt();
    v
}

fn unit(rng: &mut ChaCha8Rng, center: &[f64], spread: f64) -> Vec<f64> {
    let v: Vec<f64> = center
        .iter()
        .map(|c| c + spread * (rng.random::<f64>() - 0.5))
        .collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

pub fn author_name(i: usize) -> String {
    const FIRST: [&str; 8] = ["Ana", "Ben", "Chen", "Dara", "Eli", "Femi", "Gus", "Hana"];
    const LAST: [&str; 5] = ["Ito", "Jones", "Kaur", "Lund", "Moreau"];
    format!("{} {}", FIRST[i % 8], LAST[(i / 8) % 5])
}

const VENUES: [&str; 4] = ["CHI", "CSCW", "UIST", "KDD"];
const AFFILIATIONS: [&str; 3] = ["North Lab", "South Institute", "East College"];

/// `n` papers in four topic clusters, with citations to earlier papers,
/// shared authors and venues. Paper ids run from 1.
pub fn synthetic_corpus(n: u32, seed: u64) -> Vec<PaperRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..4)
        .map(|k| (0..DIM).map(|d| if d == k { 1.0 } else { 0.15 }).collect())
        .collect();
    (1..=n)
        .map(|i| {
            let topic = rng.random_range(0..4usize);
            let mut r = PaperRecord::new(p(i), format!("Study {i} of topic {topic}"));
            r.abstract_text = Some(format!(
                "We examine question {i} in area {topic}. A study with {} people shows a clear effect. We release our materials.",
                10 + i
            ));
            let k = rng.random_range(1..=3usize);
            let mut ids = BTreeSet::new();
            while ids.len() < k {
                ids.insert(rng.random_range(0..20usize));
            }
            r.authors = ids
                .into_iter()
                .map(|a| {
                    let mut au = Author::new(&format!("a{a}"), &author_name(a));
                    if a % 4 == 0 {
                        au.affiliations = vec![AFFILIATIONS[a % 3].to_string()];
                    }
                    au
                })
                .collect();
            r.venue = Some(VENUES[rng.random_range(0..4usize)].to_string());
            r.year = Some(2020 + (i % 5) as i32);
            if i > 1 {
                for _ in 0..rng.random_range(0..3u32) {
                    let c = p(rng.random_range(1..i));
                    if !r.citations.contains(&c) {
                        r.citations.push(c);
                    }
                }
            }
            r.embedding = Some(unit(&mut rng, &centers[topic], 0.6));
            r
        })
        .collect()
}

/// Eight members; m0-m3 have linked author ids a0-a3, m4 shares an affiliation.
pub fn synthetic_roster() -> Vec<Member> {
    (0..8)
        .map(|i| {
            let mut m = Member::new(format!("m{i}"));
            m.display_name = format!("Member {i}");
            if i < 4 {
                m.linked_author_id = Some(format!("a{i}"));
            }
            if i == 4 {
                m.affiliation = Some("north lab".into());
            }
            m
        })
        .collect()
}

const EMOJI: [&str; 12] = [
    "thumbsup", ":heart:", "Tada", "+1", "fire", "eyes", "thinking_face", "thumbsdown", "confused", "wave",
    "rocket", ":-1:",
];

/// `n` chat events among the synthetic roster: shares of papers 1..=`shared`,
/// chatter, reactions and threaded replies, at nondecreasing times starting
/// ten days before `t0`.
pub fn synthetic_events(n: usize, shared: u32, seed: u64) -> Vec<SocialEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ts = day(-10);
    let mut out: Vec<SocialEvent> = Vec::with_capacity(n);
    for i in 0..n {
        let seq = i as u64 + 1;
        ts += TimeDelta::minutes(rng.random_range(0..120));
        let actor = format!("m{}", rng.random_range(0..8));
        let roll = rng.random_range(0..100);
        let payload = if out.is_empty() || roll < 30 {
            match rng.random_range(0..4) {
                0 => Payload::message("anyone around for lunch?"),
                1 => Payload::message(format!("two for you: {} and arxiv.org/abs/2401.{:05}", link(rng.random_range(1..=shared)), rng.random_range(1..=shared))),
                _ => Payload::message(format!("worth a read {}", link(rng.random_range(1..=shared)))),
            }
        } else if roll < 75 {
            Payload::reaction(rng.random_range(1..seq), EMOJI[rng.random_range(0..EMOJI.len())])
        } else {
            Payload::reply(rng.random_range(1..seq), format!("reply {i}"))
        };
        out.push(SocialEvent {
            seq,
            ts,
            channel: "lab".into(),
            actor,
            payload,
        });
    }
    out
}

pub fn synthetic_transcript(events: usize, seed: u64) -> Transcript {
    let events = synthetic_events(events, 40, seed);
    let mut config = ChannelConfig::new("lab").with_roster(synthetic_roster());
    config.frequency = socialrag::Frequency::Daily;
    Transcript {
        channel: "lab".into(),
        start: t0(),
        end: Some(day(30)),
        config,
        corpus_path: None,
        corpus: synthetic_corpus(200, seed ^ 0xc0),
        events,
        audience: Some(Audience {
            members: (0..8).map(|i| format!("m{i}")).collect(),
            react_prob: 0.3,
            reply_prob: 0.15,
            positive_share: 0.6,
        }),
    }
}

// ---- oracles ----

static ARXIV: std::sync::LazyLock<Regex> =
    std::sync::LazyLock::new(|| Regex::new(r"arxiv\.org/abs/(\d{4}\.\d{5})").unwrap());

/// Arxiv refs in a message, first appearance order, no repeats.
pub fn refs_in(text: &str) -> Vec<PaperRef> {
    let mut out = Vec::new();
    for c in ARXIV.captures_iter(text) {
        let r = PaperRef::arxiv(&c[1]);
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Pos,
    Neg,
    Neu,
}

pub fn polarity(emoji: &str) -> Polarity {
    let e = emoji.trim().trim_matches(':').to_lowercase();
    match e.as_str() {
        "thumbsup" | "+1" | "tada" | "heart" | "heart_eyes" | "fire" | "star" | "star-struck" | "clap"
        | "raised_hands" | "100" | "rocket" | "bulb" | "white_check_mark" | "heavy_check_mark" | "muscle"
        | "pray" | "smile" | "grinning" => Polarity::Pos,
        "thumbsdown" | "-1" | "confused" | "disappointed" | "x" | "no_entry_sign" | "face_with_rolling_eyes" => {
            Polarity::Neg
        }
        _ => Polarity::Neu,
    }
}

/// Papers a post shares: links in member messages, the recommended paper of bot posts.
pub fn post_refs(e: &SocialEvent) -> Vec<PaperRef> {
    match &e.payload {
        Payload::Message(m) => refs_in(&m.text),
        Payload::BotPost(b) => vec![b.metadata.paper_ref.clone()],
        _ => Vec::new(),
    }
}

/// Walks reply parents up to the thread's first post.
pub fn root_of(log: &[SocialEvent], mut seq: u64) -> u64 {
    loop {
        match &log[seq as usize - 1].payload {
            Payload::Reply(r) => seq = r.parent_seq,
            _ => return seq,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Recount {
    pub mentions: usize,
    pub positive: usize,
    pub negative: usize,
    pub neutral: usize,
    pub comments: usize,
    pub last: Option<DateTime<Utc>>,
}

/// Engagement around `paper` from events with `from <= ts <= now`.
pub fn recount(log: &[SocialEvent], paper: &PaperRef, from: Option<DateTime<Utc>>, now: DateTime<Utc>) -> Recount {
    let mut r = Recount::default();
    let inside = |ts: DateTime<Utc>| ts <= now && from.is_none_or(|f| ts >= f);
    for e in log {
        if !inside(e.ts) {
            continue;
        }
        let hit = match &e.payload {
            Payload::Message(_) | Payload::BotPost(_) => {
                let hit = post_refs(e).contains(paper);
                r.mentions += usize::from(hit);
                hit
            }
            Payload::Reaction(x) => {
                let hit = post_refs(&log[x.target_seq as usize - 1]).contains(paper);
                if hit {
                    match polarity(&x.emoji_name) {
                        Polarity::Pos => r.positive += 1,
                        Polarity::Neg => r.negative += 1,
                        Polarity::Neu => r.neutral += 1,
                    }
                }
                hit
            }
            Payload::Reply(_) => {
                let hit = post_refs(&log[root_of(log, e.seq) as usize - 1]).contains(paper);
                r.comments += usize::from(hit);
                hit
            }
            Payload::Config(_) => false,
        };
        if hit {
            r.last = Some(r.last.map_or(e.ts, |t| t.max(e.ts)));
        }
    }
    r
}

/// Whole-log totals behind the usage series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Totals {
    pub human_recs: u64,
    pub bot_recs: u64,
    pub emoji_reactions: u64,
    pub comments: u64,
}

pub fn totals(log: &[SocialEvent], agent: &str) -> Totals {
    let mut t = Totals::default();
    for e in log {
        match &e.payload {
            Payload::Message(m) if e.actor != agent && !refs_in(&m.text).is_empty() => t.human_recs += 1,
            Payload::BotPost(_) => t.bot_recs += 1,
            Payload::Reaction(x) if !post_refs(&log[x.target_seq as usize - 1]).is_empty() => {
                t.emoji_reactions += 1
            }
            Payload::Reply(_) if !post_refs(&log[root_of(log, e.seq) as usize - 1]).is_empty() => t.comments += 1,
            _ => {}
        }
    }
    t
}

// ---- signal oracle ----

pub struct World<'a> {
    pub log: &'a [SocialEvent],
    pub roster: &'a [Member],
    pub agent: &'a str,
    pub records: &'a BTreeMap<PaperRef, PaperRecord>,
    pub pubs: &'a BTreeMap<String, Vec<PaperRecord>>,
    pub now: DateTime<Utc>,
    pub window_days: i64,
    pub tau: f64,
}

fn norm(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn same(a: &Author, b: &Author) -> bool {
    if !a.author_id.is_empty() && !b.author_id.is_empty() {
        a.author_id == b.author_id
    } else {
        !a.name.trim().is_empty() && norm(&a.name) == norm(&b.name)
    }
}

pub fn cos(a: &PaperRecord, b: &PaperRecord) -> Option<f64> {
    let (x, y) = (a.embedding.as_ref()?, b.embedding.as_ref()?);
    let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    (nx > 0.0 && ny > 0.0).then(|| dot / (nx * ny))
}

struct Prior<'a> {
    rec: &'a PaperRecord,
    // (actor, ts, by agent)
    shares: Vec<(String, DateTime<Utc>, bool)>,
    // (actor, ts, polarity)
    reactions: Vec<(String, DateTime<Utc>, Polarity)>,
    comments: Vec<(String, DateTime<Utc>)>,
}

impl Prior<'_> {
    fn engagement(&self) -> usize {
        self.reactions.len() + self.comments.len()
    }
    fn interested(&self, m: &str) -> bool {
        self.shares.iter().any(|(a, _, bot)| a == m && !bot)
            || self.reactions.iter().any(|(a, _, p)| a == m && *p == Polarity::Pos)
            || self.comments.iter().any(|(a, _)| a == m)
    }
}

/// Every (heuristic, subject key, score) the definitions say should fire.
pub fn expected_signals(w: &World, cand: &PaperRecord) -> BTreeMap<(Heuristic, String), f64> {
    let is_bot = |e: &SocialEvent| e.actor == w.agent || matches!(e.payload, Payload::BotPost(_));
    let mut members: BTreeMap<String, Member> =
        w.roster.iter().map(|m| (m.member_id.clone(), m.clone())).collect();
    for e in w.log {
        if !is_bot(e) && !matches!(e.payload, Payload::Config(_)) {
            members.entry(e.actor.clone()).or_insert_with(|| Member::new(e.actor.clone()));
        }
    }
    members.remove(w.agent);

    let mut priors: BTreeMap<PaperRef, Prior> = BTreeMap::new();
    for e in w.log {
        let (refs, kind) = match &e.payload {
            Payload::Message(_) | Payload::BotPost(_) => (post_refs(e), 0),
            Payload::Reaction(x) => (post_refs(&w.log[x.target_seq as usize - 1]), 1),
            Payload::Reply(_) => (post_refs(&w.log[root_of(w.log, e.seq) as usize - 1]), 2),
            Payload::Config(_) => continue,
        };
        for r in refs {
            if r == cand.paper_ref {
                continue;
            }
            let Some(rec) = w.records.get(&r) else { continue };
            let pr = priors.entry(r).or_insert_with(|| Prior {
                rec,
                shares: vec![],
                reactions: vec![],
                comments: vec![],
            });
            match (&e.payload, kind) {
                (_, 0) => pr.shares.push((e.actor.clone(), e.ts, is_bot(e))),
                (Payload::Reaction(x), _) => pr.reactions.push((e.actor.clone(), e.ts, polarity(&x.emoji_name))),
                _ => pr.comments.push((e.actor.clone(), e.ts)),
            }
        }
    }
    let from = w.now - TimeDelta::days(w.window_days);
    let inside = |ts: DateTime<Utc>| ts >= from && ts <= w.now;
    let recent: Vec<&Prior> = priors
        .values()
        .filter(|p| {
            p.shares.iter().any(|(_, ts, bot)| !bot && inside(*ts))
                || p.reactions.iter().any(|(_, ts, _)| inside(*ts))
                || p.comments.iter().any(|(_, ts)| inside(*ts))
        })
        .collect();

    let mut out = BTreeMap::new();
    let ratio = |k: usize| k as f64 / (k as f64 + 1.0);

    for a in cand.authors.iter().filter(|a| !a.author_id.is_empty()) {
        for m in members.values() {
            if m.linked_author_id.as_deref() == Some(a.author_id.as_str()) {
                out.insert((Heuristic::H1, format!("{}/{}", m.member_id, a.name)), 1.0);
            }
        }
    }
    let mut seen: Vec<&Author> = Vec::new();
    for a in &cand.authors {
        if seen.iter().any(|s| same(s, a)) {
            continue;
        }
        seen.push(a);
        let k = recent.iter().filter(|p| p.rec.authors.iter().any(|b| same(a, b))).count();
        if k > 0 {
            out.insert((Heuristic::H2, a.name.clone()), ratio(k));
        }
    }
    let mut affs = BTreeSet::new();
    for a in &cand.authors {
        for aff in &a.affiliations {
            let key = norm(aff);
            if key.is_empty() || !affs.insert(key.clone()) {
                continue;
            }
            if members.values().any(|m| m.affiliation.as_deref().is_some_and(|x| norm(x) == key)) {
                out.insert((Heuristic::H3, aff.trim().to_string()), 0.5);
            }
        }
    }
    if let Some(v) = cand.venue.as_deref().filter(|v| !norm(v).is_empty()) {
        let k = recent
            .iter()
            .filter(|p| p.rec.venue.as_deref().is_some_and(|x| norm(x) == norm(v)))
            .count();
        if k > 0 {
            out.insert((Heuristic::H4, v.trim().to_string()), ratio(k));
        }
    }

    for (r, p) in &priors {
        let key = r.to_string();
        let shared = cand.authors.iter().any(|a| p.rec.authors.iter().any(|b| same(a, b)));
        let c = cos(cand, p.rec);
        let h5 = if cand.citations.contains(r) || p.rec.citations.contains(&cand.paper_ref) || cand.cited_by.contains(r) {
            Some(1.0)
        } else if shared {
            Some(0.8)
        } else {
            c.filter(|c| *c >= w.tau).map(|c| 0.75 * c)
        };
        if let Some(s) = h5 {
            out.insert((Heuristic::H5, key.clone()), s);
            let e = p.engagement();
            if e > 0 {
                out.insert((Heuristic::H6, key.clone()), s * ratio(e));
            }
        }
        let by_member = members
            .values()
            .any(|m| m.linked_author_id.as_deref().is_some_and(|id| !id.is_empty() && p.rec.authors.iter().any(|a| a.author_id == id)));
        if by_member {
            out.insert((Heuristic::H7, key), 0.5);
        }
    }

    for m in members.values() {
        let id = m.member_id.as_str();
        let interests: Vec<&Prior> = priors.values().filter(|p| p.interested(id)).collect();
        let sims: Vec<f64> = interests.iter().filter_map(|p| cos(cand, p.rec)).collect();
        let best = sims.iter().copied().fold(None, |b: Option<f64>, c| Some(b.map_or(c, |b| b.max(c))));
        if let Some(b) = best.filter(|b| *b >= w.tau) {
            out.insert((Heuristic::H8, id.to_string()), b);
        }
        let mut h9: Vec<f64> = Vec::new();
        if sims.iter().filter(|c| **c >= w.tau).count() >= 2 {
            h9.push(best.unwrap());
        }
        if cand
            .authors
            .iter()
            .any(|a| interests.iter().filter(|p| p.rec.authors.iter().any(|b| same(a, b))).count() >= 2)
        {
            h9.push(0.8);
        }
        if let Some(v) = cand.venue.as_deref().filter(|v| !v.trim().is_empty()) {
            let n = interests
                .iter()
                .filter(|p| p.rec.venue.as_deref().is_some_and(|x| norm(x) == norm(v)))
                .count();
            if n >= 2 {
                h9.push(0.6);
            }
        }
        let own = m.linked_author_id.as_deref().unwrap_or("");
        if !own.is_empty() {
            let pubs: Vec<&PaperRecord> = w
                .pubs
                .get(id)
                .into_iter()
                .flatten()
                .filter(|q| q.paper_ref != cand.paper_ref)
                .collect();
            let coauthored = pubs.iter().any(|q| {
                cand.authors
                    .iter()
                    .filter(|a| a.author_id != own)
                    .any(|a| q.authors.iter().any(|b| same(a, b)))
            });
            let similar = pubs
                .iter()
                .filter_map(|q| cos(cand, q))
                .filter(|c| *c >= w.tau)
                .fold(None, |b: Option<f64>, c| Some(b.map_or(c, |b| b.max(c))));
            if coauthored {
                h9.push(0.8);
            } else if let Some(c) = similar {
                h9.push(c);
            }
            if pubs
                .iter()
                .any(|q| q.citations.contains(&cand.paper_ref) || q.citations.iter().any(|c| cand.citations.contains(c)))
            {
                h9.push(1.0);
            }
        }
        if let Some(s) = h9.into_iter().reduce(f64::max) {
            out.insert((Heuristic::H9, id.to_string()), s);
        }
    }
    out
}

/// Compares detector output with the expected map: same keys, scores
/// within rounding.
pub fn same_signals(
    got: &[socialrag::SocialSignal],
    want: &BTreeMap<(Heuristic, String), f64>,
) -> Result<(), String> {
    let mut g: BTreeMap<(Heuristic, String), f64> = BTreeMap::new();
    for s in got {
        if g.insert((s.heuristic, s.payload.key()), s.score).is_some() {
            return Err(format!("duplicate signal {} {}", s.heuristic, s.payload.key()));
        }
    }
    let gk: BTreeSet<_> = g.keys().collect();
    let wk: BTreeSet<_> = want.keys().collect();
    if gk != wk {
        return Err(format!("fired {gk:?}, expected {wk:?}"));
    }
    for (k, v) in want {
        if (g[k] - v).abs() > 1e-9 {
            return Err(format!("{k:?}: score {} expected {v}", g[k]));
        }
    }
    Ok(())
}

/// `config` as seq 1, then `events` renumbered after it.
pub fn with_config(config: ChannelConfig, events: &[SocialEvent]) -> Vec<SocialEvent> {
    let mut out = vec![SocialEvent {
        seq: 1,
        ts: events.first().map_or(t0(), |e| e.ts),
        channel: config.channel.clone(),
        actor: "config".into(),
        payload: Payload::Config(Box::new(config)),
    }];
    for e in events {
        let payload = match &e.payload {
            Payload::Reaction(r) => Payload::reaction(r.target_seq + 1, r.emoji_name.clone()),
            Payload::Reply(r) => Payload::reply(r.parent_seq + 1, r.text.clone()),
            p => p.clone(),
        };
        out.push(SocialEvent {
            seq: e.seq + 1,
            payload,
            ..e.clone()
        });
    }
    out
}

/// Linked publications per member, looked up by author id.
pub fn publications(roster: &[Member], corpus: &[PaperRecord]) -> BTreeMap<String, Vec<PaperRecord>> {
    roster
        .iter()
        .filter_map(|m| {
            let id = m.linked_author_id.as_deref()?;
            Some((
                m.member_id.clone(),
                corpus.iter().filter(|r| r.authors.iter().any(|a| a.author_id == id)).cloned().collect(),
            ))
        })
        .collect()
}
