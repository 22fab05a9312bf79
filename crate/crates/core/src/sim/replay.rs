use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{DateTime, TimeDelta, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::analytics::{engagement_report, CumulativeSeries};
use super::transcript::{Audience, Transcript, TranscriptError};
use crate::agent::{Agent, AgentError, CycleResult, LoopbackConnector};
use crate::clients::MockCompletion;
use crate::kb::{KnowledgeBase, Payload, SocialEvent};

/// Virtual time between scheduler ticks.
pub const TICK: TimeDelta = TimeDelta::hours(1);

const POSITIVE: [&str; 3] = ["thumbsup", "heart", "tada"];
const OTHER: [&str; 3] = ["eyes", "thinking_face", "thumbsdown"];
const REPLIES: [&str; 4] = [
    "Thanks, adding this to my reading list.",
    "Interesting, how does it compare to what we discussed last month?",
    "I skimmed it, the evaluation looks solid.",
    "Not sure this is relevant for us.",
];

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error("applying transcript event {index}: {source}")]
    Apply { index: usize, source: AgentError },
    #[error(transparent)]
    Agent(#[from] AgentError),
}

pub struct ReplayResult {
    pub kb: KnowledgeBase,
    pub bot_posts: Vec<SocialEvent>,
    pub series: CumulativeSeries,
    /// Every cycle the scheduler ran, with its tick time.
    pub cycles: Vec<(DateTime<Utc>, CycleResult)>,
}

struct Pending {
    ts: DateTime<Utc>,
    actor: String,
    payload: Payload,
}

fn audience_response(
    audience: &Audience,
    rng: &mut ChaCha8Rng,
    post_seq: u64,
    post_ts: DateTime<Utc>,
) -> Vec<Pending> {
    let mut out = Vec::new();
    for m in &audience.members {
        if rng.random_bool(audience.react_prob) {
            let pool = if rng.random_bool(audience.positive_share) { &POSITIVE } else { &OTHER };
            let emoji = pool[rng.random_range(0..pool.len())];
            out.push(Pending {
                ts: post_ts + TimeDelta::minutes(rng.random_range(5..=600)),
                actor: m.clone(),
                payload: Payload::reaction(post_seq, emoji),
            });
        }
        if rng.random_bool(audience.reply_prob) {
            let text = REPLIES[rng.random_range(0..REPLIES.len())];
            out.push(Pending {
                ts: post_ts + TimeDelta::minutes(rng.random_range(5..=1440)),
                actor: m.clone(),
                payload: Payload::reply(post_seq, text),
            });
        }
    }
    out
}

struct Replayer<'t> {
    t: &'t Transcript,
    agent: Agent,
    // transcript seq -> assigned seq
    seqs: BTreeMap<u64, u64>,
    next_event: usize,
    audience: Vec<Pending>,
}

impl Replayer<'_> {
    fn apply_transcript(&mut self, index: usize) -> Result<(), ReplayError> {
        let e = &self.t.events[index];
        let remap = |s: u64| self.seqs.get(&s).copied().unwrap_or(s);
        let payload = match &e.payload {
            Payload::Reaction(r) => Payload::reaction(remap(r.target_seq), r.emoji_name.clone()),
            Payload::Reply(r) => Payload::reply(remap(r.parent_seq), r.text.clone()),
            p => p.clone(),
        };
        let ev = self
            .agent
            .append(&self.t.channel, e.ts, &e.actor, payload)
            .map_err(|source| ReplayError::Apply { index, source })?;
        self.seqs.insert(e.seq, ev.seq);
        Ok(())
    }

    /// Applies transcript and audience events up to `until`, in time order;
    /// on equal times transcript events go first.
    fn apply_until(&mut self, until: Option<DateTime<Utc>>) -> Result<(), ReplayError> {
        let due = |ts: DateTime<Utc>| until.is_none_or(|u| ts <= u);
        loop {
            let next_t = self
                .t
                .events
                .get(self.next_event)
                .map(|e| e.ts)
                .filter(|&ts| due(ts));
            let next_a = self
                .audience
                .iter()
                .enumerate()
                .filter(|(_, p)| due(p.ts))
                .min_by_key(|(i, p)| (p.ts, *i))
                .map(|(i, p)| (i, p.ts));
            match (next_t, next_a) {
                (Some(tt), Some((_, at))) if tt <= at => self.step_transcript()?,
                (Some(_), None) => self.step_transcript()?,
                (_, Some((i, _))) => {
                    let p = self.audience.remove(i);
                    self.agent.append(&self.t.channel, p.ts, &p.actor, p.payload)?;
                }
                (None, None) => return Ok(()),
            }
        }
    }

    fn step_transcript(&mut self) -> Result<(), ReplayError> {
        let i = self.next_event;
        self.next_event += 1;
        self.apply_transcript(i)
    }
}

/// Replays `t` in virtual time with mock clients bound to its corpus.
/// The result depends only on `(t, seed)`.
pub fn replay(t: &Transcript, seed: u64) -> Result<ReplayResult, ReplayError> {
    let corpus = Arc::new(t.corpus()?);
    t.validate(&corpus)?;
    let agent = Agent::new(
        corpus.clone(),
        corpus,
        Arc::new(MockCompletion::new()),
        Box::new(LoopbackConnector::new()),
        seed,
    );
    let mut r = Replayer {
        t,
        agent,
        seqs: BTreeMap::new(),
        next_event: 0,
        audience: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_a0d1_e4ce_0001);

    // history from before the start, then the config takes effect
    while r.t.events.get(r.next_event).is_some_and(|e| e.ts < t.start) {
        r.step_transcript()?;
    }
    r.agent.set_config(t.config.clone(), t.start)?;

    let mut cycles = Vec::new();
    let mut now = t.start;
    while now < t.end() {
        r.apply_until(Some(now))?;
        for (_, result) in r.agent.tick(now) {
            // the loopback connector never fails, so an error is a real fault
            let c = result?;
            if let (Some(seq), Some(a)) = (c.posted_seq, &t.audience) {
                r.audience.extend(audience_response(a, &mut rng, seq, now));
            }
            cycles.push((now, c));
        }
        now += TICK;
    }
    r.apply_until(None)?;

    let kb = r.agent.kb().clone();
    let channel = kb.channel_or_err(&t.channel).map_err(AgentError::from)?;
    let bot_posts = channel.bot_posts().map(|(e, _)| e.clone()).collect();
    let series = engagement_report(channel);
    Ok(ReplayResult {
        kb,
        bot_posts,
        series,
        cycles,
    })
}
