//! Chat events and their line-oriented wire format.

use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::KbError;
use crate::agent::ChannelConfig;
use crate::generation::BotMessage;

pub type ChannelId = String;
pub type MemberId = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Message,
    Reaction,
    Reply,
    BotPost,
    Config,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessagePayload {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionPayload {
    pub target_seq: u64,
    pub emoji_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplyPayload {
    pub parent_seq: u64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Message(MessagePayload),
    Reaction(ReactionPayload),
    Reply(ReplyPayload),
    BotPost(Box<BotMessage>),
    Config(Box<ChannelConfig>),
}

impl Payload {
    pub fn kind(&self) -> EventKind {
        match self {
            Payload::Message(_) => EventKind::Message,
            Payload::Reaction(_) => EventKind::Reaction,
            Payload::Reply(_) => EventKind::Reply,
            Payload::BotPost(_) => EventKind::BotPost,
            Payload::Config(_) => EventKind::Config,
        }
    }

    pub fn message(text: impl Into<String>) -> Self {
        Payload::Message(MessagePayload { text: text.into() })
    }

    pub fn reaction(target_seq: u64, emoji_name: impl Into<String>) -> Self {
        Payload::Reaction(ReactionPayload {
            target_seq,
            emoji_name: emoji_name.into(),
        })
    }

    pub fn reply(parent_seq: u64, text: impl Into<String>) -> Self {
        Payload::Reply(ReplyPayload {
            parent_seq,
            text: text.into(),
        })
    }
}

/// One immutable group interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialEvent {
    pub seq: u64,
    pub ts: DateTime<Utc>,
    pub channel: ChannelId,
    pub actor: String,
    pub payload: Payload,
}

impl SocialEvent {
    pub fn kind(&self) -> EventKind {
        self.payload.kind()
    }

    /// Sequence number this event points at, for reactions and replies.
    pub fn target_seq(&self) -> Option<u64> {
        match &self.payload {
            Payload::Reaction(r) => Some(r.target_seq),
            Payload::Reply(r) => Some(r.parent_seq),
            _ => None,
        }
    }
}

/// A channel participant. Optional fields come from account linkage to a
/// publication record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub member_id: MemberId,
    #[serde(default)]
    pub display_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linked_author_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affiliation: Option<String>,
}

impl Member {
    pub fn new(member_id: impl Into<String>) -> Self {
        let member_id = member_id.into();
        Member {
            display_name: member_id.clone(),
            member_id,
            linked_author_id: None,
            affiliation: None,
        }
    }

    pub fn name(&self) -> &str {
        if self.display_name.is_empty() {
            &self.member_id
        } else {
            &self.display_name
        }
    }
}

// Wire record: exactly the six keys, in this order.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EventRecord {
    seq: u64,
    ts: DateTime<Utc>,
    channel: ChannelId,
    kind: EventKind,
    actor: String,
    payload: Value,
}

#[derive(Serialize)]
#[serde(untagged)]
enum PayloadOut<'a> {
    Message(&'a MessagePayload),
    Reaction(&'a ReactionPayload),
    Reply(&'a ReplyPayload),
    BotPost(&'a BotMessage),
    Config(&'a ChannelConfig),
}

#[derive(Serialize)]
struct EventRecordOut<'a> {
    seq: u64,
    ts: &'a DateTime<Utc>,
    channel: &'a str,
    kind: EventKind,
    actor: &'a str,
    payload: PayloadOut<'a>,
}

impl Serialize for SocialEvent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let payload = match &self.payload {
            Payload::Message(p) => PayloadOut::Message(p),
            Payload::Reaction(p) => PayloadOut::Reaction(p),
            Payload::Reply(p) => PayloadOut::Reply(p),
            Payload::BotPost(p) => PayloadOut::BotPost(p),
            Payload::Config(p) => PayloadOut::Config(p),
        };
        EventRecordOut {
            seq: self.seq,
            ts: &self.ts,
            channel: &self.channel,
            kind: self.kind(),
            actor: &self.actor,
            payload,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SocialEvent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = EventRecord::deserialize(d)?;
        let payload = match r.kind {
            EventKind::Message => serde_json::from_value(r.payload).map(Payload::Message),
            EventKind::Reaction => serde_json::from_value(r.payload).map(Payload::Reaction),
            EventKind::Reply => serde_json::from_value(r.payload).map(Payload::Reply),
            EventKind::BotPost => serde_json::from_value(r.payload).map(Payload::BotPost),
            EventKind::Config => serde_json::from_value(r.payload).map(Payload::Config),
        }
        .map_err(D::Error::custom)?;
        Ok(SocialEvent {
            seq: r.seq,
            ts: r.ts,
            channel: r.channel,
            actor: r.actor,
            payload,
        })
    }
}

/// Appends events to a line-per-record log.
pub fn write_event<W: Write>(out: &mut W, event: &SocialEvent) -> Result<(), KbError> {
    serde_json::to_writer(&mut *out, event).map_err(|e| KbError::Persistence(e.to_string()))?;
    out.write_all(b"\n")
        .map_err(|e| KbError::Persistence(e.to_string()))
}

/// Reads every event from a line-per-record log. Blank lines are skipped.
pub fn read_events<R: BufRead>(input: R) -> Result<Vec<SocialEvent>, KbError> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| KbError::Persistence(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(&line)
            .map_err(|e| KbError::Persistence(format!("line {}: {e}", i + 1)))?;
        events.push(ev);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> DateTime<Utc> {
        s.parse().unwrap()
    }

    #[test]
    fn wire_record_has_exact_keys_in_order() {
        let ev = SocialEvent {
            seq: 3,
            ts: ts("2024-03-01T10:00:00Z"),
            channel: "lab".into(),
            actor: "ana".into(),
            payload: Payload::reaction(1, "thumbsup"),
        };
        let line = serde_json::to_string(&ev).unwrap();
        assert_eq!(
            line,
            r#"{"seq":3,"ts":"2024-03-01T10:00:00Z","channel":"lab","kind":"reaction","actor":"ana","payload":{"target_seq":1,"emoji_name":"thumbsup"}}"#
        );
        let back: SocialEvent = serde_json::from_str(&line).unwrap();
        assert_eq!(back, ev);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let line = r#"{"seq":1,"ts":"2024-03-01T10:00:00Z","channel":"c","kind":"message","actor":"a","payload":{"text":"x"},"extra":1}"#;
        assert!(serde_json::from_str::<SocialEvent>(line).is_err());
    }

    #[test]
    fn kind_payload_mismatch_is_rejected() {
        let line = r#"{"seq":1,"ts":"2024-03-01T10:00:00Z","channel":"c","kind":"reply","actor":"a","payload":{"text":"x"}}"#;
        assert!(serde_json::from_str::<SocialEvent>(line).is_err());
    }

    #[test]
    fn log_round_trip_is_byte_stable() {
        let events = vec![
            SocialEvent {
                seq: 1,
                ts: ts("2024-03-01T10:00:00Z"),
                channel: "lab".into(),
                actor: "ana".into(),
                payload: Payload::message("https://arxiv.org/abs/2301.00001"),
            },
            SocialEvent {
                seq: 2,
                ts: ts("2024-03-01T11:30:00.250Z"),
                channel: "lab".into(),
                actor: "bo".into(),
                payload: Payload::reply(1, "nice \"quote\""),
            },
        ];
        let mut buf = Vec::new();
        for e in &events {
            write_event(&mut buf, e).unwrap();
        }
        let back = read_events(buf.as_slice()).unwrap();
        assert_eq!(back, events);
        let mut again = Vec::new();
        for e in &back {
            write_event(&mut again, e).unwrap();
        }
        assert_eq!(again, buf);
    }
}
