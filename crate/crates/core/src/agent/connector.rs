use std::sync::mpsc::{Receiver, Sender};

use thiserror::Error;

use crate::generation::BotMessage;
use crate::kb::SocialEvent;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("connector: {0}")]
pub struct ConnectorError(pub String);

/// Adapter between the agent and a chat platform.
pub trait Connector: Send {
    /// Delivers a bot message and returns the platform's message id.
    fn post_message(&mut self, channel: &str, message: &BotMessage) -> Result<String, ConnectorError>;

    /// Stream of events the platform reports for `channel`.
    fn subscribe(&mut self, channel: &str) -> Receiver<SocialEvent>;

    /// Stable link to the post with sequence number `seq`.
    fn permalink(&self, channel: &str, seq: u64) -> String;

    /// Called for every event the agent commits, so platforms that echo
    /// their own traffic can forward it to subscribers.
    fn observe(&mut self, _event: &SocialEvent) {}
}

/// In-process connector used by the sandbox service and replay. Posting
/// always succeeds unless failures were queued with [`fail_next`].
///
/// [`fail_next`]: LoopbackConnector::fail_next
#[derive(Debug, Default)]
pub struct LoopbackConnector {
    posted: Vec<(String, String)>,
    subscribers: Vec<(String, Sender<SocialEvent>)>,
    failures: usize,
}

impl LoopbackConnector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Makes the next `n` posts fail.
    pub fn fail_next(&mut self, n: usize) {
        self.failures = n;
    }

    /// Channel and body of every delivered post.
    pub fn posted(&self) -> &[(String, String)] {
        &self.posted
    }
}

impl Connector for LoopbackConnector {
    fn post_message(&mut self, channel: &str, message: &BotMessage) -> Result<String, ConnectorError> {
        if self.failures > 0 {
            self.failures -= 1;
            return Err(ConnectorError("loopback post rejected".into()));
        }
        self.posted.push((channel.to_string(), message.body.clone()));
        Ok(format!("loopback-{}-{}", channel, self.posted.len()))
    }

    fn subscribe(&mut self, channel: &str) -> Receiver<SocialEvent> {
        let (tx, rx) = std::sync::mpsc::channel();
        self.subscribers.push((channel.to_string(), tx));
        rx
    }

    fn permalink(&self, channel: &str, seq: u64) -> String {
        permalink(channel, seq)
    }

    fn observe(&mut self, event: &SocialEvent) {
        self.subscribers
            .retain(|(c, tx)| c != &event.channel || tx.send(event.clone()).is_ok());
    }
}

pub fn permalink(channel: &str, seq: u64) -> String {
    format!("sandbox://channels/{channel}/messages/{seq}")
}
