use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::TimeDelta;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generation::CharLimits;
use crate::kb::{ChannelId, Member, Sentiment, Window};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    Daily,
    EveryOtherDay,
    #[default]
    Weekly,
}

impl Frequency {
    pub fn period(self) -> TimeDelta {
        match self {
            Frequency::Daily => TimeDelta::days(1),
            Frequency::EveryOtherDay => TimeDelta::days(2),
            Frequency::Weekly => TimeDelta::days(7),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::Daily => "daily",
            Frequency::EveryOtherDay => "every_other_day",
            Frequency::Weekly => "weekly",
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown frequency {0:?} (expected daily, every_other_day or weekly)")]
pub struct ParseFrequencyError(pub String);

impl FromStr for Frequency {
    type Err = ParseFrequencyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "daily" => Ok(Frequency::Daily),
            "every_other_day" => Ok(Frequency::EveryOtherDay),
            "weekly" => Ok(Frequency::Weekly),
            other => Err(ParseFrequencyError(other.to_string())),
        }
    }
}

/// Lengths of the seed-recency and heuristic windows, in days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Windows {
    pub seed_days: u32,
    pub heuristic_days: u32,
}

impl Default for Windows {
    fn default() -> Self {
        Windows {
            seed_days: 90,
            heuristic_days: 90,
        }
    }
}

impl Windows {
    pub fn seed(&self) -> Window {
        Window::days(self.seed_days)
    }

    pub fn heuristic(&self) -> Window {
        Window::days(self.heuristic_days)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("channel id is empty")]
    EmptyChannel,
    #[error("window lengths must be positive")]
    EmptyWindow,
    #[error("tau {0} is outside [-1, 1]")]
    Tau(String),
    #[error("character limit for {0} must be positive")]
    CharLimit(&'static str),
    #[error("duplicate roster member {0}")]
    DuplicateMember(String),
    #[error("agent id is empty")]
    EmptyAgent,
    #[error("recommend_k must be positive")]
    ZeroK,
}

fn default_tau() -> Scalar {
    0.6
}
fn default_cooldown() -> usize {
    3
}
fn default_k() -> usize {
    10
}
fn default_retries() -> u32 {
    2
}
fn default_agent() -> String {
    "agent".to_string()
}

/// Per-channel settings. Config events carry the whole struct, so the
/// channel's current config is always the payload of its latest config event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub channel: ChannelId,
    #[serde(default)]
    pub frequency: Frequency,
    #[serde(default)]
    pub windows: Windows,
    #[serde(default = "default_tau")]
    pub tau: Scalar,
    #[serde(default)]
    pub char_limits: CharLimits,
    #[serde(default)]
    pub emoji_overrides: BTreeMap<String, Sentiment>,
    #[serde(default = "default_cooldown")]
    pub mention_cooldown: usize,
    #[serde(default)]
    pub roster: Vec<Member>,
    #[serde(default = "default_k")]
    pub recommend_k: usize,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_agent")]
    pub agent_id: String,
}

impl ChannelConfig {
    pub fn new(channel: impl Into<ChannelId>) -> Self {
        ChannelConfig {
            channel: channel.into(),
            frequency: Frequency::default(),
            windows: Windows::default(),
            tau: default_tau(),
            char_limits: CharLimits::default(),
            emoji_overrides: BTreeMap::new(),
            mention_cooldown: default_cooldown(),
            roster: Vec::new(),
            recommend_k: default_k(),
            max_retries: default_retries(),
            agent_id: default_agent(),
        }
    }

    pub fn with_frequency(mut self, frequency: Frequency) -> Self {
        self.frequency = frequency;
        self
    }

    pub fn with_roster(mut self, roster: Vec<Member>) -> Self {
        self.roster = roster;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.channel.trim().is_empty() {
            return Err(ConfigError::EmptyChannel);
        }
        if self.agent_id.trim().is_empty() {
            return Err(ConfigError::EmptyAgent);
        }
        if self.windows.seed_days == 0 || self.windows.heuristic_days == 0 {
            return Err(ConfigError::EmptyWindow);
        }
        if !(-1.0..=1.0).contains(&self.tau) {
            return Err(ConfigError::Tau(self.tau.to_string()));
        }
        if self.recommend_k == 0 {
            return Err(ConfigError::ZeroK);
        }
        self.char_limits.validate()?;
        let mut seen = BTreeSet::new();
        for m in &self.roster {
            if !seen.insert(m.member_id.as_str()) {
                return Err(ConfigError::DuplicateMember(m.member_id.clone()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_round_trips_through_strings() {
        for f in [Frequency::Daily, Frequency::EveryOtherDay, Frequency::Weekly] {
            assert_eq!(f.as_str().parse::<Frequency>().unwrap(), f);
            assert_eq!(serde_json::to_string(&f).unwrap(), format!("\"{f}\""));
        }
        assert!("hourly".parse::<Frequency>().is_err());
        assert_eq!(Frequency::EveryOtherDay.period(), TimeDelta::days(2));
    }

    #[test]
    fn defaults_fill_missing_fields() {
        let c: ChannelConfig = serde_json::from_str(r#"{"channel":"lab"}"#).unwrap();
        assert_eq!(c, ChannelConfig::new("lab"));
        assert_eq!(c.windows.seed_days, 90);
        assert_eq!(c.char_limits.p4, 386);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut c = ChannelConfig::new("lab");
        c.windows.seed_days = 0;
        assert_eq!(c.validate(), Err(ConfigError::EmptyWindow));
        let mut c = ChannelConfig::new("lab");
        c.tau = 1.5;
        assert!(matches!(c.validate(), Err(ConfigError::Tau(_))));
        let c = ChannelConfig::new("lab").with_roster(vec![Member::new("a"), Member::new("a")]);
        assert_eq!(c.validate(), Err(ConfigError::DuplicateMember("a".into())));
        let mut c = ChannelConfig::new("lab");
        c.char_limits.p2 = 0;
        assert_eq!(c.validate(), Err(ConfigError::CharLimit("p2")));
    }

    #[test]
    fn unknown_frequency_is_rejected_on_decode() {
        let r: Result<ChannelConfig, _> =
            serde_json::from_str(r#"{"channel":"lab","frequency":"hourly"}"#);
        assert!(r.is_err());
    }
}
