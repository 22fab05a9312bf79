use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::markup::{bold_spans, bold_texts, links, mentions, render_plain, visible_len};
use super::message::BotMessage;
use crate::kb::MemberId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    BoldCount,
    Length,
    RequiredString,
    ForbiddenBold,
    MentionCooldown,
    MentionUnknown,
    MentionDuplicate,
    ThreadLink,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule_id: RuleId,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn rules(&self) -> BTreeSet<RuleId> {
        self.violations.iter().map(|v| v.rule_id).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageConstraints {
    pub max_len: Option<usize>,
    pub max_bold: usize,
    pub required: Vec<String>,
    pub forbidden_bold: Vec<String>,
    pub members: BTreeSet<MemberId>,
    pub cooldown_blocked: BTreeSet<MemberId>,
    /// Permalink the body must link to exactly once; `None` forbids links.
    pub thread_link: Option<String>,
}

impl MessageConstraints {
    pub fn new(members: BTreeSet<MemberId>) -> Self {
        MessageConstraints {
            max_bold: 3,
            members,
            ..Default::default()
        }
    }
}

pub fn validate_message(msg: &BotMessage, c: &MessageConstraints) -> ValidationReport {
    let mut v = Vec::new();
    let mut add = |rule_id, detail: String| v.push(Violation { rule_id, detail });
    let body = msg.body.as_str();

    let spans = bold_spans(body).len();
    if spans > c.max_bold {
        add(RuleId::BoldCount, format!("{spans} bold spans, at most {}", c.max_bold));
    }
    if let Some(max) = c.max_len {
        let len = visible_len(body);
        if len > max {
            add(RuleId::Length, format!("{len} visible characters, limit {max}"));
        }
    }
    let plain = render_plain(body);
    for r in &c.required {
        if !plain.contains(r.as_str()) {
            add(RuleId::RequiredString, format!("missing {r:?}"));
        }
    }
    for t in bold_texts(body) {
        let shown = render_plain(t);
        if t.contains("<@") || c.forbidden_bold.iter().any(|f| !f.is_empty() && shown.contains(f.as_str())) {
            add(RuleId::ForbiddenBold, format!("bolded {t:?}"));
        }
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for m in mentions(body) {
        *counts.entry(m).or_default() += 1;
    }
    for (m, n) in &counts {
        if !c.members.contains(m) {
            add(RuleId::MentionUnknown, format!("<@{m}> is not a channel member"));
        }
        if c.cooldown_blocked.contains(m) {
            add(RuleId::MentionCooldown, format!("<@{m}> was mentioned recently"));
        }
        if *n > 1 {
            add(RuleId::MentionDuplicate, format!("<@{m}> appears {n} times"));
        }
    }
    let ls = links(body);
    match &c.thread_link {
        Some(url) => {
            if ls.len() != 1 || ls[0].0 != *url {
                add(RuleId::ThreadLink, format!("expected one link to {url}, found {ls:?}"));
            }
        }
        None => {
            if !ls.is_empty() {
                add(RuleId::ThreadLink, format!("unexpected links {ls:?}"));
            }
        }
    }
    ValidationReport {
        ok: v.is_empty(),
        violations: v,
    }
}
