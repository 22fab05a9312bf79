use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use regex::Regex;

use super::markup::{link_token, mention_token, repair_bold};
use super::message::{BotMessage, Condition, MetadataBlock};
use crate::clients::PaperRecord;
use crate::kb::{Member, MemberId};
use crate::signals::SelectedSignals;

/// What assembly needs to know about the channel.
pub struct AssemblyContext<'a> {
    pub members: &'a BTreeMap<MemberId, Member>,
    /// Members mentioned too recently to be mentioned again.
    pub blocked: &'a BTreeSet<MemberId>,
    pub permalink: &'a dyn Fn(u64) -> String,
}

impl AssemblyContext<'_> {
    fn resolve(&self, handle: &str) -> Option<&Member> {
        self.members.get(handle).or_else(|| {
            self.members
                .values()
                .find(|m| !m.display_name.contains(' ') && m.display_name.eq_ignore_ascii_case(handle))
        })
    }
}

static HANDLE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(^|[^\w@<])@([A-Za-z0-9][A-Za-z0-9_.\-]*)").unwrap());

/// Strings that must never sit inside a bold span.
pub fn protected_strings(selected: &SelectedSignals, extra: &[String]) -> Vec<String> {
    let mut out: Vec<String> = extra.to_vec();
    if let Some(p) = selected.paper_connection.as_ref().and_then(|s| s.payload.prior()) {
        out.push(p.paper.title.clone());
    }
    if let Some(p) = super::chain::interest_brief(selected) {
        out.push(p.title.clone());
    }
    out
}

/// Turns `@handle`s into mention tokens: the first mention of an allowed
/// member becomes `<@id>`, later ones and blocked members render as the
/// display name. Unknown handles stay plain text.
pub fn render_mentions(text: &str, ctx: &AssemblyContext) -> String {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for c in HANDLE.captures_iter(text) {
        let whole = c.get(0).unwrap();
        let raw = c.get(2).unwrap();
        let handle = raw.as_str().trim_end_matches(['.', '-']);
        let end = raw.start() + handle.len();
        out.push_str(&text[last..raw.start() - 1]);
        match ctx.resolve(handle) {
            Some(m) if !seen.contains(&m.member_id) && !ctx.blocked.contains(&m.member_id) => {
                seen.insert(m.member_id.clone());
                out.push_str(&mention_token(&m.member_id));
            }
            Some(m) => out.push_str(m.name()),
            None => {
                log::warn!("no channel member matches @{handle}; leaving it as text");
                out.push('@');
                out.push_str(handle);
            }
        }
        last = end;
        debug_assert!(whole.end() >= end);
    }
    out.push_str(&text[last..]);
    out
}

/// Replaces the first occurrence of the prior paper's title with a link to
/// its thread, or appends the link when the title is absent.
fn insert_thread_link(body: &str, selected: &SelectedSignals, ctx: &AssemblyContext) -> String {
    let Some(prior) = selected.paper_connection.as_ref().and_then(|s| s.payload.prior()) else {
        return body.to_string();
    };
    let token = link_token(&(ctx.permalink)(prior.thread_seq), &prior.paper.title);
    match body.find(prior.paper.title.as_str()) {
        Some(i) => format!("{}{}{}", &body[..i], token, &body[i + prior.paper.title.len()..]),
        None if body.is_empty() => token,
        None => format!("{body} ({token})"),
    }
}

/// Raw generated or templated text to a postable message.
pub fn assemble_message(
    raw: &str,
    selected: &SelectedSignals,
    paper: &PaperRecord,
    ctx: &AssemblyContext,
    condition: Condition,
    protected: &[String],
) -> BotMessage {
    let protected = protected_strings(selected, protected);
    let body = repair_bold(raw.trim(), &protected, 3);
    let body = render_mentions(&body, ctx);
    let body = insert_thread_link(&body, selected, ctx);
    BotMessage {
        body,
        metadata: MetadataBlock::of(paper),
        provenance: selected.clone(),
        condition,
    }
}
