//! Channel-agnostic message markup.
//!
//! - `*text*` bold span
//! - `<@member_id>` mention token
//! - `<url|title>` link token
//!
//! Connectors translate these into their platform's syntax.

use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;

static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<@([^<>|\s]+)>").unwrap());
static LINK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"<([^@<>|\s][^<>|\s]*)\|([^<>]*)>").unwrap());

pub fn mention_token(member_id: &str) -> String {
    format!("<@{member_id}>")
}

pub fn link_token(url: &str, title: &str) -> String {
    format!("<{url}|{title}>")
}

/// Member ids of every mention token, in order.
pub fn mentions(body: &str) -> Vec<String> {
    MENTION.captures_iter(body).map(|c| c[1].to_string()).collect()
}

/// `(url, title)` of every link token, in order.
pub fn links(body: &str) -> Vec<(String, String)> {
    LINK.captures_iter(body)
        .map(|c| (c[1].to_string(), c[2].to_string()))
        .collect()
}

/// Text as a reader sees it: bold markers dropped, mentions as `@id`,
/// links as their title.
pub fn render_plain(body: &str) -> String {
    let s = LINK.replace_all(body, "$2");
    let s = MENTION.replace_all(&s, "@$1");
    s.replace('*', "")
}

pub fn visible_len(body: &str) -> usize {
    render_plain(body).chars().count()
}

fn star_positions(body: &str) -> Vec<usize> {
    body.match_indices('*').map(|(i, _)| i).collect()
}

/// Byte ranges (markers included) of bold spans, pairing markers left to
/// right. A trailing unpaired marker is not a span.
pub fn bold_spans(body: &str) -> Vec<Range<usize>> {
    star_positions(body)
        .chunks_exact(2)
        .map(|p| p[0]..p[1] + 1)
        .collect()
}

/// Inner text of each bold span.
pub fn bold_texts(body: &str) -> Vec<&str> {
    bold_spans(body)
        .into_iter()
        .map(|r| &body[r.start + 1..r.end - 1])
        .collect()
}

fn remove_markers(body: &str, drop: &[usize]) -> String {
    body.char_indices()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, c)| c)
        .collect()
}

/// Unbolds spans that overlap a protected string or contain a mention,
/// keeps at most `max` spans and drops an unpaired trailing marker.
pub fn repair_bold(body: &str, protected: &[String], max: usize) -> String {
    let stars = star_positions(body);
    // plain-text coordinate of a byte offset in `body`
    let plain_pos = |i: usize| i - stars.iter().filter(|&&s| s < i).count();
    let plain: String = body.replace('*', "");
    let guarded: Vec<Range<usize>> = protected
        .iter()
        .filter(|p| !p.is_empty())
        .flat_map(|p| {
            plain
                .match_indices(p.as_str())
                .map(|(i, m)| i..i + m.len())
                .collect::<Vec<_>>()
        })
        .collect();
    let mut drop = Vec::new();
    let mut kept = 0;
    for span in bold_spans(body) {
        let inner = &body[span.start + 1..span.end - 1];
        let (a, b) = (plain_pos(span.start), plain_pos(span.end - 1));
        let overlaps = guarded.iter().any(|g| g.start < b && a < g.end);
        if overlaps || inner.contains('@') || inner.contains('<') || inner.trim().is_empty() || kept >= max {
            drop.push(span.start);
            drop.push(span.end - 1);
        } else {
            kept += 1;
        }
    }
    if stars.len() % 2 == 1 {
        drop.push(*stars.last().unwrap());
    }
    remove_markers(body, &drop)
}

/// Splits on line breaks and on `.`, `!` or `?` followed by whitespace.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let mut cur = String::new();
        let mut chars = line.chars().peekable();
        while let Some(c) = chars.next() {
            cur.push(c);
            if matches!(c, '.' | '!' | '?') && chars.peek().is_none_or(|n| n.is_whitespace()) {
                let s = cur.trim();
                if !s.is_empty() {
                    out.push(s.to_string());
                }
                cur.clear();
            }
        }
        let s = cur.trim();
        if !s.is_empty() {
            out.push(s.to_string());
        }
    }
    out
}
