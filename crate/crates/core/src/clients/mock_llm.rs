//! Deterministic stand-in for a hosted completion model.
//!
//! The mock reads the directive lines of a prompt (required opening, strings
//! that must appear, character limits, bolding rules) and fills them in with
//! sentences lifted from the prompt's own material. Output is a pure function
//! of `(prompt, seed)`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::LazyLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

use super::{ClientError, CompletionClient, CompletionRequest};
use crate::generation::{split_sentences, SYNTHESIS_INSTRUCTION};

#[derive(Debug, Default)]
pub struct MockCompletion {
    calls: AtomicUsize,
}

impl MockCompletion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl CompletionClient for MockCompletion {
    fn complete(&self, request: &CompletionRequest) -> Result<String, ClientError> {
        if request.prompt.trim().is_empty() {
            return Err(ClientError::InvalidInput("empty prompt".into()));
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mut rng = ChaCha8Rng::seed_from_u64(request.seed ^ fnv1a(request.prompt.as_bytes()));
        let out = if request.prompt.contains(SYNTHESIS_INSTRUCTION) {
            synthesize(&request.prompt, request.max_output_chars, &mut rng)
        } else {
            let sections = split_sections(&request.prompt);
            let material = abstract_material(&request.prompt);
            sections
                .iter()
                .map(|s| compose_section(s, &material, request.max_output_chars, &mut rng))
                .filter(|s| !s.is_empty())
                .collect::<Vec<_>>()
                .join("\n\n")
        };
        if visible_len(&out) <= request.max_output_chars {
            Ok(out)
        } else {
            Ok(clamp_chars(&out.replace('*', ""), request.max_output_chars))
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn visible_len(s: &str) -> usize {
    s.chars().filter(|c| *c != '*').count()
}

// Hard cap on raw output; never cuts inside a word when avoidable.
fn clamp_chars(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        return s.to_string();
    }
    let cut: String = s.chars().take(max).collect();
    match cut.rfind(' ') {
        Some(i) if i > max / 2 => cut[..i].trim_end().to_string(),
        _ => cut,
    }
}

static START_WITH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#"Begin with "(.*)""#).unwrap());
static LIMIT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"at most (\d+) characters").unwrap());
static MUST_CONTAIN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^- Keep verbatim: (.+)$").unwrap());

#[derive(Debug)]
enum Directive {
    Congratulate(String),
    MentionAuthors(String),
    MentionText(String),
    Venue(String),
    SharedAuthors(String),
    Appreciate(String),
}

impl Directive {
    fn parse(line: &str) -> Option<Self> {
        let l = line.trim().strip_prefix("- ")?.trim();
        let value = |prefix: &str| l.strip_prefix(prefix).map(|v| v.trim().trim_end_matches('.').to_string());
        if let Some(v) = value("Congratulate ") {
            let who = v.strip_suffix(" on this paper").unwrap_or(&v);
            return Some(Directive::Congratulate(who.to_string()));
        }
        if let Some(v) = value("Name the shared authors:") {
            return Some(Directive::SharedAuthors(v));
        }
        if let Some(v) = value("Name the author ") {
            return Some(Directive::MentionAuthors(v));
        }
        if let Some(v) = value("Name the institution ") {
            return Some(Directive::MentionText(v));
        }
        if let Some(v) = value("Name the venue ") {
            return Some(Directive::Venue(v));
        }
        if let Some(v) = value("Thank ") {
            let who = v.split(" for sharing").next().unwrap_or(&v).trim();
            return Some(Directive::Appreciate(who.to_string()));
        }
        None
    }

    fn sentence(&self) -> String {
        match self {
            Directive::Congratulate(v) => format!("Congratulations to {v}!"),
            Directive::MentionAuthors(v) => format!("The work includes {v}."),
            Directive::MentionText(v) => format!("The paper comes from {v}."),
            Directive::Venue(v) => format!("It appears at {v}."),
            Directive::SharedAuthors(v) => format!("Shared authors: {v}."),
            Directive::Appreciate(v) => format!("Thanks to {v} for sharing it."),
        }
    }
}

struct Section<'a> {
    lines: Vec<&'a str>,
}

impl Section<'_> {
    fn start(&self) -> Option<String> {
        self.lines
            .iter()
            .find_map(|l| START_WITH.captures(l).map(|c| c[1].to_string()))
    }

    fn limit(&self) -> Option<usize> {
        self.lines
            .iter()
            .filter_map(|l| LIMIT.captures(l).and_then(|c| c[1].parse().ok()))
            .min()
    }

    fn directives(&self) -> Vec<Directive> {
        self.lines.iter().filter_map(|l| Directive::parse(l)).collect()
    }

    fn comments(&self) -> Vec<String> {
        self.lines
            .iter()
            .filter_map(|l| l.strip_prefix("Comments on "))
            .filter_map(|l| l.split_once(": ").map(|(_, c)| c.to_string()))
            .collect()
    }
}

fn split_sections(prompt: &str) -> Vec<Section<'_>> {
    let lines: Vec<&str> = prompt.lines().collect();
    match lines.iter().position(|l| l.starts_with("Paragraph 2")) {
        Some(i) => vec![
            Section { lines: lines[..i].to_vec() },
            Section { lines: lines[i..].to_vec() },
        ],
        _ => vec![Section { lines }],
    }
}

fn abstract_material(prompt: &str) -> Vec<String> {
    prompt
        .lines()
        .find_map(|l| {
            l.trim().strip_prefix("Abstract:")
        })
        .map(|a| split_sentences(a.trim()))
        .unwrap_or_default()
}

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

fn append_fitting(out: &mut String, piece: &str, limit: usize) -> bool {
    let sep = if out.is_empty() { "" } else { " " };
    if visible_len(out) + sep.len() + visible_len(piece) <= limit {
        out.push_str(sep);
        out.push_str(piece);
        return true;
    }
    // Partial sentence, cut at a word boundary.
    let room = limit.saturating_sub(visible_len(out) + sep.len() + 1);
    if room >= 24 {
        let cut = clamp_chars(piece, room);
        let cut = cut.trim_end_matches([',', ';', ':', ' ']);
        out.push_str(sep);
        out.push_str(cut);
        out.push('.');
    }
    false
}

fn compose_section(section: &Section, material: &[String], max: usize, rng: &mut ChaCha8Rng) -> String {
    let limit = section.limit().unwrap_or(max).min(max);
    let mut out = String::new();
    let starts = section.start();
    if let Some(s) = &starts {
        out.push_str(s);
    }
    for d in section.directives() {
        let s = d.sentence();
        out.push_str(if out.is_empty() { "" } else { " " });
        out.push_str(&s);
    }
    let comments = section.comments();
    let filler: Vec<String> = if comments.is_empty() {
        material.to_vec()
    } else {
        comments
    };
    if filler.is_empty() {
        return out;
    }
    let skip = rng.random_range(0..filler.len().min(2));
    for (i, s) in filler.iter().skip(skip).enumerate() {
        let piece = if i == 0 && starts.is_some() && out.ends_with(|c: char| c.is_alphanumeric() || matches!(c, '"' | '\'' | ',' | ':')) {
            // continue the required opening as one sentence
            let joined = format!("{} {}", out, lower_first(s));
            if visible_len(&joined) <= limit {
                out = joined;
                continue;
            }
            out.push('.');
            s.clone()
        } else {
            s.clone()
        };
        if !append_fitting(&mut out, &piece, limit) {
            break;
        }
    }
    if starts.is_some() && out.ends_with(|c: char| c.is_alphanumeric()) && visible_len(&out) < limit {
        out.push('.');
    }
    out
}

fn synthesize(prompt: &str, max: usize, rng: &mut ChaCha8Rng) -> String {
    let lines: Vec<&str> = prompt.lines().collect();
    let end = lines
        .iter()
        .position(|l| l.starts_with(SYNTHESIS_INSTRUCTION))
        .unwrap_or(lines.len());
    let material = lines[1.min(end)..end].join("\n");
    let limit = lines[end..]
        .iter()
        .find_map(|l| LIMIT.captures(l).and_then(|c| c[1].parse().ok()))
        .unwrap_or(max)
        .min(max);
    let required: Vec<String> = lines[end..]
        .iter()
        .filter_map(|l| MUST_CONTAIN.captures(l).map(|c| c[1].trim().to_string()))
        .collect();
    let forbidden: Vec<String> = lines
        .iter()
        .skip_while(|l| !l.starts_with("Never bold"))
        .skip(1)
        .filter_map(|l| l.strip_prefix("- ").map(|s| s.trim().to_string()))
        .collect();
    let wants_bold = prompt.contains("Mark up to three key phrases in bold");

    let sentences = split_sentences(&material);
    // (full sentence, shortest prefix keeping its required strings)
    let mut must: Vec<Option<String>> = vec![None; sentences.len()];
    let mut missing = Vec::new();
    for r in &required {
        match sentences.iter().position(|s| s.contains(r.as_str())) {
            Some(i) => {
                let s = &sentences[i];
                let end = required
                    .iter()
                    .filter_map(|q| s.find(q.as_str()).map(|p| p + q.len()))
                    .max()
                    .unwrap_or(s.len());
                let mut prefix = s[..end].trim_end().to_string();
                if !prefix.ends_with(['.', '!', '?']) {
                    prefix.push('.');
                }
                must[i] = Some(prefix);
            }
            None => missing.push(r.clone()),
        }
    }
    let extra: Vec<String> = missing
        .iter()
        .map(|r| {
            if r.starts_with('@') {
                format!("This might interest {r}.")
            } else {
                format!("See {r}.")
            }
        })
        .collect();

    let total = |chosen: &[Option<String>]| -> usize {
        let parts: Vec<&String> = chosen.iter().flatten().chain(extra.iter()).collect();
        parts.iter().map(|p| visible_len(p)).sum::<usize>() + parts.len().saturating_sub(1)
    };
    let mut chosen: Vec<Option<String>> = must.clone();
    for i in 0..sentences.len() {
        if chosen[i].is_some() {
            let mut trial = chosen.clone();
            trial[i] = Some(sentences[i].clone());
            if total(&trial) <= limit {
                chosen = trial;
            }
        }
    }
    for i in 0..sentences.len() {
        if chosen[i].is_none() && !rng.random_bool(0.2) {
            let mut trial = chosen.clone();
            trial[i] = Some(sentences[i].clone());
            if total(&trial) <= limit {
                chosen = trial;
            }
        }
    }
    let mut text = chosen
        .into_iter()
        .flatten()
        .chain(extra)
        .collect::<Vec<_>>()
        .join(" ");
    if wants_bold {
        let k = rng.random_range(1..=3);
        text = bold_phrases(&text, k, &forbidden, &required, rng);
    }
    text
}

fn bold_phrases(text: &str, k: usize, forbidden: &[String], required: &[String], rng: &mut ChaCha8Rng) -> String {
    let mut protected: Vec<(usize, usize)> = Vec::new();
    for p in forbidden.iter().chain(required) {
        if p.is_empty() {
            continue;
        }
        for (i, _) in text.match_indices(p.as_str()) {
            protected.push((i, i + p.len()));
        }
    }
    let words: Vec<(usize, &str)> = text
        .split(' ')
        .scan(0usize, |pos, w| {
            let start = *pos;
            *pos += w.len() + 1;
            Some((start, w))
        })
        .collect();
    let plain = |w: &str| w.len() >= 3 && w.chars().all(|c| c.is_alphabetic() || c == '-');
    let free = |a: usize, b: usize| protected.iter().all(|&(s, e)| b <= s || a >= e);
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let len = rng.random_range(2..=3usize);
    let mut i = if words.is_empty() { 0 } else { rng.random_range(0..words.len().min(4)) };
    while i + len <= words.len() && spans.len() < k {
        let run = &words[i..i + len];
        let a = run[0].0;
        let b = run[len - 1].0 + run[len - 1].1.len();
        if run.iter().all(|(_, w)| plain(w)) && free(a, b) {
            spans.push((a, b));
            i += len + 3;
        } else {
            i += 1;
        }
    }
    let mut out = text.to_string();
    for &(a, b) in spans.iter().rev() {
        out.insert(b, '*');
        out.insert(a, '*');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(prompt: &str, max: usize, seed: u64) -> CompletionRequest {
        CompletionRequest {
            prompt: prompt.to_string(),
            max_output_chars: max,
            seed,
        }
    }

    const P1: &str = "You write brief, neutral introductions of research papers for a group chat.
Abstract: We study tide pools along rocky coasts. Sampling 40 sites over two summers, we find that snail density predicts algal cover. The effect doubles in sheltered pools. We release the survey data.
Authors: Rosa Marin, Tomas Ek
Instructions:
- Congratulate Rosa Marin (@rosa) on this paper.
- Use at most 350 characters.
- Say what the paper does and finds; include headline numbers from the abstract when it reports any.";

    #[test]
    fn deterministic_per_seed() {
        let m = MockCompletion::new();
        let a = m.complete(&req(P1, 350, 7)).unwrap();
        let b = m.complete(&req(P1, 350, 7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(m.calls(), 2);
    }

    #[test]
    fn honors_character_limit_and_directives() {
        let m = MockCompletion::new();
        for seed in 0..20 {
            let out = m.complete(&req(P1, 350, seed)).unwrap();
            assert!(out.chars().count() <= 350, "{out}");
            assert!(out.contains("Rosa Marin (@rosa)"), "{out}");
        }
        let short = m.complete(&req(P1, 40, 1)).unwrap();
        assert!(short.chars().count() <= 40);
    }

    #[test]
    fn opens_with_required_prefix() {
        let prompt = "You explain why a research paper matters to one reader, for a group chat.
New paper: A
Abstract: A studies tide pools. It has a field survey.
Paper the reader engaged with: B
Abstract: B studies kelp forests.
Reader: @ivo
- In at most 300 characters, say how the new paper overlaps with and differs from B.
- Begin with \"@ivo may find this useful, as it shares ground with B:\"
- If the two papers are unrelated, reply with NONE and nothing else.";
        let out = MockCompletion::new().complete(&req(prompt, 300, 3)).unwrap();
        assert!(out.starts_with("@ivo may find this useful, as it shares ground with B: a studies"), "{out}");
        assert!(out.chars().count() <= 300);
    }

    #[test]
    fn synthesis_keeps_required_and_bolds_at_most_three() {
        let prompt = "You edit chat messages that recommend research papers.
Congratulations to @rosa on the tide pool survey! Snail density predicts algal cover at 40 sites. This paper connects to Kelp Canopies, since both survey coastal ecology. Earlier, on Kelp Canopies, @ivo asked about sampling.
Rewrite the draft above as one message of at most 200 characters.
- Keep verbatim: Kelp Canopies
- Keep verbatim: @anna
- Keep every person, institution, number and venue name.
Mark up to three key phrases in bold by wrapping each in single asterisks.
Never bold:
- Kelp Canopies
- @anna";
        let m = MockCompletion::new();
        for seed in 0..30 {
            let out = m.complete(&req(prompt, 200, seed)).unwrap();
            assert!(out.contains("Kelp Canopies"), "{out}");
            assert!(out.contains("@anna"), "{out}");
            assert!(visible_len(&out) <= 200, "{out}");
            let stars = out.matches('*').count();
            assert!(stars.is_multiple_of(2) && stars <= 6, "{out}");
            assert!(!out.contains("*Kelp"), "{out}");
        }
    }

    #[test]
    fn empty_prompt_is_invalid() {
        assert!(MockCompletion::new().complete(&req("  ", 10, 0)).is_err());
    }
}
