use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agent::ConfigError;
use crate::clients::PaperRecord;
use crate::kb::MemberId;
use crate::signals::{
    Category, Heuristic, InterestVariant, PaperBrief, PriorThread, Relation, SelectedSignals,
    SignalPayload, SocialSignal,
};

/// Opening of the synthesis instruction, right after the spliced draft.
pub const SYNTHESIS_INSTRUCTION: &str = "Rewrite the draft above";

/// Character limits per stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharLimits {
    pub p1: usize,
    /// First paragraph of the prior-paper stage.
    pub p2: usize,
    /// Second paragraph of the prior-paper stage (what people thought).
    pub p2_thoughts: usize,
    pub p3: usize,
    pub p4: usize,
}

impl Default for CharLimits {
    fn default() -> Self {
        CharLimits {
            p1: 350,
            p2: 425,
            p2_thoughts: 250,
            p3: 300,
            p4: 386,
        }
    }
}

impl CharLimits {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p2_thoughts", self.p2_thoughts),
            ("p3", self.p3),
            ("p4", self.p4),
        ] {
            if v == 0 {
                return Err(ConfigError::CharLimit(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    P1Metadata,
    P2PriorPaper,
    P3Member,
    P4Synthesis,
}

impl StageKind {
    pub fn category(self) -> Option<Category> {
        match self {
            StageKind::P1Metadata => Some(Category::I),
            StageKind::P2PriorPaper => Some(Category::II),
            StageKind::P3Member => Some(Category::III),
            StageKind::P4Synthesis => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub kind: StageKind,
    pub template_text: String,
    pub char_limit: usize,
    pub required_strings: Vec<String>,
    pub forbidden_bold_strings: Vec<String>,
    /// Byte offset in `template_text` where earlier stage outputs go.
    pub splice_at: Option<usize>,
}

impl PromptSpec {
    /// Final prompt with `outputs` spliced in.
    pub fn instantiate(&self, outputs: &[String]) -> String {
        match self.splice_at {
            Some(at) => {
                let body: Vec<&str> = outputs
                    .iter()
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty())
                    .collect();
                let mut s = self.template_text[..at].to_string();
                for o in body {
                    s.push_str(o);
                    s.push('\n');
                }
                s.push_str(&self.template_text[at..]);
                s
            }
            None => self.template_text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptChain {
    pub stages: Vec<PromptSpec>,
}

impl PromptChain {
    pub fn kinds(&self) -> Vec<StageKind> {
        self.stages.iter().map(|s| s.kind).collect()
    }

    pub fn synthesis(&self) -> &PromptSpec {
        self.stages.last().expect("chain always ends with synthesis")
    }
}

/// How each member is referred to in prompts: `@id` by default, a plain
/// name for members that must not be mentioned right now.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemberNames {
    plain: BTreeMap<MemberId, String>,
    agent_id: Option<String>,
}

impl MemberNames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_plain(mut self, member_id: &str, name: &str) -> Self {
        self.plain.insert(member_id.to_string(), name.to_string());
        self
    }

    pub fn with_agent(mut self, agent_id: &str) -> Self {
        self.agent_id = Some(agent_id.to_string());
        self
    }

    pub fn refer(&self, member_id: &str) -> String {
        self.plain
            .get(member_id)
            .cloned()
            .unwrap_or_else(|| format!("@{member_id}"))
    }

    pub fn is_agent(&self, actor: &str) -> bool {
        self.agent_id.as_deref() == Some(actor)
    }
}

/// Content the summary-only and no-P1 chains open with.
pub fn paper_gist(paper: &PaperRecord) -> String {
    paper
        .tldr
        .clone()
        .filter(|t| !t.trim().is_empty())
        .or_else(|| paper.abstract_text.clone().filter(|a| !a.trim().is_empty()))
        .unwrap_or_default()
}

fn abstract_of(title: &str, abs: Option<&str>) -> String {
    abs.filter(|a| !a.trim().is_empty())
        .map(|a| a.trim().to_string())
        .unwrap_or_else(|| title.to_string())
}

fn p1(paper: &PaperRecord, signal: &SocialSignal, names: &MemberNames, limit: usize) -> PromptSpec {
    let mut t = String::from("You write brief, neutral introductions of research papers for a group chat.\n");
    t.push_str(&format!(
        "Abstract: {}\n",
        abstract_of(&paper.title, paper.abstract_text.as_deref())
    ));
    t.push_str(&format!("Authors: {}\n", paper.author_names().join(", ")));
    t.push_str("Instructions:\n");
    match &signal.payload {
        SignalPayload::AuthorIsMember { member_id, author_name } => t.push_str(&format!(
            "- Congratulate {author_name} ({}) on this paper.\n",
            names.refer(member_id)
        )),
        SignalPayload::AuthorRecent { author_name, .. } => {
            t.push_str(&format!("- Name the author {author_name}.\n"))
        }
        SignalPayload::Affiliation { affiliation, .. } => {
            t.push_str(&format!("- Name the institution {affiliation}.\n"))
        }
        SignalPayload::VenueRecent { venue, .. } => t.push_str(&format!("- Name the venue {venue}.\n")),
        _ => {}
    }
    t.push_str(&format!("- Use at most {limit} characters.\n"));
    t.push_str("- Say what the paper does and finds; include headline numbers from the abstract when it reports any.");
    PromptSpec {
        kind: StageKind::P1Metadata,
        template_text: t,
        char_limit: limit,
        required_strings: Vec::new(),
        forbidden_bold_strings: Vec::new(),
        splice_at: None,
    }
}

fn sharer_is_human(prior: &PriorThread, names: &MemberNames) -> bool {
    !prior.sharer.is_empty() && !names.is_agent(&prior.sharer)
}

fn p2(paper: &PaperRecord, signal: &SocialSignal, names: &MemberNames, limits: &CharLimits) -> PromptSpec {
    let prior = signal.payload.prior().expect("category II payload has a prior");
    let (cand, rel) = (paper.title.as_str(), prior.paper.title.as_str());
    let (relation, contexts, shared) = match &signal.payload {
        SignalPayload::PaperConnection {
            relation,
            citation_contexts,
            shared_authors,
            ..
        } => (Some(*relation), citation_contexts.clone(), shared_authors.clone()),
        SignalPayload::PriorEngagement { relation, .. } => (Some(*relation), Vec::new(), Vec::new()),
        _ => (None, Vec::new(), Vec::new()),
    };
    let mut t = String::from("You explain how two research papers relate, for a group chat.\n");
    t.push_str(&format!(
        "New paper: {cand}\nAbstract: {}\n",
        abstract_of(cand, paper.abstract_text.as_deref())
    ));
    t.push_str(&format!(
        "Earlier paper: {rel}\nAbstract: {}\n",
        abstract_of(rel, prior.paper.abstract_text.as_deref())
    ));
    t.push_str(&format!(
        "Paragraph 1, at most {} characters: how the new paper connects to {rel}.\n",
        limits.p2
    ));
    t.push_str(&format!("- Begin with \"This paper connects to {rel}, since\"\n"));
    let passage = |c: &[String]| {
        if c.is_empty() {
            String::new()
        } else {
            format!(" Citing passage: [{}]", c.join(" "))
        }
    };
    match relation {
        Some(Relation::Cites) => t.push_str(&format!(
            "- In one short sentence, say how the new paper cites {rel}.{}\n",
            passage(&contexts)
        )),
        Some(Relation::CitedBy) => t.push_str(&format!(
            "- In one short sentence, say how {rel} cites the new paper.{}\n",
            passage(&contexts)
        )),
        _ => {}
    }
    if !shared.is_empty() {
        t.push_str(&format!("- Name the shared authors: {}.\n", shared.join(", ")));
    }

    let human = sharer_is_human(prior, names);
    let thoughts = human || !prior.comments.is_empty() || !prior.reactions.is_empty();
    if thoughts {
        t.push_str(&format!(
            "Paragraph 2, at most {} characters: what channel members made of {rel}, and who they are.\n",
            limits.p2_thoughts
        ));
        if human {
            t.push_str(&format!(
                "Shared by {}: {}\n",
                names.refer(&prior.sharer),
                prior.share_message.trim()
            ));
        }
        if !prior.comments.is_empty() {
            let cs: Vec<String> = prior
                .comments
                .iter()
                .map(|c| format!("{}: {}", names.refer(&c.actor), c.text.trim()))
                .collect();
            t.push_str(&format!("Comments on {rel}: {}\n", cs.join("; ")));
        }
        if !prior.reactions.is_empty() {
            t.push_str(&format!("Reactions to {rel}: {}\n", prior.reactions.join(", ")));
        }
        t.push_str(&format!("- Begin with \"Earlier, on {rel},\"\n"));
        if human {
            t.push_str(&format!(
                "- Thank {} for sharing {rel}.\n",
                names.refer(&prior.sharer)
            ));
        }
        t.push_str("- A member who cc's another is suggesting the paper fits that person's work. Keep the tone neutral or positive.\n");
        t.push_str("- No citation markers or reference numbers.\n");
    }
    t.push_str(&format!("Refer to {cand} as \"this paper\"."));
    PromptSpec {
        kind: StageKind::P2PriorPaper,
        template_text: t,
        char_limit: if thoughts {
            limits.p2 + 2 + limits.p2_thoughts
        } else {
            limits.p2
        },
        required_strings: Vec::new(),
        forbidden_bold_strings: Vec::new(),
        splice_at: None,
    }
}

fn variant_reason(variant: InterestVariant, detail: Option<&str>) -> String {
    match variant {
        InterestVariant::LikedSimilar => "reacted well to several similar papers here".into(),
        InterestVariant::LikedAuthor => format!(
            "engaged with several papers by {} here",
            detail.unwrap_or("the same author")
        ),
        InterestVariant::LikedVenue => format!(
            "engaged with several {} papers here",
            detail.unwrap_or("same-venue")
        ),
        InterestVariant::OwnPublicationsSimilar => "has published closely related work".into(),
        InterestVariant::CitesRelated => "has cited work related to this paper".into(),
    }
}

fn p3(paper: &PaperRecord, signal: &SocialSignal, names: &MemberNames, limit: usize) -> PromptSpec {
    let cand = paper.title.as_str();
    let member = signal.payload.member().map(|m| names.refer(m)).unwrap_or_default();
    let mut t = String::from("You explain why a research paper matters to one reader, for a group chat.\n");
    t.push_str(&format!(
        "New paper: {cand}\nAbstract: {}\n",
        abstract_of(cand, paper.abstract_text.as_deref())
    ));
    match signal.payload.interest_paper() {
        Some(other) => {
            let rel = other.title.as_str();
            t.push_str(&format!(
                "Paper the reader engaged with: {rel}\nAbstract: {}\n",
                abstract_of(rel, other.abstract_text.as_deref())
            ));
            t.push_str(&format!("Reader: {member}\n"));
            t.push_str(&format!(
                "- In at most {limit} characters, say how the new paper overlaps with and differs from {rel}.\n"
            ));
            t.push_str(&format!("- Begin with \"{member} may find this useful, as it shares ground with {rel}:\"\n"));
            t.push_str("- If the two papers are unrelated, reply with NONE and nothing else.");
        }
        None => {
            let reason = match &signal.payload {
                SignalPayload::MemberRelation { variant, detail, .. } => {
                    variant_reason(*variant, detail.as_deref())
                }
                _ => "engaged with related papers here".into(),
            };
            t.push_str(&format!("Reader: {member}, who {reason}.\n"));
            t.push_str(&format!(
                "- In at most {limit} characters, say why the reader may care about the new paper.\n"
            ));
            t.push_str(&format!("- Begin with \"{member} may find this useful, as they {reason}:\"\n"));
        }
    }
    PromptSpec {
        kind: StageKind::P3Member,
        template_text: t.trim_end().to_string(),
        char_limit: limit,
        required_strings: Vec::new(),
        forbidden_bold_strings: Vec::new(),
        splice_at: None,
    }
}

/// Strings the synthesized message must keep verbatim (and never bold).
pub fn required_strings(selected: &SelectedSignals, names: &MemberNames) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut push = |s: String| {
        if !s.trim().is_empty() && !out.contains(&s) {
            out.push(s);
        }
    };
    if let Some(prior) = selected.paper_connection.as_ref().and_then(|s| s.payload.prior()) {
        push(prior.paper.title.clone());
    }
    if let Some(s) = &selected.member_connection {
        if let Some(p) = s.payload.interest_paper() {
            push(p.title.clone());
        }
        if let Some(m) = s.payload.member() {
            push(names.refer(m));
        }
    }
    if let Some(s) = selected.metadata.as_ref().filter(|s| s.heuristic == Heuristic::H1) {
        if let Some(m) = s.payload.member() {
            push(names.refer(m));
        }
    }
    out
}

fn p4(
    paper: &PaperRecord,
    selected: &SelectedSignals,
    names: &MemberNames,
    limit: usize,
) -> PromptSpec {
    let required = required_strings(selected, names);
    let mut t = String::from("You edit chat messages that recommend research papers.\n");
    if selected.metadata.is_none() {
        let gist = paper_gist(paper);
        if gist.is_empty() {
            t.push_str(&format!("{}\n", paper.title));
        } else {
            t.push_str(&format!("{}: {}\n", paper.title, gist.trim()));
        }
    }
    let splice_at = (!selected.is_empty()).then_some(t.len());
    t.push_str(&format!(
        "{SYNTHESIS_INSTRUCTION} as one message of at most {limit} characters.\n"
    ));
    for r in &required {
        t.push_str(&format!("- Keep verbatim: {r}\n"));
    }
    if let Some(prior) = selected.paper_connection.as_ref().and_then(|s| s.payload.prior()) {
        let rel = &prior.paper.title;
        t.push_str(&format!(
            "- The draft discusses {rel} next to the recommended paper. Where it reports reactions to {rel}, stress who responded and what that suggests about the recommended paper, not the reactions themselves.\n"
        ));
    }
    t.push_str("- Keep every person, institution, number and venue name.\n");
    t.push_str("- Keep hedged statements hedged.\n");
    t.push_str("Mark up to three key phrases in bold by wrapping each in single asterisks.\n");
    t.push_str("- Only bold phrases that state what a paper is about or why it is relevant to a paper or reader.\n");
    let mut forbidden = required.clone();
    if selected.is_empty() && !forbidden.contains(&paper.title) {
        forbidden.push(paper.title.clone());
    }
    if !forbidden.is_empty() {
        t.push_str("Never bold:\n");
        for f in &forbidden {
            t.push_str(&format!("- {f}\n"));
        }
    }
    let t = t.trim_end().to_string();
    PromptSpec {
        kind: StageKind::P4Synthesis,
        template_text: t,
        char_limit: limit,
        required_strings: required,
        forbidden_bold_strings: forbidden,
        splice_at,
    }
}

/// One stage per selected category, then synthesis.
pub fn build_prompt_chain(
    paper: &PaperRecord,
    selected: &SelectedSignals,
    limits: &CharLimits,
    names: &MemberNames,
) -> PromptChain {
    let mut stages = Vec::new();
    if let Some(s) = &selected.metadata {
        stages.push(p1(paper, s, names, limits.p1));
    }
    if let Some(s) = &selected.paper_connection {
        stages.push(p2(paper, s, names, limits));
    }
    if let Some(s) = &selected.member_connection {
        stages.push(p3(paper, s, names, limits.p3));
    }
    stages.push(p4(paper, selected, names, limits.p4));
    PromptChain { stages }
}

/// Brief of the interest paper for templates, if any.
pub(crate) fn interest_brief(selected: &SelectedSignals) -> Option<&PaperBrief> {
    selected
        .member_connection
        .as_ref()
        .and_then(|s| s.payload.interest_paper())
}
