use serde::{Deserialize, Serialize};

use super::markup;
use crate::clients::PaperRecord;
use crate::kb::PaperRef;
use crate::signals::SelectedSignals;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Paper summary only.
    C1Tldr,
    /// Fixed-template signal sentences only.
    C2Template,
    /// Template sentences followed by the summary.
    C3TemplateTldr,
    /// Output of the full prompt chain.
    C4LlmSynthesis,
}

/// Structured paper details shown under the explanation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataBlock {
    #[serde(rename = "ref")]
    pub paper_ref: PaperRef,
    pub title: String,
    pub authors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venue: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    pub url: String,
}

impl MetadataBlock {
    pub fn of(paper: &PaperRecord) -> Self {
        MetadataBlock {
            paper_ref: paper.paper_ref.clone(),
            title: paper.title.clone(),
            authors: paper.authors.iter().map(|a| a.name.clone()).collect(),
            venue: paper.venue.clone(),
            year: paper.year,
            url: paper.paper_ref.url(),
        }
    }

    /// One-line rendering in message markup.
    pub fn render(&self) -> String {
        let mut s = markup::link_token(&self.url, &self.title);
        if !self.authors.is_empty() {
            s.push_str(" · ");
            s.push_str(&self.authors.join(", "));
        }
        match (&self.venue, self.year) {
            (Some(v), Some(y)) => s.push_str(&format!(" · {v} {y}")),
            (Some(v), None) => s.push_str(&format!(" · {v}")),
            (None, Some(y)) => s.push_str(&format!(" · {y}")),
            (None, None) => {}
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BotMessage {
    pub body: String,
    #[serde(rename = "metadata_block")]
    pub metadata: MetadataBlock,
    pub provenance: SelectedSignals,
    pub condition: Condition,
}

impl BotMessage {
    pub fn recommended_ref(&self) -> Option<PaperRef> {
        Some(self.metadata.paper_ref.clone())
    }

    /// Members with a mention token in the body.
    pub fn mentioned_members(&self) -> Vec<String> {
        markup::mentions(&self.body)
    }

    /// Body followed by the metadata line, as posted to a platform.
    pub fn render(&self) -> String {
        if self.body.is_empty() {
            self.metadata.render()
        } else {
            format!("{}\n{}", self.body, self.metadata.render())
        }
    }
}
