use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

const POSITIVE: &[&str] = &[
    "thumbsup",
    "+1",
    "tada",
    "heart",
    "heart_eyes",
    "fire",
    "star",
    "star-struck",
    "clap",
    "raised_hands",
    "100",
    "rocket",
    "bulb",
    "white_check_mark",
    "heavy_check_mark",
    "muscle",
    "pray",
    "smile",
    "grinning",
];

const NEGATIVE: &[&str] = &[
    "thumbsdown",
    "-1",
    "confused",
    "disappointed",
    "x",
    "no_entry_sign",
    "face_with_rolling_eyes",
];

/// Emoji polarity table. Names are matched after stripping surrounding
/// colons and lowercasing; unknown names are neutral.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmojiLexicon {
    entries: BTreeMap<String, Sentiment>,
}

impl Default for EmojiLexicon {
    fn default() -> Self {
        let entries = POSITIVE
            .iter()
            .map(|n| (n.to_string(), Sentiment::Positive))
            .chain(NEGATIVE.iter().map(|n| (n.to_string(), Sentiment::Negative)))
            .collect();
        EmojiLexicon { entries }
    }
}

pub fn normalize_emoji_name(name: &str) -> String {
    name.trim().trim_matches(':').to_lowercase()
}

impl EmojiLexicon {
    pub fn empty() -> Self {
        EmojiLexicon {
            entries: BTreeMap::new(),
        }
    }

    /// Default table with per-channel overrides layered on top.
    pub fn with_overrides<'a>(overrides: impl IntoIterator<Item = (&'a String, &'a Sentiment)>) -> Self {
        let mut lex = Self::default();
        for (name, s) in overrides {
            lex.entries.insert(normalize_emoji_name(name), *s);
        }
        lex
    }

    pub fn classify(&self, emoji_name: &str) -> Sentiment {
        self.entries
            .get(&normalize_emoji_name(emoji_name))
            .copied()
            .unwrap_or(Sentiment::Neutral)
    }

    pub fn names(&self) -> impl Iterator<Item = (&str, Sentiment)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Classifies a reaction with the default lexicon.
pub fn classify_reaction(emoji_name: &str) -> Sentiment {
    EmojiLexicon::default().classify(emoji_name)
}
