use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Number,
    Orientation,
    Special,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub keywords: Vec<String>,
    pub category: Category,
}

/// Semantic tags and the keywords that trigger them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SemanticLexicon {
    pub entries: BTreeMap<String, LexiconEntry>,
}

const DEFAULT_LEXICON: &str = include_str!("../../data/default_lexicon.json");

/// Splits text into lowercase word tokens. Apostrophes inside a word are
/// kept ("let's"); every other non-alphanumeric character separates words.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '\u{2019}'))
        .map(|w| w.trim_matches(|c| c == '\'' || c == '\u{2019}'))
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase().replace('\u{2019}', "'"))
        .collect()
}

impl SemanticLexicon {
    /// The bundled 24-tag lexicon (ten numbers, six orientations, eight
    /// special tags).
    pub fn default_lexicon() -> Self {
        let lex: SemanticLexicon = serde_json::from_str(DEFAULT_LEXICON).expect("bundled lexicon parses");
        lex.validate().expect("bundled lexicon is valid");
        lex
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let lex: SemanticLexicon = serde_json::from_str(text).map_err(|e| {
            if e.is_data() {
                Error::Schema(format!("lexicon: {e}"))
            } else {
                Error::Parse(format!("lexicon: {e}"))
            }
        })?;
        lex.validate()?;
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (tag, entry) in &self.entries {
            if tag.trim().is_empty() {
                return Err(Error::Schema("empty lexicon tag".into()));
            }
            if entry.keywords.is_empty() {
                return Err(Error::Schema(format!("tag {tag:?} has no keywords")));
            }
            if entry.keywords.iter().any(|k| tokenize(k).is_empty()) {
                return Err(Error::Schema(format!("tag {tag:?} has an empty keyword")));
            }
        }
        Ok(())
    }

    /// True when every category appears at least once.
    pub fn covers_all_categories(&self) -> bool {
        [Category::Number, Category::Orientation, Category::Special]
            .iter()
            .all(|c| self.entries.values().any(|e| e.category == *c))
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.entries.contains_key(tag)
    }

    pub fn insert(&mut self, tag: impl Into<String>, keywords: &[&str], category: Category) {
        self.entries.insert(
            tag.into(),
            LexiconEntry {
                keywords: keywords.iter().map(|s| s.to_string()).collect(),
                category,
            },
        );
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Case-insensitive whole-word match. The keyword occurring earliest in
    /// the text wins; ties go to the lexicographically smaller tag.
    pub fn detect(&self, text: &str) -> Option<&str> {
        let words = tokenize(text);
        let mut best: Option<(usize, &str)> = None;
        // entries iterate in tag order, so strict `<` keeps the smaller tag on ties
        for (tag, entry) in &self.entries {
            for kw in &entry.keywords {
                let needle = tokenize(kw);
                let Some(pos) = words.windows(needle.len()).position(|w| w == needle.as_slice()) else {
                    continue;
                };
                if best.is_none_or(|(p, _)| pos < p) {
                    best = Some((pos, tag.as_str()));
                }
            }
        }
        best.map(|(_, t)| t)
    }
}
