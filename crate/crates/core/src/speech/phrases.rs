use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::speech::SemanticLexicon;

/// One aligned word of the script, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedWord {
    pub word: String,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phrase {
    pub index: usize,
    pub text: String,
    pub start_seconds: f64,
    pub end_seconds: f64,
    #[serde(default)]
    pub semantic_tag: Option<String>,
}

impl Phrase {
    pub fn duration(&self) -> f64 {
        self.end_seconds - self.start_seconds
    }
}

pub const DEFAULT_BREAKS: [&str; 6] = [",", ".", "!", "?", ";", ":"];
pub const DEFAULT_MAX_GAP_SECONDS: f64 = 0.5;

pub fn load_script(path: &Path) -> Result<Vec<TimedWord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Groups timed words into phrases. A phrase ends after a word carrying one
/// of `breaks` as a suffix, or before a silence longer than `max_gap_seconds`.
pub fn split_phrases(words: &[TimedWord], max_gap_seconds: f64, breaks: &[&str]) -> Result<Vec<Phrase>> {
    for (i, w) in words.iter().enumerate() {
        if !(w.start.is_finite() && w.end.is_finite()) || w.end < w.start {
            return Err(Error::Value(format!("word {i} ({:?}) has invalid times", w.word)));
        }
        if i > 0 && (w.start < words[i - 1].start || w.start < words[i - 1].end) {
            return Err(Error::Value(format!("word {i} ({:?}) is out of order", w.word)));
        }
    }

    let mut groups: Vec<Vec<&TimedWord>> = Vec::new();
    let mut current: Vec<&TimedWord> = Vec::new();
    for w in words {
        if let Some(prev) = current.last() {
            if w.start - prev.end > max_gap_seconds {
                groups.push(std::mem::take(&mut current));
            }
        }
        current.push(w);
        let trimmed = w.word.trim_end();
        if breaks.iter().any(|b| !b.is_empty() && trimmed.ends_with(b)) {
            groups.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        groups.push(current);
    }

    groups
        .into_iter()
        .enumerate()
        .map(|(index, g)| {
            let start = g[0].start;
            let end = g[g.len() - 1].end;
            if end <= start {
                return Err(Error::Value(format!("phrase {index} has zero duration")));
            }
            Ok(Phrase {
                index,
                text: g.iter().map(|w| w.word.as_str()).collect::<Vec<_>>().join(" "),
                start_seconds: start,
                end_seconds: end,
                semantic_tag: None,
            })
        })
        .collect()
}

pub fn detect_semantic_tag(phrase: &Phrase, lexicon: &SemanticLexicon) -> Option<String> {
    lexicon.detect(&phrase.text).map(str::to_string)
}

/// Sets `semantic_tag` on every phrase from the lexicon.
pub fn tag_phrases(phrases: &mut [Phrase], lexicon: &SemanticLexicon) {
    for p in phrases {
        p.semantic_tag = detect_semantic_tag(p, lexicon);
    }
}
