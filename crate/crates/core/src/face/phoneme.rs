use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

pub const SILENCE: &str = "sil";

/// Phoneme interval as exported by a forced aligner.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeInterval {
    pub start_seconds: f64,
    pub end_seconds: f64,
    pub phoneme: String,
}

/// Per-frame phoneme labels aligned with a blendshape sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeTimeline {
    labels: Vec<String>,
    closure_set: BTreeSet<String>,
}

/// Lower-cases and drops ARPAbet stress digits, so `"B"` and `"AH0"` become
/// `"b"` and `"ah"`.
pub fn normalize_phoneme(p: &str) -> String {
    p.trim().trim_end_matches(|c: char| c.is_ascii_digit()).to_lowercase()
}

pub fn default_closure_set() -> BTreeSet<String> {
    ["b", "p", "m"].into_iter().map(String::from).collect()
}

impl PhonemeTimeline {
    pub fn new(labels: Vec<String>) -> Self {
        PhonemeTimeline {
            labels: labels.iter().map(|l| normalize_phoneme(l)).collect(),
            closure_set: default_closure_set(),
        }
    }

    pub fn with_closure_set<I, S>(mut self, set: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.closure_set = set.into_iter().map(|s| normalize_phoneme(s.as_ref())).collect();
        self
    }

    /// Checks every label against a declared inventory.
    pub fn check_inventory(&self, inventory: &BTreeSet<String>) -> Result<()> {
        match self.labels.iter().find(|l| !inventory.contains(*l)) {
            Some(l) => Err(Error::Value(format!("phoneme {l:?} is not in the inventory"))),
            None => Ok(()),
        }
    }

    /// Labels frame `t` with the interval covering `t / fps`; uncovered
    /// frames are silence.
    pub fn from_intervals(intervals: &[PhonemeInterval], fps: f64, frames: usize) -> Self {
        let labels = (0..frames)
            .map(|t| {
                let time = t as f64 / fps;
                intervals
                    .iter()
                    .find(|iv| iv.start_seconds <= time && time < iv.end_seconds)
                    .map(|iv| iv.phoneme.clone())
                    .unwrap_or_else(|| SILENCE.to_string())
            })
            .collect();
        Self::new(labels)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn closure_set(&self) -> &BTreeSet<String> {
        &self.closure_set
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_closure(&self, t: usize) -> bool {
        self.closure_set.contains(&self.labels[t])
    }
}

/// Reads `start<TAB>end<TAB>phoneme` rows; a non-numeric first row is
/// taken as a header.
pub fn read_phoneme_tsv(path: &Path) -> Result<Vec<PhonemeInterval>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(false)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if rec.len() != 3 {
            return Err(Error::Schema(format!(
                "{}: row {} needs 3 fields",
                path.display(),
                row + 1
            )));
        }
        let start = rec[0].trim().parse::<f64>();
        let end = rec[1].trim().parse::<f64>();
        match (start, end) {
            (Ok(s), Ok(e)) => {
                if !(s.is_finite() && e.is_finite() && e >= s) {
                    return Err(Error::Value(format!(
                        "{}: row {}: bad interval",
                        path.display(),
                        row + 1
                    )));
                }
                out.push(PhonemeInterval {
                    start_seconds: s,
                    end_seconds: e,
                    phoneme: rec[2].trim().to_string(),
                });
            }
            _ if row == 0 => continue,
            _ => return Err(Error::Parse(format!("{}: row {}: bad number", path.display(), row + 1))),
        }
    }
    Ok(out)
}
