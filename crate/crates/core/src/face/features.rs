use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::face::PhonemeTimeline;

pub const MFCC_DIMS: usize = 13;
pub const MFB_DIMS: usize = 26;
pub const FEATURE_DIMS: usize = MFCC_DIMS + MFB_DIMS;
/// Frames in one network input window (one second at 25 fps).
pub const WINDOW: usize = 25;

/// Precomputed per-frame audio features: 13 MFCCs then 26 filter-bank energies.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioFeatureMatrix {
    rows: Vec<[f64; FEATURE_DIMS]>,
    fps: f64,
}

impl AudioFeatureMatrix {
    pub fn new(rows: Vec<[f64; FEATURE_DIMS]>, fps: f64) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::Value(format!("fps must be positive, got {fps}")));
        }
        if let Some(t) = rows.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::Value(format!("feature row {t} is not finite")));
        }
        Ok(AudioFeatureMatrix { rows, fps })
    }

    pub fn rows(&self) -> &[[f64; FEATURE_DIMS]] {
        &self.rows
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn mfcc(&self, t: usize) -> &[f64] {
        &self.rows[t][..MFCC_DIMS]
    }

    pub fn mfb(&self, t: usize) -> &[f64] {
        &self.rows[t][MFCC_DIMS..]
    }
}

/// Reads a 39-column CSV; a non-numeric first row is taken as a header.
pub fn read_feature_csv(path: &Path, fps: f64) -> Result<AudioFeatureMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if rec.len() != FEATURE_DIMS {
            return Err(Error::Schema(format!(
                "{}: row {} has {} columns, expected {FEATURE_DIMS}",
                path.display(),
                i + 1,
                rec.len()
            )));
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => rows.push(std::array::from_fn(|c| v[c])),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Error::Parse(format!("{}: row {}: bad number", path.display(), i + 1))),
        }
    }
    AudioFeatureMatrix::new(rows, fps)
}

/// The 25-row network input centered on frame `t`: rows `t - 12 ..= t + 12`
/// clamped to the sequence, each the audio features followed by the
/// embedding of that row's phoneme.
pub fn window_features(
    au: &AudioFeatureMatrix,
    ph: &PhonemeTimeline,
    phoneme_embedding: &BTreeMap<String, Vec<f64>>,
    t: usize,
) -> Result<Vec<Vec<f64>>> {
    let n = au.len();
    if ph.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{n} feature rows but {} phoneme labels",
            ph.len()
        )));
    }
    if t >= n {
        return Err(Error::Index { index: t, len: n });
    }
    let k = phoneme_embedding.values().next().map(Vec::len).unwrap_or(0);
    if k == 0 || phoneme_embedding.values().any(|e| e.len() != k) {
        return Err(Error::Value(
            "phoneme embeddings must share one non-zero dimension".into(),
        ));
    }
    let half = (WINDOW / 2) as isize;
    (-half..=half)
        .map(|d| {
            let row = (t as isize + d).clamp(0, n as isize - 1) as usize;
            let label = &ph.labels()[row];
            let emb = phoneme_embedding
                .get(label)
                .ok_or_else(|| Error::Value(format!("no embedding for phoneme {label:?}")))?;
            let mut v = Vec::with_capacity(FEATURE_DIMS + k);
            v.extend_from_slice(&au.rows()[row]);
            v.extend_from_slice(emb);
            Ok(v)
        })
        .collect()
}
