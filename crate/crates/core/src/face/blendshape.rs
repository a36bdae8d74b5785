use std::path::Path;

use crate::error::{Error, Result};

pub const CHANNELS: usize = 52;

/// ARKit blendshape channel names, in canonical order.
pub const ARKIT_NAMES: [&str; CHANNELS] = [
    "eyeBlinkLeft",
    "eyeLookDownLeft",
    "eyeLookInLeft",
    "eyeLookOutLeft",
    "eyeLookUpLeft",
    "eyeSquintLeft",
    "eyeWideLeft",
    "eyeBlinkRight",
    "eyeLookDownRight",
    "eyeLookInRight",
    "eyeLookOutRight",
    "eyeLookUpRight",
    "eyeSquintRight",
    "eyeWideRight",
    "jawForward",
    "jawLeft",
    "jawRight",
    "jawOpen",
    "mouthClose",
    "mouthFunnel",
    "mouthPucker",
    "mouthLeft",
    "mouthRight",
    "mouthSmileLeft",
    "mouthSmileRight",
    "mouthFrownLeft",
    "mouthFrownRight",
    "mouthDimpleLeft",
    "mouthDimpleRight",
    "mouthStretchLeft",
    "mouthStretchRight",
    "mouthRollLower",
    "mouthRollUpper",
    "mouthShrugLower",
    "mouthShrugUpper",
    "mouthPressLeft",
    "mouthPressRight",
    "mouthLowerDownLeft",
    "mouthLowerDownRight",
    "mouthUpperUpLeft",
    "mouthUpperUpRight",
    "browDownLeft",
    "browDownRight",
    "browInnerUp",
    "browOuterUpLeft",
    "browOuterUpRight",
    "cheekPuff",
    "cheekSquintLeft",
    "cheekSquintRight",
    "noseSneerLeft",
    "noseSneerRight",
    "tongueOut",
];

pub fn channel_index(name: &str) -> Option<usize> {
    ARKIT_NAMES.iter().position(|n| *n == name)
}

pub type Weights = [f64; CHANNELS];

/// Per-frame blendshape weights, every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendshapeSequence {
    frames: Vec<Weights>,
    fps: f64,
}

impl BlendshapeSequence {
    /// Clamps every weight into `[0, 1]`; non-finite weights are rejected.
    pub fn new(frames: Vec<Weights>, fps: f64) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::Value(format!("fps must be positive, got {fps}")));
        }
        let mut frames = frames;
        for (t, f) in frames.iter_mut().enumerate() {
            for (c, v) in f.iter_mut().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Value(format!(
                        "frame {t}, channel {}: non-finite",
                        ARKIT_NAMES[c]
                    )));
                }
                *v = v.clamp(0.0, 1.0);
            }
        }
        Ok(BlendshapeSequence { frames, fps })
    }

    pub fn zeros(len: usize, fps: f64) -> Result<Self> {
        Self::new(vec![[0.0; CHANNELS]; len], fps)
    }

    pub fn frames(&self) -> &[Weights] {
        &self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Uniform linear resampling to `len` frames spanning the same start
    /// and end frames.
    pub fn resampled(&self, len: usize) -> BlendshapeSequence {
        let n = self.frames.len();
        if len == n || n == 0 {
            return self.clone();
        }
        let frames = (0..len)
            .map(|k| {
                let f = if len == 1 {
                    0.0
                } else {
                    k as f64 * (n - 1) as f64 / (len - 1) as f64
                };
                let lo = (f.floor() as usize).min(n - 1);
                let hi = (lo + 1).min(n - 1);
                let a = f - lo as f64;
                let (x, y) = (&self.frames[lo], &self.frames[hi]);
                std::array::from_fn(|c| x[c] + a * (y[c] - x[c]))
            })
            .collect();
        BlendshapeSequence {
            frames,
            fps: self.fps * (len.max(1) as f64) / n as f64,
        }
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

/// Reads a CSV whose header names the 52 ARKit channels (any order).
pub fn read_blendshape_csv(path: &Path, fps: f64) -> Result<BlendshapeSequence> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.len() != CHANNELS {
        return Err(Error::Schema(format!(
            "{}: expected {CHANNELS} columns, found {}",
            path.display(),
            header.len()
        )));
    }
    let mut order = Vec::with_capacity(CHANNELS);
    for name in header.iter() {
        let idx = channel_index(name.trim())
            .ok_or_else(|| Error::Schema(format!("{}: unknown channel {name:?}", path.display())))?;
        if order.contains(&idx) {
            return Err(Error::Schema(format!("{}: duplicate channel {name:?}", path.display())));
        }
        order.push(idx);
    }
    let mut frames = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let mut w = [0.0; CHANNELS];
        for (field, &c) in rec.iter().zip(&order) {
            w[c] = field
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{}: row {}: bad number {field:?}", path.display(), row + 1)))?;
        }
        frames.push(w);
    }
    BlendshapeSequence::new(frames, fps)
}

pub fn write_blendshape_csv(seq: &BlendshapeSequence, path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    wtr.write_record(ARKIT_NAMES).map_err(|e| csv_error(path, e))?;
    for f in seq.frames() {
        wtr.write_record(f.iter().map(|v| v.to_string()))
            .map_err(|e| csv_error(path, e))?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}
