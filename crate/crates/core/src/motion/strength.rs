use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::fk::all_positions;
use crate::motion::MotionClip;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    UnitMax,
}

/// Per-frame motion strength of a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthCurve {
    pub values: Vec<f64>,
    pub fps: f64,
    pub normalization: Normalization,
}

pub const DEFAULT_SMOOTH_WINDOW: usize = 5;

impl StrengthCurve {
    /// Scales the curve so its maximum is exactly 1. An all-zero curve stays zero.
    pub fn normalized(&self) -> StrengthCurve {
        StrengthCurve {
            values: normalize_unit_max(&self.values),
            fps: self.fps,
            normalization: Normalization::UnitMax,
        }
    }

    pub fn is_unit_max(&self) -> bool {
        if self.normalization != Normalization::UnitMax {
            return false;
        }
        let max = self.values.iter().cloned().fold(0.0, f64::max);
        max == 0.0 || (max - 1.0).abs() <= 1e-9
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sub-curve over `[start, end)`, re-normalized to unit max.
    pub fn slice_normalized(&self, start: usize, end: usize) -> StrengthCurve {
        StrengthCurve {
            values: normalize_unit_max(&self.values[start..end]),
            fps: self.fps,
            normalization: Normalization::UnitMax,
        }
    }
}

pub(crate) fn normalize_unit_max(values: &[f64]) -> Vec<f64> {
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter().map(|v| v / max).collect()
    } else {
        vec![0.0; values.len()]
    }
}

fn check_params(clip: &MotionClip, joint_weights: &[f64], smooth_window: usize) -> Result<()> {
    if smooth_window == 0 || smooth_window.is_multiple_of(2) {
        return Err(Error::Value(format!(
            "smooth window must be odd and positive, got {smooth_window}"
        )));
    }
    if joint_weights.len() != clip.skeleton().len() {
        return Err(Error::Value(format!(
            "{} joint weights for {} joints",
            joint_weights.len(),
            clip.skeleton().len()
        )));
    }
    if joint_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Value("joint weights must be finite and non-negative".into()));
    }
    Ok(())
}

/// Weighted sum of global joint speeds (m/s), smoothed by a centered,
/// edge-clamped moving average. Frame 0 copies frame 1.
pub fn raw_motion_strength(clip: &MotionClip, joint_weights: &[f64], smooth_window: usize) -> Result<StrengthCurve> {
    check_params(clip, joint_weights, smooth_window)?;
    let positions = all_positions(clip);
    let n = positions.len();
    let mut raw = vec![0.0; n];
    for t in 1..n {
        raw[t] = positions[t]
            .iter()
            .zip(&positions[t - 1])
            .zip(joint_weights)
            .map(|((p, q), w)| w * (p - q).norm())
            .sum::<f64>()
            * clip.fps();
    }
    raw[0] = raw[1];

    Ok(StrengthCurve {
        values: moving_average(&raw, smooth_window),
        fps: clip.fps(),
        normalization: Normalization::Raw,
    })
}

/// Motion strength normalized to unit max.
pub fn compute_motion_strength(
    clip: &MotionClip,
    joint_weights: &[f64],
    smooth_window: usize,
) -> Result<StrengthCurve> {
    Ok(raw_motion_strength(clip, joint_weights, smooth_window)?.normalized())
}

/// Motion strength with default weights and window.
pub fn default_motion_strength(clip: &MotionClip) -> StrengthCurve {
    let w = clip.skeleton().default_strength_weights();
    compute_motion_strength(clip, &w, DEFAULT_SMOOTH_WINDOW).expect("default parameters are valid")
}

fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    if window == 1 {
        return values.to_vec();
    }
    let half = (window / 2) as isize;
    let last = values.len() as isize - 1;
    (0..values.len() as isize)
        .map(|t| {
            let sum: f64 = (t - half..=t + half).map(|k| values[k.clamp(0, last) as usize]).sum();
            sum / window as f64
        })
        .collect()
}
