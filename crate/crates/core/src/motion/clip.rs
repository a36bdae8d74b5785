use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::motion::{Quat, Skeleton, Vec3};

pub(crate) const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub root_position: Vec3,
    /// Local rotation of every joint, in skeleton order.
    pub rotations: Vec<Quat>,
}

/// A skeletal animation sampled at a fixed frame rate.
///
/// Invariants are checked at construction: positive fps, at least two
/// frames, one unit quaternion per joint per frame, finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionClip {
    skeleton: Arc<Skeleton>,
    fps: f64,
    frames: Vec<Frame>,
    source_id: String,
}

impl MotionClip {
    pub fn new(skeleton: Arc<Skeleton>, fps: f64, frames: Vec<Frame>, source_id: impl Into<String>) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::Value(format!("fps must be positive, got {fps}")));
        }
        if frames.len() < 2 {
            return Err(Error::Schema(format!(
                "a clip needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        for (t, f) in frames.iter().enumerate() {
            if f.rotations.len() != skeleton.len() {
                return Err(Error::Schema(format!(
                    "frame {t} has {} rotations for {} joints",
                    f.rotations.len(),
                    skeleton.len()
                )));
            }
            if !f.root_position.iter().all(|v| v.is_finite()) {
                return Err(Error::Value(format!("frame {t} has a non-finite root position")));
            }
            for q in &f.rotations {
                let c = q.as_ref().coords;
                if !c.iter().all(|v| v.is_finite()) {
                    return Err(Error::Value(format!("frame {t} has a non-finite rotation")));
                }
                if (c.norm() - 1.0).abs() > UNIT_TOLERANCE {
                    return Err(Error::Value(format!("frame {t} has a non-unit rotation")));
                }
            }
        }
        Ok(MotionClip {
            skeleton,
            fps,
            frames,
            source_id: source_id.into(),
        })
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn skeleton_arc(&self) -> &Arc<Skeleton> {
        &self.skeleton
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Duration covered when clips are laid end to end: one frame period per frame.
    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    /// Copies a frame range into a new clip with the same skeleton and source id.
    pub fn slice(&self, range: Range<usize>) -> Result<MotionClip> {
        if range.start >= range.end || range.end > self.frames.len() {
            return Err(Error::Value(format!(
                "slice {}..{} invalid for {} frames",
                range.start,
                range.end,
                self.frames.len()
            )));
        }
        MotionClip::new(
            self.skeleton.clone(),
            self.fps,
            self.frames[range].to_vec(),
            self.source_id.clone(),
        )
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }
}
