#![allow(dead_code)]

use std::sync::Arc;

use talkmotion::motion::{default_motion_strength, Frame, Joint, MotionClip, Quat, Skeleton, Vec3};
use talkmotion::segmentation::{ingest_semantic_clip, segment_clip, MotionSegment};
use talkmotion::speech::{Phrase, RhythmCurve, SemanticLexicon};

pub const FPS: f64 = 25.0;

/// Root, shoulder and a 0.3 m arm ending in a hand.
pub fn arm_skeleton() -> Arc<Skeleton> {
    Arc::new(
        Skeleton::new(
            vec![
                Joint::new("Hips", None, Vec3::new(0.0, 1.0, 0.0)),
                Joint::new("RightArm", Some(0), Vec3::new(0.2, 0.4, 0.0)),
                Joint::new("RightHand", Some(1), Vec3::new(0.3, 0.0, 0.0)),
            ],
            None,
        )
        .unwrap(),
    )
}

/// A single-joint skeleton whose root is the only salient joint.
pub fn root_skeleton() -> Arc<Skeleton> {
    Arc::new(Skeleton::new(vec![Joint::new("Hips", None, Vec3::zeros())], None).unwrap())
}

pub fn frame(root: Vec3, rotations: Vec<Quat>) -> Frame {
    Frame {
        root_position: root,
        rotations,
    }
}

pub fn clip(skeleton: &Arc<Skeleton>, id: &str, frames: Vec<Frame>) -> MotionClip {
    MotionClip::new(skeleton.clone(), FPS, frames, id).unwrap()
}

pub fn static_clip(skeleton: &Arc<Skeleton>, id: &str, n: usize, root: Vec3) -> MotionClip {
    let rest = vec![Quat::identity(); skeleton.len()];
    clip(skeleton, id, vec![frame(root, rest); n])
}

/// Root-only clip moving vertically from `y0` to `y1` in `n` frames.
pub fn lift_clip(id: &str, n: usize, y0: f64, y1: f64) -> MotionClip {
    let sk = root_skeleton();
    let frames = (0..n)
        .map(|t| {
            let y = y0 + (y1 - y0) * t as f64 / (n - 1) as f64;
            frame(Vec3::new(0.0, y, 0.0), vec![Quat::identity()])
        })
        .collect();
    clip(&sk, id, frames)
}

/// The whole clip as one non-semantic node.
pub fn whole(clip: &MotionClip) -> MotionSegment {
    let strength = default_motion_strength(clip);
    segment_clip(clip, &strength, &[]).unwrap().remove(0)
}

pub fn split(clip: &MotionClip, points: &[usize]) -> Vec<MotionSegment> {
    segment_clip(clip, &default_motion_strength(clip), points).unwrap()
}

pub fn semantic(clip: &MotionClip, tag: &str) -> MotionSegment {
    ingest_semantic_clip(clip, tag, &SemanticLexicon::default_lexicon()).unwrap()
}

pub fn phrase(index: usize, start: f64, end: f64, tag: Option<&str>) -> Phrase {
    Phrase {
        index,
        text: format!("phrase {index}"),
        start_seconds: start,
        end_seconds: end,
        semantic_tag: tag.map(str::to_string),
    }
}

pub fn rhythm(values: Vec<f64>) -> RhythmCurve {
    let hop = 0.04;
    RhythmCurve {
        duration_seconds: values.len() as f64 * hop,
        values,
        hop_seconds: hop,
    }
}

/// Root-only clip bobbing vertically; its strength curve is a rectified
/// sinusoid whose shape depends on `cycles` and `phase`.
pub fn wave_clip(id: &str, n: usize, cycles: f64, phase: f64) -> MotionClip {
    let sk = root_skeleton();
    let frames = (0..n)
        .map(|t| {
            let u = std::f64::consts::TAU * cycles * t as f64 / n as f64 + phase;
            frame(Vec3::new(0.0, 0.1 * u.sin(), 0.0), vec![Quat::identity()])
        })
        .collect();
    clip(&sk, id, frames)
}
