//! Turning a node path into one continuous clip on the phrase timeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MotionGraph, RootAlignment};
use crate::motion::{pose_global, Frame, MotionClip, Quat};
use crate::optimizer::SynthesisPath;
use crate::segmentation::MotionSegment;
use crate::speech::Phrase;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StitchParams {
    pub blend_seconds: f64,
    pub max_time_stretch: f64,
    pub output_fps: f64,
}

impl Default for StitchParams {
    fn default() -> Self {
        StitchParams {
            blend_seconds: 0.25,
            max_time_stretch: 1.5,
            output_fps: 25.0,
        }
    }
}

impl StitchParams {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.blend_seconds.is_finite() && self.blend_seconds >= 0.0) {
            return Err(Error::Value("blend_seconds must be non-negative".into()));
        }
        if !(self.max_time_stretch.is_finite() && self.max_time_stretch >= 1.0) {
            return Err(Error::Value("max_time_stretch must be at least 1".into()));
        }
        if !(self.output_fps.is_finite() && self.output_fps > 0.0) {
            return Err(Error::Value("output_fps must be positive".into()));
        }
        Ok(())
    }

    /// Frames over which a seam discrepancy is blended away.
    pub fn blend_frames(&self) -> usize {
        (self.blend_seconds * self.output_fps).round() as usize
    }
}

/// Shortest-arc spherical interpolation, exact at both ends.
pub fn slerp(a: &Quat, b: &Quat, t: f64) -> Quat {
    if t <= 0.0 {
        return *a;
    }
    if t >= 1.0 {
        return *b;
    }
    match a.try_slerp(b, t, 1e-12) {
        Some(q) => Quat::new_normalize(q.into_inner()),
        // opposite hemispheres are flipped by try_slerp, so this is only
        // reached for numerically equal rotations
        None => *a,
    }
}

fn lerp_frame(a: &Frame, b: &Frame, t: f64) -> Frame {
    if t == 0.0 {
        return a.clone();
    }
    Frame {
        root_position: a.root_position + (b.root_position - a.root_position) * t,
        rotations: a
            .rotations
            .iter()
            .zip(&b.rotations)
            .map(|(p, q)| slerp(p, q, t))
            .collect(),
    }
}

/// `m` frames evenly spanning the clip from its first to its last frame.
fn resample_frames(clip: &MotionClip, m: usize) -> Vec<Frame> {
    let src = clip.frames();
    let n = src.len();
    let at = |f: f64| {
        let lo = (f.floor() as usize).min(n - 1);
        let hi = (lo + 1).min(n - 1);
        lerp_frame(&src[lo], &src[hi], f - lo as f64)
    };
    match m {
        0 => Vec::new(),
        1 => vec![at((n - 1) as f64 / 2.0)],
        _ => (0..m).map(|k| at(k as f64 * (n - 1) as f64 / (m - 1) as f64)).collect(),
    }
}

/// Duration after clamping the stretch factor, and whether the clamp fired.
pub fn warped_duration(source_seconds: f64, target_seconds: f64, max_time_stretch: f64) -> (f64, bool) {
    let lo = source_seconds / max_time_stretch;
    let hi = source_seconds * max_time_stretch;
    let d = target_seconds.clamp(lo, hi);
    (d, d != target_seconds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeWarp {
    pub clip: MotionClip,
    /// Output duration over source duration.
    pub stretch: f64,
    pub clamped: bool,
}

pub fn time_warp_detailed(segment: &MotionSegment, target_seconds: f64, params: &StitchParams) -> Result<TimeWarp> {
    params.validate()?;
    if !(target_seconds.is_finite() && target_seconds > 0.0) {
        return Err(Error::Value(format!(
            "target duration must be positive, got {target_seconds}"
        )));
    }
    let source = segment.clip.duration();
    let (d, clamped) = warped_duration(source, target_seconds, params.max_time_stretch);
    let m = ((d * params.output_fps).round() as usize).max(2);
    let clip = MotionClip::new(
        segment.clip.skeleton_arc().clone(),
        params.output_fps,
        resample_frames(&segment.clip, m),
        segment.clip.source_id(),
    )?;
    Ok(TimeWarp {
        clip,
        stretch: d / source,
        clamped,
    })
}

/// Uniformly rescales a segment in time toward `target_seconds`, within the
/// stretch limits, and resamples it at the output rate.
pub fn time_warp(segment: &MotionSegment, target_seconds: f64, params: &StitchParams) -> Result<MotionClip> {
    time_warp_detailed(segment, target_seconds, params).map(|w| w.clip)
}

/// Where one phrase's segment ended up in the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub phrase_index: usize,
    pub segment_id: String,
    pub target_seconds: f64,
    pub warped_seconds: f64,
    pub clamped: bool,
    pub first_frame: usize,
    pub frame_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub clip: MotionClip,
    pub placements: Vec<Placement>,
}

impl Assembly {
    pub fn any_clamped(&self) -> bool {
        self.placements.iter().any(|p| p.clamped)
    }
}

/// Largest joint distance between two poses of the same skeleton.
pub fn pose_distance(clip_a: &MotionClip, a: &Frame, b: &Frame) -> f64 {
    let pa = pose_global(clip_a.skeleton(), a);
    let pb = pose_global(clip_a.skeleton(), b);
    pa.positions
        .iter()
        .zip(&pb.positions)
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max)
}

/// Fades the offset between `prev` and `frames[0]` out over the first
/// `blend` frames: frame `k` keeps `1 - (k + 1) / (blend + 1)` of it.
fn blend_in(prev: &Frame, frames: &mut [Frame], blend: usize) {
    let blend = blend.min(frames.len());
    if blend == 0 {
        return;
    }
    let first = frames[0].clone();
    let root_offset = prev.root_position - first.root_position;
    let rot_offsets: Vec<Quat> = prev
        .rotations
        .iter()
        .zip(&first.rotations)
        .map(|(p, q)| p * q.inverse())
        .collect();
    for (k, f) in frames.iter_mut().take(blend).enumerate() {
        let keep = 1.0 - (k + 1) as f64 / (blend + 1) as f64;
        f.root_position += root_offset * keep;
        for (r, off) in f.rotations.iter_mut().zip(&rot_offsets) {
            *r = slerp(&Quat::identity(), off, keep) * *r;
        }
    }
}

/// Root transform placing `frame`'s root on `anchor`'s in the ground plane
/// with matching heading.
fn align_to(clip: &MotionClip, anchor: &Frame, frame: &Frame) -> RootAlignment {
    let sk = clip.skeleton();
    let a = pose_global(sk, anchor);
    let b = pose_global(sk, frame);
    RootAlignment::between(&a.positions[0], &a.rotations[0], &b.positions[0], &b.rotations[0])
}

pub fn assemble_detailed(
    path: &SynthesisPath,
    graph: &MotionGraph,
    phrases: &[Phrase],
    params: &StitchParams,
) -> Result<Assembly> {
    params.validate()?;
    if path.assignments.len() != phrases.len() {
        return Err(Error::PathGraphMismatch(format!(
            "{} assignments for {} phrases",
            path.assignments.len(),
            phrases.len()
        )));
    }
    if phrases.is_empty() {
        return Err(Error::Value("no phrases to assemble".into()));
    }
    for w in phrases.windows(2) {
        if w[1].start_seconds < w[0].end_seconds || w[0].start_seconds >= w[0].end_seconds {
            return Err(Error::Value(format!(
                "phrases {} and {} are not ordered",
                w[0].index, w[1].index
            )));
        }
    }
    let segments = path
        .assignments
        .iter()
        .map(|id| {
            graph
                .node(id)
                .ok_or_else(|| Error::PathGraphMismatch(format!("node {id:?} is not in the graph")))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = phrases.len();
    let slots: Vec<f64> = (0..n)
        .map(|i| {
            let end = if i + 1 < n {
                phrases[i + 1].start_seconds
            } else {
                phrases[i].end_seconds
            };
            end - phrases[i].start_seconds
        })
        .collect();

    let fps = params.output_fps;
    let blend = params.blend_frames();
    let mut frames: Vec<Frame> = Vec::new();
    let mut placements = Vec::with_capacity(n);
    let mut elapsed = 0.0;
    for (i, (seg, &slot)) in segments.iter().zip(&slots).enumerate() {
        if slot <= 0.0 {
            return Err(Error::Value(format!("phrase {} has no duration", phrases[i].index)));
        }
        let (d, clamped) = warped_duration(seg.clip.duration(), slot, params.max_time_stretch);
        let first = (elapsed * fps).round() as usize;
        elapsed += d;
        let count = ((elapsed * fps).round() as usize).saturating_sub(first);
        let mut part = resample_frames(&seg.clip, count);
        if let (Some(prev), Some(head)) = (frames.last(), part.first()) {
            let align = align_to(&seg.clip, prev, head);
            for f in part.iter_mut() {
                *f = align.frame(seg.clip.skeleton(), f);
            }
            blend_in(prev, &mut part, blend);
        }
        placements.push(Placement {
            phrase_index: phrases[i].index,
            segment_id: seg.segment_id.clone(),
            target_seconds: slot,
            warped_seconds: d,
            clamped,
            first_frame: frames.len(),
            frame_count: part.len(),
        });
        frames.extend(part);
    }
    if frames.len() < 2 {
        return Err(Error::Value("assembled motion is shorter than two frames".into()));
    }
    let clip = MotionClip::new(segments[0].clip.skeleton_arc().clone(), fps, frames, "synthesized")?;
    Ok(Assembly { clip, placements })
}

/// Warps every assigned segment to its phrase slot and concatenates them
/// with root alignment and seam blending.
pub fn assemble(
    path: &SynthesisPath,
    graph: &MotionGraph,
    phrases: &[Phrase],
    params: &StitchParams,
) -> Result<MotionClip> {
    assemble_detailed(path, graph, phrases, params).map(|a| a.clip)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::motion::{default_motion_strength, Joint, Skeleton, Vec3};

    fn skeleton() -> Arc<Skeleton> {
        Arc::new(
            Skeleton::new(
                vec![
                    Joint::new("root", None, Vec3::new(0.0, 1.0, 0.0)),
                    Joint::new("right_hand", Some(0), Vec3::new(0.0, 0.0, 0.5)),
                ],
                None,
            )
            .unwrap(),
        )
    }

    fn rotating(n: usize, fps: f64, rate: f64) -> MotionSegment {
        let frames = (0..n)
            .map(|i| Frame {
                root_position: Vec3::zeros(),
                rotations: vec![
                    Quat::identity(),
                    Quat::from_axis_angle(&Vec3::x_axis(), rate * i as f64 / fps),
                ],
            })
            .collect();
        let clip = MotionClip::new(skeleton(), fps, frames, "rot").unwrap();
        MotionSegment {
            segment_id: "rot#0".into(),
            source_id: "rot".into(),
            source_range: 0..n,
            strength: default_motion_strength(&clip),
            clip,
            semantic_tag: None,
        }
    }

    #[test]
    fn identity_warp() {
        let seg = rotating(50, 25.0, 1.0);
        let out = time_warp(&seg, 2.0, &StitchParams::default()).unwrap();
        assert_eq!(out.frame_count(), 50);
        for (a, b) in out.frames().iter().zip(seg.clip.frames()) {
            assert!(a.rotations[1].angle_to(&b.rotations[1]) < 1e-6);
        }
    }

    #[test]
    fn compression_is_clamped() {
        let seg = rotating(50, 25.0, 1.0);
        let w = time_warp_detailed(&seg, 1.0, &StitchParams::default()).unwrap();
        assert!(w.clamped);
        assert!((w.clip.duration() - 2.0 / 1.5).abs() <= 1.0 / 25.0);
    }

    #[test]
    fn stretched_poses_lie_on_the_arc() {
        let seg = rotating(50, 25.0, PI / 4.0);
        let w = time_warp_detailed(&seg, 3.0, &StitchParams::default()).unwrap();
        assert!(!w.clamped);
        assert_eq!(w.clip.frame_count(), 75);
        let total = PI / 4.0 * 49.0 / 25.0;
        for (k, f) in w.clip.frames().iter().enumerate() {
            let expected = total * k as f64 / 74.0;
            let q = f.rotations[1];
            assert!((q.angle() - expected).abs() < 1e-9);
            assert!((q.into_inner().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive_target() {
        let seg = rotating(10, 25.0, 1.0);
        assert!(matches!(
            time_warp(&seg, 0.0, &StitchParams::default()),
            Err(Error::Value(_))
        ));
    }

    #[test]
    fn blend_fades_a_root_offset() {
        let prev = Frame {
            root_position: Vec3::new(0.0, 0.3, 0.0),
            rotations: vec![Quat::identity(); 2],
        };
        let mut frames = vec![
            Frame {
                root_position: Vec3::zeros(),
                rotations: vec![Quat::identity(); 2],
            };
            6
        ];
        blend_in(&prev, &mut frames, 3);
        let ys: Vec<f64> = frames.iter().map(|f| f.root_position.y).collect();
        let expected = [0.225, 0.15, 0.075, 0.0, 0.0, 0.0];
        for (y, e) in ys.iter().zip(expected) {
            assert!((y - e).abs() < 1e-12, "{ys:?}");
        }
    }

    #[test]
    fn slerp_endpoints_are_exact() {
        let a = Quat::from_axis_angle(&Vec3::y_axis(), 0.3);
        let b = Quat::from_axis_angle(&Vec3::y_axis(), 2.0);
        assert_eq!(slerp(&a, &b, 0.0), a);
        assert_eq!(slerp(&a, &b, 1.0), b);
        assert!((slerp(&a, &b, 0.5).angle() - 1.15).abs() < 1e-12);
    }
}
