use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::{pose_global, Frame, MotionClip, Quat, Skeleton, Vec3};
use crate::segmentation::MotionSegment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransitionParams {
    /// Seconds; converts velocity differences (m/s) into meters.
    pub velocity_weight: f64,
    /// Frames spanned by the boundary finite difference.
    pub boundary_window: usize,
    pub align_root: bool,
}

impl Default for TransitionParams {
    fn default() -> Self {
        TransitionParams {
            velocity_weight: 0.5,
            boundary_window: 3,
            align_root: true,
        }
    }
}

impl TransitionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.velocity_weight.is_finite() && self.velocity_weight >= 0.0) {
            return Err(Error::Value("velocity_weight must be non-negative".into()));
        }
        if self.boundary_window == 0 {
            return Err(Error::Value("boundary_window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Heading of a rotation about the vertical (+Y) axis, measured from +Z.
pub fn yaw_of(q: &Quat) -> f64 {
    let f = q * Vec3::z();
    f.x.atan2(f.z)
}

/// Rigid ground-plane transform: rotate about +Y through a pivot, then move
/// the pivot horizontally onto a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootAlignment {
    rotation: Quat,
    pivot: Vec3,
    target: Vec3,
}

fn horizontal(p: &Vec3) -> Vec3 {
    Vec3::new(p.x, 0.0, p.z)
}

impl RootAlignment {
    pub fn identity() -> Self {
        RootAlignment {
            rotation: Quat::identity(),
            pivot: Vec3::zeros(),
            target: Vec3::zeros(),
        }
    }

    /// Transform that puts `moving`'s root onto `anchor`'s root in the
    /// ground plane with matching yaw. Heights are untouched.
    pub fn between(anchor_root: &Vec3, anchor_rot: &Quat, moving_root: &Vec3, moving_rot: &Quat) -> Self {
        let delta = yaw_of(anchor_rot) - yaw_of(moving_rot);
        RootAlignment {
            rotation: Quat::from_axis_angle(&Vec3::y_axis(), delta),
            pivot: horizontal(moving_root),
            target: horizontal(anchor_root),
        }
    }

    pub fn point(&self, p: &Vec3) -> Vec3 {
        self.rotation * (p - self.pivot) + self.target
    }

    pub fn vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Applies the transform to a whole pose.
    pub fn frame(&self, skeleton: &Skeleton, f: &Frame) -> Frame {
        let root_offset = skeleton.joints()[0].offset;
        let root = self.point(&(f.root_position + root_offset)) - root_offset;
        let mut rotations = f.rotations.clone();
        rotations[0] = self.rotation * rotations[0];
        Frame {
            root_position: root,
            rotations,
        }
    }

    pub fn clip(&self, clip: &MotionClip) -> MotionClip {
        let frames = clip.frames().iter().map(|f| self.frame(clip.skeleton(), f)).collect();
        MotionClip::new(clip.skeleton_arc().clone(), clip.fps(), frames, clip.source_id())
            .expect("rigid transform keeps clip invariants")
    }
}

/// Salient-joint positions and velocities at one end of a segment.
#[derive(Debug, Clone)]
pub(crate) struct BoundaryState {
    positions: Vec<Vec3>,
    velocities: Vec<Vec3>,
    root: Vec3,
    root_rot: Quat,
}

fn boundary(clip: &MotionClip, at_end: bool, window: usize) -> BoundaryState {
    let sk = clip.skeleton();
    let n = clip.frame_count();
    let w = window.min(n - 1);
    let (here, there) = if at_end { (n - 1, n - 1 - w) } else { (0, w) };
    let a = pose_global(sk, &clip.frames()[here]);
    let b = pose_global(sk, &clip.frames()[there]);
    let scale = clip.fps() / w as f64;
    let positions = sk.salient().iter().map(|&j| a.positions[j]).collect();
    let velocities = sk
        .salient()
        .iter()
        .map(|&j| {
            let d = a.positions[j] - b.positions[j];
            if at_end {
                d * scale
            } else {
                -d * scale
            }
        })
        .collect();
    BoundaryState {
        positions,
        velocities,
        root: a.positions[0],
        root_rot: a.rotations[0],
    }
}

pub(crate) fn end_state(seg: &MotionSegment, params: &TransitionParams) -> BoundaryState {
    boundary(&seg.clip, true, params.boundary_window)
}

pub(crate) fn start_state(seg: &MotionSegment, params: &TransitionParams) -> BoundaryState {
    boundary(&seg.clip, false, params.boundary_window)
}

pub(crate) fn state_cost(a_end: &BoundaryState, b_start: &BoundaryState, params: &TransitionParams) -> f64 {
    let align = if params.align_root {
        RootAlignment::between(&a_end.root, &a_end.root_rot, &b_start.root, &b_start.root_rot)
    } else {
        RootAlignment::identity()
    };
    let k = a_end.positions.len() as f64;
    let pos: f64 = a_end
        .positions
        .iter()
        .zip(&b_start.positions)
        .map(|(p, q)| (p - align.point(q)).norm())
        .sum::<f64>()
        / k;
    let vel: f64 = a_end
        .velocities
        .iter()
        .zip(&b_start.velocities)
        .map(|(u, v)| (u - align.vector(v)).norm())
        .sum::<f64>()
        / k;
    pos + params.velocity_weight * vel
}

pub(crate) fn check_same_skeleton(a: &MotionSegment, b: &MotionSegment) -> Result<()> {
    let (sa, sb) = (a.clip.skeleton_arc(), b.clip.skeleton_arc());
    if std::sync::Arc::ptr_eq(sa, sb) || sa == sb {
        Ok(())
    } else {
        Err(Error::SkeletonMismatch(format!(
            "{} and {} use different skeletons",
            a.segment_id, b.segment_id
        )))
    }
}

/// Boundary states of every node of a graph, for on-the-fly transition costs.
pub(crate) struct TransitionStates {
    starts: Vec<BoundaryState>,
    ends: Vec<BoundaryState>,
    params: TransitionParams,
}

impl TransitionStates {
    pub(crate) fn new(nodes: &[MotionSegment], params: &TransitionParams) -> Self {
        TransitionStates {
            starts: nodes.iter().map(|n| start_state(n, params)).collect(),
            ends: nodes.iter().map(|n| end_state(n, params)).collect(),
            params: *params,
        }
    }

    pub(crate) fn cost(&self, from: usize, to: usize) -> f64 {
        state_cost(&self.ends[from], &self.starts[to], &self.params)
    }
}

/// Cost of playing `b` right after `a`: mean salient-joint distance between
/// a's last pose and b's first pose plus `velocity_weight` times the mean
/// salient-joint velocity difference, after aligning b's root to a's.
pub fn transition_cost(a: &MotionSegment, b: &MotionSegment, params: &TransitionParams) -> Result<f64> {
    check_same_skeleton(a, b)?;
    params.validate()?;
    Ok(state_cost(&end_state(a, params), &start_state(b, params), params))
}
