use crate::error::{Error, Result};
use crate::motion::{Frame, MotionClip, Quat, Skeleton, Vec3};

/// Global joint positions and rotations of one pose.
#[derive(Debug, Clone)]
pub struct GlobalPose {
    pub positions: Vec<Vec3>,
    pub rotations: Vec<Quat>,
}

/// Evaluates a single pose. The root sits at `root_position + offset_root`
/// and carries its own rotation; every other joint is placed at its
/// parent's global transform applied to its offset.
pub fn pose_global(skeleton: &Skeleton, frame: &Frame) -> GlobalPose {
    let n = skeleton.len();
    let mut positions = Vec::with_capacity(n);
    let mut rotations: Vec<Quat> = Vec::with_capacity(n);
    for (i, joint) in skeleton.joints().iter().enumerate() {
        match joint.parent {
            None => {
                positions.push(frame.root_position + joint.offset);
                rotations.push(frame.rotations[i]);
            }
            Some(p) => {
                let parent_rot = rotations[p];
                positions.push(positions[p] + parent_rot * joint.offset);
                rotations.push(parent_rot * frame.rotations[i]);
            }
        }
    }
    GlobalPose { positions, rotations }
}

/// Global joint positions (meters) at `frame_index`.
pub fn forward_kinematics(clip: &MotionClip, frame_index: usize) -> Result<Vec<Vec3>> {
    let frame = clip.frames().get(frame_index).ok_or(Error::Index {
        index: frame_index,
        len: clip.frame_count(),
    })?;
    Ok(pose_global(clip.skeleton(), frame).positions)
}

/// Global joint positions for every frame.
pub fn all_positions(clip: &MotionClip) -> Vec<Vec<Vec3>> {
    clip.frames()
        .iter()
        .map(|f| pose_global(clip.skeleton(), f).positions)
        .collect()
}
