//! Skeletal motion data model, ingestion, forward kinematics and motion strength.

pub mod bvh;
mod clip;
mod curve;
mod fk;
mod io;
mod skeleton;
mod strength;

pub use clip::{Frame, MotionClip};
pub use curve::{resample_curve, resample_linear, Resample};
pub use fk::{all_positions, forward_kinematics, pose_global, GlobalPose};
pub(crate) use io::{clip_from_record, clip_to_record, ClipRecord};
pub use io::{load_motion_clip, motion_to_json, parse_motion_json, save_motion_json, unit_quat, MotionFormat};
pub use skeleton::{Joint, Skeleton};
pub(crate) use strength::normalize_unit_max;
pub use strength::{
    compute_motion_strength, default_motion_strength, raw_motion_strength, Normalization, StrengthCurve,
    DEFAULT_SMOOTH_WINDOW,
};

pub type Vec3 = nalgebra::Vector3<f64>;
/// Unit quaternion, (w, x, y, z), active right-handed rotation.
pub type Quat = nalgebra::UnitQuaternion<f64>;
