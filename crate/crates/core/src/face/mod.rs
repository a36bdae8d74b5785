//! Blendshape face mathematics: losses, feature windows, articulation
//! correction and expression fusion over 52-channel ARKit frames.

mod blendshape;
mod features;
mod loss;
mod phoneme;
mod rules;

pub use blendshape::{
    channel_index, read_blendshape_csv, write_blendshape_csv, BlendshapeSequence, Weights, ARKIT_NAMES, CHANNELS,
};
pub use features::{read_feature_csv, window_features, AudioFeatureMatrix, FEATURE_DIMS, MFB_DIMS, MFCC_DIMS, WINDOW};
pub use loss::{lip_loss, ssim_loss, SSIM_DELTA1, SSIM_DELTA2};
pub use phoneme::{
    default_closure_set, normalize_phoneme, read_phoneme_tsv, PhonemeInterval, PhonemeTimeline, SILENCE,
};
pub use rules::{
    articulation_correction, closure_envelope, default_closure_channels, default_open_channels, fuse_expression,
    trapezoid, upper_face_mask, IntentionExpression,
};
