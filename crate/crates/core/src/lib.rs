pub mod error;
pub mod face;
pub mod fixture;
pub mod graph;
pub mod motion;
pub mod optimizer;
pub mod pipeline;
pub mod segmentation;
pub mod speech;
pub mod stitch;

pub use error::{Error, Result};
