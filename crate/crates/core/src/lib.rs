//! Offline multi-object tracking that fuses Kalman motion with pixel-level
//! cues: mask warping by optical flow, mask centroid distances, per-track
//! flow-magnitude statistics, and cluster-aware appearance updates.

pub mod appearance;
pub mod assignment;
pub mod association;
pub mod cli;
pub mod config;
pub mod dataio;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod motion;
pub mod pixel_cues;
pub mod synth;
pub mod tracker;

pub use config::{AssocConfig, KalmanNoise};
pub use dataio::TrackRecord;
pub use error::{Error, Result};
pub use geometry::{iou, BBox, Detection, Embedding, FlowField, Mask, PixelSet};
pub use tracker::{run_sequence, FrameInput, Tracker};
