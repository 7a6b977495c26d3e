//! Camera-style depth synthesis and RGB-D evaluation.
//!
//! The crate turns clean ground-truth depth into depth that looks like it
//! came from a consumer depth camera (value noise, guided metric rescaling,
//! high-frequency jitter, hole layers), and scores depth predictions with the
//! usual metric-depth scorecard, distance-binned accuracy, point-cloud export
//! and trajectory smoothness metrics.

pub mod cloud;
pub mod error;
pub mod gfilter;
pub mod io;
pub mod manifest;
pub mod metrics;
pub mod noise;
pub mod normalize;
pub mod rng;
pub mod traj;
pub mod types;

pub use error::{Error, Result};
pub use types::{luminance, DepthMap, ImageRGB, Intrinsics, ScalarField, DEFAULT_DEPTH_SCALE};

pub use cloud::{backproject, project, write_ply, PlyMode, PointCloud};
pub use gfilter::{
    box_stats, guided_filter, guided_filter_depth, guided_rescale_augment, GuidedFilterParams,
    RescaleAugmentParams,
};
pub use io::{load_depth, load_rgb, save_depth, save_rgb};
pub use manifest::{load_manifest, DatasetManifest, SampleRecord};
pub use metrics::{depth_metrics, MetricReport, ValidPolicy};
pub use noise::{synthesize, HoleProbField, NoisePipelineConfig};
pub use normalize::{affine_normalize, affine_recover, to_disparity, NormParams};
pub use rng::derive_rng;
pub use traj::{load_traj, mean_abs_accel, rms_jerk, JointTrajectory};
