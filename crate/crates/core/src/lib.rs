//! Nearest-neighbor pose transfer between two annotated video sessions.
//!
//! Given per-frame COCO-18 keypoints for a driving video A and a target video B, `posekit`
//! maps every frame of A onto the closest-posed frame of B, smooths the mapping with a
//! switching threshold, and assembles the result with crossfade interpolation. The same
//! matching produces (A, B) training-pair manifests for image-to-image models, and the
//! raster module renders pose skeletons and aligns output frames on the subject's face.
//!
//! The pipeline stages:
//!
//! - [`annotation`]: load and validate keypoint documents into a [`PoseSequence`]
//! - [`pose`]: impute missing joints, measure pose distance, exact k-NN
//! - [`transfer`]: thresholded frame selection, sequence matching, pair manifests,
//!   interpolation plans
//! - [`raster`]: skeleton rendering, face-center alignment, frame blending
//! - [`manifest`]: JSON Lines encodings of mappings and manifests
//! - [`cli`]: the `posekit` command line
//!
//! Runnable examples live in `crates/core/examples/`.

pub mod annotation;
pub mod cli;
pub mod config;
pub mod manifest;
pub mod pose;
pub mod raster;
pub mod transfer;

use std::path::PathBuf;

pub use annotation::{load_pose_sequence, AnnotationDocument, LoadedSequence, SchemaError};
pub use config::PipelineConfig;
pub use pose::{
    impute_missing_joints, knn_query, pose_distance, FrameDims, Joint, Keypoint, Neighbor, PoseFrame, PoseSequence,
};
pub use raster::{
    align_sequence, blend_frames, face_center, render_skeleton, translate_edge_replicate, Channel, FaceAnnotation,
    RasterImage, SkeletonStyle,
};
pub use transfer::{
    build_pairs_manifest, interpolate_plan, match_sequence, select_frame, CandidatePolicy, FrameMapping, MatchParams,
    PairManifest, RenderInstruction,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Pose(#[from] pose::PoseError),
    #[error(transparent)]
    Transfer(#[from] transfer::TransferError),
    #[error(transparent)]
    Raster(#[from] raster::RasterError),
    #[error(transparent)]
    Manifest(#[from] manifest::ManifestError),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Short machine-readable category, used in `ERROR:<kind>:` diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Schema(_) => "schema",
            Error::Pose(pose::PoseError::JointNeverObserved { .. }) => "unusable-input",
            Error::Pose(_) | Error::Transfer(_) => "match",
            Error::Raster(raster::RasterError::Io { .. }) | Error::Io { .. } => "io",
            Error::Raster(raster::RasterError::Image { .. }) => "image",
            Error::Raster(_) => "raster",
            Error::Manifest(_) => "manifest",
            Error::Config(_) => "config",
            Error::Usage(_) => "usage",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
