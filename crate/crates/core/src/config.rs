//! Flat JSON pipeline configuration. Every key is optional; unknown keys are rejected.
//!
//! ```json
//! {"k": 7, "lambda": 0.05, "normalize": true, "candidate_policy": "nearest_prev_index",
//!  "max_distance": 0.4, "interpolation_factor": 2, "joint_radius": 3, "skeleton_channel": "red"}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::raster::{Channel, SkeletonStyle};
use crate::transfer::{CandidatePolicy, MatchParams};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub k: Option<usize>,
    pub lambda: Option<f64>,
    pub normalize: Option<bool>,
    pub candidate_policy: Option<CandidatePolicy>,
    pub max_distance: Option<f64>,
    pub interpolation_factor: Option<usize>,
    pub limb_pairs: Option<Vec<(usize, usize)>>,
    pub joint_radius: Option<u32>,
    pub line_thickness: Option<u32>,
    pub face_line_thickness: Option<u32>,
    pub skeleton_channel: Option<Channel>,
    pub face_channel: Option<Channel>,
    pub reserved_channel: Option<Channel>,
}

impl PipelineConfig {
    pub fn from_json_str(s: &str) -> Result<Self, crate::Error> {
        let de = &mut serde_json::Deserializer::from_str(s);
        serde_path_to_error::deserialize(de).map_err(|e| crate::Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path).map_err(|source| crate::Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Match parameters with unset keys taken from [`MatchParams::default`].
    pub fn match_params(&self) -> MatchParams {
        let d = MatchParams::default();
        MatchParams {
            k: self.k.unwrap_or(d.k),
            lambda: self.lambda.unwrap_or(d.lambda),
            normalize: self.normalize.unwrap_or(d.normalize),
            candidate_policy: self.candidate_policy.unwrap_or(d.candidate_policy),
        }
    }

    pub fn interpolation_factor(&self) -> usize {
        self.interpolation_factor.unwrap_or(1)
    }

    /// Skeleton style for frames `height` pixels tall, with any overrides applied.
    pub fn style(&self, height: u32) -> SkeletonStyle {
        let base = SkeletonStyle::for_height(height);
        SkeletonStyle {
            limb_pairs: self.limb_pairs.clone().unwrap_or(base.limb_pairs),
            joint_radius: self.joint_radius.unwrap_or(base.joint_radius),
            line_thickness: self.line_thickness.unwrap_or(base.line_thickness),
            face_line_thickness: self.face_line_thickness.unwrap_or(base.face_line_thickness),
            skeleton_channel: self.skeleton_channel.unwrap_or(base.skeleton_channel),
            face_channel: self.face_channel.unwrap_or(base.face_channel),
            reserved_channel: self.reserved_channel.unwrap_or(base.reserved_channel),
        }
    }
}
