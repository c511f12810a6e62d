//! Nearest-neighbor pose transfer from a driving sequence A onto a target sequence B.
//!
//! [`match_sequence`] maps every frame of A to a frame of B, holding the previous
//! selection unless a new neighbor improves the pose distance by more than `lambda`.
//! [`build_pairs_manifest`] produces the (A, B) training pairs, and
//! [`interpolate_plan`] expands a mapping into real and blended output frames.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pose::{knn_query, pose_distance, FrameDims, Joint, Neighbor, PoseError, PoseFrame, PoseSequence};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransferError {
    #[error(transparent)]
    Pose(#[from] PoseError),
    #[error("sequence {0} has no frames")]
    EmptySequence(&'static str),
    #[error("invalid match parameters: {0}")]
    InvalidParams(String),
    #[error("previous frame index {index} is out of range for {len} candidates")]
    PrevOutOfRange { index: usize, len: usize },
    #[error("interpolation factor must be at least 1")]
    ZeroFactor,
}

/// How one frame is picked from the k nearest candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidatePolicy {
    /// The closest candidate; identical to k = 1.
    MinDistance,
    /// The candidate whose frame index is closest to the previous selection.
    #[default]
    NearestPrevIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchParams {
    pub k: usize,
    pub lambda: f64,
    pub normalize: bool,
    pub candidate_policy: CandidatePolicy,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            k: 1,
            lambda: 0.0,
            normalize: true,
            candidate_policy: CandidatePolicy::default(),
        }
    }
}

impl MatchParams {
    pub fn validate(&self) -> Result<(), TransferError> {
        if self.k == 0 {
            return Err(TransferError::InvalidParams("k must be at least 1".into()));
        }
        // Infinity is allowed: it disables switching entirely.
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(TransferError::InvalidParams(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Outcome of one thresholded selection step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub distance: f64,
    pub switched: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub a_index: usize,
    pub b_index: usize,
    pub distance: f64,
    pub switched: bool,
}

/// One B frame per A frame, in A's temporal order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMapping {
    pub entries: Vec<MappingEntry>,
}

impl FrameMapping {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn b_indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.b_index).collect()
    }

    pub fn switch_count(&self) -> usize {
        self.entries.windows(2).filter(|w| w[0].b_index != w[1].b_index).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub a_index: usize,
    pub b_index: usize,
    pub distance: f64,
}

/// Matched (A frame, B frame) pairs that index a conditional image-to-image training set.
#[derive(Debug, Clone, PartialEq)]
pub struct PairManifest {
    pub pairs: Vec<PairRecord>,
    pub params: MatchParams,
    pub max_distance: Option<f64>,
}

fn pick_candidate(neighbors: &[Neighbor], prev_b: usize, policy: CandidatePolicy) -> Neighbor {
    match policy {
        CandidatePolicy::MinDistance => neighbors[0],
        CandidatePolicy::NearestPrevIndex => *neighbors
            .iter()
            .min_by(|a, b| {
                a.index
                    .abs_diff(prev_b)
                    .cmp(&b.index.abs_diff(prev_b))
                    .then(a.distance.total_cmp(&b.distance))
                    .then(a.index.cmp(&b.index))
            })
            .expect("knn_query returns at least one neighbor"),
    }
}

/// Thresholded frame selection: move from `prev_b` to the k-NN pick only when it is closer
/// to the query than `prev_b` by strictly more than `params.lambda`.
pub fn select_frame(
    prev_b: usize,
    query: &PoseFrame,
    query_dims: FrameDims,
    candidates: &PoseSequence,
    params: &MatchParams,
) -> Result<Selection, TransferError> {
    params.validate()?;
    let neighbors = knn_query(query, query_dims, candidates, params.k, params.normalize)?;
    let Some(prev_frame) = candidates.frames.get(prev_b) else {
        return Err(TransferError::PrevOutOfRange {
            index: prev_b,
            len: candidates.len(),
        });
    };
    let prev_distance = pose_distance(query, prev_frame, params.normalize, query_dims, candidates.dims())?;
    let candidate = pick_candidate(&neighbors, prev_b, params.candidate_policy);

    if candidate.distance < prev_distance - params.lambda {
        Ok(Selection {
            index: candidate.index,
            distance: candidate.distance,
            switched: candidate.index != prev_b,
        })
    } else {
        Ok(Selection {
            index: prev_b,
            distance: prev_distance,
            switched: false,
        })
    }
}

/// Maps every frame of `a` onto a frame of `b`.
///
/// The first entry is the plain nearest neighbor of A's first frame; every later entry
/// comes from [`select_frame`] seeded with the previous entry's B index. The recurrence
/// is evaluated sequentially.
pub fn match_sequence(a: &PoseSequence, b: &PoseSequence, params: &MatchParams) -> Result<FrameMapping, TransferError> {
    params.validate()?;
    if a.is_empty() {
        return Err(TransferError::EmptySequence("A"));
    }
    if b.is_empty() {
        return Err(TransferError::EmptySequence("B"));
    }
    let dims_a = a.dims();
    let first = knn_query(&a.frames[0], dims_a, b, 1, params.normalize)?[0];

    let mut entries = Vec::with_capacity(a.len());
    entries.push(MappingEntry {
        a_index: 0,
        b_index: first.index,
        distance: first.distance,
        switched: false,
    });
    let mut prev = first.index;
    for (a_index, query) in a.frames.iter().enumerate().skip(1) {
        let sel = select_frame(prev, query, dims_a, b, params)?;
        entries.push(MappingEntry {
            a_index,
            b_index: sel.index,
            distance: sel.distance,
            switched: sel.switched,
        });
        prev = sel.index;
    }
    Ok(FrameMapping { entries })
}

/// Pairs every frame of `a` with its single nearest frame of `b`, regardless of `params.k`,
/// keeping only pairs within `max_distance` when a cutoff is given.
pub fn build_pairs_manifest(
    a: &PoseSequence,
    b: &PoseSequence,
    params: &MatchParams,
    max_distance: Option<f64>,
) -> Result<PairManifest, TransferError> {
    params.validate()?;
    if a.is_empty() {
        return Err(TransferError::EmptySequence("A"));
    }
    if b.is_empty() {
        return Err(TransferError::EmptySequence("B"));
    }
    if let Some(cutoff) = max_distance {
        if cutoff.is_nan() || cutoff < 0.0 {
            return Err(TransferError::InvalidParams(format!(
                "max_distance must be non-negative, got {cutoff}"
            )));
        }
    }
    let dims_a = a.dims();
    let nearest = a
        .frames
        .par_iter()
        .enumerate()
        .map(|(a_index, query)| {
            knn_query(query, dims_a, b, 1, params.normalize).map(|n| PairRecord {
                a_index,
                b_index: n[0].index,
                distance: n[0].distance,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut seen = BTreeSet::new();
    let pairs = nearest
        .into_iter()
        .filter(|p| max_distance.is_none_or(|cutoff| p.distance <= cutoff))
        .filter(|p| seen.insert((p.a_index, p.b_index)))
        .collect();

    Ok(PairManifest {
        pairs,
        params: *params,
        max_distance,
    })
}

/// One output frame of an interpolated transfer video.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenderInstruction {
    /// Copy B's frame as is.
    Real { b_index: usize },
    /// Mix two B frames: `(1 - alpha) * left + alpha * right`.
    Blend { b_left: usize, b_right: usize, alpha: f64 },
}

/// Expands a mapping into output frames, inserting `factor - 1` evenly spaced blends at
/// every switch between consecutive B indices. Held frames get no blends.
pub fn interpolate_plan(mapping: &FrameMapping, factor: usize) -> Result<Vec<RenderInstruction>, TransferError> {
    if factor == 0 {
        return Err(TransferError::ZeroFactor);
    }
    let mut plan = Vec::with_capacity(mapping.len() + (factor - 1) * mapping.switch_count());
    let mut prev: Option<usize> = None;
    for entry in &mapping.entries {
        if let Some(left) = prev.filter(|&p| p != entry.b_index) {
            plan.extend((1..factor).map(|m| RenderInstruction::Blend {
                b_left: left,
                b_right: entry.b_index,
                alpha: m as f64 / factor as f64,
            }));
        }
        plan.push(RenderInstruction::Real { b_index: entry.b_index });
        prev = Some(entry.b_index);
    }
    Ok(plan)
}

/// Linear interpolation between two poses; a joint missing on either side stays missing.
pub fn interpolate_pose(a: &PoseFrame, b: &PoseFrame, alpha: f64) -> PoseFrame {
    let mut out = PoseFrame::empty();
    for (slot, (ja, jb)) in out.joints.iter_mut().zip(a.joints.iter().zip(b.joints.iter())) {
        if let (Some(ja), Some(jb)) = (ja, jb) {
            *slot = Some(Joint {
                x: ja.x + (jb.x - ja.x) * alpha,
                y: ja.y + (jb.y - ja.y) * alpha,
                confidence: ja.confidence.min(jb.confidence),
            });
        }
    }
    out
}
