//! Pose data types, missing-joint imputation, the pose distance and exact k-NN retrieval.
//!
//! A [`PoseFrame`] holds the 18 COCO-18 keypoints of one video frame. Missing joints
//! are `None`; coordinate sentinels such as `(0, 0)` are converted away at ingestion.

use std::cmp::Ordering;

use thiserror::Error;

/// Number of keypoints in the COCO-18 layout.
pub const JOINT_COUNT: usize = 18;

/// Keypoint ids of the COCO-18 layout used by OpenPose-style detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum Keypoint {
    Nose = 0,
    Neck = 1,
    RightShoulder = 2,
    RightElbow = 3,
    RightWrist = 4,
    LeftShoulder = 5,
    LeftElbow = 6,
    LeftWrist = 7,
    RightHip = 8,
    RightKnee = 9,
    RightAnkle = 10,
    LeftHip = 11,
    LeftKnee = 12,
    LeftAnkle = 13,
    RightEye = 14,
    LeftEye = 15,
    RightEar = 16,
    LeftEar = 17,
}

impl Keypoint {
    pub const ALL: [Keypoint; JOINT_COUNT] = [
        Keypoint::Nose,
        Keypoint::Neck,
        Keypoint::RightShoulder,
        Keypoint::RightElbow,
        Keypoint::RightWrist,
        Keypoint::LeftShoulder,
        Keypoint::LeftElbow,
        Keypoint::LeftWrist,
        Keypoint::RightHip,
        Keypoint::RightKnee,
        Keypoint::RightAnkle,
        Keypoint::LeftHip,
        Keypoint::LeftKnee,
        Keypoint::LeftAnkle,
        Keypoint::RightEye,
        Keypoint::LeftEye,
        Keypoint::RightEar,
        Keypoint::LeftEar,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoseError {
    #[error("joint {joint} is missing in every frame")]
    JointNeverObserved { joint: usize },
    #[error("joint {joint} is missing; impute the sequence before measuring distances")]
    MissingJoint { joint: usize },
    #[error("candidate sequence has no frames")]
    EmptyCandidates,
    #[error("sequence has no frames")]
    EmptySequence,
    #[error("k must be at least 1")]
    ZeroK,
}

/// A single detected keypoint in pixel coordinates (origin top-left, y down).
///
/// `confidence == 0` marks a joint that was filled in by [`impute_missing_joints`]
/// rather than observed by a detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Joint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Joint {
    pub fn new(x: f64, y: f64, confidence: f64) -> Self {
        Self {
            x,
            y,
            confidence: confidence.clamp(0.0, 1.0),
        }
    }

    pub fn is_observed(&self) -> bool {
        self.confidence > 0.0
    }
}

/// Width and height of the frame a pose was detected in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameDims {
    pub width: f64,
    pub height: f64,
}

impl FrameDims {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }
}

/// The 18×2 pose matrix of one frame; `None` is a joint the detector did not report.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseFrame {
    pub joints: [Option<Joint>; JOINT_COUNT],
}

impl PoseFrame {
    pub fn new(joints: [Option<Joint>; JOINT_COUNT]) -> Self {
        Self { joints }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn joint(&self, keypoint: Keypoint) -> Option<&Joint> {
        self.joints[keypoint.index()].as_ref()
    }

    pub fn is_complete(&self) -> bool {
        self.joints.iter().all(Option::is_some)
    }

    pub fn present_count(&self) -> usize {
        self.joints.iter().filter(|j| j.is_some()).count()
    }
}

/// Temporally ordered poses of one video, plus the frame size they were detected at.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    pub frames: Vec<PoseFrame>,
    pub width: u32,
    pub height: u32,
    pub source_id: String,
}

impl PoseSequence {
    pub fn new(source_id: impl Into<String>, width: u32, height: u32, frames: Vec<PoseFrame>) -> Self {
        Self {
            frames,
            width,
            height,
            source_id: source_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> FrameDims {
        FrameDims::new(f64::from(self.width), f64::from(self.height))
    }

    pub fn is_imputed(&self) -> bool {
        self.frames.iter().all(PoseFrame::is_complete)
    }
}

/// Median with the even-count convention of averaging the two middle values.
/// `values` is reordered in place.
pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

/// Replaces every unobserved joint with the componentwise median of that joint over all
/// frames where it was observed.
///
/// Observed joints (confidence > 0) are left untouched. Imputed joints carry confidence 0,
/// so running the imputation a second time reproduces the same sequence.
pub fn impute_missing_joints(seq: &PoseSequence) -> Result<PoseSequence, PoseError> {
    if seq.is_empty() {
        return Err(PoseError::EmptySequence);
    }

    let mut medians = [(0.0, 0.0); JOINT_COUNT];
    let mut xs = Vec::with_capacity(seq.len());
    let mut ys = Vec::with_capacity(seq.len());
    for (joint, slot) in medians.iter_mut().enumerate() {
        xs.clear();
        ys.clear();
        for frame in &seq.frames {
            if let Some(j) = frame.joints[joint].filter(Joint::is_observed) {
                xs.push(j.x);
                ys.push(j.y);
            }
        }
        let (Some(mx), Some(my)) = (median(&mut xs), median(&mut ys)) else {
            return Err(PoseError::JointNeverObserved { joint });
        };
        *slot = (mx, my);
    }

    let frames = seq
        .frames
        .iter()
        .map(|frame| {
            let mut out = *frame;
            for (slot, &(x, y)) in out.joints.iter_mut().zip(medians.iter()) {
                if !slot.is_some_and(|j| j.is_observed()) {
                    *slot = Some(Joint { x, y, confidence: 0.0 });
                }
            }
            out
        })
        .collect();

    Ok(PoseSequence {
        frames,
        width: seq.width,
        height: seq.height,
        source_id: seq.source_id.clone(),
    })
}

/// ℓ2 distance between two fully populated pose matrices.
///
/// With `normalize`, each frame's x is divided by its own width and y by its own height,
/// which makes the result comparable across sources of different resolution.
pub fn pose_distance(
    a: &PoseFrame,
    b: &PoseFrame,
    normalize: bool,
    dims_a: FrameDims,
    dims_b: FrameDims,
) -> Result<f64, PoseError> {
    let (sxa, sya, sxb, syb) = if normalize {
        (dims_a.width, dims_a.height, dims_b.width, dims_b.height)
    } else {
        (1.0, 1.0, 1.0, 1.0)
    };
    let mut sum = 0.0;
    for (joint, (ja, jb)) in a.joints.iter().zip(b.joints.iter()).enumerate() {
        let (Some(ja), Some(jb)) = (ja, jb) else {
            return Err(PoseError::MissingJoint { joint });
        };
        let dx = ja.x / sxa - jb.x / sxb;
        let dy = ja.y / sya - jb.y / syb;
        sum += dx * dx + dy * dy;
    }
    Ok(sum.sqrt())
}

/// One k-NN result: a candidate frame index and its distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// Orders by ascending distance, then ascending frame index.
pub(crate) fn by_distance_then_index(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index))
}

/// Exact brute-force k nearest neighbors of `query` among the frames of `candidates`.
///
/// The result is sorted by ascending distance with ties broken by the smaller frame index.
/// A `k` larger than the candidate count returns every candidate.
pub fn knn_query(
    query: &PoseFrame,
    query_dims: FrameDims,
    candidates: &PoseSequence,
    k: usize,
    normalize: bool,
) -> Result<Vec<Neighbor>, PoseError> {
    if candidates.is_empty() {
        return Err(PoseError::EmptyCandidates);
    }
    if k == 0 {
        return Err(PoseError::ZeroK);
    }
    let dims = candidates.dims();
    let mut all = candidates
        .frames
        .iter()
        .enumerate()
        .map(|(index, frame)| {
            pose_distance(query, frame, normalize, query_dims, dims).map(|distance| Neighbor { index, distance })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let k = k.min(all.len());
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, by_distance_then_index);
        all.truncate(k);
    }
    all.sort_unstable_by(by_distance_then_index);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn frame_at(x: f64, y: f64) -> PoseFrame {
        PoseFrame::new([Some(Joint::new(x, y, 1.0)); JOINT_COUNT])
    }

    fn dims() -> FrameDims {
        FrameDims::new(100.0, 100.0)
    }

    #[test]
    fn impute_even_count_averages_middle_values() {
        let mut f0 = frame_at(1.0, 1.0);
        let mut f1 = frame_at(1.0, 1.0);
        let mut f2 = frame_at(1.0, 1.0);
        f0.joints[5] = Some(Joint::new(10.0, 3.0, 0.8));
        f1.joints[5] = None;
        f2.joints[5] = Some(Joint::new(20.0, 7.0, 0.8));
        let seq = PoseSequence::new("s", 100, 100, vec![f0, f1, f2]);
        let out = impute_missing_joints(&seq).unwrap();
        let j = out.frames[1].joints[5].unwrap();
        assert_eq!(j.x, 15.0);
        assert_eq!(j.y, 5.0);
        assert_eq!(j.confidence, 0.0);
        assert_eq!(out.frames[0], seq.frames[0]);
        assert_eq!(out.frames[2], seq.frames[2]);
    }

    #[test]
    fn impute_odd_count_takes_middle() {
        let ys = [12.0, 40.0, 18.0];
        let mut frames: Vec<_> = ys
            .iter()
            .map(|&y| {
                let mut f = frame_at(5.0, 5.0);
                f.joints[7] = Some(Joint::new(2.0, y, 0.5));
                f
            })
            .collect();
        let mut missing = frame_at(5.0, 5.0);
        missing.joints[7] = None;
        frames.push(missing);
        let out = impute_missing_joints(&PoseSequence::new("s", 100, 100, frames)).unwrap();
        assert_eq!(out.frames[3].joints[7].unwrap().y, 18.0);
    }

    #[test]
    fn impute_complete_sequence_is_identity() {
        let seq = PoseSequence::new("s", 64, 48, vec![frame_at(1.0, 2.0), frame_at(3.0, 4.0)]);
        assert_eq!(impute_missing_joints(&seq).unwrap(), seq);
    }

    #[test]
    fn impute_never_observed_joint_errors() {
        let mut f = frame_at(1.0, 1.0);
        f.joints[11] = None;
        let seq = PoseSequence::new("s", 10, 10, vec![f, f]);
        assert_eq!(
            impute_missing_joints(&seq),
            Err(PoseError::JointNeverObserved { joint: 11 })
        );
    }

    #[test]
    fn impute_empty_sequence_errors() {
        let seq = PoseSequence::new("s", 10, 10, vec![]);
        assert_eq!(impute_missing_joints(&seq), Err(PoseError::EmptySequence));
    }

    #[test]
    fn distance_three_four_five() {
        let a = frame_at(10.0, 10.0);
        let mut b = a;
        b.joints[0] = Some(Joint::new(13.0, 14.0, 1.0));
        assert_eq!(pose_distance(&a, &b, false, dims(), dims()).unwrap(), 5.0);
        assert_eq!(pose_distance(&a, &a, false, dims(), dims()).unwrap(), 0.0);
    }

    #[test]
    fn distance_normalizes_per_frame_dims() {
        let a = frame_at(50.0, 25.0);
        let b = frame_at(100.0, 50.0);
        let d = pose_distance(&a, &b, true, FrameDims::new(100.0, 50.0), FrameDims::new(200.0, 100.0)).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn distance_rejects_missing_joint() {
        let a = frame_at(1.0, 1.0);
        let mut b = a;
        b.joints[9] = None;
        assert_eq!(
            pose_distance(&a, &b, false, dims(), dims()),
            Err(PoseError::MissingJoint { joint: 9 })
        );
    }

    #[test]
    fn knn_sorts_and_truncates() {
        // Distances from the query are 5, 2 and 9 (joint 0 offsets along x only, raw pixels).
        let query = frame_at(0.0, 0.0);
        let shifted = |dx: f64| {
            let mut f = query;
            f.joints[0] = Some(Joint::new(dx, 0.0, 1.0));
            f
        };
        let seq = PoseSequence::new("b", 100, 100, vec![shifted(5.0), shifted(2.0), shifted(9.0)]);
        let got = knn_query(&query, dims(), &seq, 2, false).unwrap();
        assert_eq!(
            got,
            vec![
                Neighbor {
                    index: 1,
                    distance: 2.0
                },
                Neighbor {
                    index: 0,
                    distance: 5.0
                }
            ]
        );
    }

    #[test]
    fn knn_self_match_and_ties() {
        let frames: Vec<_> = (0..6).map(|i| frame_at(f64::from(i % 3), 0.0)).collect();
        let seq = PoseSequence::new("b", 100, 100, frames.clone());
        let got = knn_query(&frames[3], dims(), &seq, 1, true).unwrap();
        // Frames 0 and 3 are identical; the smaller index wins.
        assert_eq!(
            got,
            vec![Neighbor {
                index: 0,
                distance: 0.0
            }]
        );
        let got = knn_query(&frames[3], dims(), &seq, 2, true).unwrap();
        assert_eq!(got.iter().map(|n| n.index).collect::<Vec<_>>(), vec![0, 3]);
    }

    #[test]
    fn knn_errors() {
        let empty = PoseSequence::new("b", 10, 10, vec![]);
        assert_eq!(
            knn_query(&frame_at(0.0, 0.0), dims(), &empty, 1, true),
            Err(PoseError::EmptyCandidates)
        );
        let one = PoseSequence::new("b", 10, 10, vec![frame_at(0.0, 0.0)]);
        assert_eq!(
            knn_query(&frame_at(0.0, 0.0), dims(), &one, 0, true),
            Err(PoseError::ZeroK)
        );
        assert_eq!(knn_query(&frame_at(0.0, 0.0), dims(), &one, 5, true).unwrap().len(), 1);
    }

    #[test]
    fn keypoint_index_round_trip() {
        for (i, kp) in Keypoint::ALL.iter().enumerate() {
            assert_eq!(kp.index(), i);
            assert_eq!(Keypoint::from_index(i), Some(*kp));
        }
        assert_eq!(Keypoint::from_index(18), None);
    }
}
