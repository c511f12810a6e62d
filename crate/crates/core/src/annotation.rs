//! The annotation document: per-frame COCO-18 keypoints and optional face geometry for one video.
//!
//! ```json
//! {
//!   "version": "posekit/1",
//!   "source_id": "session-a",
//!   "width": 640, "height": 480,
//!   "frames": [
//!     {"frame_index": 0, "keypoints": [[x, y, confidence], ... 18 triples],
//!      "face": {"bbox": {"left": 0, "top": 0, "right": 10, "bottom": 10},
//!               "contours": [{"name": "jaw", "points": [[x, y], ...]}]}}
//!   ]
//! }
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pose::{Joint, PoseFrame, PoseSequence, JOINT_COUNT};
use crate::raster::FaceAnnotation;

pub const SCHEMA_VERSION: &str = "posekit/1";

/// A schema violation, with a JSON path to the offending element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for SchemaError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub keypoints: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face: Option<FaceAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationDocument {
    pub version: String,
    pub source_id: String,
    pub width: u32,
    pub height: u32,
    pub frames: Vec<FrameRecord>,
}

impl AnnotationDocument {
    /// Parses and validates a document.
    pub fn from_json_str(s: &str) -> Result<Self, SchemaError> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let doc: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            SchemaError::new(path, e.into_inner().to_string())
        })?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn from_path(path: &Path) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path).map_err(|source| crate::Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_json_str(&text)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("annotation documents always serialize")
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.version != SCHEMA_VERSION {
            return Err(SchemaError::new(
                "version",
                format!("expected \"{SCHEMA_VERSION}\", found \"{}\"", self.version),
            ));
        }
        if self.width == 0 {
            return Err(SchemaError::new("width", "must be positive"));
        }
        if self.height == 0 {
            return Err(SchemaError::new("height", "must be positive"));
        }
        if self.frames.is_empty() {
            return Err(SchemaError::new("frames", "at least one frame is required"));
        }
        let mut prev_index = None;
        for (i, frame) in self.frames.iter().enumerate() {
            if prev_index.is_some_and(|p| frame.frame_index <= p) {
                return Err(SchemaError::new(
                    format!("frames[{i}].frame_index"),
                    format!(
                        "{} does not increase on {}",
                        frame.frame_index,
                        prev_index.unwrap_or_default()
                    ),
                ));
            }
            prev_index = Some(frame.frame_index);

            if frame.keypoints.len() != JOINT_COUNT {
                return Err(SchemaError::new(
                    format!("frames[{i}].keypoints"),
                    format!("expected {JOINT_COUNT} keypoints, found {}", frame.keypoints.len()),
                ));
            }
            for (j, [x, y, c]) in frame.keypoints.iter().enumerate() {
                if !(0.0..=1.0).contains(c) {
                    return Err(SchemaError::new(
                        format!("frames[{i}].keypoints[{j}]"),
                        format!("confidence {c} is outside [0, 1]"),
                    ));
                }
                if !x.is_finite() || !y.is_finite() {
                    return Err(SchemaError::new(
                        format!("frames[{i}].keypoints[{j}]"),
                        "non-finite coordinate",
                    ));
                }
            }
            if let Some(face) = &frame.face {
                let b = &face.bbox;
                if !(b.left < b.right && b.top < b.bottom) {
                    return Err(SchemaError::new(
                        format!("frames[{i}].face.bbox"),
                        "requires left < right and top < bottom",
                    ));
                }
            }
        }
        Ok(())
    }

    /// The document describing `seq`; absent joints become `[0, 0, 0]` and frame indices
    /// are sequence positions.
    pub fn from_sequence(seq: &PoseSequence, faces: &[Option<FaceAnnotation>]) -> Self {
        let frames = seq
            .frames
            .iter()
            .enumerate()
            .map(|(i, frame)| FrameRecord {
                frame_index: i as u64,
                keypoints: frame
                    .joints
                    .iter()
                    .map(|j| j.map_or([0.0; 3], |j| [j.x, j.y, j.confidence]))
                    .collect(),
                face: faces.get(i).cloned().flatten(),
            })
            .collect();
        Self {
            version: SCHEMA_VERSION.to_string(),
            source_id: seq.source_id.clone(),
            width: seq.width,
            height: seq.height,
            frames,
        }
    }
}

/// A pose sequence ingested from an annotation document.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSequence {
    pub sequence: PoseSequence,
    /// One entry per frame, `None` where no face was annotated.
    pub faces: Vec<Option<FaceAnnotation>>,
    pub frame_indices: Vec<u64>,
    /// Coordinates that had to be clamped into the frame.
    pub clamped: usize,
}

/// Converts a validated document into a [`PoseSequence`].
///
/// Keypoints with zero confidence or lying exactly at `(0, 0)` are detector misses and
/// become absent joints. Remaining coordinates, and face contour points, are clamped to
/// `[0, width] × [0, height]`.
pub fn load_pose_sequence(doc: &AnnotationDocument) -> Result<LoadedSequence, SchemaError> {
    doc.validate()?;
    let (w, h) = (f64::from(doc.width), f64::from(doc.height));
    let mut clamped = 0;
    let mut clamp = |x: f64, y: f64| {
        let (cx, cy) = (x.clamp(0.0, w), y.clamp(0.0, h));
        if (cx, cy) != (x, y) {
            clamped += 1;
        }
        (cx, cy)
    };

    let mut frames = Vec::with_capacity(doc.frames.len());
    let mut faces = Vec::with_capacity(doc.frames.len());
    for record in &doc.frames {
        let mut pose = PoseFrame::empty();
        for (slot, &[x, y, c]) in pose.joints.iter_mut().zip(&record.keypoints) {
            if c == 0.0 || (x == 0.0 && y == 0.0) {
                continue;
            }
            let (x, y) = clamp(x, y);
            *slot = Some(Joint::new(x, y, c));
        }
        frames.push(pose);

        faces.push(record.face.as_ref().map(|face| {
            let mut face = face.clone();
            for p in face.contours.iter_mut().flat_map(|c| c.points.iter_mut()) {
                let (x, y) = clamp(p[0], p[1]);
                *p = [x, y];
            }
            face
        }));
    }

    Ok(LoadedSequence {
        sequence: PoseSequence::new(doc.source_id.clone(), doc.width, doc.height, frames),
        faces,
        frame_indices: doc.frames.iter().map(|f| f.frame_index).collect(),
        clamped,
    })
}
