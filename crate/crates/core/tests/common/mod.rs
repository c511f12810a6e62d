//! Synthetic fixtures and brute-force oracles shared by the integration tests.
//!
//! The oracles here recompute everything from flat coordinate arrays and never call the
//! library's distance or search code.

#![allow(dead_code)]

use posekit::{Joint, PoseFrame, PoseSequence};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const JOINTS: usize = 18;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_frame(rng: &mut impl Rng, width: u32, height: u32, missing: f64) -> PoseFrame {
    let mut f = PoseFrame::empty();
    for slot in f.joints.iter_mut() {
        if !rng.gen_bool(missing) {
            *slot = Some(Joint::new(
                rng.gen_range(1.0..f64::from(width)),
                rng.gen_range(1.0..f64::from(height)),
                rng.gen_range(0.05..=1.0),
            ));
        }
    }
    f
}

/// Frames on a coarse integer grid, so exact distance ties are common.
pub fn grid_frame(rng: &mut impl Rng, levels: u32) -> PoseFrame {
    let mut f = PoseFrame::empty();
    for slot in f.joints.iter_mut() {
        *slot = Some(Joint::new(
            f64::from(rng.gen_range(0..levels)),
            f64::from(rng.gen_range(0..levels)),
            1.0,
        ));
    }
    f
}

pub fn random_sequence(rng: &mut impl Rng, frames: usize, missing: f64) -> PoseSequence {
    let width = rng.gen_range(64..=1920);
    let height = rng.gen_range(64..=1080);
    let frames = (0..frames).map(|_| random_frame(rng, width, height, missing)).collect();
    PoseSequence::new("synthetic", width, height, frames)
}

/// Random sequence in which every joint is observed in at least one frame.
pub fn imputable_sequence(rng: &mut impl Rng, frames: usize, missing: f64) -> PoseSequence {
    loop {
        let seq = random_sequence(rng, frames, missing);
        let every_joint_seen = (0..JOINTS).all(|j| {
            seq.frames
                .iter()
                .any(|f| f.joints[j].is_some_and(|p| p.confidence > 0.0))
        });
        if every_joint_seen {
            return seq;
        }
    }
}

pub fn complete_sequence(rng: &mut impl Rng, frames: usize, width: u32, height: u32) -> PoseSequence {
    let frames = (0..frames).map(|_| random_frame(rng, width, height, 0.0)).collect();
    PoseSequence::new("synthetic", width, height, frames)
}

/// Sort-based median; even counts average the two middle values.
pub fn oracle_median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// The 36 coordinates of a complete frame, optionally divided by the frame size.
pub fn flatten(frame: &PoseFrame, width: f64, height: f64, normalize: bool) -> [f64; 2 * JOINTS] {
    let mut out = [0.0; 2 * JOINTS];
    for (j, joint) in frame.joints.iter().enumerate() {
        let joint = joint.expect("oracle needs complete frames");
        let (sx, sy) = if normalize { (width, height) } else { (1.0, 1.0) };
        out[2 * j] = joint.x / sx;
        out[2 * j + 1] = joint.y / sy;
    }
    out
}

pub fn oracle_distance(a: &[f64; 2 * JOINTS], b: &[f64; 2 * JOINTS]) -> f64 {
    let mut sum = 0.0;
    for j in 0..JOINTS {
        let dx = a[2 * j] - b[2 * j];
        let dy = a[2 * j + 1] - b[2 * j + 1];
        sum += dx * dx + dy * dy;
    }
    sum.sqrt()
}

/// Distances from `query` to every frame of `seq`, in frame order.
pub fn oracle_distances(query: &PoseFrame, query_seq: &PoseSequence, seq: &PoseSequence, normalize: bool) -> Vec<f64> {
    let q = flatten(
        query,
        f64::from(query_seq.width),
        f64::from(query_seq.height),
        normalize,
    );
    seq.frames
        .iter()
        .map(|f| oracle_distance(&q, &flatten(f, f64::from(seq.width), f64::from(seq.height), normalize)))
        .collect()
}

/// Every (index, distance) sorted by distance then index, truncated to k.
pub fn oracle_knn(distances: &[f64], k: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = distances.iter().copied().enumerate().collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Lowest-distance index, the first one on ties.
pub fn oracle_argmin(distances: &[f64]) -> usize {
    let mut best = 0;
    for (i, &d) in distances.iter().enumerate() {
        if d < distances[best] {
            best = i;
        }
    }
    best
}

/// The lambda = 0, k = 1 transfer recurrence, evaluated from the distance matrix.
pub fn oracle_greedy_mapping(matrix: &[Vec<f64>]) -> Vec<usize> {
    let mut out = Vec::with_capacity(matrix.len());
    let mut prev = oracle_argmin(&matrix[0]);
    out.push(prev);
    for row in &matrix[1..] {
        let best = oracle_argmin(row);
        if row[best] < row[prev] {
            prev = best;
        }
        out.push(prev);
    }
    out
}

pub fn distance_matrix(a: &PoseSequence, b: &PoseSequence, normalize: bool) -> Vec<Vec<f64>> {
    a.frames.iter().map(|f| oracle_distances(f, a, b, normalize)).collect()
}
