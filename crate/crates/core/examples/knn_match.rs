//! Nearest-neighbor matching of a driving sequence onto a target sequence.
//!
//! Run with `cargo run --example knn_match`.

use posekit::manifest::write_frame_mapping;
use posekit::{knn_query, match_sequence, Joint, MatchParams, PoseFrame, PoseSequence};

/// A stick figure whose arms swing with `phase`, scaled into a `w` x `h` frame.
fn figure(phase: f64, w: f64, h: f64) -> PoseFrame {
    let swing = phase.sin() * 0.15;
    let spots = [
        (0.50, 0.15),
        (0.50, 0.25),
        (0.40, 0.25),
        (0.35 - swing, 0.40),
        (0.30 - swing, 0.55),
        (0.60, 0.25),
        (0.65 + swing, 0.40),
        (0.70 + swing, 0.55),
        (0.45, 0.55),
        (0.44, 0.72),
        (0.43, 0.90),
        (0.55, 0.55),
        (0.56, 0.72),
        (0.57, 0.90),
        (0.48, 0.13),
        (0.52, 0.13),
        (0.46, 0.14),
        (0.54, 0.14),
    ];
    PoseFrame::new(spots.map(|(x, y)| Some(Joint::new(x * w, y * h, 1.0))))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = PoseSequence::new(
        "driver",
        640,
        480,
        (0..12).map(|t| figure(0.5 * f64::from(t), 640.0, 480.0)).collect(),
    );
    let b = PoseSequence::new(
        "target",
        1280,
        720,
        (0..40).map(|t| figure(0.16 * f64::from(t), 1280.0, 720.0)).collect(),
    );

    let neighbors = knn_query(&a.frames[3], a.dims(), &b, 3, true)?;
    println!("three nearest target frames for driver frame 3:");
    for n in &neighbors {
        println!("  b[{}] at {:.4}", n.index, n.distance);
    }

    let mapping = match_sequence(&a, &b, &MatchParams::default())?;
    println!("mapping ({} switches):", mapping.switch_count());
    write_frame_mapping(&mapping, std::io::stdout().lock())?;
    Ok(())
}
