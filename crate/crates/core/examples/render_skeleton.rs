//! Renders a pose and a face outline into the red and green channels of a PNG.
//!
//! `cargo run --example render_skeleton -- out.png`

use std::path::PathBuf;

use posekit::raster::Contour;
use posekit::{render_skeleton, Channel, FaceAnnotation, Joint, Keypoint, PoseFrame, SkeletonStyle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("posekit_skeleton.png"));

    let spots = [
        (128, 40),
        (128, 70),
        (100, 72),
        (90, 110),
        (84, 150),
        (156, 72),
        (166, 110),
        (172, 150),
        (112, 150),
        (110, 200),
        (108, 245),
        (144, 150),
        (146, 200),
        (148, 245),
        (122, 36),
        (134, 36),
        (116, 40),
        (140, 40),
    ];
    let mut pose = PoseFrame::new(spots.map(|(x, y)| Some(Joint::new(f64::from(x), f64::from(y), 1.0))));
    // A missing joint drops every limb that touches it.
    pose.joints[Keypoint::LeftWrist.index()] = None;

    let outline = (0..=16)
        .map(|i| {
            let a = std::f64::consts::TAU * f64::from(i) / 16.0;
            [128.0 + 14.0 * a.cos(), 38.0 + 18.0 * a.sin()]
        })
        .collect();
    let face = FaceAnnotation {
        contours: vec![Contour {
            name: "outline".into(),
            points: outline,
        }],
        ..FaceAnnotation::from_bbox(114.0, 20.0, 142.0, 56.0)
    };

    let style = SkeletonStyle::for_height(256);
    let img = render_skeleton(&pose, Some(&face), 256, 256, &style)?;
    img.write_png(&path)?;

    let lit = |c: Channel| img.plane(c).iter().filter(|&&v| v > 0).count();
    println!(
        "wrote {}: skeleton {} px, face {} px, reserved {} px",
        path.display(),
        lit(Channel::Red),
        lit(Channel::Green),
        lit(Channel::Blue)
    );
    Ok(())
}
