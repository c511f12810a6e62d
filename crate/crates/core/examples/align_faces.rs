//! Stabilizes a drifting subject by translating every frame onto the first frame's face center.

use posekit::raster::write_frames;
use posekit::{align_sequence, face_center, FaceAnnotation, RasterImage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let drift = [(0, 0), (3, -2), (-4, 1), (6, 5), (1, -3)];
    let (frames, faces): (Vec<_>, Vec<_>) = drift
        .iter()
        .map(|&(dx, dy)| {
            let (x0, y0) = (40 + dx, 30 + dy);
            let img = RasterImage::from_fn(96, 72, |x, y| {
                let inside = (x0..x0 + 12).contains(&(x as i32)) && (y0..y0 + 12).contains(&(y as i32));
                if inside {
                    [230, 200, 180]
                } else {
                    [20, 20 + (y as u8), 60]
                }
            });
            let face = FaceAnnotation::from_bbox(f64::from(x0), f64::from(y0), f64::from(x0 + 12), f64::from(y0 + 12));
            (img, face)
        })
        .unzip();

    let aligned = align_sequence(&frames, &faces)?;
    let anchor = face_center(&faces[0]);
    for (t, face) in faces.iter().enumerate() {
        let (cx, cy) = face_center(face);
        println!(
            "frame {t}: face at ({cx}, {cy}) -> shifted by ({}, {})",
            anchor.0 - cx,
            anchor.1 - cy
        );
    }

    let dir = std::env::temp_dir().join("posekit_aligned");
    std::fs::create_dir_all(&dir)?;
    write_frames(&dir, &aligned)?;
    println!("aligned frames in {}", dir.display());
    Ok(())
}
