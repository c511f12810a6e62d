//! Expands a frame mapping into an interpolation plan and renders the crossfades.

use posekit::transfer::MappingEntry;
use posekit::{blend_frames, interpolate_plan, FrameMapping, RasterImage, RenderInstruction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b_frames: Vec<RasterImage> = [[0, 0, 0], [200, 0, 0], [0, 0, 200]]
        .into_iter()
        .map(|px| RasterImage::from_fn(4, 4, |_, _| px))
        .collect();

    let picks = [0, 0, 1, 1, 1, 2];
    let mapping = FrameMapping {
        entries: picks
            .iter()
            .enumerate()
            .map(|(a_index, &b_index)| MappingEntry {
                a_index,
                b_index,
                distance: 0.0,
                switched: a_index > 0 && picks[a_index - 1] != b_index,
            })
            .collect(),
    };

    let plan = interpolate_plan(&mapping, 4)?;
    println!(
        "{} mapped frames, {} switches -> {} output frames",
        mapping.len(),
        mapping.switch_count(),
        plan.len()
    );
    for step in &plan {
        let img = match *step {
            RenderInstruction::Real { b_index } => b_frames[b_index].clone(),
            RenderInstruction::Blend { b_left, b_right, alpha } => {
                blend_frames(&b_frames[b_left], &b_frames[b_right], alpha)?
            }
        };
        println!("{step:?} -> {:?}", img.get(0, 0));
    }
    Ok(())
}
