//! Parsing, validating and loading keypoint annotation documents.

use posekit::{impute_missing_joints, load_pose_sequence, AnnotationDocument};

const DOC: &str = r#"{
  "version": "posekit/1",
  "source_id": "demo",
  "width": 320,
  "height": 240,
  "frames": [
    {"frame_index": 0, "keypoints": [[160,40,0.9],[160,60,0.9],[140,60,0.8],[130,90,0.7],[125,120,0.6],
      [180,60,0.8],[190,90,0.7],[195,120,0.6],[150,130,0.9],[148,170,0.9],[146,210,0.9],[170,130,0.9],
      [172,170,0.9],[174,210,0.9],[155,36,0.5],[165,36,0.5],[150,38,0.4],[170,38,0.4]]},
    {"frame_index": 2, "keypoints": [[162,40,0.9],[162,60,0.9],[142,60,0.8],[132,90,0.7],[0,0,0],
      [182,60,0.8],[192,90,0.7],[197,120,0.6],[152,130,0.9],[150,170,0.9],[148,210,0.9],[172,130,0.9],
      [174,170,0.9],[176,210,0.9],[157,36,0.5],[167,36,0.5],[152,38,0.4],[330,38,0.4]],
     "face": {"bbox": {"left": 150, "top": 25, "right": 174, "bottom": 52}, "contours": []}}
  ]
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = AnnotationDocument::from_json_str(DOC)?;
    let loaded = load_pose_sequence(&doc)?;
    println!(
        "{} frames (indices {:?}), {} coordinates clamped into the frame",
        loaded.sequence.len(),
        loaded.frame_indices,
        loaded.clamped
    );
    println!(
        "frame 1 right wrist before imputation: {:?}",
        loaded.sequence.frames[1].joints[4]
    );

    let imputed = impute_missing_joints(&loaded.sequence)?;
    println!("after imputation: {:?}", imputed.frames[1].joints[4]);

    let broken = DOC.replace("\"frame_index\": 2", "\"frame_index\": 0");
    match AnnotationDocument::from_json_str(&broken) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }

    println!("{}", &doc.to_json_string()[..120]);
    Ok(())
}
