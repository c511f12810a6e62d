//! Builds an (A, B) training-pair manifest with a distance cutoff and prints it as JSON Lines.

use posekit::manifest::{read_pair_manifest, write_pair_manifest};
use posekit::{build_pairs_manifest, Joint, MatchParams, PoseFrame, PoseSequence};

fn pose(shift: f64) -> PoseFrame {
    let mut joints = [None; 18];
    for (j, slot) in joints.iter_mut().enumerate() {
        *slot = Some(Joint::new(50.0 + 5.0 * j as f64 + shift, 80.0 + 3.0 * j as f64, 0.9));
    }
    PoseFrame::new(joints)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two driver frames have no close counterpart and are dropped by the cutoff.
    let a = PoseSequence::new("a", 256, 256, [0.0, 4.0, 90.0, 8.0, -70.0].map(pose).to_vec());
    let b = PoseSequence::new("b", 256, 256, (0..10).map(|i| pose(f64::from(i) * 2.0)).collect());

    let manifest = build_pairs_manifest(&a, &b, &MatchParams::default(), Some(0.2))?;
    let mut out = Vec::new();
    write_pair_manifest(&manifest, &mut out)?;
    print!("{}", String::from_utf8(out.clone())?);

    assert_eq!(read_pair_manifest(out.as_slice())?, manifest);
    eprintln!("{} of {} driver frames kept", manifest.pairs.len(), a.len());
    Ok(())
}
