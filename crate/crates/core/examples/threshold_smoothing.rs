//! How the switching threshold trades pose accuracy for temporal stability.

use posekit::{match_sequence, CandidatePolicy, Joint, MatchParams, PoseFrame, PoseSequence};

// Noisy copies of a slow nod: the raw nearest neighbor jitters between similar frames.
fn nod(t: usize, jitter: f64) -> PoseFrame {
    let tilt = (t as f64 * 0.2).sin() * 20.0;
    let mut joints = [None; 18];
    for (j, slot) in joints.iter_mut().enumerate() {
        let wobble = jitter * ((j * 7 + t * 13) % 11) as f64 / 11.0;
        *slot = Some(Joint::new(100.0 + 10.0 * j as f64 + wobble, 200.0 + tilt + wobble, 1.0));
    }
    PoseFrame::new(joints)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = PoseSequence::new("a", 400, 400, (0..60).map(|t| nod(t, 0.0)).collect());
    let b = PoseSequence::new("b", 400, 400, (0..90).map(|t| nod(t * 2 / 3, 6.0)).collect());

    println!(
        "{:>8} {:>10} {:>10} {:>12}",
        "lambda", "policy", "switches", "mean dist"
    );
    for lambda in [0.0, 0.005, 0.01, 0.02, 0.05, f64::INFINITY] {
        for policy in [CandidatePolicy::MinDistance, CandidatePolicy::NearestPrevIndex] {
            let params = MatchParams {
                k: 4,
                lambda,
                normalize: true,
                candidate_policy: policy,
            };
            let mapping = match_sequence(&a, &b, &params)?;
            let mean = mapping.entries.iter().map(|e| e.distance).sum::<f64>() / mapping.len() as f64;
            let name = match policy {
                CandidatePolicy::MinDistance => "min",
                CandidatePolicy::NearestPrevIndex => "near-prev",
            };
            println!("{lambda:>8} {name:>10} {:>10} {mean:>12.5}", mapping.switch_count());
        }
    }
    Ok(())
}
