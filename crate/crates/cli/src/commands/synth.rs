use std::path::Path;

use duet_core::data::{synth_generate, write_sequences, SynthStyle};
use duet_core::model::SkeletonSpec;
use duet_core::numerics::rng::streams;
use duet_core::numerics::Rng;
use duet_core::{Error, Result};

/// Generate a deterministic synthetic dataset and write `synthetic.csv`
/// (plus the matching chain skeleton) into the output directory.
pub fn run(
    sequences: usize,
    frames: usize,
    joints: usize,
    seed: u64,
    style: &SynthStyle,
    out_dir: &Path,
) -> Result<()> {
    let mut rng = Rng::with_stream(seed, streams::SYNTH);
    let records = synth_generate(&mut rng, sequences, frames, joints, 2, style)?;
    let skeleton = SkeletonSpec::chain(joints, 2);
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let csv_path = out_dir.join("synthetic.csv");
    write_sequences(&csv_path, &records, &skeleton)?;
    let skel_path = out_dir.join("skeleton.json");
    let skel_json = serde_json::to_string_pretty(&skeleton).map_err(|e| Error::Config {
        message: format!("skeleton serialization: {e}"),
    })?;
    std::fs::write(&skel_path, skel_json)
        .map_err(|e| Error::io(skel_path.display().to_string(), e))?;
    println!(
        "wrote {} sequences x {frames} frames ({joints} joints, 2 bodies) to {}",
        records.len(),
        csv_path.display()
    );
    Ok(())
}
