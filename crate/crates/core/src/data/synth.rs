use serde::{Deserialize, Serialize};

use crate::data::SequenceRecord;
use crate::error::{Error, Result};
use crate::model::SkeletonSpec;
use crate::numerics::{Rng, Tensor};

/// Style parameters of the synthetic 2-body generator. Fixed in a shipped
/// config so generated datasets are stable across machines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthStyle {
    pub fps: f64,
    pub components_min: usize,
    pub components_max: usize,
    pub freq_min_hz: f64,
    pub freq_max_hz: f64,
    pub amp_min_mm: f64,
    pub amp_max_mm: f64,
    pub lag_min_frames: usize,
    pub lag_max_frames: usize,
    pub mirror_offset_mm: [f64; 3],
    pub joint_spacing_mm: f64,
}

impl Default for SynthStyle {
    fn default() -> Self {
        SynthStyle {
            fps: 25.0,
            components_min: 2,
            components_max: 4,
            freq_min_hz: 0.25,
            // kept well under the 2 Hz band edge: finite-window sidelobes of
            // a component near the edge would spill past the energy cutoff
            freq_max_hz: 0.8,
            amp_min_mm: 50.0,
            amp_max_mm: 300.0,
            lag_min_frames: 2,
            lag_max_frames: 10,
            mirror_offset_mm: [0.0, 800.0, 0.0],
            joint_spacing_mm: 150.0,
        }
    }
}

struct Sinusoid {
    amp: f64,
    freq_hz: f64,
    phase: f64,
}

/// Deterministic coupled 2-body motion: body 1 joints follow seeded sums of
/// sinusoids around a chain rest pose; body 2 mirrors body 1 (x negated)
/// with a seeded phase lag and a constant offset, so cross-body correlation
/// is present by construction.
pub fn synth_generate(
    rng: &mut Rng,
    n_sequences: usize,
    frames: usize,
    joints: usize,
    bodies: usize,
    style: &SynthStyle,
) -> Result<Vec<SequenceRecord>> {
    if frames < 2 {
        return Err(Error::Argument {
            op: "synth_generate",
            message: format!("need at least 2 frames, got {frames}"),
        });
    }
    if joints == 0 || !(bodies == 1 || bodies == 2) {
        return Err(Error::Argument {
            op: "synth_generate",
            message: format!("invalid joints {joints} / bodies {bodies}"),
        });
    }
    let skeleton = SkeletonSpec::chain(joints, bodies);
    let mut out = Vec::with_capacity(n_sequences);
    for s in 0..n_sequences {
        out.push(generate_one(rng, s, frames, &skeleton, style)?);
    }
    Ok(out)
}

fn generate_one(
    rng: &mut Rng,
    index: usize,
    frames: usize,
    skeleton: &SkeletonSpec,
    style: &SynthStyle,
) -> Result<SequenceRecord> {
    let j = skeleton.joints_per_body();
    let nodes = skeleton.node_count();
    let span = style.components_max - style.components_min;
    // per joint, per axis: a sum of sinusoids
    let mut motion: Vec<Vec<Sinusoid>> = Vec::with_capacity(j * 3);
    for _ in 0..j * 3 {
        let n = style.components_min
            + if span > 0 {
                rng.next_below(span as u64 + 1) as usize
            } else {
                0
            };
        let comps = (0..n)
            .map(|_| Sinusoid {
                amp: rng.uniform_scalar(style.amp_min_mm, style.amp_max_mm),
                freq_hz: rng.uniform_scalar(style.freq_min_hz, style.freq_max_hz),
                phase: rng.uniform_scalar(0.0, 2.0 * std::f64::consts::PI),
            })
            .collect();
        motion.push(comps);
    }
    let lag = style.lag_min_frames
        + rng.next_below((style.lag_max_frames - style.lag_min_frames) as u64 + 1) as usize;

    let body1 = |frame: f64, joint: usize, axis: usize| -> f64 {
        let rest = if axis == 2 {
            joint as f64 * style.joint_spacing_mm
        } else {
            0.0
        };
        let t = frame / style.fps;
        rest + motion[joint * 3 + axis]
            .iter()
            .map(|c| c.amp * (2.0 * std::f64::consts::PI * c.freq_hz * t + c.phase).sin())
            .sum::<f64>()
    };

    let values = Tensor::from_fn(&[frames, nodes, 3], |idx| {
        let (frame, node, axis) = (idx[0], idx[1], idx[2]);
        if node < j {
            body1(frame as f64, node, axis)
        } else {
            let joint = node - j;
            let base = body1(frame as f64 - lag as f64, joint, axis);
            let mirrored = if axis == 0 { -base } else { base };
            mirrored + style.mirror_offset_mm[axis]
        }
    });

    Ok(SequenceRecord {
        id: format!("synth{index:03}"),
        action: "sway".into(),
        couple: (index % 2) as u32,
        fps: style.fps,
        frames: values,
    })
}
