use serde::{Deserialize, Serialize};

use crate::data::SequenceRecord;
use crate::error::{Error, Result};
use crate::model::SkeletonSpec;
use crate::numerics::Tensor;

/// Reference-frame normalization applied per window. Both bodies receive the
/// same translation, so inter-body geometry is preserved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeMode {
    None,
    /// Subtract the midpoint of the bodies' root joints at the last observed
    /// frame.
    CenterLast,
    /// Subtract the midpoint averaged over the observation window.
    CenterMean,
}

/// One training/evaluation window, a contiguous slice of a single sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    /// `[T_obs, V, 3]`.
    pub input: Tensor,
    /// `[N, V, 3]`.
    pub target: Tensor,
    pub action: String,
    pub seq_id: String,
    pub start: usize,
}

/// Midpoint of the bodies' root joints at one frame.
fn root_midpoint(frames: &Tensor, skeleton: &SkeletonSpec, frame: usize) -> [f64; 3] {
    let j = skeleton.joints_per_body();
    let mut mid = [0.0; 3];
    for body in 0..skeleton.bodies {
        let node = body * j + skeleton.root;
        for (axis, item) in mid.iter_mut().enumerate() {
            *item += frames.at(&[frame, node, axis]);
        }
    }
    for item in mid.iter_mut() {
        *item /= skeleton.bodies as f64;
    }
    mid
}

fn anchor(frames: &Tensor, skeleton: &SkeletonSpec, mode: NormalizeMode, t_obs: usize) -> [f64; 3] {
    match mode {
        NormalizeMode::None => [0.0; 3],
        NormalizeMode::CenterLast => root_midpoint(frames, skeleton, t_obs - 1),
        NormalizeMode::CenterMean => {
            let mut mid = [0.0; 3];
            for frame in 0..t_obs {
                let m = root_midpoint(frames, skeleton, frame);
                for axis in 0..3 {
                    mid[axis] += m[axis];
                }
            }
            for item in mid.iter_mut() {
                *item /= t_obs as f64;
            }
            mid
        }
    }
}

fn translate(frames: &Tensor, shift: [f64; 3]) -> Tensor {
    let mut out = frames.clone();
    let data = out.data_mut();
    for i in 0..data.len() {
        data[i] -= shift[i % 3];
    }
    out
}

/// Normalize a whole record, treating its first `t_obs` frames as the
/// observation that defines the anchor.
pub fn normalize_pair(
    rec: &SequenceRecord,
    skeleton: &SkeletonSpec,
    mode: NormalizeMode,
    t_obs: usize,
) -> Result<SequenceRecord> {
    if t_obs == 0 || t_obs > rec.frame_count() {
        return Err(Error::Argument {
            op: "normalize_pair",
            message: format!(
                "t_obs {t_obs} out of range for {} frames",
                rec.frame_count()
            ),
        });
    }
    let shift = anchor(&rec.frames, skeleton, mode, t_obs);
    Ok(SequenceRecord {
        frames: translate(&rec.frames, shift),
        ..rec.clone()
    })
}

/// All contiguous `(T_obs, N)` windows at the given stride, normalized per
/// window. A sequence shorter than `T_obs + N` contributes none.
pub fn window(
    seqs: &[SequenceRecord],
    skeleton: &SkeletonSpec,
    t_obs: usize,
    n_fut: usize,
    stride: usize,
    mode: NormalizeMode,
) -> Result<Vec<Window>> {
    if stride == 0 {
        return Err(Error::Argument {
            op: "window",
            message: "stride must be >= 1".into(),
        });
    }
    if t_obs == 0 || n_fut == 0 {
        return Err(Error::Argument {
            op: "window",
            message: "window lengths must be positive".into(),
        });
    }
    let mut out = Vec::new();
    for seq in seqs {
        let span = t_obs + n_fut;
        let f = seq.frame_count();
        if f < span {
            continue;
        }
        let count = (f - span) / stride + 1;
        for i in 0..count {
            let start = i * stride;
            let slab = seq.frames.slice_axis0(start, span)?;
            let shift = anchor(&slab, skeleton, mode, t_obs);
            let normalized = translate(&slab, shift);
            out.push(Window {
                input: normalized.slice_axis0(0, t_obs)?,
                target: normalized.slice_axis0(t_obs, n_fut)?,
                action: seq.action.clone(),
                seq_id: seq.id.clone(),
                start,
            });
        }
    }
    Ok(out)
}
