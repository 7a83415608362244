use std::collections::BTreeMap;

use crate::data::Window;
use crate::error::{Error, Result};
use crate::model::{model_output, ModelConfig, ModelParams};
use crate::numerics::Tensor;
use crate::training::loss::mpjpe;

/// Milliseconds per frame at the 25 fps evaluation protocol.
pub const FRAME_MS: usize = 40;

/// Horizon-wise MPJPE, overall and per action label.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub horizons_ms: Vec<usize>,
    /// Overall MPJPE per horizon, window-averaged, in millimeters.
    pub overall: Vec<f64>,
    /// Per-action rows in label order.
    pub per_action: Vec<(String, Vec<f64>)>,
    pub windows: usize,
}

/// Map a millisecond horizon to the 0-based prediction frame index.
pub fn horizon_frame(horizon_ms: usize, n_fut: usize) -> Result<usize> {
    if horizon_ms == 0 || horizon_ms % FRAME_MS != 0 {
        return Err(Error::Argument {
            op: "evaluate",
            message: format!("horizon {horizon_ms} ms is not a multiple of {FRAME_MS} ms"),
        });
    }
    let frame = horizon_ms / FRAME_MS; // 1-based
    if frame > n_fut {
        return Err(Error::Argument {
            op: "evaluate",
            message: format!(
                "horizon {horizon_ms} ms needs frame {frame} but the model predicts {n_fut}"
            ),
        });
    }
    Ok(frame - 1)
}

/// Evaluate an arbitrary predictor over windows at the given horizons.
/// Window order fixes the reduction order, keeping reports bit-stable.
pub fn evaluate_with<F>(
    predict: F,
    windows: &[Window],
    horizons_ms: &[usize],
) -> Result<EvalReport>
where
    F: Fn(&Window) -> Result<Tensor>,
{
    if windows.is_empty() {
        return Err(Error::Argument {
            op: "evaluate",
            message: "window set is empty".into(),
        });
    }
    let n_fut = windows[0].target.shape()[0];
    let frames: Vec<usize> = horizons_ms
        .iter()
        .map(|&h| horizon_frame(h, n_fut))
        .collect::<Result<_>>()?;

    let mut overall = vec![0.0; horizons_ms.len()];
    let mut per_action: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
    for window in windows {
        let pred = predict(window)?;
        let nodes = window.target.shape()[1];
        let entry = per_action
            .entry(window.action.clone())
            .or_insert_with(|| (vec![0.0; horizons_ms.len()], 0));
        entry.1 += 1;
        for (hi, &frame) in frames.iter().enumerate() {
            let p = pred.slice_axis0(frame, 1)?.reshape(&[nodes, 3])?;
            let g = window.target.slice_axis0(frame, 1)?.reshape(&[nodes, 3])?;
            let err = mpjpe(&p, &g)?;
            overall[hi] += err;
            entry.0[hi] += err;
        }
    }
    let count = windows.len() as f64;
    for v in overall.iter_mut() {
        *v /= count;
    }
    let per_action = per_action
        .into_iter()
        .map(|(action, (sums, n))| {
            (
                action,
                sums.into_iter().map(|s| s / n as f64).collect::<Vec<f64>>(),
            )
        })
        .collect();
    Ok(EvalReport {
        horizons_ms: horizons_ms.to_vec(),
        overall,
        per_action,
        windows: windows.len(),
    })
}

/// Evaluate a trained model.
pub fn evaluate(
    cfg: &ModelConfig,
    params: &ModelParams,
    windows: &[Window],
    horizons_ms: &[usize],
) -> Result<EvalReport> {
    evaluate_with(
        |w| model_output(cfg, params, &w.input),
        windows,
        horizons_ms,
    )
}

/// Repeat the last observed pose for all future frames.
pub fn zero_velocity_prediction(x_in: &Tensor, n_fut: usize) -> Result<Tensor> {
    let t = x_in.shape()[0];
    let last = x_in.slice_axis0(t - 1, 1)?;
    let mut data = Vec::with_capacity(last.numel() * n_fut);
    for _ in 0..n_fut {
        data.extend_from_slice(last.data());
    }
    let mut shape = x_in.shape().to_vec();
    shape[0] = n_fut;
    Tensor::new(shape, data)
}

/// MPJPE of the zero-velocity baseline over the same windows.
pub fn evaluate_zero_velocity(windows: &[Window], horizons_ms: &[usize]) -> Result<EvalReport> {
    evaluate_with(
        |w| zero_velocity_prediction(&w.input, w.target.shape()[0]),
        windows,
        horizons_ms,
    )
}
