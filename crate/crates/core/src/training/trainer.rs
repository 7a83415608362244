use serde::{Deserialize, Serialize};

use crate::data::Window;
use crate::error::{Error, Result};
use crate::model::{build_forward, ModelConfig, ModelParams, ParamIds, SkeletonSpec};
use crate::numerics::rng::streams;
use crate::numerics::{Rng, Tape, Tensor};
use crate::training::loss::sequence_loss_node;
use crate::training::optimizer::{OptimizerKind, OptimizerState};

/// Multiply the learning rate by `factor` every `period` steps (`None`
/// defaults to a quarter of the step budget).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LrDecay {
    pub factor: f64,
    #[serde(default)]
    pub period: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub batch_size: usize,
    pub steps: usize,
    pub lr_decay: Option<LrDecay>,
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            optimizer: OptimizerKind::default(),
            batch_size: 32,
            steps: 2000,
            lr_decay: Some(LrDecay {
                factor: 0.5,
                period: None,
            }),
            clip_norm: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Argument {
                op: "train",
                message: "batch_size must be >= 1".into(),
            });
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Argument {
                op: "train",
                message: format!("invalid learning rate {}", self.learning_rate),
            });
        }
        Ok(())
    }

    fn lr_at(&self, step: usize) -> f64 {
        match self.lr_decay {
            None => self.learning_rate,
            Some(LrDecay { factor, period }) => {
                let period = period.unwrap_or_else(|| (self.steps / 4).max(1)).max(1);
                self.learning_rate * factor.powi((step / period) as i32)
            }
        }
    }
}

/// Result of a training run. `diverged` carries the step at which a
/// non-finite loss or gradient aborted the loop; the curve stays partial.
#[derive(Clone, Debug)]
pub struct TrainRun {
    pub params: ModelParams,
    pub curve: Vec<f64>,
    pub diverged: Option<usize>,
}

/// Seeded-shuffle minibatch loop minimizing the frame-averaged MPJPE.
///
/// Kinematic-tree configurations are re-masked after every optimizer step so
/// masked adjacency entries stay exactly zero.
pub fn train(
    cfg: &ModelConfig,
    skeleton: &SkeletonSpec,
    params: ModelParams,
    windows: &[Window],
    tcfg: &TrainConfig,
) -> Result<TrainRun> {
    cfg.validate()?;
    tcfg.validate()?;
    params.matches(cfg)?;
    if windows.is_empty() {
        return Err(Error::Argument {
            op: "train",
            message: "window set is empty".into(),
        });
    }
    let mut params = params;
    let shapes: Vec<Vec<usize>> = params
        .named()
        .iter()
        .map(|(_, t)| t.shape().to_vec())
        .collect();
    let mut opt = OptimizerState::new(tcfg.optimizer, &shapes);
    let mut shuffle_rng = Rng::with_stream(tcfg.seed, streams::SHUFFLE);
    let mut order: Vec<usize> = Vec::new();
    let mut cursor = 0usize;
    let mut curve = Vec::with_capacity(tcfg.steps);
    let mut diverged = None;

    for step in 0..tcfg.steps {
        // assemble the minibatch, reshuffling at epoch boundaries
        let mut batch = Vec::with_capacity(tcfg.batch_size);
        for _ in 0..tcfg.batch_size {
            if cursor >= order.len() {
                order = shuffle_rng.shuffled_indices(windows.len());
                cursor = 0;
            }
            batch.push(order[cursor]);
            cursor += 1;
        }

        let mut grads: Vec<Tensor> = shapes.iter().map(|s| Tensor::zeros(s)).collect();
        let mut loss_sum = 0.0;
        for &wi in &batch {
            let window = &windows[wi];
            let mut tape = Tape::new();
            let ids = ParamIds::register(&mut tape, &params);
            let out = build_forward(&mut tape, cfg, &ids, &window.input)?;
            let loss = sequence_loss_node(&mut tape, out, &window.target)?;
            loss_sum += tape.value(loss).item();
            let g = tape.backward(loss)?;
            for (acc, id) in grads.iter_mut().zip(ids.flat()) {
                *acc = acc.add(g.of(id))?;
            }
        }
        let scale = 1.0 / batch.len() as f64;
        for g in grads.iter_mut() {
            *g = g.scale(scale);
        }
        let loss = loss_sum * scale;
        curve.push(loss);
        if !loss.is_finite() {
            diverged = Some(step);
            break;
        }

        if let Some(limit) = tcfg.clip_norm {
            let norm: f64 = grads
                .iter()
                .map(|g| g.data().iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
                .sqrt();
            if norm > limit {
                let s = limit / norm;
                for g in grads.iter_mut() {
                    *g = g.scale(s);
                }
            }
        }

        let mut refs = params.tensors_mut();
        match opt.apply(&mut refs, &grads, tcfg.lr_at(step)) {
            Ok(()) => {}
            Err(Error::Divergence { .. }) => {
                diverged = Some(step);
                break;
            }
            Err(e) => return Err(e),
        }
        drop(refs);
        params.apply_tree_mask(cfg, skeleton)?;
    }

    Ok(TrainRun {
        params,
        curve,
        diverged,
    })
}
