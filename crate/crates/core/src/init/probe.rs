use crate::error::{Error, Result};
use crate::init::InitScheme;
use crate::model::forward::{encoder_forward_ids, ParamIds};
use crate::model::{ModelConfig, ModelParams, SkeletonSpec};
use crate::numerics::{Rng, Tape};

/// Per-layer output/input standard-deviation ratio, aggregated over trials.
/// Entry 0 is the input itself (ratio exactly 1).
#[derive(Clone, Debug, PartialEq)]
pub struct LayerRatio {
    pub layer: usize,
    pub mean: f64,
    pub std: f64,
}

/// Push zero-mean Gaussian inputs through freshly initialized encoders and
/// record how the activation standard deviation scales per layer.
///
/// The probe runs the plain encoder stack, so configs meant for it should
/// disable residual skips and hold the channel width fixed.
pub fn variance_probe(
    cfg: &ModelConfig,
    scheme: InitScheme,
    trials: usize,
    input_std: f64,
    rng: &mut Rng,
) -> Result<Vec<LayerRatio>> {
    if trials < 1 {
        return Err(Error::Argument {
            op: "variance_probe",
            message: "trials must be >= 1".into(),
        });
    }
    let mut cfg = cfg.clone();
    cfg.init = scheme;
    cfg.validate()?;
    let skeleton = SkeletonSpec::chain(cfg.joints_per_body, cfg.bodies);
    let depth = cfg.depth();
    let k = cfg.retained();
    let v = cfg.node_count();

    let mut ratios: Vec<Vec<f64>> = vec![Vec::with_capacity(trials); depth + 1];
    for _ in 0..trials {
        let params = ModelParams::init(&cfg, &skeleton, rng)?;
        let input = rng.normal(0.0, input_std, &[k, v, cfg.channels[0]]);
        let mut tape = Tape::new();
        let ids = ParamIds::register(&mut tape, &params);
        let x0 = tape.constant(input);
        let (_, stages) = encoder_forward_ids(&mut tape, x0, &cfg, &ids)?;
        let base = tape.value(stages[0]).std();
        for (l, stage) in stages.iter().enumerate() {
            ratios[l].push(tape.value(*stage).std() / base);
        }
    }

    Ok(ratios
        .into_iter()
        .enumerate()
        .map(|(layer, rs)| {
            let n = rs.len() as f64;
            let mean = rs.iter().sum::<f64>() / n;
            let var = rs.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
            LayerRatio {
                layer,
                mean,
                std: var.sqrt(),
            }
        })
        .collect())
}
