use crate::data::Window;
use crate::error::{Error, Result};
use crate::init::InitScheme;
use crate::model::{ModelConfig, ModelParams, SkeletonSpec};
use crate::numerics::rng::streams;
use crate::numerics::Rng;
use crate::training::{evaluate, train, TrainConfig};

/// Which schemes, seeds, and horizons the stability study covers.
#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub schemes: Vec<InitScheme>,
    pub seeds: Vec<u64>,
    pub horizons_ms: Vec<usize>,
}

/// One (scheme, seed) training run. `mpjpe` is `None` when the run diverged.
#[derive(Clone, Debug)]
pub struct StudyRun {
    pub scheme: InitScheme,
    pub seed: u64,
    pub mpjpe: Option<Vec<f64>>,
    pub diverged_at: Option<usize>,
}

/// Per-scheme, per-horizon mean and standard deviation across seeds.
#[derive(Clone, Debug)]
pub struct StudySummaryRow {
    pub scheme: InitScheme,
    pub horizon_ms: usize,
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

#[derive(Clone, Debug)]
pub struct StudyOutcome {
    pub runs: Vec<StudyRun>,
    pub summary: Vec<StudySummaryRow>,
}

/// Train the model once per (scheme, seed) and report horizon-wise MPJPE
/// mean and spread. Divergence is recorded per run, never fatal to the study.
pub fn seed_stability_study(
    base_cfg: &ModelConfig,
    skeleton: &SkeletonSpec,
    train_windows: &[Window],
    eval_windows: &[Window],
    train_cfg: &TrainConfig,
    study: &StudyConfig,
) -> Result<StudyOutcome> {
    if study.seeds.len() < 3 {
        return Err(Error::Argument {
            op: "seed_stability_study",
            message: format!("need at least 3 seeds, got {}", study.seeds.len()),
        });
    }
    let mut runs = Vec::with_capacity(study.schemes.len() * study.seeds.len());
    for &scheme in &study.schemes {
        for &seed in &study.seeds {
            let mut cfg = base_cfg.clone();
            cfg.init = scheme;
            let mut rng = Rng::with_stream(seed, streams::INIT);
            let params = ModelParams::init(&cfg, skeleton, &mut rng)?;
            let tcfg = TrainConfig {
                seed,
                ..train_cfg.clone()
            };
            let outcome = train(&cfg, skeleton, params, train_windows, &tcfg)?;
            let run = match outcome.diverged {
                Some(step) => StudyRun {
                    scheme,
                    seed,
                    mpjpe: None,
                    diverged_at: Some(step),
                },
                None => {
                    let report =
                        evaluate(&cfg, &outcome.params, eval_windows, &study.horizons_ms)?;
                    StudyRun {
                        scheme,
                        seed,
                        mpjpe: Some(report.overall),
                        diverged_at: None,
                    }
                }
            };
            runs.push(run);
        }
    }

    let mut summary = Vec::new();
    for &scheme in &study.schemes {
        for (hi, &horizon_ms) in study.horizons_ms.iter().enumerate() {
            let values: Vec<f64> = runs
                .iter()
                .filter(|r| r.scheme == scheme)
                .filter_map(|r| r.mpjpe.as_ref().map(|m| m[hi]))
                .collect();
            if values.is_empty() {
                continue;
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            summary.push(StudySummaryRow {
                scheme,
                horizon_ms,
                mean,
                std: var.sqrt(),
                runs: values.len(),
            });
        }
    }
    Ok(StudyOutcome { runs, summary })
}
