use duet_core::data::{load_sequences, split, synth_generate, window, SequenceRecord, Window};
use duet_core::model::{ModelConfig, SkeletonSpec};
use duet_core::numerics::rng::streams;
use duet_core::numerics::Rng;
use duet_core::{Error, Result};

use crate::config::DataConfig;

/// Resolved dataset: skeleton plus train- and eval-side windows.
pub struct Dataset {
    pub skeleton: SkeletonSpec,
    pub train: Vec<Window>,
    pub eval: Vec<Window>,
}

/// Load or synthesize sequences, apply the split and window holdout, and cut
/// windows for the model geometry.
pub fn resolve_dataset(data: &DataConfig, model: &ModelConfig, run_seed: u64) -> Result<Dataset> {
    data.validate()?;
    let skeleton = data.skeleton.load()?;
    if skeleton.joints_per_body() != model.joints_per_body || skeleton.bodies != model.bodies {
        return Err(Error::Config {
            message: format!(
                "skeleton ({} joints x {} bodies) does not match model ({} x {})",
                skeleton.joints_per_body(),
                skeleton.bodies,
                model.joints_per_body,
                model.bodies
            ),
        });
    }

    let sequences: Vec<SequenceRecord> = if let Some(path) = &data.path {
        load_sequences(path, &skeleton)?
    } else {
        let synth = data.synth.as_ref().expect("validated above");
        let style = synth.style.clone().unwrap_or_default();
        let mut rng = Rng::with_stream(synth.seed.unwrap_or(run_seed), streams::SYNTH);
        synth_generate(
            &mut rng,
            synth.sequences,
            synth.frames,
            skeleton.joints_per_body(),
            skeleton.bodies,
            &style,
        )?
    };

    let (train_seqs, eval_seqs): (Vec<SequenceRecord>, Vec<SequenceRecord>) =
        match &data.split {
            Some(split_cfg) => {
                let (tr, te) = split(&sequences, split_cfg)?;
                (
                    tr.into_iter().cloned().collect(),
                    te.into_iter().cloned().collect(),
                )
            }
            None => (sequences.clone(), sequences),
        };

    let cut = |seqs: &[SequenceRecord]| {
        window(
            seqs,
            &skeleton,
            model.t_obs,
            model.n_fut,
            data.stride,
            data.normalization,
        )
    };
    let mut train = cut(&train_seqs)?;
    let mut eval = cut(&eval_seqs)?;
    if let Some(holdout) = data.window_holdout {
        train.retain(|w| w.start <= holdout.train_max_start);
        eval.retain(|w| w.start >= holdout.eval_min_start);
    }
    Ok(Dataset {
        skeleton,
        train,
        eval,
    })
}
