use std::path::Path;

use duet_core::model::ModelParams;
use duet_core::numerics::rng::streams;
use duet_core::numerics::Rng;
use duet_core::report::{gnuplot_script, loss_curve_csv};
use duet_core::training::{save_checkpoint, train};
use duet_core::{Error, Result};

use crate::config::RunConfig;
use crate::pipeline::resolve_dataset;
use crate::write_file;

/// Train per the run config; writes `checkpoint.json`, `loss_curve.csv`, and
/// `config_resolved.json` to the output directory.
pub fn run(cfg: &RunConfig, out_dir: &Path, emit_gnuplot: bool) -> Result<()> {
    cfg.model.validate()?;
    let dataset = resolve_dataset(&cfg.data, &cfg.model, cfg.seed)?;
    let mut rng = Rng::with_stream(cfg.seed, streams::INIT);
    let params = ModelParams::init(&cfg.model, &dataset.skeleton, &mut rng)?;
    let mut tcfg = cfg.train.clone();
    tcfg.seed = cfg.seed;

    let outcome = train(&cfg.model, &dataset.skeleton, params, &dataset.train, &tcfg)?;

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    write_file(&out_dir.join("loss_curve.csv"), &loss_curve_csv(&outcome.curve))?;
    if emit_gnuplot {
        write_file(
            &out_dir.join("loss_curve.gnuplot"),
            &gnuplot_script("loss_curve.csv", "training loss", "loss (mm)"),
        )?;
    }
    let resolved = serde_json::to_string_pretty(cfg).map_err(|e| Error::Config {
        message: format!("resolved-config serialization: {e}"),
    })?;
    write_file(&out_dir.join("config_resolved.json"), &resolved)?;

    if let Some(step) = outcome.diverged {
        // keep the partial curve on disk, then signal the failure
        return Err(Error::Divergence { step });
    }
    save_checkpoint(out_dir.join("checkpoint.json"), &cfg.model, &outcome.params)?;
    let last = outcome.curve.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {} steps on {} windows; final minibatch loss {last:.3}",
        outcome.curve.len(),
        dataset.train.len()
    );
    println!("wrote {}", out_dir.join("checkpoint.json").display());
    Ok(())
}
