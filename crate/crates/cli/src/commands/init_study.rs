use std::path::Path;

use duet_core::init::{seed_stability_study, variance_probe, StudyConfig};
use duet_core::numerics::rng::streams;
use duet_core::numerics::{Activation, Rng};
use duet_core::report::{probe_csv, study_runs_csv, study_summary_csv};
use duet_core::{Error, Result};

use crate::config::InitStudyConfig;
use crate::pipeline::resolve_dataset;
use crate::write_file;

/// Run the seed-stability study and the variance-propagation probe; emits
/// `init_study_runs.csv`, `init_study_summary.csv`, and `variance_probe.csv`.
pub fn run(cfg: &InitStudyConfig, out_dir: &Path) -> Result<()> {
    cfg.model.validate()?;
    let dataset = resolve_dataset(&cfg.data, &cfg.model, cfg.seed)?;
    let study = StudyConfig {
        schemes: cfg.schemes.clone(),
        seeds: cfg.seeds.clone(),
        horizons_ms: cfg.horizons_ms.clone(),
    };
    let outcome = seed_stability_study(
        &cfg.model,
        &dataset.skeleton,
        &dataset.train,
        &dataset.eval,
        &cfg.train,
        &study,
    )?;

    // the probe targets the plain linear stack the variance analysis covers
    let mut probe_model = cfg.model.clone();
    probe_model.residual_skips = false;
    probe_model.activation = Activation::Linear;
    let mut probe_rows = Vec::with_capacity(cfg.schemes.len());
    let mut rng = Rng::with_stream(cfg.seed, streams::PROBE);
    for &scheme in &cfg.schemes {
        let rows = variance_probe(
            &probe_model,
            scheme,
            cfg.probe.trials,
            cfg.probe.input_std,
            &mut rng,
        )?;
        probe_rows.push((scheme, rows));
    }

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    write_file(
        &out_dir.join("init_study_runs.csv"),
        &study_runs_csv(&outcome, &cfg.horizons_ms),
    )?;
    write_file(
        &out_dir.join("init_study_summary.csv"),
        &study_summary_csv(&outcome),
    )?;
    write_file(&out_dir.join("variance_probe.csv"), &probe_csv(&probe_rows))?;
    let diverged = outcome
        .runs
        .iter()
        .filter(|r| r.diverged_at.is_some())
        .count();
    println!(
        "{} runs ({} schemes x {} seeds), {diverged} diverged; wrote 3 CSVs to {}",
        outcome.runs.len(),
        cfg.schemes.len(),
        cfg.seeds.len(),
        out_dir.display()
    );
    Ok(())
}
