use std::path::Path;

use duet_core::report::{eval_report_csv, eval_report_table, gnuplot_script};
use duet_core::training::{evaluate, load_checkpoint};
use duet_core::{Error, Result};

use crate::config::RunConfig;
use crate::pipeline::resolve_dataset;
use crate::write_file;

/// Evaluate a checkpoint on the config's eval-side windows; writes
/// `eval_report.csv` and prints the per-action table.
pub fn run(
    cfg: &RunConfig,
    checkpoint: &Path,
    horizons_ms: &[usize],
    out_dir: &Path,
    emit_gnuplot: bool,
) -> Result<()> {
    let (model_cfg, params) = load_checkpoint(checkpoint)?;
    // the data geometry must match the checkpointed model, not the config's
    let dataset = resolve_dataset(&cfg.data, &model_cfg, cfg.seed)?;
    if dataset.eval.is_empty() {
        return Err(Error::Config {
            message: "no evaluation windows after split/holdout".into(),
        });
    }
    let report = evaluate(&model_cfg, &params, &dataset.eval, horizons_ms)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    write_file(&out_dir.join("eval_report.csv"), &eval_report_csv(&report))?;
    if emit_gnuplot {
        write_file(
            &out_dir.join("eval_report.gnuplot"),
            &gnuplot_script("eval_report.csv", "horizon-wise MPJPE", "mm"),
        )?;
    }
    print!("{}", eval_report_table(&report));
    println!("({} windows)", report.windows);
    Ok(())
}
