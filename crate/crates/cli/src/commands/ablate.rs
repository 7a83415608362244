use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use duet_core::model::{param_count, ModelParams};
use duet_core::numerics::rng::streams;
use duet_core::numerics::Rng;
use duet_core::training::{evaluate, train};
use duet_core::{Error, Result};

use crate::config::AblateConfig;
use crate::pipeline::resolve_dataset;
use crate::write_file;

struct RowResult {
    name: String,
    flags: [bool; 7],
    params: Option<usize>,
    mpjpe: Option<Vec<f64>>,
    error: Option<String>,
}

/// Train and evaluate every variant row under a shared seed and budget;
/// emits one `ablation.csv` row per variant. Failed rows are recorded and
/// the run continues.
pub fn run(cfg: &AblateConfig, out_dir: &Path, threads: usize) -> Result<()> {
    let results: Vec<Mutex<Option<RowResult>>> =
        (0..cfg.variants.len()).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = threads.max(1).min(cfg.variants.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= cfg.variants.len() {
                    break;
                }
                let row = run_row(cfg, index);
                *results[index].lock().expect("row slot poisoned") = Some(row);
            });
        }
    });

    let mut csv = String::from(
        "name,freq_enc,learnable,separable,init,attention,hierarchy,fc,param_count,status",
    );
    for h in &cfg.horizons_ms {
        csv.push_str(&format!(",mpjpe_{h}"));
    }
    csv.push('\n');
    let mut failures = 0usize;
    for slot in &results {
        let row = slot.lock().expect("row slot poisoned").take().expect("worker filled every slot");
        let flags: Vec<String> = row.flags.iter().map(|b| (*b as u8).to_string()).collect();
        let status = match &row.error {
            None => "ok".to_string(),
            Some(e) => {
                failures += 1;
                format!("error: {}", e.replace(',', ";"))
            }
        };
        csv.push_str(&format!(
            "{},{},{},{}",
            row.name,
            flags.join(","),
            row.params.map(|p| p.to_string()).unwrap_or_default(),
            status
        ));
        match &row.mpjpe {
            Some(values) => {
                for v in values {
                    csv.push_str(&format!(",{v}"));
                }
            }
            None => {
                for _ in &cfg.horizons_ms {
                    csv.push(',');
                }
            }
        }
        csv.push('\n');
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    write_file(&out_dir.join("ablation.csv"), &csv)?;
    println!(
        "{} variants, {failures} failed; wrote {}",
        cfg.variants.len(),
        out_dir.join("ablation.csv").display()
    );
    Ok(())
}

fn run_row(cfg: &AblateConfig, index: usize) -> RowResult {
    let variant = &cfg.variants[index];
    let flags = [
        variant.freq_enc,
        variant.learnable,
        variant.separable,
        variant.init,
        variant.attention,
        variant.hierarchy,
        variant.fc,
    ];
    let outcome = (|| -> Result<(usize, Vec<f64>)> {
        let model = variant.apply(&cfg.model);
        model.validate()?;
        let dataset = resolve_dataset(&cfg.data, &model, cfg.seed)?;
        let count = param_count(&model, &dataset.skeleton);
        let mut rng = Rng::with_stream(cfg.seed, streams::INIT);
        let params = ModelParams::init(&model, &dataset.skeleton, &mut rng)?;
        let mut tcfg = cfg.train.clone();
        tcfg.seed = cfg.seed;
        let run = train(&model, &dataset.skeleton, params, &dataset.train, &tcfg)?;
        if let Some(step) = run.diverged {
            return Err(Error::Divergence { step });
        }
        let report = evaluate(&model, &run.params, &dataset.eval, &cfg.horizons_ms)?;
        Ok((count, report.overall))
    })();
    match outcome {
        Ok((count, mpjpe)) => RowResult {
            name: variant.name.clone(),
            flags,
            params: Some(count),
            mpjpe: Some(mpjpe),
            error: None,
        },
        Err(e) => RowResult {
            name: variant.name.clone(),
            flags,
            params: None,
            mpjpe: None,
            error: Some(e.to_string()),
        },
    }
}
