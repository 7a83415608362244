//! CSV serialization of run artifacts. All emitters are deterministic:
//! fixed row order and shortest-round-trip float formatting, so reruns of
//! the same seeded run produce byte-identical files.

use crate::init::{InitScheme, LayerRatio, StudyOutcome};
use crate::training::EvalReport;

/// Stable text label of an init scheme for CSV cells.
pub fn scheme_label(scheme: InitScheme) -> String {
    match scheme {
        InitScheme::Paper => "paper".into(),
        InitScheme::PaperStrict => "paper_strict".into(),
        InitScheme::Glorot => "glorot".into(),
        InitScheme::He => "he".into(),
        InitScheme::NaiveUniform(b) => format!("naive_uniform({b})"),
    }
}

pub fn loss_curve_csv(curve: &[f64]) -> String {
    let mut out = String::from("step,loss\n");
    for (step, loss) in curve.iter().enumerate() {
        out.push_str(&format!("{step},{loss}\n"));
    }
    out
}

pub fn eval_report_csv(report: &EvalReport) -> String {
    let mut out = String::from("scope,action,horizon_ms,mpjpe_mm\n");
    for (h, v) in report.horizons_ms.iter().zip(&report.overall) {
        out.push_str(&format!("overall,,{h},{v}\n"));
    }
    for (action, values) in &report.per_action {
        for (h, v) in report.horizons_ms.iter().zip(values) {
            out.push_str(&format!("action,{action},{h},{v}\n"));
        }
    }
    out
}

/// Human-readable fixed-width table of an evaluation report.
pub fn eval_report_table(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<16}", "action"));
    for h in &report.horizons_ms {
        out.push_str(&format!("{:>10}", format!("{h}ms")));
    }
    out.push('\n');
    let mut row = |label: &str, values: &[f64]| {
        out.push_str(&format!("{label:<16}"));
        for v in values {
            out.push_str(&format!("{v:>10.1}"));
        }
        out.push('\n');
    };
    for (action, values) in &report.per_action {
        row(action, values);
    }
    row("overall", &report.overall);
    out
}

pub fn study_runs_csv(outcome: &StudyOutcome, horizons_ms: &[usize]) -> String {
    let mut out = String::from("scheme,seed,horizon_ms,mpjpe\n");
    for run in &outcome.runs {
        for (hi, h) in horizons_ms.iter().enumerate() {
            let cell = match &run.mpjpe {
                Some(v) => format!("{}", v[hi]),
                None => String::new(), // diverged run
            };
            out.push_str(&format!(
                "{},{},{h},{cell}\n",
                scheme_label(run.scheme),
                run.seed
            ));
        }
    }
    out
}

pub fn study_summary_csv(outcome: &StudyOutcome) -> String {
    let mut out = String::from("scheme,horizon_ms,mean,std,runs\n");
    for row in &outcome.summary {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            scheme_label(row.scheme),
            row.horizon_ms,
            row.mean,
            row.std,
            row.runs
        ));
    }
    out
}

pub fn probe_csv(rows_by_scheme: &[(InitScheme, Vec<LayerRatio>)]) -> String {
    let mut out = String::from("scheme,layer,mean_ratio,std_ratio\n");
    for (scheme, rows) in rows_by_scheme {
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                scheme_label(*scheme),
                r.layer,
                r.mean,
                r.std
            ));
        }
    }
    out
}

/// Minimal gnuplot script plotting the named CSV's last column over its
/// first.
pub fn gnuplot_script(csv_name: &str, title: &str, ylabel: &str) -> String {
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset title '{title}'\nset ylabel '{ylabel}'\nplot '{csv_name}' using 1:2 with lines\npause -1\n"
    )
}
