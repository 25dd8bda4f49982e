//! Run and comparison output files.
//!
//! All CSVs are comma-separated with a header row and LF line endings; floats
//! carry 9 significant digits. Metadata is pretty-printed JSON.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::{median, ComparisonReport, RunConfig, RunResult};
use crate::error::{Error, Result};
use crate::evaluation::EpochRecord;
use crate::losses::LossKind;
use crate::model::save_checkpoint;
use crate::numerics::RNG_ALGORITHM;

pub const RUN_CSV_HEADER: &str =
    "epoch,train_loss,val_loss,ge_estimate,val_accuracy,val_macro_f1,theta_norm";
pub const SUMMARY_CSV_HEADER: &str =
    "seed,loss,final_ge,best_epoch,test_accuracy,test_macro_f1,wall_seconds";

/// `%.9g`-style formatting: 9 significant digits, trailing zeros dropped,
/// exponent notation outside `[1e-5, 1e9)`.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    if fixed.contains('.') {
        fixed
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        fixed
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn run_csv_name(seed: u64, loss: LossKind) -> String {
    format!("run_seed{seed}_{loss}.csv")
}

/// Per-epoch CSV of one run.
pub fn write_run_csv(result: &RunResult, path: &Path) -> Result<()> {
    let mut out = String::from(RUN_CSV_HEADER);
    out.push('\n');
    for r in &result.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.epoch,
            fmt_sig9(r.train_loss),
            fmt_sig9(r.val_loss),
            fmt_sig9(r.ge_estimate),
            fmt_sig9(r.val_accuracy),
            fmt_sig9(r.val_macro_f1),
            fmt_sig9(r.theta_norm)
        )
        .expect("string write");
    }
    write_file(path, &out)
}

/// Parses a file written by [`write_run_csv`].
pub fn read_run_csv(path: &Path) -> Result<Vec<EpochRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        row: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    let header = reader.headers().map_err(|e| Error::Parse {
        row: 1,
        message: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>().join(",") != RUN_CSV_HEADER {
        return Err(Error::Parse {
            row: 1,
            message: "unexpected run CSV header".into(),
        });
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let row = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            let f = |j: usize| -> Result<f64> {
                rec[j].parse().map_err(|_| Error::Parse {
                    row,
                    message: format!("bad number '{}'", &rec[j]),
                })
            };
            Ok(EpochRecord {
                epoch: rec[0].parse().map_err(|_| Error::Parse {
                    row,
                    message: "bad epoch".into(),
                })?,
                train_loss: f(1)?,
                val_loss: f(2)?,
                ge_estimate: f(3)?,
                val_accuracy: f(4)?,
                val_macro_f1: f(5)?,
                theta_norm: f(6)?,
            })
        })
        .collect()
}

/// Summary CSV: one row per (seed, loss), then a `median` row holding the
/// median over seeds of each paired difference `CE − RJM`.
pub fn write_summary_csv(report: &ComparisonReport, path: &Path) -> Result<()> {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.seed,
            r.loss,
            fmt_sig9(r.final_ge),
            r.best_epoch,
            fmt_sig9(r.test_accuracy),
            fmt_sig9(r.test_macro_f1),
            fmt_sig9(r.wall_seconds)
        )
        .expect("string write");
    }
    let d = |f: fn(&super::ComparisonRow) -> f64| fmt_sig9(median(&report.paired_differences(f)));
    writeln!(
        out,
        "median,ce-rjm,{},{},{},{},{}",
        d(|r| r.final_ge),
        d(|r| r.best_epoch as f64),
        d(|r| r.test_accuracy),
        d(|r| r.test_macro_f1),
        d(|r| r.wall_seconds)
    )
    .expect("string write");
    write_file(path, &out)
}

fn base_metadata(config: &RunConfig) -> serde_json::Value {
    json!({
        "software": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "rng_algorithm": RNG_ALGORITHM,
        "config": config,
        "clamp_eps": config.clamp_eps,
        "logged_losses": "mean loss on clamped probabilities",
        "f1_averaging": "macro",
        "ge_estimate": "|train_loss - val_loss|; validation loss stands in for the population error",
    })
}

fn label_mapping(names: Option<&[String]>) -> serde_json::Value {
    match names {
        Some(n) => json!(n),
        None => serde_json::Value::Null,
    }
}

/// Writes the run CSV, the best-epoch checkpoint and `metadata.json` into `dir`.
pub fn write_run_outputs(
    dir: &Path,
    config: &RunConfig,
    result: &RunResult,
    label_names: Option<&[String]>,
) -> Result<Vec<PathBuf>> {
    let csv = dir.join(run_csv_name(result.seed, result.loss));
    write_run_csv(result, &csv)?;
    let ckpt = dir.join(format!(
        "model_best_seed{}_{}.json",
        result.seed, result.loss
    ));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_checkpoint(&result.best_model, &ckpt)?;
    let mut meta = base_metadata(config);
    meta["label_mapping"] = label_mapping(label_names);
    meta["result"] = json!({
        "best_epoch": result.best_epoch,
        "test_accuracy": result.test_accuracy,
        "test_macro_f1": result.test_macro_f1,
        "wall_seconds": result.wall_seconds,
        "initial_theta_norm": result.initial_theta_norm,
        "max_theta_norm": result.max_theta_norm,
        "max_theta_norm_note": "largest norm observed during training; an estimate of the hypothesis-space bound",
        "num_train": result.num_train,
        "steps_per_epoch": result.steps_per_epoch,
    });
    let meta_path = dir.join("metadata.json");
    write_file(
        &meta_path,
        &(serde_json::to_string_pretty(&meta).expect("json") + "\n"),
    )?;
    Ok(vec![csv, ckpt, meta_path])
}

/// Writes every per-run CSV, `summary.csv` and `metadata.json` into `dir`.
pub fn write_compare_outputs(
    dir: &Path,
    config: &RunConfig,
    report: &ComparisonReport,
    label_names: Option<&[String]>,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for run in &report.runs {
        let p = dir.join(run_csv_name(run.seed, run.loss));
        write_run_csv(run, &p)?;
        written.push(p);
    }
    let summary = dir.join("summary.csv");
    write_summary_csv(report, &summary)?;
    written.push(summary);
    let mut meta = base_metadata(config);
    meta["label_mapping"] = label_mapping(label_names);
    meta["seeds"] = json!(report.seeds);
    let per_loss = |l: LossKind| {
        json!({
            "median_final_ge": report.median_final_ge(l),
            "median_test_accuracy": report.median_test_accuracy(l),
            "median_test_macro_f1": report.median_test_macro_f1(l),
            "total_wall_seconds": report.total_seconds(l),
        })
    };
    meta["summary"] = json!({
        "ce": per_loss(LossKind::Ce),
        "rjm": per_loss(LossKind::Rjm),
        "median_ge_difference_ce_minus_rjm": report.median_ge_difference(),
        "ge_sign": report.ge_sign(),
        "max_theta_norm": report.runs.iter().map(|r| r.max_theta_norm).fold(0.0, f64::max),
    });
    let meta_path = dir.join("metadata.json");
    write_file(
        &meta_path,
        &(serde_json::to_string_pretty(&meta).expect("json") + "\n"),
    )?;
    written.push(meta_path);
    Ok(written)
}
