//! Training loop and paired CE/RJM comparisons.
//!
//! A run is fully determined by its [`RunConfig`]: the seed fixes parameter
//! initialization, the data split and the batch order, so the CE and RJM runs
//! of one seed differ only in the loss.

mod config;
mod output;

use std::time::Instant;

use rayon::prelude::*;

pub use config::{DatasetSource, RunConfig, REFERENCE_SPREAD};
pub use output::{
    fmt_sig9, read_run_csv, run_csv_name, write_compare_outputs, write_run_csv, write_run_outputs,
    write_summary_csv, RUN_CSV_HEADER, SUMMARY_CSV_HEADER,
};

use crate::error::{Error, Result};
use crate::evaluation::{accuracy, ge_estimate, macro_f1, Dataset, EpochRecord};
use crate::losses::{clamp_probs, identity_loss, LossKind, OneHotTarget};
use crate::model::Mlp;
use crate::numerics::{l2_norm, SeededRng, Vector};
use crate::optimizers::{make_partition, BatchSequence, Optimizer};

/// Mean clamped loss, accuracy and macro-F1 of a model on a dataset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
    pub macro_f1: f64,
}

pub fn evaluate(
    model: &Mlp<f64>,
    loss: LossKind,
    data: &Dataset<f64>,
    clamp_eps: f64,
) -> Result<Evaluation> {
    let c = model.num_classes();
    let mut total = 0.0;
    let mut preds = Vec::with_capacity(data.len());
    for i in 0..data.len() {
        let probs = model.predict(data.features().row(i))?;
        preds.push(probs.argmax());
        let y = OneHotTarget::new(data.labels()[i], c)?;
        total += identity_loss(&loss, &clamp_probs(&probs, clamp_eps), &y)?;
    }
    Ok(Evaluation {
        loss: total / data.len() as f64,
        accuracy: accuracy(&preds, data.labels())?,
        macro_f1: macro_f1(&preds, data.labels(), c)?,
    })
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub loss: LossKind,
    pub seed: u64,
    pub records: Vec<EpochRecord>,
    /// 1-based epoch with the smallest validation loss (earliest on ties).
    pub best_epoch: usize,
    pub test_accuracy: f64,
    pub test_macro_f1: f64,
    /// Time spent in the epoch loop, evaluation included.
    pub wall_seconds: f64,
    pub initial_theta_norm: f64,
    /// Largest `‖θ‖` seen at initialization or after any epoch; an estimate of
    /// `‖θ‖_sup` for the AdamW bound.
    pub max_theta_norm: f64,
    pub best_model: Mlp<f64>,
    pub num_train: usize,
    pub steps_per_epoch: usize,
}

impl RunResult {
    pub fn final_record(&self) -> &EpochRecord {
        self.records.last().expect("at least one epoch")
    }

    pub fn seconds_per_epoch(&self) -> f64 {
        self.wall_seconds / self.records.len() as f64
    }
}

fn diverged(epoch: usize, batch: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NonFinite(detail) | Error::InvalidInput(detail) => Error::Divergence {
            epoch,
            batch,
            detail,
        },
        other => other,
    }
}

/// Trains one model as configured.
///
/// Each epoch partitions the training set into `⌈N/b⌉` equal batches, applies
/// one optimizer step per batch with the rate scheduled for the epoch, then
/// records train/validation loss, the generalization estimate, validation
/// metrics and `‖θ‖`. Test metrics are taken at the epoch with the smallest
/// validation loss.
pub fn train(config: &RunConfig) -> Result<RunResult> {
    config.validate()?;
    let split = config.load_split()?;
    train_on(config, &split.train, &split.val, &split.test)
}

pub fn train_on(
    config: &RunConfig,
    train_set: &Dataset<f64>,
    val_set: &Dataset<f64>,
    test_set: &Dataset<f64>,
) -> Result<RunResult> {
    config.validate()?;
    let loss = config.loss;
    let eps = config.clamp_eps;
    let mut model = Mlp::<f64>::init(config.mlp_config(train_set.dim(), train_set.num_classes()))?;
    let mut optimizer = Optimizer::new(config.optimizer_config()?, model.num_params())?;
    let mut theta = model.flatten();
    let initial_theta_norm = l2_norm(&theta);
    let mut max_theta_norm = initial_theta_norm;

    let n = train_set.len();
    let k = n.div_ceil(config.batch_size);
    let mut batch_rng = SeededRng::with_stream(config.seed, 1);
    let fixed_partition = if config.reshuffle {
        None
    } else {
        Some(make_partition(n, k, &mut batch_rng)?)
    };

    let mut records = Vec::with_capacity(config.epochs);
    let mut best: Option<(usize, f64, Vector<f64>)> = None;
    let started = Instant::now();
    for epoch in 1..=config.epochs {
        let batches: Vec<&[usize]>;
        let fresh;
        match &fixed_partition {
            None => {
                fresh = make_partition(n, k, &mut batch_rng)?;
                batches = fresh.batches().iter().map(Vec::as_slice).collect();
            }
            Some(p) => {
                let seq = BatchSequence::random(k, p.num_batches(), &mut batch_rng)?;
                batches = seq
                    .as_slice()
                    .iter()
                    .map(|&j| p.batches()[j].as_slice())
                    .collect();
            }
        }
        for (b, indices) in batches.iter().enumerate() {
            let (batch_loss, grad) = model
                .batch_loss_and_grad(
                    &loss,
                    train_set.features(),
                    train_set.labels(),
                    indices,
                    eps,
                )
                .map_err(diverged(epoch, b))?;
            if !batch_loss.is_finite() || !grad.is_all_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: b,
                    detail: format!("non-finite loss {batch_loss} or gradient"),
                });
            }
            theta = optimizer.step(&theta, &grad, epoch)?;
            if !theta.is_all_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: b,
                    detail: "parameters became non-finite".into(),
                });
            }
            model.set_params(&theta)?;
        }

        let end = batches.len();
        let tr = evaluate(&model, loss, train_set, eps).map_err(diverged(epoch, end))?;
        let va = evaluate(&model, loss, val_set, eps).map_err(diverged(epoch, end))?;
        let theta_norm = l2_norm(&theta);
        max_theta_norm = max_theta_norm.max(theta_norm);
        let record = EpochRecord {
            epoch,
            train_loss: tr.loss,
            val_loss: va.loss,
            ge_estimate: ge_estimate(tr.loss, va.loss).map_err(diverged(epoch, end))?,
            val_accuracy: va.accuracy,
            val_macro_f1: va.macro_f1,
            theta_norm,
        };
        if best.as_ref().is_none_or(|(_, v, _)| record.val_loss < *v) {
            best = Some((epoch, record.val_loss, theta.clone()));
        }
        records.push(record);
    }
    let wall_seconds = started.elapsed().as_secs_f64();

    let (best_epoch, _, best_theta) = best.expect("epochs >= 1");
    let best_model = model.unflatten(&best_theta)?;
    let test = evaluate(&best_model, loss, test_set, eps)?;
    Ok(RunResult {
        loss,
        seed: config.seed,
        records,
        best_epoch,
        test_accuracy: test.accuracy,
        test_macro_f1: test.macro_f1,
        wall_seconds,
        initial_theta_norm,
        max_theta_norm,
        best_model,
        num_train: n,
        steps_per_epoch: k,
    })
}

/// One summary line of a comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub seed: u64,
    pub loss: LossKind,
    pub final_ge: f64,
    pub best_epoch: usize,
    pub test_accuracy: f64,
    pub test_macro_f1: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub seeds: Vec<u64>,
    /// CE and RJM row for each seed, in seed order.
    pub rows: Vec<ComparisonRow>,
    pub runs: Vec<RunResult>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

impl ComparisonReport {
    pub fn rows_for(&self, loss: LossKind) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(move |r| r.loss == loss)
    }

    fn per_loss(&self, loss: LossKind, f: impl Fn(&ComparisonRow) -> f64) -> Vec<f64> {
        self.rows_for(loss).map(f).collect()
    }

    /// Paired differences `CE − RJM` of one column, in seed order.
    pub fn paired_differences(&self, f: impl Fn(&ComparisonRow) -> f64) -> Vec<f64> {
        self.per_loss(LossKind::Ce, &f)
            .into_iter()
            .zip(self.per_loss(LossKind::Rjm, &f))
            .map(|(c, r)| c - r)
            .collect()
    }

    /// `median(GE_CE − GE_RJM)` over seeds of the final-epoch estimates.
    pub fn median_ge_difference(&self) -> f64 {
        median(&self.paired_differences(|r| r.final_ge))
    }

    pub fn median_final_ge(&self, loss: LossKind) -> f64 {
        median(&self.per_loss(loss, |r| r.final_ge))
    }

    pub fn median_test_accuracy(&self, loss: LossKind) -> f64 {
        median(&self.per_loss(loss, |r| r.test_accuracy))
    }

    pub fn median_test_macro_f1(&self, loss: LossKind) -> f64 {
        median(&self.per_loss(loss, |r| r.test_macro_f1))
    }

    pub fn total_seconds(&self, loss: LossKind) -> f64 {
        self.per_loss(loss, |r| r.wall_seconds).iter().sum()
    }

    /// Sign of `median(GE_CE − GE_RJM)`: 1 when RJM generalizes better.
    pub fn ge_sign(&self) -> i8 {
        let d = self.median_ge_difference();
        if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// Trains a CE and an RJM model for every seed with otherwise identical
/// settings. Results are in seed-list order whether or not `parallel` is set.
pub fn compare(base: &RunConfig, seeds: &[u64], parallel: bool) -> Result<ComparisonReport> {
    if seeds.is_empty() {
        return Err(Error::Config("compare needs at least one seed".into()));
    }
    base.validate()?;
    let run_seed = |&seed: &u64| -> Result<Vec<RunResult>> {
        let cfg = RunConfig {
            seed,
            ..base.clone()
        };
        let split = cfg.load_split()?;
        LossKind::ALL
            .iter()
            .map(|&loss| {
                let cfg = RunConfig {
                    loss,
                    ..cfg.clone()
                };
                train_on(&cfg, &split.train, &split.val, &split.test)
            })
            .collect()
    };
    let per_seed: Vec<Vec<RunResult>> = if parallel {
        seeds.par_iter().map(run_seed).collect::<Result<_>>()?
    } else {
        seeds.iter().map(run_seed).collect::<Result<_>>()?
    };
    let runs: Vec<RunResult> = per_seed.into_iter().flatten().collect();
    let rows = runs
        .iter()
        .map(|r| ComparisonRow {
            seed: r.seed,
            loss: r.loss,
            final_ge: r.final_record().ge_estimate,
            best_epoch: r.best_epoch,
            test_accuracy: r.test_accuracy,
            test_macro_f1: r.test_macro_f1,
            wall_seconds: r.wall_seconds,
        })
        .collect();
    Ok(ComparisonReport {
        seeds: seeds.to_vec(),
        rows,
        runs,
    })
}
