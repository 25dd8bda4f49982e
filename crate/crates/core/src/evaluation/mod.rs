//! Datasets, classification metrics and the per-epoch generalization-error
//! estimate.
//!
//! The population error is not observable, so the validation loss stands in
//! for it: the estimate is `|E_train − E_val|`.

mod data;
mod metrics;

use serde::{Deserialize, Serialize};

pub use data::{gaussian_blobs, load_csv, stratified_split, write_csv, Dataset, Split};
pub use metrics::{accuracy, confusion_matrix, ge_estimate, macro_f1};

/// Metrics recorded after one training epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub ge_estimate: f64,
    pub val_accuracy: f64,
    pub val_macro_f1: f64,
    pub theta_norm: f64,
}
