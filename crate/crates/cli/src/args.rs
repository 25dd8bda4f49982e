use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rjm_core::losses::LossKind;
use rjm_core::model::Activation;
use rjm_core::optimizers::OptimizerKind;

/// Train MLPs with cross-entropy or RJM loss, compare their generalization
/// gaps, and evaluate stability-based generalization bounds.
///
/// Run options come from the JSON file given by --config (every key is
/// optional); flags override the file; anything still unset keeps the
/// default shown in brackets.
#[derive(Debug, Parser)]
#[command(name = "rjm", version, about, long_about = None)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON config file: run options for train/compare/gen-data, a grid for bounds [default: none]
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory [default: config out_dir, else "out"]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for initialization, split and batch order; for gen-data, the data seed [default: 0]
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Suppress the summary printed on stdout
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model and write per-epoch metrics, the best checkpoint and metadata
    Train(TrainArgs),
    /// Train CE and RJM on the same seeds and write per-run CSVs plus a summary
    Compare(CompareArgs),
    /// Evaluate generalization bounds on a grid of inputs and write bounds.csv
    Bounds(BoundsArgs),
    /// Check the loss properties numerically and print a pass/fail table
    VerifyLosses(VerifyArgs),
    /// Write a synthetic Gaussian-blob dataset as CSV
    GenData(GenDataArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::Compare(_) => "compare",
            Command::Bounds(_) => "bounds",
            Command::VerifyLosses(_) => "verify-losses",
            Command::GenData(_) => "gen-data",
        }
    }
}

/// Overrides for the run configuration shared by `train` and `compare`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunOverrides {
    /// Training epochs [default: 200]
    #[arg(long, value_name = "N")]
    pub epochs: Option<usize>,
    /// Constant learning rate; replaces any lr_schedule from the config [default: 0.001]
    #[arg(long, value_name = "RATE")]
    pub lr: Option<f64>,
    /// Optimizer: sgd, adam or adamw [default: adam]
    #[arg(long, value_name = "KIND")]
    pub optimizer: Option<OptimizerKind>,
    /// Mini-batch size [default: 32]
    #[arg(long, value_name = "B")]
    pub batch_size: Option<usize>,
    /// Probability clamp lower bound, in (0, 1) [default: 1e-7]
    #[arg(long, value_name = "EPS")]
    pub clamp_eps: Option<f64>,
    /// AdamW weight decay [default: 0]
    #[arg(long, value_name = "LAMBDA")]
    pub weight_decay: Option<f64>,
    /// Hidden layer widths, comma separated; empty for none [default: 16]
    #[arg(long, value_name = "W,W,..", value_delimiter = ',', num_args = 0..)]
    pub hidden: Option<Vec<usize>>,
    /// Hidden activation: relu or tanh [default: relu]
    #[arg(long, value_name = "ACT")]
    pub activation: Option<Activation>,
    /// Standard deviation of the synthetic blobs [default: 0.6]
    #[arg(long, value_name = "S")]
    pub spread: Option<f64>,
    /// Train on this CSV file instead of synthetic blobs [default: none]
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Label column of --csv [default: label]
    #[arg(long, value_name = "NAME")]
    pub label_column: Option<String>,
    /// Keep one partition for the whole run and sample its batches at random [default: reshuffle every epoch]
    #[arg(long)]
    pub fixed_partition: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Loss: ce or rjm [default: ce]
    #[arg(long, value_name = "LOSS")]
    pub loss: Option<LossKind>,
    #[command(flatten)]
    pub run: RunOverrides,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Seeds, comma separated [default: 0,1,...,10, or --seed alone]
    #[arg(long, value_name = "S,S,..", value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Train the runs in parallel; results are identical to a sequential run
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    pub run: RunOverrides,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// Optimizer: sgd, adam, adamw or all [default: config optimizer, else adam]
    #[arg(long, value_name = "KIND")]
    pub optimizer: Option<String>,
    /// Lipschitz constants, comma separated [default: 1]
    #[arg(long, value_delimiter = ',', value_name = "X,..")]
    pub gamma: Option<Vec<f64>>,
    /// Loss upper bounds [default: 1]
    #[arg(long, value_delimiter = ',', value_name = "X,..")]
    pub max_loss: Option<Vec<f64>>,
    /// Learning rates, constant over all steps [default: 0.001]
    #[arg(long, value_delimiter = ',', value_name = "X,..")]
    pub eta: Option<Vec<f64>>,
    /// Number of updates T [default: 100]
    #[arg(long, value_delimiter = ',', value_name = "N,..")]
    pub steps: Option<Vec<usize>>,
    /// Training-set sizes N [default: 1000]
    #[arg(long, value_delimiter = ',', value_name = "N,..")]
    pub n: Option<Vec<usize>>,
    /// Batch counts per epoch b [default: 32]
    #[arg(long, value_delimiter = ',', value_name = "N,..")]
    pub batch: Option<Vec<usize>>,
    /// Failure probabilities [default: 0.05]
    #[arg(long, value_delimiter = ',', value_name = "X,..")]
    pub delta: Option<Vec<f64>>,
    /// Adam denominator lower bounds c [default: 0.5]
    #[arg(long, value_delimiter = ',', value_name = "X,..")]
    pub c: Option<Vec<f64>>,
    /// AdamW weight decays [default: 0]
    #[arg(long, value_delimiter = ',', value_name = "X,..")]
    pub lambda: Option<Vec<f64>>,
    /// Parameter-norm bounds [default: 0]
    #[arg(long, value_delimiter = ',', value_name = "X,..")]
    pub theta_sup: Option<Vec<f64>>,
    /// Also evaluate each tuple with the CE and RJM profiles at --clamp-eps and --classes
    #[arg(long)]
    pub compare_losses: bool,
    /// Clamp lower bound for --compare-losses [default: 1e-7]
    #[arg(long, value_name = "EPS")]
    pub clamp_eps: Option<f64>,
    /// Number of classes for --compare-losses [default: 3]
    #[arg(long, value_name = "C")]
    pub classes: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Random cases per property and class count [default: 100000]
    #[arg(long, value_name = "N")]
    pub trials: Option<usize>,
    /// Clamp lower bound [default: 1e-7]
    #[arg(long, value_name = "EPS")]
    pub eps: Option<f64>,
    /// Class counts, comma separated [default: 2,6,100]
    #[arg(long, value_delimiter = ',', value_name = "C,..")]
    pub classes: Option<Vec<usize>>,
    /// Grid points for the derivative and boundedness checks [default: 1000000]
    #[arg(long, value_name = "N")]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    /// Samples per class [default: 300]
    #[arg(long, value_name = "N")]
    pub per_class: Option<usize>,
    /// Number of classes [default: 3]
    #[arg(long, value_name = "C")]
    pub classes: Option<usize>,
    /// Feature dimension [default: 2]
    #[arg(long, value_name = "D")]
    pub dim: Option<usize>,
    /// Standard deviation around each class mean [default: 0.6]
    #[arg(long, value_name = "S")]
    pub spread: Option<f64>,
    /// Output file name inside --out [default: blobs.csv]
    #[arg(long, value_name = "NAME")]
    pub file: Option<String>,
}
