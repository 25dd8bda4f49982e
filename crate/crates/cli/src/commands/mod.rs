pub mod bounds;
pub mod gen_data;
pub mod train;
pub mod verify;

use std::path::PathBuf;

use rjm_core::harness::{DatasetSource, RunConfig};
use rjm_core::losses::{CrossEntropy, ReducedJm, ScalarLink};

use crate::args::{Cli, Command, GlobalArgs, RunOverrides};
use crate::CliError;

pub(crate) type Links<'a> = (&'a dyn ScalarLink<f64>, &'a dyn ScalarLink<f64>);

pub(crate) fn dispatch(cli: &Cli, links: Option<Links<'_>>) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Train(a) => train::train(g, a),
        Command::Compare(a) => train::compare(g, a),
        Command::Bounds(a) => bounds::bounds(g, a),
        Command::VerifyLosses(a) => {
            let (ce, rjm) = links.unwrap_or((&CrossEntropy, &ReducedJm));
            verify::verify_losses_with(g, a, ce, rjm)
        }
        Command::GenData(a) => gen_data::gen_data(g, a),
    }
}

/// Config file (or defaults) with the global flags applied.
pub(crate) fn base_run_config(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &g.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

pub(crate) fn apply_overrides(cfg: &mut RunConfig, o: &RunOverrides) {
    if let Some(v) = o.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = o.lr {
        cfg.lr = v;
        cfg.lr_schedule = None;
    }
    if let Some(v) = o.optimizer {
        cfg.optimizer = v;
    }
    if let Some(v) = o.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = o.clamp_eps {
        cfg.clamp_eps = v;
    }
    if let Some(v) = o.weight_decay {
        cfg.weight_decay = v;
    }
    if let Some(v) = &o.hidden {
        cfg.hidden_layers = v.clone();
    }
    if let Some(v) = o.activation {
        cfg.activation = v;
    }
    if let Some(v) = o.spread {
        cfg.blobs_spread = v;
    }
    if let Some(v) = &o.csv {
        cfg.dataset = DatasetSource::Csv;
        cfg.csv_path = Some(v.clone());
    }
    if let Some(v) = &o.label_column {
        cfg.label_column = v.clone();
    }
    if o.fixed_partition {
        cfg.reshuffle = false;
    }
}

pub(crate) fn out_dir(g: &GlobalArgs) -> PathBuf {
    g.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

pub(crate) fn write_text(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| rjm_core::Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| rjm_core::Error::io(path, e).into())
}
