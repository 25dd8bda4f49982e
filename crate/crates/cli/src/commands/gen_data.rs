use rjm_core::evaluation::{gaussian_blobs, write_csv, Dataset};

use super::out_dir;
use crate::args::{GenDataArgs, GlobalArgs};
use crate::CliError;

pub(crate) fn gen_data(g: &GlobalArgs, a: &GenDataArgs) -> Result<(), CliError> {
    let cfg = super::base_run_config(&GlobalArgs {
        seed: None,
        ..g.clone()
    })?;
    let ds: Dataset<f64> = gaussian_blobs(
        a.per_class.unwrap_or(cfg.blobs_per_class),
        a.classes.unwrap_or(cfg.blobs_classes),
        a.dim.unwrap_or(cfg.blobs_dim),
        a.spread.unwrap_or(cfg.blobs_spread),
        g.seed.unwrap_or(cfg.data_seed),
    )?;
    let dir = match (&g.out, &g.config) {
        (None, Some(_)) => cfg.out_dir.clone(),
        _ => out_dir(g),
    };
    let path = dir.join(a.file.as_deref().unwrap_or("blobs.csv"));
    write_csv(&ds, &path)?;
    if !g.quiet {
        println!(
            "wrote {} samples ({} classes, dim {}) to {}",
            ds.len(),
            ds.num_classes(),
            ds.dim(),
            path.display()
        );
    }
    Ok(())
}
