use rjm_core::harness::{self, fmt_sig9, write_compare_outputs, write_run_outputs};
use rjm_core::losses::LossKind;

use super::{apply_overrides, base_run_config};
use crate::args::{CompareArgs, GlobalArgs, TrainArgs};
use crate::CliError;

pub(crate) fn train(g: &GlobalArgs, a: &TrainArgs) -> Result<(), CliError> {
    let mut cfg = base_run_config(g)?;
    apply_overrides(&mut cfg, &a.run);
    if let Some(loss) = a.loss {
        cfg.loss = loss;
    }
    cfg.validate()?;
    let split = cfg.load_split()?;
    let result = harness::train_on(&cfg, &split.train, &split.val, &split.test)?;
    let written = write_run_outputs(&cfg.out_dir, &cfg, &result, split.train.label_names())?;
    if !g.quiet {
        let last = result.final_record();
        println!(
            "train loss={} optimizer={} seed={} epochs={} best_epoch={} final_ge={} test_accuracy={} test_macro_f1={}",
            cfg.loss,
            cfg.optimizer,
            cfg.seed,
            cfg.epochs,
            result.best_epoch,
            fmt_sig9(last.ge_estimate),
            fmt_sig9(result.test_accuracy),
            fmt_sig9(result.test_macro_f1),
        );
        for p in written {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

pub(crate) fn compare(g: &GlobalArgs, a: &CompareArgs) -> Result<(), CliError> {
    let mut cfg = base_run_config(g)?;
    apply_overrides(&mut cfg, &a.run);
    let seeds = match (&a.seeds, g.seed) {
        (Some(s), _) => s.clone(),
        (None, Some(s)) => vec![s],
        (None, None) => cfg.seeds.clone(),
    };
    cfg.seeds = seeds.clone();
    let report = harness::compare(&cfg, &seeds, a.parallel)?;
    let label_names = cfg.load_dataset()?.label_names().map(<[String]>::to_vec);
    let written = write_compare_outputs(&cfg.out_dir, &cfg, &report, label_names.as_deref())?;
    if !g.quiet {
        println!(
            "{:>6} {:>4} {:>12} {:>10} {:>12}",
            "seed", "loss", "final_ge", "best_epoch", "test_acc"
        );
        for row in &report.rows {
            println!(
                "{:>6} {:>4} {:>12} {:>10} {:>12}",
                row.seed,
                row.loss,
                fmt_sig9(row.final_ge),
                row.best_epoch,
                fmt_sig9(row.test_accuracy)
            );
        }
        for loss in LossKind::ALL {
            println!(
                "median {loss}: final_ge={} test_accuracy={}",
                fmt_sig9(report.median_final_ge(loss)),
                fmt_sig9(report.median_test_accuracy(loss))
            );
        }
        println!(
            "median paired ge difference (ce - rjm): {}",
            fmt_sig9(report.median_ge_difference())
        );
        println!("wrote {} files to {}", written.len(), cfg.out_dir.display());
    }
    Ok(())
}
