use std::path::Path;
use std::process::{Command, Output};

use rjm_core::losses::{CrossEntropy, ReducedJm, ScalarLink};

fn rjm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rjm"))
        .args(args)
        .output()
        .expect("spawn rjm")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// One stderr line of the form `ERROR <code> <subcommand>: <message>`.
fn assert_error_line(out: &Output, expected_code: i32, subcommand: &str) {
    let err = stderr(out);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    let prefix = format!("ERROR {expected_code} {subcommand}: ");
    assert!(lines[0].starts_with(&prefix), "stderr: {err}");
    assert_eq!(code(out), expected_code);
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn help_lists_subcommands_and_defaults() {
    let out = rjm(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for sub in ["train", "compare", "bounds", "verify-losses", "gen-data"] {
        assert!(text.contains(sub), "{text}");
    }
    let out = rjm(&["train", "--help"]);
    let text = stdout(&out);
    for d in [
        "[default: 200]",
        "[default: 0.001]",
        "[default: adam]",
        "[default: 32]",
        "[default: 1e-7]",
        "[default: ce]",
    ] {
        assert!(text.contains(d), "missing {d}: {text}");
    }
    let text = stdout(&rjm(&["verify-losses", "--help"]));
    assert!(
        text.contains("[default: 100000]") && text.contains("[default: 2,6,100]"),
        "{text}"
    );
}

#[test]
fn unknown_flag_and_subcommand_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = rjm(&["train", "--bogus", "--out", p(dir.path())]);
    assert_error_line(&out, 1, "train");
    assert!(
        std::fs::read_dir(dir.path()).unwrap().next().is_none(),
        "no work before rejection"
    );
    assert_error_line(&rjm(&["frobnicate"]), 1, "frobnicate");
}

#[test]
fn train_with_config_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"epochs": 20, "loss": "rjm", "seed": 4, "blobs_per_class": 60, "out_dir": {:?}}}"#,
            p(&out_dir)
        ),
    )
    .unwrap();
    let out = rjm(&["train", "--config", p(&cfg), "--quiet"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let run_csv = out_dir.join("run_seed4_rjm.csv");
    let text = std::fs::read_to_string(&run_csv).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert_eq!(
        text.lines().next().unwrap(),
        "epoch,train_loss,val_loss,ge_estimate,val_accuracy,val_macro_f1,theta_norm"
    );
    assert!(out_dir.join("model_best_seed4_rjm.json").is_file());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("metadata.json")).unwrap())
            .unwrap();
    assert_eq!(meta["config"]["epochs"], 20);

    // Re-running overwrites with identical bytes.
    assert_eq!(code(&rjm(&["train", "--config", p(&cfg), "--quiet"])), 0);
    assert_eq!(std::fs::read_to_string(&run_csv).unwrap(), text);
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_error_line(&rjm(&["train", "--config", p(&missing)]), 1, "train");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"epochz": 3}"#).unwrap();
    assert_error_line(&rjm(&["compare", "--config", p(&bad)]), 1, "compare");

    let out = rjm(&["train", "--epochs", "0", "--out", p(dir.path())]);
    assert_error_line(&out, 1, "train");
    let out = rjm(&["train", "--clamp-eps", "0.7", "--out", p(dir.path())]);
    assert_error_line(&out, 1, "train");
}

#[test]
fn divergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // Saturated softmax outputs have zero clamped gradient, so only a rate
    // large enough to overflow the first update produces a non-finite loss.
    let out = rjm(&[
        "train",
        "--optimizer",
        "sgd",
        "--lr",
        "1e300",
        "--epochs",
        "5",
        "--out",
        p(dir.path()),
    ]);
    assert_error_line(&out, 2, "train");
    let err = stderr(&out);
    assert!(err.contains("epoch 1") && err.contains("batch"), "{err}");
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    let out = rjm(&["train", "--epochs", "1", "--out", p(&blocker.join("sub"))]);
    assert_error_line(&out, 3, "train");
    let out = rjm(&["bounds", "--out", p(&blocker)]);
    assert_error_line(&out, 3, "bounds");
}

#[test]
fn compare_three_seeds_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = rjm(&[
        "compare",
        "--seeds",
        "1,2,3",
        "--epochs",
        "5",
        "--quiet",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = read_csv(&dir.path().join("summary.csv"));
    assert_eq!(
        header.join(","),
        "seed,loss,final_ge,best_epoch,test_accuracy,test_macro_f1,wall_seconds"
    );
    assert_eq!(rows.len(), 7);
    let keys: Vec<(String, String)> = rows[..6]
        .iter()
        .map(|r| (r[0].clone(), r[1].clone()))
        .collect();
    for (i, seed) in ["1", "2", "3"].iter().enumerate() {
        assert_eq!(keys[2 * i], (seed.to_string(), "ce".to_string()));
        assert_eq!(keys[2 * i + 1], (seed.to_string(), "rjm".to_string()));
    }
    assert_eq!(rows[6][0], "median");
    for seed in 1..=3 {
        for loss in ["ce", "rjm"] {
            assert!(dir
                .path()
                .join(format!("run_seed{seed}_{loss}.csv"))
                .is_file());
        }
    }
}

#[test]
fn bounds_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = rjm(&[
        "bounds",
        "--optimizer",
        "sgd",
        "--gamma",
        "1",
        "--max-loss",
        "1",
        "--eta",
        "0.1",
        "--steps",
        "10",
        "--n",
        "100",
        "--batch",
        "1",
        "--quiet",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = read_csv(&dir.path().join("bounds.csv"));
    assert_eq!(rows.len(), 1);
    let col = |name: &str| -> f64 {
        rows[0][header.iter().position(|h| h == name).unwrap()]
            .parse()
            .unwrap()
    };
    assert!((col("beta") - 0.02).abs() < 1e-15);
    assert!((col("rho") - 0.4).abs() < 1e-15);
    let lg = (2.0_f64 / 0.05).ln();
    let expected = 2.0 * 0.1 * 10.0 * (2.0 * (lg / 10.0).sqrt() + (2.0 * lg / 100.0).sqrt() + 0.01)
        + (lg / 200.0).sqrt();
    assert!((col("ge_bound") - expected).abs() < 1e-12 * expected);
}

#[test]
fn bounds_grid_and_loss_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let out = rjm(&[
        "bounds",
        "--gamma",
        "0.5,1,2",
        "--eta",
        "1e-3,1e-2,1e-1",
        "--compare-losses",
        "--classes",
        "6",
        "--quiet",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = read_csv(&dir.path().join("bounds.csv"));
    assert_eq!(rows.len(), 9);
    for col in [
        "beta",
        "rho",
        "ge_bound",
        "vacuous",
        "ce_ge_bound",
        "rjm_ge_bound",
        "rjm_smaller",
    ] {
        assert!(header.iter().any(|h| h == col), "missing {col}");
    }
    let smaller = header.iter().position(|h| h == "rjm_smaller").unwrap();
    assert!(rows.iter().all(|r| r[smaller] == "true"));

    // The same grid from a config file, for all three optimizers.
    let cfg = dir.path().join("grid.json");
    std::fs::write(
        &cfg,
        r#"{"optimizer": "all", "gamma": [1, 2], "lambda": [0.1], "theta_sup": [3]}"#,
    )
    .unwrap();
    let out = rjm(&[
        "bounds",
        "--config",
        p(&cfg),
        "--quiet",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, rows) = read_csv(&dir.path().join("bounds.csv"));
    let kinds: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(kinds, ["sgd", "sgd", "adam", "adam", "adamw", "adamw"]);

    std::fs::write(&cfg, r#"{"gamma": []}"#).unwrap();
    assert_error_line(&rjm(&["bounds", "--config", p(&cfg)]), 1, "bounds");
}

#[test]
fn verify_losses_passes_at_defaults() {
    let out = rjm(&["verify-losses"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("all 32 checks passed"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_losses_passes_with_wide_clamp() {
    let out = rjm(&[
        "verify-losses",
        "--eps",
        "0.3",
        "--trials",
        "20000",
        "--grid-points",
        "10000",
    ]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert_error_line(&rjm(&["verify-losses", "--eps", "0"]), 1, "verify-losses");
    assert_error_line(
        &rjm(&["verify-losses", "--classes", "1"]),
        1,
        "verify-losses",
    );
}

/// RJM with the sign of its derivative flipped.
struct FlippedRjm;

impl ScalarLink<f64> for FlippedRjm {
    fn name(&self) -> &str {
        "rjm-flipped"
    }
    fn h(&self, x: f64) -> f64 {
        ScalarLink::<f64>::h(&ReducedJm, x)
    }
    fn dh(&self, x: f64) -> f64 {
        -ScalarLink::<f64>::dh(&ReducedJm, x)
    }
    fn d2h(&self, x: f64) -> f64 {
        ScalarLink::<f64>::d2h(&ReducedJm, x)
    }
    fn sup_abs_dh(&self, eps: f64) -> f64 {
        ScalarLink::<f64>::sup_abs_dh(&ReducedJm, eps)
    }
    fn sup_abs_d2h(&self, eps: f64) -> f64 {
        ScalarLink::<f64>::sup_abs_d2h(&ReducedJm, eps)
    }
}

#[test]
fn flipped_derivative_is_a_property_violation() {
    let args = [
        "rjm",
        "verify-losses",
        "--trials",
        "2000",
        "--grid-points",
        "1000",
        "--quiet",
    ];
    assert_eq!(rjm_cli::run_with_links(args, &CrossEntropy, &FlippedRjm), 4);
    assert_eq!(rjm_cli::run_with_links(args, &CrossEntropy, &ReducedJm), 0);
}

#[test]
fn gen_data_then_train_on_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = rjm(&[
        "gen-data",
        "--per-class",
        "40",
        "--classes",
        "4",
        "--dim",
        "3",
        "--quiet",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let data = dir.path().join("blobs.csv");
    let (header, rows) = read_csv(&data);
    assert_eq!(header, ["x0", "x1", "x2", "label"]);
    assert_eq!(rows.len(), 160);

    let run_dir = dir.path().join("run");
    let out = rjm(&[
        "train",
        "--csv",
        p(&data),
        "--epochs",
        "3",
        "--quiet",
        "--out",
        p(&run_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(run_dir.join("run_seed0_ce.csv").is_file());

    let out = rjm(&[
        "train",
        "--csv",
        p(&dir.path().join("nope.csv")),
        "--out",
        p(&run_dir),
    ]);
    assert_error_line(&out, 3, "train");
}
