use rjm_core::losses::checks::{
    check_boundedness, check_convexity, check_derivative_ordering_between, check_gradient,
    check_lipschitz, check_loss_ordering, CheckReport,
};
use rjm_core::losses::{validate_clamp_eps, ScalarLink};
use rjm_core::numerics::SeededRng;

use crate::args::{GlobalArgs, VerifyArgs};
use crate::CliError;

/// Settings for [`run_suite`].
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub trials: usize,
    pub eps: f64,
    pub classes: Vec<usize>,
    pub grid_points: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            trials: 100_000,
            eps: 1e-7,
            classes: vec![2, 6, 100],
            grid_points: 1_000_000,
            seed: 0,
        }
    }
}

const CONVEXITY_SLACK: f64 = 1e-12;
const ORDERING_SLACK: f64 = 1e-12;
const FD_STEP: f64 = 1e-6;
const FD_TOLERANCE: f64 = 1e-6;
const CLAMP_MAX_TOLERANCE: f64 = 1e-12;

/// Runs every loss property check for the pair `(ce, rjm)`: `rjm` must sit
/// below `ce` in value and slope, both must be convex, Lipschitz and bounded,
/// analytic gradients must match finite differences, and each maximum must
/// be reached at the clamp boundary.
pub fn run_suite(
    opts: &SuiteOptions,
    ce: &dyn ScalarLink<f64>,
    rjm: &dyn ScalarLink<f64>,
) -> rjm_core::Result<Vec<CheckReport>> {
    validate_clamp_eps(opts.eps)?;
    let mut rng = SeededRng::new(opts.seed);
    let eps = opts.eps;
    let mut reports = Vec::new();

    let mut r = check_loss_ordering(
        rjm,
        ce,
        eps,
        &opts.classes,
        opts.trials,
        ORDERING_SLACK,
        &mut rng,
    )?;
    r.name = format!("loss ordering ({} <= {})", rjm.name(), ce.name());
    reports.push(r);
    let mut r = check_derivative_ordering_between(rjm, ce, eps, opts.grid_points);
    r.name = format!(
        "derivative ordering (|{}'| <= |{}'|)",
        rjm.name(),
        ce.name()
    );
    reports.push(r);

    for link in [ce, rjm] {
        for &c in &opts.classes {
            let mut r = check_convexity(link, c, eps, opts.trials, CONVEXITY_SLACK, &mut rng)?;
            r.name = format!("{} C={c}", r.name);
            reports.push(r);
        }
        for &c in &opts.classes {
            // Each case checks all C coordinates.
            let cases = (opts.trials / c).max(1);
            let mut r = check_gradient(link, c, cases, FD_STEP, FD_TOLERANCE, &mut rng)?;
            r.name = format!("{} C={c}", r.name);
            reports.push(r);
        }
        for &c in &opts.classes {
            let mut r = check_lipschitz(link, c, eps, opts.trials, &mut rng)?;
            r.name = format!("{} C={c}", r.name);
            reports.push(r);
        }
        for &c in &opts.classes {
            let (mut r, observed) =
                check_boundedness(link, eps, c, opts.grid_points, opts.trials, &mut rng)?;
            r.name = format!("{} C={c}", r.name);
            reports.push(r);
            let expected = link.h(eps);
            let mut m = CheckReport::new(&format!("maximum at clamp ({}) C={c}", link.name()));
            m.record(
                (observed - expected).abs() - CLAMP_MAX_TOLERANCE,
                String::new,
            );
            m.worst_case = format!("max={observed:.15e} h(eps)={expected:.15e}");
            reports.push(m);
        }
    }
    Ok(reports)
}

fn print_table(reports: &[CheckReport]) {
    let width = reports
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(8)
        .max(8);
    println!(
        "{:<width$}  {:>9}  {:>10}  {:>12}  status  worst case",
        "property", "cases", "violations", "worst excess"
    );
    for r in reports {
        println!(
            "{:<width$}  {:>9}  {:>10}  {:>12.3e}  {:<6}  {}",
            r.name,
            r.cases,
            r.violations,
            r.worst_excess,
            if r.passed() { "PASS" } else { "FAIL" },
            r.worst_case
        );
    }
}

/// `verify-losses` with caller-supplied links in place of CE and RJM.
pub fn verify_losses_with(
    g: &GlobalArgs,
    a: &VerifyArgs,
    ce: &dyn ScalarLink<f64>,
    rjm: &dyn ScalarLink<f64>,
) -> Result<(), CliError> {
    let defaults = SuiteOptions::default();
    let opts = SuiteOptions {
        trials: a.trials.unwrap_or(defaults.trials),
        eps: a.eps.unwrap_or(defaults.eps),
        classes: a.classes.clone().unwrap_or(defaults.classes),
        grid_points: a.grid_points.unwrap_or(defaults.grid_points),
        seed: g.seed.unwrap_or(defaults.seed),
    };
    if opts.trials == 0 || opts.grid_points < 2 {
        return Err(CliError::config(
            "--trials must be positive and --grid-points at least 2",
        ));
    }
    if opts.classes.is_empty() || opts.classes.iter().any(|&c| c < 2) {
        return Err(CliError::config("--classes must list counts of at least 2"));
    }
    let reports = run_suite(&opts, ce, rjm)?;
    if !g.quiet {
        print_table(&reports);
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.name.as_str())
        .collect();
    if failed.is_empty() {
        if !g.quiet {
            println!("all {} checks passed", reports.len());
        }
        Ok(())
    } else {
        Err(CliError::property(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            reports.len(),
            failed.join("; ")
        )))
    }
}
