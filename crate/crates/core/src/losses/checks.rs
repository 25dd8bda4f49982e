//! Sampling and grid checks of the inequalities the two losses satisfy.
//!
//! Each check returns a report rather than panicking so the CLI can print a
//! table and the worst counterexample.

use std::fmt;

use super::{
    clamp_probs, identity_loss, loss_grad, loss_profile, CrossEntropy, OneHotTarget, ReducedJm,
    ScalarLink,
};
use crate::error::Result;
use crate::numerics::{l2_norm, softmax, SeededRng};
use crate::scalar::Scalar;

/// Outcome of one property check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    /// Largest amount by which the inequality was exceeded (≤ 0 when it held
    /// everywhere; then it is the tightest margin observed).
    pub worst_excess: f64,
    /// Human-readable description of the worst case.
    pub worst_case: String,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            cases: 0,
            violations: 0,
            worst_excess: f64::NEG_INFINITY,
            worst_case: String::new(),
        }
    }

    /// Records `excess = lhs - rhs - slack` for one case.
    pub fn record(&mut self, excess: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if excess > 0.0 {
            self.violations += 1;
        }
        if excess > self.worst_excess {
            self.worst_excess = excess;
            self.worst_case = describe();
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<24} {:<4} cases={:<8} violations={:<6} worst_excess={:+.3e}  {}",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases,
            self.violations,
            self.worst_excess,
            self.worst_case
        )
    }
}

/// Random probability vector over `num_classes` classes, spanning from nearly
/// uniform to nearly one-hot (logit scale drawn log-uniformly in `[0.1, 30]`).
pub fn random_probabilities<T: Scalar>(rng: &mut SeededRng, num_classes: usize) -> Vec<T> {
    let scale = (rng.uniform_in(0.1_f64.ln(), 30.0_f64.ln())).exp();
    let logits: Vec<T> = (0..num_classes)
        .map(|_| T::lit(scale) * rng.standard_normal::<T>())
        .collect();
    softmax(&logits).expect("finite logits").as_slice().to_vec()
}

fn random_case<T: Scalar>(
    rng: &mut SeededRng,
    num_classes: usize,
    eps: T,
) -> (Vec<T>, OneHotTarget) {
    let yhat = clamp_probs(&random_probabilities::<T>(rng, num_classes), eps);
    let y = OneHotTarget::new(rng.below(num_classes), num_classes).expect("class in range");
    (yhat.as_slice().to_vec(), y)
}

/// `ℓ_lower(ŷ, y) ≤ ℓ_upper(ŷ, y) + slack` on random clamped pairs.
pub fn check_loss_ordering<T: Scalar>(
    lower: &dyn ScalarLink<T>,
    upper: &dyn ScalarLink<T>,
    eps: T,
    class_counts: &[usize],
    trials_per_count: usize,
    slack: f64,
    rng: &mut SeededRng,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("loss ordering");
    for &c in class_counts {
        for _ in 0..trials_per_count {
            let (yhat, y) = random_case(rng, c, eps);
            let lo = identity_loss(lower, &yhat, &y)?.to_f64_lossy();
            let hi = identity_loss(upper, &yhat, &y)?.to_f64_lossy();
            report.record(lo - hi - slack, || {
                format!(
                    "C={c} p_true={:.6e} {}={lo:.6e} {}={hi:.6e}",
                    yhat[y.class_index()].to_f64_lossy(),
                    lower.name(),
                    upper.name()
                )
            });
        }
    }
    Ok(report)
}

/// Log-spaced grid of `points` values over `[lo, 1]`, endpoints included.
pub fn log_grid(lo: f64, points: usize) -> impl Iterator<Item = f64> {
    let log_lo = lo.ln();
    let last = points.saturating_sub(1).max(1) as f64;
    (0..points).map(move |i| {
        if i + 1 == points {
            1.0
        } else if i == 0 {
            lo
        } else {
            (log_lo * (1.0 - i as f64 / last)).exp()
        }
    })
}

/// `|h'_lower(x)| ≤ |h'_upper(x)|` on a log-spaced grid over `[eps, 1]`.
///
/// `worst_excess` is negative when the ordering holds; the largest ratio
/// `|h'_lower| / |h'_upper|` is reported in the worst case text.
pub fn check_derivative_ordering_between<T: Scalar>(
    lower: &dyn ScalarLink<T>,
    upper: &dyn ScalarLink<T>,
    eps: f64,
    grid_points: usize,
) -> CheckReport {
    let mut report = CheckReport::new("derivative ordering");
    let mut max_ratio = 0.0_f64;
    let mut max_ratio_at = eps;
    for x in log_grid(eps, grid_points) {
        let xt = T::lit(x);
        let a = lower.dh(xt).abs().to_f64_lossy();
        let b = upper.dh(xt).abs().to_f64_lossy();
        if a / b > max_ratio {
            max_ratio = a / b;
            max_ratio_at = x;
        }
        report.record(a - b, || {
            format!(
                "x={x:.6e} |{}'|={a:.6e} |{}'|={b:.6e}",
                lower.name(),
                upper.name()
            )
        });
    }
    report.worst_case = format!(
        "{}; max ratio {max_ratio:.6} at x={max_ratio_at:.3e}",
        report.worst_case
    );
    report
}

/// `|h'_RJM(x)| ≤ |h'_CE(x)|` on `[eps, 1]`.
pub fn check_derivative_ordering(eps: f64, grid_points: usize) -> CheckReport {
    check_derivative_ordering_between::<f64>(&ReducedJm, &CrossEntropy, eps, grid_points)
}

/// `I(t u + (1-t) v, y) - t I(u, y) - (1-t) I(v, y)`; nonpositive for convex links.
pub fn jensen_gap<T: Scalar>(
    link: &dyn ScalarLink<T>,
    u: &[T],
    v: &[T],
    y: &OneHotTarget,
    t: T,
) -> Result<T> {
    let s = T::one() - t;
    let mix: Vec<T> = u.iter().zip(v).map(|(&a, &b)| t * a + s * b).collect();
    let lhs = identity_loss(link, &mix, y)?;
    let rhs = t * identity_loss(link, u, y)? + s * identity_loss(link, v, y)?;
    Ok(lhs - rhs)
}

/// Jensen sampling test of convexity on random clamped pairs.
pub fn check_convexity<T: Scalar>(
    link: &dyn ScalarLink<T>,
    num_classes: usize,
    eps: T,
    trials: usize,
    slack: f64,
    rng: &mut SeededRng,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(&format!("convexity ({})", link.name()));
    for _ in 0..trials {
        let (u, y) = random_case(rng, num_classes, eps);
        let (v, _) = random_case(rng, num_classes, eps);
        let t: T = rng.uniform();
        let gap = jensen_gap(link, &u, &v, &y, t)?.to_f64_lossy();
        report.record(gap - slack, || format!("t={t} gap={gap:.3e}"));
    }
    Ok(report)
}

/// Analytic `∇_ŷ ℓ` against central differences of `h` at the true class.
///
/// True-class probabilities are drawn from `[0.01, 1]`, well inside the clamp,
/// and the reported excess is `rel_error - tolerance`.
pub fn check_gradient(
    link: &dyn ScalarLink<f64>,
    num_classes: usize,
    trials: usize,
    step: f64,
    tolerance: f64,
    rng: &mut SeededRng,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(&format!("gradient ({})", link.name()));
    for _ in 0..trials {
        let mut yhat = random_probabilities::<f64>(rng, num_classes);
        let y = OneHotTarget::new(rng.below(num_classes), num_classes)?;
        let p = rng.uniform_in(0.01, 1.0);
        yhat[y.class_index()] = p;
        let analytic = loss_grad(link, &yhat, &y)?;
        for c in 0..num_classes {
            let mut plus = yhat.clone();
            let mut minus = yhat.clone();
            plus[c] += step;
            minus[c] -= step;
            let numeric =
                (identity_loss(link, &plus, &y)? - identity_loss(link, &minus, &y)?) / (2.0 * step);
            let scale = analytic[c].abs().max(numeric.abs()).max(1e-8);
            let rel = (analytic[c] - numeric).abs() / scale;
            report.record(rel - tolerance, || {
                format!(
                    "p={p:.6} coord={c} analytic={:.9e} numeric={numeric:.9e}",
                    analytic[c]
                )
            });
        }
    }
    Ok(report)
}

/// `|ℓ(u, y) - ℓ(v, y)| ≤ γ ‖u - v‖` on random clamped pairs, with `γ` from
/// the link's [`LossProfile`](super::LossProfile).
pub fn check_lipschitz<T: Scalar>(
    link: &dyn ScalarLink<T>,
    num_classes: usize,
    eps: T,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<CheckReport> {
    let gamma = loss_profile(link, eps, num_classes)?.gamma.to_f64_lossy();
    let mut report = CheckReport::new(&format!("lipschitz ({})", link.name()));
    for _ in 0..trials {
        let (u, y) = random_case(rng, num_classes, eps);
        let (v, _) = random_case(rng, num_classes, eps);
        let diff: Vec<T> = u.iter().zip(&v).map(|(&a, &b)| a - b).collect();
        let dist = l2_norm(&diff).to_f64_lossy();
        let change = (identity_loss(link, &u, &y)? - identity_loss(link, &v, &y)?)
            .abs()
            .to_f64_lossy();
        let bound = gamma * dist;
        report.record(change - bound - 1e-12 * bound.max(1.0), || {
            format!("|dl|={change:.6e} gamma*|du|={bound:.6e}")
        });
    }
    Ok(report)
}

/// Maximum of the loss over a log grid of true-class probabilities plus random
/// clamped cases, against the profile's `max_value`.
///
/// `worst_case` carries the observed maximum; the clamp boundary itself is
/// always part of the grid.
pub fn check_boundedness(
    link: &dyn ScalarLink<f64>,
    eps: f64,
    num_classes: usize,
    grid_points: usize,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<(CheckReport, f64)> {
    let bound = loss_profile(link, eps, num_classes)?.max_value;
    let mut report = CheckReport::new(&format!("boundedness ({})", link.name()));
    let mut observed = f64::NEG_INFINITY;
    let y = OneHotTarget::new(0, num_classes)?;
    for x in log_grid(eps, grid_points) {
        let mut yhat = vec![(1.0 - x) / (num_classes - 1).max(1) as f64; num_classes];
        yhat[0] = x;
        let yhat = clamp_probs(&yhat, eps);
        let l = identity_loss(link, &yhat, &y)?;
        observed = observed.max(l);
        report.record(l - bound, || {
            format!("x={x:.6e} loss={l:.9e} bound={bound:.9e}")
        });
    }
    for _ in 0..trials {
        let (yhat, y) = random_case(rng, num_classes, eps);
        let l = identity_loss(link, &yhat, &y)?;
        observed = observed.max(l);
        report.record(l - bound, || {
            format!("random loss={l:.9e} bound={bound:.9e}")
        });
    }
    report.worst_case = format!("max={observed:.12e} bound={bound:.12e}");
    Ok((report, observed))
}
