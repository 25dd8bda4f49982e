//! Closed-form uniform-stability constants and high-probability
//! generalization bounds for SGD, Adam and AdamW.
//!
//! Every function evaluates its formula as written, including when the result
//! is far larger than the loss range; [`BoundReport::vacuous`] flags that case.
//! `log` is the natural logarithm throughout.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::LossProfile;
use crate::optimizers::OptimizerKind;
use crate::scalar::Scalar;

pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_C: f64 = 0.5;

/// Inputs shared by all six closed forms.
///
/// `eta` is the constant Adam/AdamW rate (the schedule maximum when the rate
/// varies); `eta_steps` holds the per-iteration SGD rates. `alpha` holds the
/// AdamW multipliers and defaults to all ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundInputs<T> {
    pub gamma: T,
    pub max_loss: T,
    pub eta: T,
    pub eta_steps: Option<Vec<T>>,
    pub steps: usize,
    pub n: usize,
    pub batch: usize,
    pub delta: T,
    pub c: T,
    pub lambda: T,
    pub theta_sup: T,
    pub alpha: Option<Vec<T>>,
}

impl<T: Scalar> BoundInputs<T> {
    /// Inputs with `δ` and `c` at their defaults, no weight decay and no
    /// per-step rates.
    pub fn new(gamma: T, max_loss: T, eta: T, steps: usize, n: usize, batch: usize) -> Self {
        BoundInputs {
            gamma,
            max_loss,
            eta,
            eta_steps: None,
            steps,
            n,
            batch,
            delta: T::lit(DEFAULT_DELTA),
            c: T::lit(DEFAULT_C),
            lambda: T::zero(),
            theta_sup: T::zero(),
            alpha: None,
        }
    }

    /// Same inputs with the Lipschitz constant and maximum taken from a profile.
    pub fn with_profile(&self, profile: &LossProfile<T>) -> Self {
        BoundInputs {
            gamma: profile.gamma,
            max_loss: profile.max_value,
            ..self.clone()
        }
    }

    /// Constant per-step SGD rates `eta` repeated `steps` times.
    pub fn with_constant_eta_steps(mut self) -> Self {
        self.eta_steps = Some(vec![self.eta; self.steps]);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("gamma", self.gamma),
            ("max_loss", self.max_loss),
            ("eta", self.eta),
            ("lambda", self.lambda),
            ("theta_sup", self.theta_sup),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        for (name, v) in [("delta", self.delta), ("c", self.c)] {
            if !(v > T::zero() && v < T::one()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        for (name, v) in [("T", self.steps), ("N", self.n), ("b", self.batch)] {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{name} must be at least 1")));
            }
        }
        for (name, list) in [("eta_steps", &self.eta_steps), ("alpha", &self.alpha)] {
            if let Some(list) = list {
                if list.len() != self.steps {
                    return Err(Error::InvalidInput(format!(
                        "{name} has {} entries, expected T = {}",
                        list.len(),
                        self.steps
                    )));
                }
                if let Some(v) = list.iter().find(|v| !(v.is_finite() && **v >= T::zero())) {
                    return Err(Error::InvalidInput(format!(
                        "{name} entry {v} must be finite and nonnegative"
                    )));
                }
            }
        }
        Ok(())
    }

    fn log_term(&self) -> T {
        (T::lit(2.0) / self.delta).ln()
    }

    /// `L √(log(2/δ) / 2N)`, the part of every bound that survives `γ = 0`.
    pub fn concentration_term(&self) -> T {
        self.max_loss * (self.log_term() / (T::lit(2.0) * T::of_usize(self.n))).sqrt()
    }

    fn eta_sum(&self) -> Result<T> {
        self.eta_steps
            .as_ref()
            .map(|e| e.iter().copied().sum())
            .ok_or_else(|| {
                Error::InvalidInput("SGD bounds need the per-step rate list eta_steps".into())
            })
    }

    fn alpha_sum(&self) -> T {
        match &self.alpha {
            Some(a) => a.iter().copied().sum(),
            None => T::of_usize(self.steps),
        }
    }
}

/// Stability constant `β` and bounded-difference constant `ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stability<T> {
    pub beta: T,
    pub rho: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport<T> {
    pub beta: T,
    pub rho: T,
    pub ge_bound: T,
    /// Probability `1 − δ` with which the bound holds.
    pub confidence: T,
    /// The unspecified constant of the Adam/AdamW results, echoed back.
    pub c: T,
    /// The bound exceeds the maximum loss and so says nothing.
    pub vacuous: bool,
}

fn report<T: Scalar>(inputs: &BoundInputs<T>, s: Stability<T>, ge_bound: T) -> BoundReport<T> {
    BoundReport {
        beta: s.beta,
        rho: s.rho,
        ge_bound,
        confidence: T::one() - inputs.delta,
        c: inputs.c,
        vacuous: ge_bound > inputs.max_loss,
    }
}

/// `β ≤ (2γ²/N) Σ η_t`, `ρ ≤ (4γ²/T) Σ η_t`.
pub fn sgd_stability<T: Scalar>(inputs: &BoundInputs<T>) -> Result<Stability<T>> {
    inputs.validate()?;
    let sum = inputs.eta_sum()?;
    let g2 = inputs.gamma * inputs.gamma;
    Ok(Stability {
        beta: T::lit(2.0) * g2 / T::of_usize(inputs.n) * sum,
        rho: T::lit(4.0) * g2 / T::of_usize(inputs.steps) * sum,
    })
}

/// `2γ² Σ η_t (2√(log(2/δ)/T) + √(2 log(2/δ)/N) + 1/N) + L √(log(2/δ)/2N)`.
pub fn sgd_bound<T: Scalar>(inputs: &BoundInputs<T>) -> Result<BoundReport<T>> {
    let s = sgd_stability(inputs)?;
    let two = T::lit(2.0);
    let lg = inputs.log_term();
    let n = T::of_usize(inputs.n);
    let t = T::of_usize(inputs.steps);
    let bracket = two * (lg / t).sqrt() + (two * lg / n).sqrt() + n.recip();
    let ge = two * inputs.gamma * inputs.gamma * inputs.eta_sum()? * bracket
        + inputs.concentration_term();
    Ok(report(inputs, s, ge))
}

/// `β ≤ (2η/c)(bTγ²/N)`, `ρ ≤ (8η/c)(bγ/N)²`.
pub fn adam_stability<T: Scalar>(inputs: &BoundInputs<T>) -> Result<Stability<T>> {
    inputs.validate()?;
    let b = T::of_usize(inputs.batch);
    let n = T::of_usize(inputs.n);
    let t = T::of_usize(inputs.steps);
    let g = inputs.gamma;
    let bg_n = b * g / n;
    Ok(Stability {
        beta: T::lit(2.0) * inputs.eta / inputs.c * (b * t * g * g / n),
        rho: T::lit(8.0) * inputs.eta / inputs.c * bg_n * bg_n,
    })
}

/// `(2η/c)(4(bγ/N)² √(T log(2/δ)) + (bTγ²/N)(1 + √(2N log(2/δ)))) + L √(log(2/δ)/2N)`.
pub fn adam_bound<T: Scalar>(inputs: &BoundInputs<T>) -> Result<BoundReport<T>> {
    let s = adam_stability(inputs)?;
    let two = T::lit(2.0);
    let lg = inputs.log_term();
    let b = T::of_usize(inputs.batch);
    let n = T::of_usize(inputs.n);
    let t = T::of_usize(inputs.steps);
    let g = inputs.gamma;
    let bg_n = b * g / n;
    let first = T::lit(4.0) * bg_n * bg_n * (t * lg).sqrt();
    let second = b * t * g * g / n * (T::one() + (two * n * lg).sqrt());
    let ge = two * inputs.eta / inputs.c * (first + second) + inputs.concentration_term();
    Ok(report(inputs, s, ge))
}

fn adamw_core<T: Scalar>(inputs: &BoundInputs<T>) -> T {
    let g = inputs.gamma;
    inputs.eta * g * g / inputs.c + g * inputs.lambda * inputs.theta_sup
}

/// `β ≤ (2bT/N)(ηγ²/c + γλ‖θ‖_sup) Σ α_t`, `ρ ≤ (8b²/N²)(ηγ²/c + γλ‖θ‖_sup) Σ α_t`.
pub fn adamw_stability<T: Scalar>(inputs: &BoundInputs<T>) -> Result<Stability<T>> {
    inputs.validate()?;
    let b = T::of_usize(inputs.batch);
    let n = T::of_usize(inputs.n);
    let t = T::of_usize(inputs.steps);
    let core = adamw_core(inputs) * inputs.alpha_sum();
    Ok(Stability {
        beta: T::lit(2.0) * b * t / n * core,
        rho: T::lit(8.0) * b * b / (n * n) * core,
    })
}

/// `(2b/N)(ηγ²/c + γλ‖θ‖_sup)((4b/N)√(T log(2/δ)) + T√(2N log(2/δ))) Σ α_t + L √(log(2/δ)/2N)`.
pub fn adamw_bound<T: Scalar>(inputs: &BoundInputs<T>) -> Result<BoundReport<T>> {
    let s = adamw_stability(inputs)?;
    let two = T::lit(2.0);
    let lg = inputs.log_term();
    let b = T::of_usize(inputs.batch);
    let n = T::of_usize(inputs.n);
    let t = T::of_usize(inputs.steps);
    let bracket = T::lit(4.0) * b / n * (t * lg).sqrt() + t * (two * n * lg).sqrt();
    let ge = two * b / n * adamw_core(inputs) * bracket * inputs.alpha_sum()
        + inputs.concentration_term();
    Ok(report(inputs, s, ge))
}

pub fn stability_for<T: Scalar>(
    kind: OptimizerKind,
    inputs: &BoundInputs<T>,
) -> Result<Stability<T>> {
    match kind {
        OptimizerKind::Sgd => sgd_stability(inputs),
        OptimizerKind::Adam => adam_stability(inputs),
        OptimizerKind::Adamw => adamw_stability(inputs),
    }
}

pub fn bound_for<T: Scalar>(
    kind: OptimizerKind,
    inputs: &BoundInputs<T>,
) -> Result<BoundReport<T>> {
    match kind {
        OptimizerKind::Sgd => sgd_bound(inputs),
        OptimizerKind::Adam => adam_bound(inputs),
        OptimizerKind::Adamw => adamw_bound(inputs),
    }
}

/// The same bound evaluated under the CE and RJM constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBoundComparison<T> {
    pub optimizer: OptimizerKind,
    pub ce: BoundReport<T>,
    pub rjm: BoundReport<T>,
}

impl<T: Scalar> LossBoundComparison<T> {
    /// Ordering of the RJM bound relative to the CE bound.
    pub fn ordering(&self) -> Ordering {
        self.rjm
            .ge_bound
            .partial_cmp(&self.ce.ge_bound)
            .unwrap_or(Ordering::Equal)
    }

    pub fn rjm_smaller(&self) -> bool {
        self.ordering() == Ordering::Less
    }
}

/// Evaluates `kind`'s bound with each profile's `(γ, L)`, all other inputs shared.
pub fn compare_losses_bound<T: Scalar>(
    profile_ce: &LossProfile<T>,
    profile_rjm: &LossProfile<T>,
    inputs: &BoundInputs<T>,
    kind: OptimizerKind,
) -> Result<LossBoundComparison<T>> {
    if profile_ce.clamp_eps != profile_rjm.clamp_eps
        || profile_ce.num_classes != profile_rjm.num_classes
    {
        return Err(Error::InvalidInput(format!(
            "profiles differ: eps {} vs {}, C {} vs {}",
            profile_ce.clamp_eps,
            profile_rjm.clamp_eps,
            profile_ce.num_classes,
            profile_rjm.num_classes
        )));
    }
    Ok(LossBoundComparison {
        optimizer: kind,
        ce: bound_for(kind, &inputs.with_profile(profile_ce))?,
        rjm: bound_for(kind, &inputs.with_profile(profile_rjm))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{loss_profile, CrossEntropy, ReducedJm};

    fn base() -> BoundInputs<f64> {
        BoundInputs::new(1.0, 1.0, 0.1, 10, 100, 1).with_constant_eta_steps()
    }

    #[test]
    fn sgd_stability_examples() {
        let s = sgd_stability(&base()).unwrap();
        assert!((s.beta - 0.02).abs() < 1e-15);
        assert!((s.rho - 0.4).abs() < 1e-15);

        let z = sgd_stability(&BoundInputs {
            gamma: 0.0,
            ..base()
        })
        .unwrap();
        assert_eq!((z.beta, z.rho), (0.0, 0.0));

        let d = sgd_stability(&BoundInputs { n: 200, ..base() }).unwrap();
        assert!((d.beta - s.beta / 2.0).abs() < 1e-15);
        assert_eq!(d.rho, s.rho);
    }

    #[test]
    fn sgd_needs_rate_list() {
        let mut i = base();
        i.eta_steps = None;
        assert!(matches!(sgd_stability(&i), Err(Error::InvalidInput(_))));
        i.eta_steps = Some(vec![0.1; 3]);
        assert!(sgd_bound(&i).is_err());
    }

    #[test]
    fn sgd_bound_gamma_zero_reductions() {
        let delta = 2.0 / std::f64::consts::E;
        let i = BoundInputs {
            gamma: 0.0,
            n: 2,
            delta,
            ..base()
        };
        let r = sgd_bound(&i).unwrap();
        assert!((r.ge_bound - 0.5).abs() < 1e-15);
        assert!((r.confidence - (1.0 - delta)).abs() < 1e-15);
    }

    #[test]
    fn delta_and_c_domains() {
        for d in [0.0, 1.0, -0.1, 1.5] {
            assert!(sgd_bound(&BoundInputs { delta: d, ..base() }).is_err());
        }
        for c in [0.0, 1.0] {
            assert!(adam_stability(&BoundInputs { c, ..base() }).is_err());
        }
    }

    #[test]
    fn adam_stability_examples() {
        let i = BoundInputs::<f64>::new(1.0, 1.0, 0.001, 100, 1000, 64);
        let s = adam_stability(&i).unwrap();
        assert!((s.beta - 0.0256).abs() < 1e-15);
        let z = adam_stability(&BoundInputs {
            gamma: 0.0,
            ..i.clone()
        })
        .unwrap();
        assert_eq!((z.beta, z.rho), (0.0, 0.0));
        let t2 = adam_stability(&BoundInputs {
            steps: 200,
            ..i.clone()
        })
        .unwrap();
        let b2 = adam_stability(&BoundInputs {
            batch: 128,
            ..i.clone()
        })
        .unwrap();
        assert!((t2.beta - 2.0 * s.beta).abs() < 1e-15);
        assert!((b2.beta - 2.0 * s.beta).abs() < 1e-15);
    }

    #[test]
    fn adamw_reductions() {
        let i = BoundInputs::<f64>::new(0.7, 1.0, 0.001, 50, 1000, 32);
        let s = adamw_stability(&i).unwrap();
        let expected = 2.0 * 32.0 * 50.0 / 1000.0 * (0.001 * 0.49 / 0.5) * 50.0;
        assert!((s.beta - expected).abs() < 1e-14);

        let z = BoundInputs {
            gamma: 0.0,
            lambda: 3.0,
            theta_sup: 10.0,
            ..i.clone()
        };
        assert_eq!(adamw_stability(&z).unwrap().beta, 0.0);
        let r = adamw_bound(&z).unwrap();
        assert_eq!(r.ge_bound, z.concentration_term());
    }

    #[test]
    fn vacuous_flag() {
        let r = sgd_bound(&BoundInputs {
            gamma: 10.0,
            ..base()
        })
        .unwrap();
        assert!(r.vacuous);
        let r = sgd_bound(&BoundInputs {
            gamma: 0.0,
            n: 10_000,
            ..base()
        })
        .unwrap();
        assert!(!r.vacuous);
    }

    #[test]
    fn rjm_bound_smaller_at_reference_settings() {
        let ce = loss_profile(&CrossEntropy, 1e-7, 6).unwrap();
        let rjm = loss_profile(&ReducedJm, 1e-7, 6).unwrap();
        let mut i = BoundInputs::new(0.0, 0.0, 1e-4, 20 * 63, 4034, 64);
        i.lambda = 0.1;
        i.theta_sup = 100.0;
        let i = i.with_constant_eta_steps();
        for kind in [
            OptimizerKind::Sgd,
            OptimizerKind::Adam,
            OptimizerKind::Adamw,
        ] {
            let cmp = compare_losses_bound(&ce, &rjm, &i, kind).unwrap();
            assert!(cmp.rjm_smaller(), "{kind}");
            let same = compare_losses_bound(&ce, &ce, &i, kind).unwrap();
            assert_eq!(same.ordering(), Ordering::Equal);
        }
    }

    #[test]
    fn mismatched_profiles_rejected() {
        let ce = loss_profile(&CrossEntropy, 1e-7, 6).unwrap();
        let rjm = loss_profile(&ReducedJm, 1e-6, 6).unwrap();
        assert!(compare_losses_bound(&ce, &rjm, &base(), OptimizerKind::Adam).is_err());
        let rjm = loss_profile(&ReducedJm, 1e-7, 5).unwrap();
        assert!(compare_losses_bound(&ce, &rjm, &base(), OptimizerKind::Adam).is_err());
    }
}
