//! Cross-entropy and Reduced Jeffries-Matusita as identity-form losses.
//!
//! Both losses are written `ℓ(ŷ, y) = Σ_c y_c · h(ŷ_c)` for a scalar link `h`,
//! so the loss value and its gradient depend only on the true-class
//! probability. Probabilities are clamped into `[eps, 1]` before evaluation;
//! on that interval every constant in [`LossProfile`] is finite.

pub mod checks;
mod link;

use std::ops::Deref;

use serde::{Deserialize, Serialize};

pub use link::{CrossEntropy, LossKind, ReducedJm, ScalarLink};

use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::scalar::Scalar;

/// Default probability floor.
pub const DEFAULT_CLAMP_EPS: f64 = 1e-7;

/// Predicted class probabilities `ŷ`.
///
/// Vectors built with [`ProbabilityVector::new`] have entries in `[0, 1]`
/// summing to one. [`clamp_probs`] output keeps the entries in `[eps, 1]` but
/// is not renormalized, so its sum can exceed one by at most `C · eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector<T>(Vec<T>);

impl<T: Scalar> ProbabilityVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty probability vector".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= T::zero() && **v <= T::one()))
        {
            return Err(Error::InvalidInput(format!(
                "probability at index {i} is {v}, outside [0, 1]"
            )));
        }
        let sum: T = values.iter().copied().sum();
        let tol = T::lit(1e-9).max(T::of_usize(values.len()) * T::epsilon() * T::lit(4.0));
        if (sum - T::one()).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(ProbabilityVector(values))
    }

    pub(crate) fn from_trusted(values: Vec<T>) -> Self {
        ProbabilityVector(values)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// Index of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

impl<T> Deref for ProbabilityVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// One-hot label `y`, stored as its class index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OneHotTarget {
    class_index: usize,
    num_classes: usize,
}

impl OneHotTarget {
    pub fn new(class_index: usize, num_classes: usize) -> Result<Self> {
        if class_index >= num_classes {
            return Err(Error::InvalidInput(format!(
                "class index {class_index} out of range for {num_classes} classes"
            )));
        }
        Ok(OneHotTarget {
            class_index,
            num_classes,
        })
    }

    pub fn class_index(&self) -> usize {
        self.class_index
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn to_vector<T: Scalar>(&self) -> Vector<T> {
        (0..self.num_classes)
            .map(|c| {
                if c == self.class_index {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect()
    }
}

fn check_dims<T>(yhat: &[T], y: &OneHotTarget) -> Result<()> {
    if yhat.len() != y.num_classes {
        return Err(Error::shape(
            y.num_classes,
            yhat.len(),
            "prediction vs target classes",
        ));
    }
    Ok(())
}

/// `Σ_c y_c · h(ŷ_c)`, i.e. `h` at the true-class probability.
///
/// `yhat` is expected to be clamped already.
pub fn identity_loss<T: Scalar, L: ScalarLink<T> + ?Sized>(
    link: &L,
    yhat: &[T],
    y: &OneHotTarget,
) -> Result<T> {
    check_dims(yhat, y)?;
    Ok(link.h(yhat[y.class_index]))
}

pub fn ce_loss<T: Scalar>(yhat: &[T], y: &OneHotTarget) -> Result<T> {
    identity_loss(&CrossEntropy, yhat, y)
}

pub fn rjm_loss<T: Scalar>(yhat: &[T], y: &OneHotTarget) -> Result<T> {
    identity_loss(&ReducedJm, yhat, y)
}

/// Gradient with respect to `ŷ`: component `c` is `y_c · h'(ŷ_c)`.
pub fn loss_grad<T: Scalar, L: ScalarLink<T> + ?Sized>(
    link: &L,
    yhat: &[T],
    y: &OneHotTarget,
) -> Result<Vector<T>> {
    check_dims(yhat, y)?;
    let mut g = Vector::zeros(yhat.len());
    g[y.class_index] = link.dh(yhat[y.class_index]);
    Ok(g)
}

/// Clips every probability into `[eps, 1]` without renormalizing.
pub fn clamp_probs<T: Scalar>(yhat: &[T], eps: T) -> ProbabilityVector<T> {
    ProbabilityVector(yhat.iter().map(|&p| p.max(eps).min(T::one())).collect())
}

/// Loss on the clamped probabilities and its gradient with respect to the
/// unclamped ones.
///
/// The clamp passes the gradient through unchanged where `raw` already lies in
/// `[eps, 1]` and blocks it where it was clipped.
pub fn clamped_loss_and_grad<T: Scalar, L: ScalarLink<T> + ?Sized>(
    link: &L,
    raw: &[T],
    y: &OneHotTarget,
    eps: T,
) -> Result<(T, Vector<T>)> {
    let clamped = clamp_probs(raw, eps);
    let loss = identity_loss(link, &clamped, y)?;
    let mut grad = loss_grad(link, &clamped, y)?;
    for (g, &p) in grad.iter_mut().zip(raw) {
        if p < eps || p > T::one() {
            *g = T::zero();
        }
    }
    Ok((loss, grad))
}

/// Constants of a loss on the clamped domain `[eps, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossProfile<T> {
    pub clamp_eps: T,
    pub num_classes: usize,
    /// `sup |h'|` on `[eps, 1]`.
    pub gamma_h: T,
    /// Lipschitz constant of the vector loss, `gamma_h · √C`.
    pub gamma: T,
    /// `sup |h''|` on `[eps, 1]`; bounds the spectral norm of the diagonal Hessian.
    pub zeta: T,
    /// Maximum loss value `L = h(eps)`.
    pub max_value: T,
}

pub fn validate_clamp_eps<T: Scalar>(eps: T) -> Result<()> {
    if !(eps > T::zero() && eps < T::lit(0.5)) {
        return Err(Error::InvalidInput(format!(
            "clamp eps must lie in (0, 0.5), got {eps}"
        )));
    }
    Ok(())
}

pub fn loss_profile<T: Scalar, L: ScalarLink<T> + ?Sized>(
    link: &L,
    eps: T,
    num_classes: usize,
) -> Result<LossProfile<T>> {
    validate_clamp_eps(eps)?;
    if num_classes == 0 {
        return Err(Error::InvalidInput(
            "loss profile needs at least one class".into(),
        ));
    }
    let gamma_h = link.sup_abs_dh(eps);
    Ok(LossProfile {
        clamp_eps: eps,
        num_classes,
        gamma_h,
        gamma: gamma_h * T::of_usize(num_classes).sqrt(),
        zeta: link.sup_abs_d2h(eps),
        max_value: link.max_value(eps),
    })
}
