use serde::{Deserialize, Serialize};

use super::LrSchedule;
use crate::error::{Error, Result};
use crate::numerics::{l2_norm, Vector};
use crate::scalar::Scalar;

/// Denominator guard in the Adam update.
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
    Adamw,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adamw => "adamw",
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            "adamw" => Ok(OptimizerKind::Adamw),
            other => Err(format!(
                "unknown optimizer '{other}' (expected sgd, adam or adamw)"
            )),
        }
    }
}

/// Rate and moment coefficients for one Adam/AdamW step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamHyper<T> {
    pub eta: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
}

impl<T: Scalar> AdamHyper<T> {
    pub fn new(eta: T, beta1: T, beta2: T) -> Self {
        AdamHyper {
            eta,
            beta1,
            beta2,
            eps: T::lit(ADAM_EPS),
        }
    }
}

/// First and second moment accumulators, starting from zero.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState<T> {
    pub m: Vector<T>,
    pub v: Vector<T>,
    pub t: u64,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(len: usize) -> Self {
        OptimizerState {
            m: Vector::zeros(len),
            v: Vector::zeros(len),
            t: 0,
        }
    }
}

fn check_len<T>(theta: &[T], other: &[T], what: &str) -> Result<()> {
    if theta.len() != other.len() {
        return Err(Error::shape(theta.len(), other.len(), what));
    }
    Ok(())
}

/// `θ − η g`.
pub fn sgd_step<T: Scalar>(theta: &[T], grad: &[T], eta: T) -> Result<Vector<T>> {
    check_len(theta, grad, "sgd gradient")?;
    Ok(theta.iter().zip(grad).map(|(&p, &g)| p - eta * g).collect())
}

/// Advances the moments and returns the bias-corrected direction
/// `η m̂ / (√v̂ + ε)` for each coordinate.
fn adam_direction<T: Scalar>(
    grad: &[T],
    state: &OptimizerState<T>,
    hyper: &AdamHyper<T>,
) -> (Vec<T>, OptimizerState<T>) {
    let t = state.t + 1;
    let b1 = hyper.beta1;
    let b2 = hyper.beta2;
    let bias1 = T::one() - b1.powi(t as i32);
    let bias2 = T::one() - b2.powi(t as i32);
    let mut m = state.m.clone();
    let mut v = state.v.clone();
    let mut dir = Vec::with_capacity(grad.len());
    for ((mi, vi), &g) in m.iter_mut().zip(v.iter_mut()).zip(grad) {
        *mi = b1 * *mi + (T::one() - b1) * g;
        *vi = b2 * *vi + (T::one() - b2) * g * g;
        let m_hat = *mi / bias1;
        let v_hat = *vi / bias2;
        dir.push(hyper.eta * m_hat / (v_hat.sqrt() + hyper.eps));
    }
    (dir, OptimizerState { m, v, t })
}

/// One Adam step: moment updates, bias correction, then
/// `θ ← θ − η m̂ / (√v̂ + ε)`, all elementwise.
pub fn adam_step<T: Scalar>(
    theta: &[T],
    grad: &[T],
    state: &OptimizerState<T>,
    hyper: &AdamHyper<T>,
) -> Result<(Vector<T>, OptimizerState<T>)> {
    check_len(theta, grad, "adam gradient")?;
    check_len(theta, &state.m, "adam state")?;
    let (dir, next) = adam_direction(grad, state, hyper);
    let theta = theta.iter().zip(&dir).map(|(&p, &d)| p - d).collect();
    Ok((theta, next))
}

/// One AdamW step: `θ ← θ − α_t (η m̂ / (√v̂ + ε) + λ θ)`.
///
/// The decay acts on the parameters directly; the gradient is the plain loss
/// gradient.
pub fn adamw_step<T: Scalar>(
    theta: &[T],
    grad: &[T],
    state: &OptimizerState<T>,
    hyper: &AdamHyper<T>,
    weight_decay: T,
    alpha_t: T,
) -> Result<(Vector<T>, OptimizerState<T>)> {
    check_len(theta, grad, "adamw gradient")?;
    check_len(theta, &state.m, "adamw state")?;
    let (dir, next) = adam_direction(grad, state, hyper);
    let theta = theta
        .iter()
        .zip(&dir)
        .map(|(&p, &d)| p - alpha_t * (d + weight_decay * p))
        .collect();
    Ok((theta, next))
}

/// `ℓ + (λ / 2b) ‖θ‖²`.
pub fn regularized_loss<T: Scalar>(loss: T, theta: &[T], lambda: T, batch_size: usize) -> T {
    let norm = l2_norm(theta);
    loss + lambda / (T::lit(2.0) * T::of_usize(batch_size.max(1))) * norm * norm
}

fn default_beta1<T: Scalar>() -> T {
    T::lit(0.9)
}

fn default_beta2<T: Scalar>() -> T {
    T::lit(0.999)
}

fn default_eps<T: Scalar>() -> T {
    T::lit(ADAM_EPS)
}

fn default_batch_size() -> usize {
    32
}

/// Optimizer choice plus every hyper-parameter it reads.
///
/// SGD ignores the betas and weight decay, Adam ignores weight decay. `alpha`
/// holds one AdamW schedule multiplier per epoch; when absent it is 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OptimizerConfig<T> {
    pub kind: OptimizerKind,
    pub schedule: LrSchedule<T>,
    #[serde(default = "default_beta1")]
    pub beta1: T,
    #[serde(default = "default_beta2")]
    pub beta2: T,
    #[serde(default = "default_eps")]
    pub eps: T,
    #[serde(default)]
    pub weight_decay: T,
    #[serde(default)]
    pub alpha: Option<Vec<T>>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn new(kind: OptimizerKind, schedule: LrSchedule<T>) -> Self {
        OptimizerConfig {
            kind,
            schedule,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
            weight_decay: T::zero(),
            alpha: None,
            batch_size: default_batch_size(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: T| x > T::zero() && x < T::one();
        if self.kind != OptimizerKind::Sgd && !(unit(self.beta1) && unit(self.beta2)) {
            return Err(Error::Config(format!(
                "beta1={} and beta2={} must lie in (0, 1)",
                self.beta1, self.beta2
            )));
        }
        if self.eps.is_nan() || self.eps <= T::zero() {
            return Err(Error::Config("adam eps must be positive".into()));
        }
        if !(self.weight_decay >= T::zero() && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!(
                "weight decay must be finite and nonnegative, got {}",
                self.weight_decay
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if let Some(alpha) = &self.alpha {
            if let Some(a) = alpha.iter().find(|a| !(**a > T::zero() && a.is_finite())) {
                return Err(Error::Config(format!(
                    "schedule multiplier {a} must be positive"
                )));
            }
        }
        Ok(())
    }

    /// AdamW multiplier for a 1-based epoch.
    pub fn alpha_at(&self, epoch: usize) -> Result<T> {
        match &self.alpha {
            None => Ok(T::one()),
            Some(a) => a.get(epoch.wrapping_sub(1)).copied().ok_or_else(|| {
                Error::Config(format!(
                    "no schedule multiplier for epoch {epoch} ({} given)",
                    a.len()
                ))
            }),
        }
    }

    pub fn hyper(&self, eta: T) -> AdamHyper<T> {
        AdamHyper {
            eta,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }
}

/// A configured optimizer bound to its running state.
#[derive(Clone, Debug)]
pub struct Optimizer<T> {
    config: OptimizerConfig<T>,
    state: OptimizerState<T>,
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(config: OptimizerConfig<T>, num_params: usize) -> Result<Self> {
        config.validate()?;
        Ok(Optimizer {
            config,
            state: OptimizerState::new(num_params),
        })
    }

    pub fn config(&self) -> &OptimizerConfig<T> {
        &self.config
    }

    pub fn state(&self) -> &OptimizerState<T> {
        &self.state
    }

    /// Applies one update with the rate scheduled for `epoch`.
    pub fn step(&mut self, theta: &[T], grad: &[T], epoch: usize) -> Result<Vector<T>> {
        let eta = self.config.schedule.rate_at(epoch)?;
        match self.config.kind {
            OptimizerKind::Sgd => sgd_step(theta, grad, eta),
            OptimizerKind::Adam => {
                let (next, state) = adam_step(theta, grad, &self.state, &self.config.hyper(eta))?;
                self.state = state;
                Ok(next)
            }
            OptimizerKind::Adamw => {
                let alpha = self.config.alpha_at(epoch)?;
                let (next, state) = adamw_step(
                    theta,
                    grad,
                    &self.state,
                    &self.config.hyper(eta),
                    self.config.weight_decay,
                    alpha,
                )?;
                self.state = state;
                Ok(next)
            }
        }
    }
}
