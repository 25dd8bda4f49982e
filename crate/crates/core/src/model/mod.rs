//! Fixed-architecture multilayer perceptron with explicit backpropagation.
//!
//! Parameters are flattened layer by layer: the weight matrix of layer 0
//! (row-major, `out × in`), then its biases, then layer 1, and so on.
//! Backpropagation chains the loss gradient with respect to the output
//! probabilities through the softmax Jacobian, so any identity-form loss plugs
//! in unchanged.

mod checkpoint;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

pub use checkpoint::{
    load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION,
};

use crate::error::{Error, Result};
use crate::losses::{clamped_loss_and_grad, OneHotTarget, ProbabilityVector, ScalarLink};
use crate::numerics::{matvec, matvec_transposed, softmax, Matrix, SeededRng, Vector};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl std::str::FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(format!(
                "unknown activation '{other}' (expected relu or tanh)"
            )),
        }
    }
}

impl Activation {
    fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative given the pre-activation `z` and the activation `a`.
    /// The ReLU subgradient at 0 is 0.
    fn derivative<T: Scalar>(self, z: T, a: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - a * a,
        }
    }
}

fn default_init_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    /// `[d_in, hidden..., C]`.
    pub layer_sizes: Vec<usize>,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default)]
    pub init_seed: u64,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

impl MlpConfig {
    pub fn new(layer_sizes: Vec<usize>) -> Self {
        MlpConfig {
            layer_sizes,
            activation: Activation::default(),
            init_seed: 0,
            init_scale: default_init_scale(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "layer_sizes needs at least input and output sizes, got {:?}",
                self.layer_sizes
            )));
        }
        if self.layer_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "layer sizes must be positive: {:?}",
                self.layer_sizes
            )));
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::Config(format!(
                "init_scale must be finite and nonnegative, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.layer_sizes.last().expect("validated")
    }

    /// Total parameter count `K`.
    pub fn num_params(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer<T> {
    /// `out × in`.
    pub weights: Matrix<T>,
    pub biases: Vector<T>,
}

static NEXT_GENERATION: AtomicU64 = AtomicU64::new(1);

fn next_generation() -> u64 {
    NEXT_GENERATION.fetch_add(1, Ordering::Relaxed)
}

#[derive(Clone, Debug)]
pub struct Mlp<T> {
    config: MlpConfig,
    layers: Vec<Layer<T>>,
    /// Identifies the parameter values a [`ForwardCache`] was computed with.
    generation: u64,
}

impl<T: Scalar> PartialEq for Mlp<T> {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.layers == other.layers
    }
}

/// Activations recorded by [`Mlp::forward`] for the matching backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    generation: u64,
    /// Input to each layer; `inputs[0]` is `x`.
    inputs: Vec<Vector<T>>,
    /// Hidden pre-activations, one per hidden layer.
    pre_activations: Vec<Vector<T>>,
    probs: ProbabilityVector<T>,
}

impl<T> ForwardCache<T> {
    pub fn probs(&self) -> &ProbabilityVector<T> {
        &self.probs
    }
}

/// Gradient with respect to the logits given the gradient with respect to
/// `p = softmax(logits)`: `p ⊙ (g − ⟨p, g⟩)`.
pub fn softmax_backward<T: Scalar>(probs: &[T], upstream: &[T]) -> Result<Vector<T>> {
    if probs.len() != upstream.len() {
        return Err(Error::shape(
            probs.len(),
            upstream.len(),
            "softmax_backward",
        ));
    }
    let inner: T = probs.iter().zip(upstream).map(|(&p, &g)| p * g).sum();
    Ok(probs
        .iter()
        .zip(upstream)
        .map(|(&p, &g)| p * (g - inner))
        .collect())
}

impl<T: Scalar> Mlp<T> {
    /// Weights uniform in `±init_scale/√fan_in` from `init_seed`, biases zero.
    pub fn init(config: MlpConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = SeededRng::new(config.init_seed);
        let layers = config
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let s = T::lit(config.init_scale / (fan_in as f64).sqrt());
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.uniform_in(-s, s))
                    .collect();
                Layer {
                    weights: Matrix::from_row_major(fan_out, fan_in, data).expect("sized"),
                    biases: Vector::zeros(fan_out),
                }
            })
            .collect();
        Ok(Mlp {
            config,
            layers,
            generation: next_generation(),
        })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn num_params(&self) -> usize {
        self.config.num_params()
    }

    pub fn num_classes(&self) -> usize {
        self.config.num_classes()
    }

    pub fn flatten(&self) -> Vector<T> {
        let mut theta = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            theta.extend_from_slice(l.weights.as_slice());
            theta.extend_from_slice(&l.biases);
        }
        theta.into()
    }

    /// Copy of this model carrying the parameters `theta`.
    pub fn unflatten(&self, theta: &[T]) -> Result<Self> {
        let mut m = self.clone();
        m.set_params(theta)?;
        Ok(m)
    }

    pub fn set_params(&mut self, theta: &[T]) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(Error::shape(
                self.num_params(),
                theta.len(),
                "flattened parameters",
            ));
        }
        let mut offset = 0;
        for l in &mut self.layers {
            let w = l.weights.as_mut_slice();
            w.copy_from_slice(&theta[offset..offset + w.len()]);
            offset += w.len();
            let b = l.biases.len();
            l.biases.copy_from_slice(&theta[offset..offset + b]);
            offset += b;
        }
        self.generation = next_generation();
        Ok(())
    }

    pub fn forward(&self, x: &[T]) -> Result<(ProbabilityVector<T>, ForwardCache<T>)> {
        if x.len() != self.config.input_dim() {
            return Err(Error::shape(
                self.config.input_dim(),
                x.len(),
                "model input",
            ));
        }
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(last);
        let mut a: Vector<T> = x.to_vec().into();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = matvec(&layer.weights, &a)?;
            z.add_scaled(T::one(), &layer.biases)?;
            if !z.is_all_finite() {
                return Err(Error::NonFinite(format!(
                    "layer {i} produced a non-finite activation"
                )));
            }
            inputs.push(std::mem::replace(&mut a, Vector::zeros(0)));
            if i == last {
                a = z;
            } else {
                a = z.map(|v| self.config.activation.apply(v));
                pre_activations.push(z);
            }
        }
        let probs = softmax(&a)?;
        let cache = ForwardCache {
            generation: self.generation,
            inputs,
            pre_activations,
            probs: probs.clone(),
        };
        Ok((probs, cache))
    }

    pub fn predict(&self, x: &[T]) -> Result<ProbabilityVector<T>> {
        Ok(self.forward(x)?.0)
    }

    /// Flattened `∂loss/∂θ` given `∂loss/∂p` at the output probabilities.
    pub fn backward(&self, cache: &ForwardCache<T>, loss_grad_at_probs: &[T]) -> Result<Vector<T>> {
        if cache.generation != self.generation || cache.inputs.len() != self.layers.len() {
            return Err(Error::Usage(
                "forward cache does not belong to this model's current parameters".into(),
            ));
        }
        let mut grad = vec![T::zero(); self.num_params()];
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for l in &self.layers {
            offsets.push(off);
            off += l.weights.as_slice().len() + l.biases.len();
        }

        let mut delta = softmax_backward(&cache.probs, loss_grad_at_probs)?;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[i];
            let cols = layer.weights.cols();
            let w_len = layer.weights.as_slice().len();
            let start = offsets[i];
            let (w_grad, rest) = grad[start..].split_at_mut(w_len);
            for (r, &d) in delta.iter().enumerate() {
                for (g, &a) in w_grad[r * cols..(r + 1) * cols]
                    .iter_mut()
                    .zip(input.iter())
                {
                    *g = d * a;
                }
            }
            rest[..delta.len()].copy_from_slice(&delta);
            if i > 0 {
                let upstream = matvec_transposed(&layer.weights, &delta)?;
                let z = &cache.pre_activations[i - 1];
                delta = upstream
                    .iter()
                    .zip(z.iter().zip(input.iter()))
                    .map(|(&u, (&zv, &av))| u * self.config.activation.derivative(zv, av))
                    .collect();
            }
        }
        Ok(grad.into())
    }

    /// Clamped loss and its parameter gradient for one sample.
    pub fn loss_and_grad<L: ScalarLink<T> + ?Sized>(
        &self,
        link: &L,
        x: &[T],
        y: &OneHotTarget,
        clamp_eps: T,
    ) -> Result<(T, Vector<T>)> {
        let (probs, cache) = self.forward(x)?;
        let (loss, g) = clamped_loss_and_grad(link, &probs, y, clamp_eps)?;
        Ok((loss, self.backward(&cache, &g)?))
    }

    /// Mean clamped loss and mean gradient over the rows `indices` of
    /// `features`, summed in index order.
    pub fn batch_loss_and_grad<L: ScalarLink<T> + ?Sized>(
        &self,
        link: &L,
        features: &Matrix<T>,
        labels: &[usize],
        indices: &[usize],
        clamp_eps: T,
    ) -> Result<(T, Vector<T>)> {
        if indices.is_empty() {
            return Err(Error::InvalidInput("empty mini-batch".into()));
        }
        let c = self.num_classes();
        let mut total_loss = T::zero();
        let mut total_grad = Vector::zeros(self.num_params());
        for &i in indices {
            let y = OneHotTarget::new(labels[i], c)?;
            let (l, g) = self.loss_and_grad(link, features.row(i), &y, clamp_eps)?;
            total_loss += l;
            total_grad.add_scaled(T::one(), &g)?;
        }
        let inv = T::of_usize(indices.len()).recip();
        Ok((total_loss * inv, total_grad.map(|g| g * inv)))
    }
}
