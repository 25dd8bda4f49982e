//! Reference implementations used as test oracles. Written from the update
//! rules and closed forms directly, sharing no code with the library.
#![allow(dead_code, clippy::needless_range_loop)]

use rjm_core::model::{Mlp, MlpConfig};
use rjm_core::numerics::SeededRng;

// ---------- optimizers ----------

pub struct RefAdam {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: i32,
    pub eta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl RefAdam {
    pub fn new(n: usize, eta: f64, beta1: f64, beta2: f64) -> Self {
        RefAdam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            eta,
            beta1,
            beta2,
            eps: 1e-8,
        }
    }

    /// Returns the direction `η m̂ / (√v̂ + ε)` after absorbing `g`.
    fn direction(&mut self, g: &[f64]) -> Vec<f64> {
        self.t += 1;
        let mut out = Vec::new();
        for i in 0..g.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let mhat = self.m[i] / (1.0 - self.beta1.powi(self.t));
            let vhat = self.v[i] / (1.0 - self.beta2.powi(self.t));
            out.push(self.eta * mhat / (vhat.sqrt() + self.eps));
        }
        out
    }

    pub fn step(&mut self, theta: &mut [f64], g: &[f64]) {
        let d = self.direction(g);
        for i in 0..theta.len() {
            theta[i] -= d[i];
        }
    }

    pub fn step_decoupled(&mut self, theta: &mut [f64], g: &[f64], lambda: f64, alpha: f64) {
        let d = self.direction(g);
        for i in 0..theta.len() {
            theta[i] -= alpha * (d[i] + lambda * theta[i]);
        }
    }
}

pub fn ref_sgd(theta: &mut [f64], g: &[f64], eta: f64) {
    for i in 0..theta.len() {
        theta[i] -= eta * g[i];
    }
}

// ---------- bounds ----------

#[derive(Clone, Debug)]
pub struct RefInputs {
    pub gamma: f64,
    pub l: f64,
    pub eta: f64,
    pub etas: Vec<f64>,
    pub t: usize,
    pub n: usize,
    pub b: usize,
    pub delta: f64,
    pub c: f64,
    pub lambda: f64,
    pub theta_sup: f64,
    pub alphas: Vec<f64>,
}

fn lg(i: &RefInputs) -> f64 {
    (2.0 / i.delta).ln()
}

fn tail(i: &RefInputs) -> f64 {
    i.l * (lg(i) / (2.0 * i.n as f64)).sqrt()
}

pub fn ref_sgd_beta_rho(i: &RefInputs) -> (f64, f64) {
    let s: f64 = i.etas.iter().sum();
    let g2 = i.gamma * i.gamma;
    (2.0 * g2 / i.n as f64 * s, 4.0 * g2 / i.t as f64 * s)
}

pub fn ref_sgd_bound(i: &RefInputs) -> f64 {
    let s: f64 = i.etas.iter().sum();
    let (n, t) = (i.n as f64, i.t as f64);
    2.0 * i.gamma * i.gamma * s * (2.0 * (lg(i) / t).sqrt() + (2.0 * lg(i) / n).sqrt() + 1.0 / n)
        + tail(i)
}

pub fn ref_adam_beta_rho(i: &RefInputs) -> (f64, f64) {
    let (n, t, b) = (i.n as f64, i.t as f64, i.b as f64);
    let beta = (2.0 * i.eta / i.c) * (b * t * i.gamma * i.gamma / n);
    let rho = (8.0 * i.eta / i.c) * (b * i.gamma / n).powi(2);
    (beta, rho)
}

pub fn ref_adam_bound(i: &RefInputs) -> f64 {
    let (n, t, b) = (i.n as f64, i.t as f64, i.b as f64);
    let first = 4.0 * (b * i.gamma / n).powi(2) * (t * lg(i)).sqrt();
    let second = b * t * i.gamma * i.gamma / n * (1.0 + (2.0 * n * lg(i)).sqrt());
    (2.0 * i.eta / i.c) * (first + second) + tail(i)
}

fn adamw_core(i: &RefInputs) -> f64 {
    i.eta * i.gamma * i.gamma / i.c + i.gamma * i.lambda * i.theta_sup
}

pub fn ref_adamw_beta_rho(i: &RefInputs) -> (f64, f64) {
    let (n, t, b) = (i.n as f64, i.t as f64, i.b as f64);
    let sa: f64 = i.alphas.iter().sum();
    (
        2.0 * b * t / n * adamw_core(i) * sa,
        8.0 * b * b / (n * n) * adamw_core(i) * sa,
    )
}

pub fn ref_adamw_bound(i: &RefInputs) -> f64 {
    let (n, t, b) = (i.n as f64, i.t as f64, i.b as f64);
    let sa: f64 = i.alphas.iter().sum();
    2.0 * b / n
        * adamw_core(i)
        * (4.0 * b / n * (t * lg(i)).sqrt() + t * (2.0 * n * lg(i)).sqrt())
        * sa
        + tail(i)
}

/// Random valid bound inputs; `etas` and `alphas` have length `t`.
pub fn random_inputs(rng: &mut SeededRng) -> RefInputs {
    let t = 1 + rng.below(500);
    let n = 1 + rng.below(100_000);
    let log_uniform =
        |rng: &mut SeededRng, lo: f64, hi: f64| -> f64 { (rng.uniform_in(lo.ln(), hi.ln())).exp() };
    RefInputs {
        gamma: log_uniform(rng, 1e-3, 1e3),
        l: log_uniform(rng, 1e-2, 50.0),
        eta: log_uniform(rng, 1e-6, 1.0),
        etas: (0..t).map(|_| log_uniform(rng, 1e-6, 1.0)).collect(),
        t,
        n,
        b: 1 + rng.below(n.min(512)),
        delta: rng.uniform_in(1e-4, 0.999),
        c: rng.uniform_in(1e-3, 0.999),
        lambda: rng.uniform_in(0.0, 1.0),
        theta_sup: rng.uniform_in(0.0, 100.0),
        alphas: (0..t).map(|_| rng.uniform_in(0.0, 2.0)).collect(),
    }
}

pub fn to_library(i: &RefInputs) -> rjm_core::BoundInputs {
    let mut b = rjm_core::BoundInputs::new(i.gamma, i.l, i.eta, i.t, i.n, i.b);
    b.eta_steps = Some(i.etas.clone());
    b.delta = i.delta;
    b.c = i.c;
    b.lambda = i.lambda;
    b.theta_sup = i.theta_sup;
    b.alpha = Some(i.alphas.clone());
    b
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

// ---------- network gradients ----------

/// Central-difference gradient of `f` at `theta`.
pub fn fd_gradient(theta: &[f64], step: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + step;
            let up = f(&p);
            p[i] = orig - step;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Relative error with a floor so exactly-zero coordinates compare cleanly.
pub fn rel_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub fn small_mlp(seed: u64) -> Mlp<f64> {
    let mut cfg = MlpConfig::new(vec![2, 4, 3]);
    cfg.init_seed = seed;
    Mlp::init(cfg).unwrap()
}

/// Softmax written out independently of the library.
pub fn ref_softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// Random probability vector via softmax of scaled normals.
pub fn random_probs(rng: &mut SeededRng, c: usize) -> Vec<f64> {
    let scale = (rng.uniform_in(0.1_f64.ln(), 30.0_f64.ln())).exp();
    let z: Vec<f64> = (0..c)
        .map(|_| scale * rng.standard_normal::<f64>())
        .collect();
    ref_softmax(&z)
}
