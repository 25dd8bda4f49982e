//! Library results against independently written references.

mod common;

use approx::assert_relative_eq;
use common::*;
use rjm_core::bounds::{bound_for, stability_for};
use rjm_core::losses::{
    clamped_loss_and_grad, loss_grad, CrossEntropy, OneHotTarget, ReducedJm, ScalarLink,
};
use rjm_core::model::{softmax_backward, Activation, Mlp, MlpConfig};
use rjm_core::numerics::{softmax, SeededRng};
use rjm_core::optimizers::{
    LrSchedule, Optimizer, OptimizerConfig, OptimizerKind, ScheduleSegment,
};

#[test]
fn bounds_match_reference_on_random_tuples() {
    let mut rng = SeededRng::new(11);
    for _ in 0..300 {
        let r = random_inputs(&mut rng);
        let lib = to_library(&r);
        let cases = [
            (OptimizerKind::Sgd, ref_sgd_beta_rho(&r), ref_sgd_bound(&r)),
            (
                OptimizerKind::Adam,
                ref_adam_beta_rho(&r),
                ref_adam_bound(&r),
            ),
            (
                OptimizerKind::Adamw,
                ref_adamw_beta_rho(&r),
                ref_adamw_bound(&r),
            ),
        ];
        for (kind, (beta, rho), bound) in cases {
            let s = stability_for(kind, &lib).unwrap();
            let b = bound_for(kind, &lib).unwrap();
            assert_relative_eq!(s.beta, beta, max_relative = 1e-12);
            assert_relative_eq!(s.rho, rho, max_relative = 1e-12);
            assert_relative_eq!(b.ge_bound, bound, max_relative = 1e-12);
            assert_eq!(b.beta, s.beta);
            assert_eq!(b.vacuous, b.ge_bound > r.l);
            assert_relative_eq!(b.confidence, 1.0 - r.delta);
        }
    }
}

#[test]
fn sgd_constant_rate_ratio() {
    let mut rng = SeededRng::new(12);
    for _ in 0..50 {
        let mut r = random_inputs(&mut rng);
        r.etas = vec![r.eta; r.t];
        let s = stability_for(OptimizerKind::Sgd, &to_library(&r)).unwrap();
        assert_relative_eq!(
            s.rho / s.beta,
            2.0 * r.n as f64 / r.t as f64,
            max_relative = 1e-12
        );
    }
}

#[test]
fn adamw_without_decay_reduces_to_eta_term_times_t() {
    let mut rng = SeededRng::new(13);
    let mut r = random_inputs(&mut rng);
    r.lambda = 0.0;
    r.alphas = vec![1.0; r.t];
    let s = stability_for(OptimizerKind::Adamw, &to_library(&r)).unwrap();
    let (n, t, b) = (r.n as f64, r.t as f64, r.b as f64);
    assert_relative_eq!(
        s.beta,
        2.0 * b * t / n * (r.eta * r.gamma * r.gamma / r.c) * t,
        max_relative = 1e-12
    );
}

fn check_network_gradient(sizes: Vec<usize>, activation: Activation, seed: u64) {
    let mut rng = SeededRng::new(seed);
    let mut cfg = MlpConfig::new(sizes.clone());
    cfg.activation = activation;
    cfg.init_seed = seed;
    let model = Mlp::<f64>::init(cfg).unwrap();
    let theta = model.flatten();
    let c = *sizes.last().unwrap();
    for _ in 0..10 {
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.uniform_in(-1.5, 1.5)).collect();
        let y = OneHotTarget::new(rng.below(c), c).unwrap();
        for link in [&CrossEntropy as &dyn ScalarLink<f64>, &ReducedJm] {
            let (_, analytic) = model.loss_and_grad(link, &x, &y, 1e-7).unwrap();
            let numeric = fd_gradient(&theta, 1e-6, |p| {
                model
                    .unflatten(p)
                    .unwrap()
                    .loss_and_grad(link, &x, &y, 1e-7)
                    .unwrap()
                    .0
            });
            for (a, n) in analytic.iter().zip(&numeric) {
                assert!(
                    rel_error(*a, *n, 1e-8) < 1e-5,
                    "{}: analytic {a:e} numeric {n:e}",
                    link.name()
                );
            }
        }
    }
}

#[test]
fn network_gradient_matches_finite_differences() {
    check_network_gradient(vec![2, 4, 3], Activation::Relu, 1);
    check_network_gradient(vec![3, 5, 4, 6], Activation::Tanh, 2);
    check_network_gradient(vec![4, 2], Activation::Relu, 3);
}

#[test]
fn ce_logit_gradient_is_p_minus_y() {
    let mut rng = SeededRng::new(14);
    for _ in 0..200 {
        let c = 2 + rng.below(9);
        let z: Vec<f64> = (0..c).map(|_| 3.0 * rng.standard_normal::<f64>()).collect();
        let p = softmax(&z).unwrap();
        let y = OneHotTarget::new(rng.below(c), c).unwrap();
        let g = softmax_backward(
            p.as_slice(),
            &loss_grad(&CrossEntropy, p.as_slice(), &y).unwrap(),
        )
        .unwrap();
        let onehot = y.to_vector::<f64>();
        for k in 0..c {
            assert!((g[k] - (p[k] - onehot[k])).abs() <= 1e-10);
        }
    }
}

#[test]
fn softmax_matches_reference() {
    let mut rng = SeededRng::new(15);
    for _ in 0..200 {
        let c = 1 + rng.below(20);
        let z: Vec<f64> = (0..c)
            .map(|_| 50.0 * rng.standard_normal::<f64>())
            .collect();
        let lib = softmax(&z).unwrap();
        for (a, b) in lib.iter().zip(ref_softmax(&z)) {
            assert_relative_eq!(*a, b, max_relative = 1e-12, epsilon = 1e-300);
        }
    }
}

#[test]
fn clamped_gradient_is_blocked_outside_the_interval() {
    let y = OneHotTarget::new(0, 3).unwrap();
    let raw = [1e-9, 0.5, 0.5 - 1e-9];
    let (loss, g) = clamped_loss_and_grad(&CrossEntropy, &raw, &y, 1e-7).unwrap();
    assert_relative_eq!(loss, -(1e-7_f64).ln());
    assert_eq!(g.as_slice(), &[0.0, 0.0, 0.0]);
    let raw = [0.25, 0.5, 0.25];
    let (loss, g) = clamped_loss_and_grad(&ReducedJm, &raw, &y, 1e-7).unwrap();
    assert_relative_eq!(loss, 0.5);
    assert_relative_eq!(g[0], -0.5 / 0.5);
}

#[test]
fn optimizer_driver_follows_schedule() {
    let schedule = LrSchedule::new(vec![
        ScheduleSegment {
            first: 1,
            last: 2,
            rate: 0.1,
        },
        ScheduleSegment {
            first: 3,
            last: 4,
            rate: 0.01,
        },
    ])
    .unwrap();
    let grad = |t: &[f64]| -> Vec<f64> { t.iter().map(|v| 2.0 * v).collect() };
    for kind in [
        OptimizerKind::Sgd,
        OptimizerKind::Adam,
        OptimizerKind::Adamw,
    ] {
        let mut cfg = OptimizerConfig::new(kind, schedule.clone());
        cfg.weight_decay = 0.05;
        cfg.alpha = Some(vec![1.0, 0.5, 0.25, 2.0]);
        let mut opt = Optimizer::new(cfg, 2).unwrap();
        let mut lib = vec![1.0, -2.0];
        let mut reference = lib.clone();
        let mut rates = RefAdam::new(2, 0.0, 0.9, 0.999);
        for epoch in 1..=4 {
            for _ in 0..3 {
                lib = opt.step(&lib, &grad(&lib), epoch).unwrap().into_vec();
                let g = grad(&reference);
                rates.eta = if epoch <= 2 { 0.1 } else { 0.01 };
                let alpha = [1.0, 0.5, 0.25, 2.0][epoch - 1];
                match kind {
                    OptimizerKind::Sgd => ref_sgd(&mut reference, &g, rates.eta),
                    OptimizerKind::Adam => rates.step(&mut reference, &g),
                    OptimizerKind::Adamw => rates.step_decoupled(&mut reference, &g, 0.05, alpha),
                }
                for (a, b) in lib.iter().zip(&reference) {
                    assert!((a - b).abs() <= 1e-12, "{kind} epoch {epoch}: {a} vs {b}");
                }
            }
        }
        assert!(opt.step(&lib, &grad(&lib), 5).is_err());
    }
}

#[test]
fn f32_and_f64_agree_on_losses() {
    let mut rng = SeededRng::new(16);
    for _ in 0..100 {
        let p = random_probs(&mut rng, 5);
        let y = OneHotTarget::new(rng.below(5), 5).unwrap();
        let p32: Vec<f32> = p.iter().map(|&v| v.max(1e-7) as f32).collect();
        let p64: Vec<f64> = p32.iter().map(|&v| v as f64).collect();
        let l32 = rjm_core::losses::rjm_loss(&p32, &y).unwrap() as f64;
        let l64 = rjm_core::losses::rjm_loss(&p64, &y).unwrap();
        assert_relative_eq!(l32, l64, epsilon = 1e-6);
    }
}
