//! Identity-form classification losses (cross-entropy and Reduced
//! Jeffries-Matusita), the SGD/Adam/AdamW update rules, closed-form
//! uniform-stability generalization bounds, and a small MLP harness for
//! measuring the train/validation gap of each loss.
//!
//! The math is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix
//! it to `f64`, which is what the harness and CLI use.

pub mod bounds;
pub mod error;
pub mod evaluation;
pub mod harness;
pub mod losses;
pub mod model;
pub mod numerics;
pub mod optimizers;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Vector = numerics::Vector<f64>;
pub type Matrix = numerics::Matrix<f64>;
pub type ProbabilityVector = losses::ProbabilityVector<f64>;
pub type LossProfile = losses::LossProfile<f64>;
pub type Mlp = model::Mlp<f64>;
pub type Dataset = evaluation::Dataset<f64>;
pub type OptimizerConfig = optimizers::OptimizerConfig<f64>;
pub type OptimizerState = optimizers::OptimizerState<f64>;
pub type LrSchedule = optimizers::LrSchedule<f64>;
pub type BoundInputs = bounds::BoundInputs<f64>;
pub type BoundReport = bounds::BoundReport<f64>;
