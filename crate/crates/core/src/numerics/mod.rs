//! Dense kernels, stable softmax and seeded randomness.
//!
//! The kernel set is deliberately fixed and small: vectors, row-major matrices,
//! the handful of products the MLP needs, and nothing else.

mod linalg;
mod rng;

pub use linalg::{axpy, dot, l2_norm, matmul, matvec, matvec_transposed, softmax, Matrix, Vector};
pub use rng::{SeededRng, RNG_ALGORITHM};
