use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

/// Identity of the generator behind [`SeededRng`], written into run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), 64-bit seed, stream-split forks";

/// Seeded, single-owner random source.
///
/// The underlying ChaCha8 word stream is fixed by the seed and the stream id
/// and does not depend on the platform. Uniform floats take the top 53 bits of
/// each word. Forks reuse the seed with a different ChaCha stream id so that
/// parallel workers never share state.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Independent generator on stream `stream` of the same seed.
    pub fn fork(&self, stream: u64) -> SeededRng {
        Self::with_stream(self.seed, stream)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform<T: Scalar>(&mut self) -> T {
        let bits = self.next_u64() >> 11;
        T::lit(bits as f64 * (1.0 / (1u64 << 53) as f64))
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in<T: Scalar>(&mut self, lo: T, hi: T) -> T {
        lo + (hi - lo) * self.uniform::<T>()
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        // Lemire's multiply-shift; bias is below 2^-64 * n.
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn standard_normal<T: Scalar>(&mut self) -> T {
        let z: f64 = StandardNormal.sample(&mut self.inner);
        T::lit(z)
    }

    pub fn shuffle<E>(&mut self, items: &mut [E]) {
        items.shuffle(&mut self.inner);
    }
}
