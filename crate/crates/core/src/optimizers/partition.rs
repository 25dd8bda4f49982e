use crate::error::{Error, Result};
use crate::numerics::SeededRng;

/// Split of the training indices into `k` equal-size mini-batches.
///
/// When `k` does not divide `n`, the first `⌈n/k⌉·k − n` indices are repeated
/// (cyclically) so every batch has the same size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    batches: Vec<Vec<usize>>,
    padding_count: usize,
    original_len: usize,
}

impl Partition {
    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn batch_size(&self) -> usize {
        self.batches.first().map_or(0, Vec::len)
    }

    pub fn padding_count(&self) -> usize {
        self.padding_count
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }
}

pub fn make_partition(n: usize, k: usize, rng: &mut SeededRng) -> Result<Partition> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "cannot partition an empty training set".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidInput(
            "partition needs at least one batch".into(),
        ));
    }
    let per_batch = n.div_ceil(k);
    let total = per_batch * k;
    let padding_count = total - n;
    let mut slots: Vec<usize> = (0..n).chain((0..padding_count).map(|i| i % n)).collect();
    rng.shuffle(&mut slots);
    let batches = slots.chunks(per_batch).map(<[usize]>::to_vec).collect();
    Ok(Partition {
        batches,
        padding_count,
        original_len: n,
    })
}

/// Random sequence of batch indices (0-based) selecting one batch per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchSequence(Vec<usize>);

impl BatchSequence {
    /// `steps` batch indices drawn uniformly with replacement from `[0, k)`.
    pub fn random(steps: usize, k: usize, rng: &mut SeededRng) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput(
                "batch sequence over zero batches".into(),
            ));
        }
        Ok(BatchSequence((0..steps).map(|_| rng.below(k)).collect()))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
