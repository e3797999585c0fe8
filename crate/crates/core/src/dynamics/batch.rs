use crate::error::{CbxError, Result};
use crate::rng::{CounterRng, Stream};

/// Per-iteration context: the iteration index (which keys the noise) and the
/// mini-batch partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepContext {
    pub iteration: u64,
    /// Disjoint batches covering `0..n`; indices inside a batch are ascending.
    pub batches: Vec<Vec<usize>>,
    /// `assignment[i]` is the batch containing particle `i`.
    pub assignment: Vec<usize>,
}

impl StepContext {
    /// One batch holding the whole ensemble.
    pub fn full(n: usize, iteration: u64) -> Self {
        StepContext {
            iteration,
            batches: vec![(0..n).collect()],
            assignment: vec![0; n],
        }
    }

    pub fn is_full(&self) -> bool {
        self.batches.len() == 1
    }
}

/// Splits a uniformly random permutation of `0..n` into consecutive chunks of
/// `batch_size`; a shorter final chunk forms its own batch.
///
/// The permutation is a pure function of `(seed, iteration)`. Each batch is
/// sorted so consensus sums run in particle order, which makes `batch_size == n`
/// identical to the full-ensemble computation.
pub fn partition_batches(
    n: usize,
    batch_size: usize,
    seed: u64,
    iteration: u64,
) -> Result<StepContext> {
    if batch_size == 0 || batch_size > n {
        return Err(CbxError::config(
            "batch_size",
            format!("must lie in [1, {n}], got {batch_size}"),
        ));
    }
    let rng = CounterRng::new(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    // Fisher–Yates, one keyed draw per swap position.
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1, Stream::Batch, iteration, i as u64, 0) as usize;
        perm.swap(i, j);
    }
    let mut batches: Vec<Vec<usize>> = perm.chunks(batch_size).map(<[usize]>::to_vec).collect();
    let mut assignment = vec![0; n];
    for (b, batch) in batches.iter_mut().enumerate() {
        batch.sort_unstable();
        for &i in batch.iter() {
            assignment[i] = b;
        }
    }
    Ok(StepContext {
        iteration,
        batches,
        assignment,
    })
}
