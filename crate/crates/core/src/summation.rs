//! Deterministic parallel reductions with compensated accumulation.
//!
//! Under [`Reduction::Deterministic`] the index range is cut into blocks of
//! fixed size independent of the thread count, each block is accumulated
//! sequentially, and the block sums are combined by a pairwise tree of fixed
//! shape. The result is therefore bit-identical for any number of workers.

use rayon::prelude::*;

use crate::scalar::Scalar;

/// Terms per block in the deterministic reduction.
pub const BLOCK_SIZE: usize = 4096;

/// Sums with more terms than this use Kahan accumulation inside blocks.
pub const COMPENSATION_THRESHOLD: usize = 100_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Reduction {
    /// Fixed block partition and fixed pairwise tree.
    #[default]
    Deterministic,
    /// Rayon's adaptive splitting; reproducible only to rounding.
    Adaptive,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Scalar> KahanSum<T> {
    pub fn new() -> Self {
        KahanSum { sum: T::zero(), compensation: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum
    }
}

/// Pairwise (cascade) summation of a slice with a fixed recursion shape.
pub fn pairwise_sum<T: Scalar>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

fn pairwise_sum_arrays<T: Scalar, const N: usize>(values: &[[T; N]]) -> [T; N] {
    match values.len() {
        0 => [T::zero(); N],
        1 => values[0],
        n => {
            let (l, r) = values.split_at(n / 2);
            let (a, b) = (pairwise_sum_arrays(l), pairwise_sum_arrays(r));
            std::array::from_fn(|i| a[i] + b[i])
        }
    }
}

fn block_sum<T: Scalar, const N: usize>(
    range: std::ops::Range<usize>,
    term: &(impl Fn(usize) -> [T; N] + Sync),
    compensated: bool,
) -> [T; N] {
    if compensated {
        let mut acc = [KahanSum::<T>::new(); N];
        for i in range {
            let t = term(i);
            for (a, v) in acc.iter_mut().zip(t) {
                a.add(v);
            }
        }
        acc.map(|a| a.value())
    } else {
        let mut acc = [T::zero(); N];
        for i in range {
            let t = term(i);
            for (a, v) in acc.iter_mut().zip(t) {
                *a += v;
            }
        }
        acc
    }
}

/// `Σ_{i<n} term(i)` for array-valued terms.
pub fn reduce_arrays<T: Scalar, const N: usize>(
    n: usize,
    term: impl Fn(usize) -> [T; N] + Sync,
    mode: Reduction,
) -> [T; N] {
    match mode {
        Reduction::Deterministic => {
            let compensated = n > COMPENSATION_THRESHOLD;
            let blocks = n.div_ceil(BLOCK_SIZE);
            let sums: Vec<[T; N]> = (0..blocks)
                .into_par_iter()
                .map(|b| block_sum(b * BLOCK_SIZE..((b + 1) * BLOCK_SIZE).min(n), &term, compensated))
                .collect();
            pairwise_sum_arrays(&sums)
        }
        Reduction::Adaptive => (0..n)
            .into_par_iter()
            .map(&term)
            .reduce(|| [T::zero(); N], |a, b| std::array::from_fn(|i| a[i] + b[i])),
    }
}

/// `Σ_{i<n} term(i)`.
pub fn reduce<T: Scalar>(n: usize, term: impl Fn(usize) -> T + Sync, mode: Reduction) -> T {
    reduce_arrays(n, |i| [term(i)], mode)[0]
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
