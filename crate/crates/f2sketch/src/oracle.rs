//! Exact ground truth: frequency histograms, moments, and the exhaustive
//! expectation/variance of the sketch estimate over all hash assignments.
//!
//! The exhaustive oracle treats the bucket and sign maps as truly random
//! (uniform over every assignment) and computes the exact rational mean
//! and variance of `sum_i A[i]^2`. With 4-wise-independent production
//! hashes every expectation entering those two moments involves at most
//! four distinct elements, so the identities checked here carry over
//! unchanged.

use alloc::collections::BTreeMap;
use alloc::vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::Error;
use crate::hashing::{assignment_count, enumerate_assignments};

/// Largest supported moment order.
pub const MAX_MOMENT_ORDER: u32 = 8;

/// Exact frequency histogram of a stream.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Histogram {
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl Histogram {
    /// Counts every element of `stream`.
    pub fn from_stream(stream: &[u64]) -> Self {
        let mut counts = BTreeMap::new();
        for &x in stream {
            *counts.entry(x).or_insert(0u64) += 1;
        }
        Histogram {
            counts,
            total: stream.len() as u64,
        }
    }

    /// Builds a histogram from explicit `(element, frequency)` pairs;
    /// zero frequencies are dropped, repeated elements accumulate.
    pub fn from_counts<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0u64;
        for (x, f) in pairs {
            if f == 0 {
                continue;
            }
            *counts.entry(x).or_insert(0u64) += f;
            total += f;
        }
        Histogram { counts, total }
    }

    /// Stream length `n = sum_x f_x`.
    pub fn n(&self) -> u64 {
        self.total
    }

    /// Number of distinct elements (`F_0`).
    pub fn distinct(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn count_of(&self, x: u64) -> u64 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&x, &f)| (x, f))
    }

    /// Exact `F_p = sum_x f_x^p`. `F_0` is the distinct count, `F_1 = n`.
    ///
    /// Rejects orders above [`MAX_MOMENT_ORDER`] and sums that leave
    /// 128-bit range.
    pub fn moment(&self, p: u32) -> Result<u128, Error> {
        if p > MAX_MOMENT_ORDER {
            return Err(Error::MomentOrderTooLarge(p));
        }
        let mut acc: u128 = 0;
        for &f in self.counts.values() {
            let term = (f as u128).checked_pow(p).ok_or(Error::MomentOverflow)?;
            acc = acc.checked_add(term).ok_or(Error::MomentOverflow)?;
        }
        Ok(acc)
    }
}

/// Exact mean and variance of the estimate `sum_i A[i]^2` for the given
/// frequency vector, averaged over every one of the `P^u * 2^u` bucket/sign
/// assignments, in exact rational arithmetic.
///
/// `freqs[j]` is the frequency of the `j`-th distinct element; the sum of
/// frequencies must respect the sketch's own `2^62` stream cap so counter
/// arithmetic stays exact.
pub fn exhaustive_sketch_moments(
    freqs: &[u64],
    bucket_count: u64,
) -> Result<(BigRational, BigRational), Error> {
    let total_mass: u128 = freqs.iter().map(|&f| f as u128).sum();
    if total_mass > 1 << 62 {
        return Err(Error::TooManyItems);
    }
    let count = assignment_count(freqs.len(), bucket_count)?;
    let assignments = enumerate_assignments(freqs.len(), bucket_count)?;

    let mut sum = BigInt::zero();
    let mut sum_sq = BigInt::zero();
    let mut counters = vec![0i128; bucket_count as usize];
    for a in assignments {
        for c in counters.iter_mut() {
            *c = 0;
        }
        for (j, &f) in freqs.iter().enumerate() {
            counters[a.buckets[j] as usize] += a.signs[j] as i128 * f as i128;
        }
        let estimate: i128 = counters.iter().map(|&c| c * c).sum();
        sum += estimate;
        sum_sq += BigInt::from(estimate) * estimate;
    }

    let count = BigInt::from(count);
    let mean = BigRational::new(sum, count.clone());
    let second = BigRational::new(sum_sq, count);
    let variance = second - mean.clone() * mean.clone();
    Ok((mean, variance))
}
