//! The partition-based F2 sketch and a classic tug-of-war baseline.
//!
//! The sketch keeps `P = ceil(4/eps^2) + 1` signed counters. Every stream
//! element lands in exactly one counter and moves it by ±1, so
//! `sum_i |A[i]| <= n` at all times and each counter only grows with its
//! own bucket's share of the stream. The estimate is `sum_i A[i]^2`,
//! an unbiased F2 estimator with variance `(2/P)(F2^2 - F4)`.
//!
//! The baseline keeps `r` tug-of-war accumulators `Z_j = sum_x g_j(x) f_x`
//! over the whole stream and averages their squares; with `r ~ 4/eps^2`
//! its variance matches the sketch's, but every accumulator sees the full
//! stream, so its counters do not stay small.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::hashing::{self, derive_seed, HashFamily};

/// Update-count guard: keeps counters within `i64` and the estimate within
/// `u128`.
pub const MAX_ITEMS: u64 = 1 << 62;

/// Bucket count for a target relative error: `ceil(4/eps^2) + 1`.
pub fn bucket_count_for_epsilon(epsilon: f64) -> Result<u64, Error> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let q = 4.0 / (epsilon * epsilon);
    if !q.is_finite() || q > hashing::MAX_BUCKET_COUNT as f64 {
        return Err(Error::EpsilonTooSmall(epsilon));
    }
    let mut p = q as u64;
    if (p as f64) < q {
        p += 1;
    }
    let p = p + 1;
    if p > hashing::MAX_BUCKET_COUNT {
        return Err(Error::EpsilonTooSmall(epsilon));
    }
    Ok(p)
}

/// Partition-based F2 sketch state: the counter array plus its hash seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct F2Sketch {
    epsilon: f64,
    family: HashFamily,
    counters: Vec<i64>,
    items_seen: u64,
}

impl F2Sketch {
    /// Fresh sketch for relative error `epsilon` in `(0, 1]`, with
    /// `P = ceil(4/eps^2) + 1` zeroed counters.
    pub fn new(epsilon: f64, seed: u64) -> Result<Self, Error> {
        let bucket_count = bucket_count_for_epsilon(epsilon)?;
        Ok(F2Sketch {
            epsilon,
            family: HashFamily::new(seed, bucket_count)?,
            counters: vec![0; bucket_count as usize],
            items_seen: 0,
        })
    }

    /// Fresh sketch with an explicit bucket count, for experiments that
    /// sweep `P` directly. The stored epsilon is the label
    /// `sqrt(4/(P-1))`, the error whose standard construction yields this
    /// `P` (or `2.0` for the degenerate single-bucket case).
    pub fn with_bucket_count(bucket_count: u64, seed: u64) -> Result<Self, Error> {
        let epsilon = if bucket_count > 1 {
            libm::sqrt(4.0 / (bucket_count - 1) as f64)
        } else {
            2.0
        };
        Ok(F2Sketch {
            epsilon,
            family: HashFamily::new(seed, bucket_count)?,
            counters: vec![0; bucket_count as usize],
            items_seen: 0,
        })
    }

    /// Rebuilds a sketch from decoded parts. The hash family is derived
    /// from the seed; the bucket count is the counter length.
    pub(crate) fn from_parts(
        epsilon: f64,
        seed: u64,
        counters: Vec<i64>,
        items_seen: u64,
    ) -> Result<Self, Error> {
        if items_seen > MAX_ITEMS {
            return Err(Error::TooManyItems);
        }
        let mass: u128 = counters.iter().map(|&c| c.unsigned_abs() as u128).sum();
        if mass > items_seen as u128 {
            return Err(Error::Decode {
                bit: 0,
                reason: "counter mass exceeds items_seen",
            });
        }
        let family = HashFamily::new(seed, counters.len() as u64)?;
        Ok(F2Sketch {
            epsilon,
            family,
            counters,
            items_seen,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn bucket_count(&self) -> u64 {
        self.family.bucket_count()
    }

    pub fn seed(&self) -> u64 {
        self.family.seed()
    }

    pub fn items_seen(&self) -> u64 {
        self.items_seen
    }

    pub fn counters(&self) -> &[i64] {
        &self.counters
    }

    pub fn family(&self) -> &HashFamily {
        &self.family
    }

    /// Feeds one element: `A[H(x)] += g(x)`.
    pub fn update(&mut self, x: u64) -> Result<(), Error> {
        if self.items_seen >= MAX_ITEMS {
            return Err(Error::TooManyItems);
        }
        let bucket = self.family.bucket(x)? as usize;
        let sign = self.family.sign(x)?;
        self.counters[bucket] += sign;
        self.items_seen += 1;
        Ok(())
    }

    /// Feeds a whole stream.
    pub fn update_stream(&mut self, stream: &[u64]) -> Result<(), Error> {
        for &x in stream {
            self.update(x)?;
        }
        Ok(())
    }

    /// The estimate `sum_i A[i]^2`, exact in 128-bit arithmetic.
    pub fn estimate(&self) -> u128 {
        self.counters
            .iter()
            .map(|&c| (c as i128 * c as i128) as u128)
            .sum()
    }

    /// Coordinate-wise sum of two sketches sharing epsilon, bucket count,
    /// and seed. Equals the sketch of the concatenated streams.
    pub fn merge(&self, other: &Self) -> Result<Self, Error> {
        if self.epsilon.to_bits() != other.epsilon.to_bits() {
            return Err(Error::MergeMismatch { field: "epsilon" });
        }
        if self.bucket_count() != other.bucket_count() {
            return Err(Error::MergeMismatch {
                field: "bucket count",
            });
        }
        if self.seed() != other.seed() {
            return Err(Error::MergeMismatch { field: "seed" });
        }
        let items_seen = self
            .items_seen
            .checked_add(other.items_seen)
            .filter(|&n| n <= MAX_ITEMS)
            .ok_or(Error::TooManyItems)?;
        let counters = self
            .counters
            .iter()
            .zip(&other.counters)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(F2Sketch {
            epsilon: self.epsilon,
            family: self.family.clone(),
            counters,
            items_seen,
        })
    }
}

/// Mean-of-`r` tug-of-war baseline. Each estimator keeps one signed
/// accumulator over the entire stream under its own 4-wise-independent
/// sign hash.
#[derive(Clone, Debug)]
pub struct AmsBaseline {
    sign_families: Vec<HashFamily>,
    accumulators: Vec<i64>,
    items_seen: u64,
}

impl AmsBaseline {
    /// Baseline with `estimator_count >= 1` independent estimators, sign
    /// hashes seeded from sub-seeds of `seed`.
    pub fn new(estimator_count: usize, seed: u64) -> Result<Self, Error> {
        if estimator_count == 0 {
            return Err(Error::InvalidEstimatorCount);
        }
        let sign_families = (0..estimator_count)
            .map(|j| HashFamily::new(derive_seed(seed, j as u64), 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AmsBaseline {
            sign_families,
            accumulators: vec![0; estimator_count],
            items_seen: 0,
        })
    }

    /// Baseline sized for an apples-to-apples variance comparison with the
    /// partition sketch at `epsilon`: `r = ceil(4/eps^2)` estimators.
    pub fn for_epsilon(epsilon: f64, seed: u64) -> Result<Self, Error> {
        let r = bucket_count_for_epsilon(epsilon)? - 1;
        Self::new(r as usize, seed)
    }

    pub fn estimator_count(&self) -> usize {
        self.accumulators.len()
    }

    pub fn items_seen(&self) -> u64 {
        self.items_seen
    }

    pub fn update(&mut self, x: u64) -> Result<(), Error> {
        if self.items_seen >= MAX_ITEMS {
            return Err(Error::TooManyItems);
        }
        for (acc, fam) in self.accumulators.iter_mut().zip(&self.sign_families) {
            *acc += fam.sign(x)?;
        }
        self.items_seen += 1;
        Ok(())
    }

    pub fn update_stream(&mut self, stream: &[u64]) -> Result<(), Error> {
        for &x in stream {
            self.update(x)?;
        }
        Ok(())
    }

    /// `(1/r) sum_j Z_j^2`, rounded to the nearest integer (exact for
    /// `r = 1`).
    pub fn estimate(&self) -> u128 {
        let r = self.accumulators.len() as u128;
        let sum: u128 = self
            .accumulators
            .iter()
            .map(|&z| (z as i128 * z as i128) as u128)
            .sum();
        (sum + r / 2) / r
    }
}

/// Scoring record for one trial: exact moments, the estimate, and sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub exact_f2: u128,
    pub exact_f4: u128,
    pub estimate: u128,
    /// `|estimate - F2| / F2`; zero when both are zero.
    pub relative_error: f64,
    /// Bits of the prefix-free encoding at rest.
    pub encoded_bits: u64,
}

impl MomentReport {
    pub fn new(exact_f2: u128, exact_f4: u128, estimate: u128, encoded_bits: u64) -> Self {
        let relative_error = if exact_f2 == 0 {
            if estimate == 0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            let diff = exact_f2.abs_diff(estimate);
            diff as f64 / exact_f2 as f64
        };
        MomentReport {
            exact_f2,
            exact_f4,
            estimate,
            relative_error,
            encoded_bits,
        }
    }
}
