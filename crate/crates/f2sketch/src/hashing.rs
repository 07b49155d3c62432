//! Seeded 4-wise-independent hash functions.
//!
//! Both the bucket map `H: U -> [0, P)` and the sign map `g: U -> {-1, +1}`
//! are degree-3 polynomials with uniform coefficients over the Mersenne
//! field `2^61 - 1`, which makes any four distinct inputs jointly uniform.
//! The bucket range is produced by multiply-then-scale instead of a modulo,
//! so the per-bucket bias stays below `2^-20` for every supported `P`.
//!
//! [`enumerate_assignments`] walks every possible (bucket map, sign map)
//! pair on a tiny universe; the exact oracle in [`crate::oracle`] averages
//! over those to realize truly-random hashing.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;

/// Order of the field the polynomials are evaluated over: `2^61 - 1`.
pub const FIELD_ORDER: u64 = (1u64 << 61) - 1;

/// Largest supported bucket count. Keeps `FIELD_ORDER / P >= 2^29`, well
/// above the `2^20` margin needed for negligible range-mapping bias.
pub const MAX_BUCKET_COUNT: u64 = 1 << 32;

/// Guard on `P^u * 2^u` for exhaustive enumeration.
pub const MAX_ASSIGNMENTS: u128 = 10_000_000;

const INDEPENDENCE: usize = 4;

// Sub-seed salts for the bucket and sign polynomials.
const BUCKET_STREAM: u64 = 0x6A09_E667_F3BC_C908;
const SIGN_STREAM: u64 = 0xBB67_AE85_84CA_A73B;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the `index`-th sub-seed from a master seed.
///
/// Deterministic, and distinct indices give decorrelated seeds; used for
/// per-trial and per-estimator seeding.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut s = master ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    splitmix64(&mut s)
}

/// Reduces `x < 2^123` modulo `2^61 - 1`.
#[inline]
fn reduce(x: u128) -> u64 {
    let m = FIELD_ORDER as u128;
    let folded = (x & m) + (x >> 61);
    let folded = (folded & m) + (folded >> 61);
    let r = folded as u64;
    if r >= FIELD_ORDER {
        r - FIELD_ORDER
    } else {
        r
    }
}

#[inline]
fn mul_add_mod(a: u64, x: u64, b: u64) -> u64 {
    reduce(a as u128 * x as u128 + b as u128)
}

/// Degree-3 polynomial over the field; uniform coefficients give exact
/// 4-wise independence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Poly {
    coeffs: [u64; INDEPENDENCE],
}

impl Poly {
    fn from_seed(seed: u64) -> Self {
        let mut state = seed;
        let mut coeffs = [0u64; INDEPENDENCE];
        for c in coeffs.iter_mut() {
            // Mask to 61 bits and reject the single out-of-field value.
            *c = loop {
                let v = splitmix64(&mut state) & FIELD_ORDER;
                if v < FIELD_ORDER {
                    break v;
                }
            };
        }
        Poly { coeffs }
    }

    #[inline]
    fn eval(&self, x: u64) -> u64 {
        let mut acc = self.coeffs[3];
        acc = mul_add_mod(acc, x, self.coeffs[2]);
        acc = mul_add_mod(acc, x, self.coeffs[1]);
        mul_add_mod(acc, x, self.coeffs[0])
    }
}

/// A seeded pair of 4-wise-independent hash functions: bucket map and sign
/// map. Immutable after construction; the same seed always reproduces the
/// same pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashFamily {
    seed: u64,
    bucket_count: u64,
    bucket_poly: Poly,
    sign_poly: Poly,
}

impl HashFamily {
    /// Builds the family for `bucket_count` buckets. The bucket and sign
    /// polynomials draw their coefficients from independent sub-seeds of
    /// `seed`.
    pub fn new(seed: u64, bucket_count: u64) -> Result<Self, Error> {
        if bucket_count == 0 || bucket_count > MAX_BUCKET_COUNT {
            return Err(Error::InvalidBucketCount(bucket_count));
        }
        Ok(HashFamily {
            seed,
            bucket_count,
            bucket_poly: Poly::from_seed(derive_seed(seed, BUCKET_STREAM)),
            sign_poly: Poly::from_seed(derive_seed(seed, SIGN_STREAM)),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bucket_count(&self) -> u64 {
        self.bucket_count
    }

    /// Bucket index for `x`, in `[0, bucket_count)`.
    ///
    /// Multiply-then-scale on the field value, so each bucket receives an
    /// equal share of the field up to one part in `2^29`.
    #[inline]
    pub fn bucket(&self, x: u64) -> Result<u64, Error> {
        if x >= FIELD_ORDER {
            return Err(Error::ElementOutOfRange(x));
        }
        let h = self.bucket_poly.eval(x);
        Ok(((h as u128 * self.bucket_count as u128) >> 61) as u64)
    }

    /// Sign for `x`: -1 or +1, from the parity of the sign polynomial.
    #[inline]
    pub fn sign(&self, x: u64) -> Result<i64, Error> {
        if x >= FIELD_ORDER {
            return Err(Error::ElementOutOfRange(x));
        }
        Ok(1 - 2 * ((self.sign_poly.eval(x) & 1) as i64))
    }
}

/// One complete (bucket map, sign map) assignment on a tiny universe
/// `{0, .., u-1}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExhaustiveAssignment {
    /// Bucket of each universe element, values in `[0, P)`.
    pub buckets: Vec<u64>,
    /// Sign of each universe element, values in `{-1, +1}`.
    pub signs: Vec<i64>,
}

/// Iterator over all `P^u * 2^u` assignments, each yielded exactly once.
#[derive(Clone, Debug)]
pub struct Assignments {
    bucket_count: u64,
    buckets: Vec<u64>,
    signs: Vec<i64>,
    remaining: u128,
}

/// Enumerates every (bucket map, sign map) pair for a universe of
/// `universe_size` elements and `bucket_count` buckets.
///
/// Rejected when `bucket_count^universe_size * 2^universe_size` exceeds
/// [`MAX_ASSIGNMENTS`].
pub fn enumerate_assignments(
    universe_size: usize,
    bucket_count: u64,
) -> Result<Assignments, Error> {
    if bucket_count == 0 || bucket_count > MAX_BUCKET_COUNT {
        return Err(Error::InvalidBucketCount(bucket_count));
    }
    let total = assignment_count(universe_size, bucket_count)?;
    Ok(Assignments {
        bucket_count,
        buckets: vec![0; universe_size],
        signs: vec![1; universe_size],
        remaining: total,
    })
}

/// `bucket_count^universe_size * 2^universe_size`, checked against the guard.
pub fn assignment_count(universe_size: usize, bucket_count: u64) -> Result<u128, Error> {
    let too_large = Error::EnumerationTooLarge {
        assignments: u128::MAX,
        limit: MAX_ASSIGNMENTS,
    };
    if universe_size >= 64 {
        return Err(too_large);
    }
    let total = (bucket_count as u128)
        .checked_pow(universe_size as u32)
        .and_then(|p| p.checked_mul(1u128 << universe_size))
        .ok_or(too_large)?;
    if total > MAX_ASSIGNMENTS {
        return Err(Error::EnumerationTooLarge {
            assignments: total,
            limit: MAX_ASSIGNMENTS,
        });
    }
    Ok(total)
}

impl Assignments {
    fn advance(&mut self) {
        // Odometer: sign digits first (+1 then -1), then bucket digits.
        for s in self.signs.iter_mut() {
            if *s == 1 {
                *s = -1;
                return;
            }
            *s = 1;
        }
        for b in self.buckets.iter_mut() {
            *b += 1;
            if *b < self.bucket_count {
                return;
            }
            *b = 0;
        }
    }
}

impl Iterator for Assignments {
    type Item = ExhaustiveAssignment;

    fn next(&mut self) -> Option<ExhaustiveAssignment> {
        if self.remaining == 0 {
            return None;
        }
        let item = ExhaustiveAssignment {
            buckets: self.buckets.clone(),
            signs: self.signs.clone(),
        };
        self.remaining -= 1;
        if self.remaining > 0 {
            self.advance();
        }
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining.min(usize::MAX as u128) as usize;
        (n, Some(n))
    }
}
