//! Second-frequency-moment (F2) estimation over insertion-only streams.
//!
//! The sketch hashes every element into one of `P` buckets with a random
//! ±1 sign, keeps `P` signed counters, and estimates F2 as the sum of
//! squared counters. Because each bucket only sees a `1/P` slice of the
//! stream its counter stays small, so the whole state compresses to
//! roughly `P log(n/P)` bits with a prefix-free code ([`codec`]).
//!
//! Alongside the sketch itself the crate ships:
//!
//! * [`hashing`] — seeded 4-wise-independent bucket and sign hashes over
//!   the Mersenne field `2^61 - 1`, plus an exhaustive-enumeration mode
//!   for tiny universes.
//! * [`oracle`] — exact histograms, moments, and the exact
//!   expectation/variance of the estimator over all hash assignments.
//! * [`streamgen`] — reproducible workload generators: uniform and Zipf
//!   streams, gap instances whose exact F2 separates a YES from a NO
//!   answer, and the multi-level packing that overlays gap instances of
//!   many sizes on a single uniform stream.
//!
//! The crate is `no_std` (with `alloc`); file formats and the experiment
//! CLI live in the companion `f2harness` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod codec;
pub mod error;
pub mod hashing;
pub mod oracle;
pub mod sketch;
pub mod streamgen;

pub use error::Error;
pub use hashing::HashFamily;
pub use oracle::Histogram;
pub use sketch::{AmsBaseline, F2Sketch, MomentReport};
pub use streamgen::{EdisjInstance, EdisjLabel, MultiLevelLayout, Stream};
