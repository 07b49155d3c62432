//! The three experiments and their trial records.
//!
//! Seeding: the stream is generated from sub-seed 0 of the master seed
//! and stays fixed; trial `i` uses sub-seed `i + 1` for its hash
//! functions. This matches the probability space of the error bound,
//! which is over the hash choices only. Oracle values are computed in a
//! separate pass after all estimates are in, never during estimation.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use f2sketch::codec;
use f2sketch::hashing::derive_seed;
use f2sketch::oracle::Histogram;
use f2sketch::sketch::MomentReport;
use f2sketch::streamgen::{
    edisj_instance, multilevel_planted_stream, multilevel_stream, uniform_stream, zipf_stream,
    EdisjInstance, EdisjLabel,
};
use f2sketch::{AmsBaseline, F2Sketch};

use crate::config::{ExperimentConfig, Workload};
use crate::formats;

const AMS_SALT: u64 = 0x5851_F42D_4C95_7F2D;

/// One trial of the MSE/memory experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialRow {
    pub trial: u32,
    pub seed: u64,
    pub exact_f2: u128,
    pub estimate: u128,
    pub relative_error: f64,
    pub squared_relative_error: f64,
    /// Size of the full prefix-free encoding at rest.
    pub encoded_bits: u64,
    /// Fixed-width baseline: 64 bits per counter.
    pub fixed_width_bits: u64,
    pub wall_time_ns: u128,
}

/// Default universe for uniform workloads: just above `n^3`, large enough
/// for collisions to be negligible.
pub fn default_universe(n: u64) -> u64 {
    n.max(1)
        .checked_pow(3)
        .and_then(|c| c.checked_add(1))
        .unwrap_or(u64::MAX)
}

/// Builds the configured workload stream from sub-seed 0.
pub fn workload_stream(cfg: &ExperimentConfig) -> Result<Vec<u64>> {
    let stream_seed = derive_seed(cfg.seed, 0);
    Ok(match cfg.workload {
        Workload::Uniform => uniform_stream(
            cfg.n,
            cfg.universe.unwrap_or_else(|| default_universe(cfg.n)),
            stream_seed,
        ),
        Workload::Zipf => zipf_stream(
            cfg.n,
            cfg.universe.unwrap_or(cfg.n.max(1)),
            cfg.zipf_exponent,
            stream_seed,
        ),
        Workload::Edisj => {
            let inst = edisj_instance(
                cfg.n,
                cfg.t,
                cfg.epsilon,
                cfg.edisj_width(),
                cfg.label,
                stream_seed,
            )?;
            inst.stream()
        }
        Workload::Multilevel => {
            if cfg.level == 0 {
                multilevel_stream(cfg.n, cfg.epsilon, stream_seed)?.0
            } else {
                multilevel_planted_stream(cfg.n, cfg.epsilon, stream_seed, cfg.level, cfg.label)?.0
            }
        }
        Workload::File => {
            let path = cfg.input.as_ref().expect("validated");
            formats::read_stream_auto(path)
                .with_context(|| format!("reading stream {}", path.display()))?
        }
    })
}

/// Summary of the MSE experiment.
#[derive(Clone, Debug)]
pub struct MseSummary {
    pub trials: u32,
    pub epsilon: f64,
    pub bucket_count: u64,
    pub stream_len: u64,
    pub exact_f2: u128,
    /// Mean of `((estimate - F2) / F2)^2` over the trials.
    pub empirical_mse: f64,
    /// The bound `eps^2`.
    pub bound: f64,
    /// Sampling allowance `3 / sqrt(trials)`.
    pub slack: f64,
    /// Pass threshold `bound * (1 + slack)`.
    pub threshold: f64,
    pub pass: bool,
    /// Empirical MSE of the tug-of-war baseline, when enabled.
    pub baseline_mse: Option<f64>,
    pub rows: Vec<TrialRow>,
}

/// Runs `trials` sketches with independent hash seeds over one fixed
/// stream and scores the squared relative error against `eps^2`.
pub fn run_mse_experiment(cfg: &ExperimentConfig) -> Result<MseSummary> {
    cfg.validate()?;
    let stream = workload_stream(cfg)?;

    // Estimation pass: estimates, encodings, and timings only.
    struct Raw {
        seed: u64,
        estimate: u128,
        encoded_bits: u64,
        fixed_width_bits: u64,
        wall_time_ns: u128,
        baseline_estimate: Option<u128>,
    }
    let mut raw = Vec::with_capacity(cfg.trials as usize);
    for trial in 0..cfg.trials {
        let seed = derive_seed(cfg.seed, 1 + trial as u64);
        let started = Instant::now();
        let mut sketch = F2Sketch::new(cfg.epsilon, seed)?;
        sketch.update_stream(&stream)?;
        let estimate = sketch.estimate();
        let wall_time_ns = started.elapsed().as_nanos();
        let encoded = codec::encode(&sketch);
        let baseline_estimate = if cfg.baseline {
            let mut ams = AmsBaseline::for_epsilon(cfg.epsilon, derive_seed(seed, AMS_SALT))?;
            ams.update_stream(&stream)?;
            Some(ams.estimate())
        } else {
            None
        };
        raw.push(Raw {
            seed,
            estimate,
            encoded_bits: encoded.total_bits(),
            fixed_width_bits: 64 * sketch.bucket_count(),
            wall_time_ns,
            baseline_estimate,
        });
    }

    // Scoring pass.
    let histogram = Histogram::from_stream(&stream);
    let exact_f2 = histogram.moment(2)?;
    let exact_f4 = histogram.moment(4)?;
    let mut rows = Vec::with_capacity(raw.len());
    let mut mse_sum = 0.0;
    let mut baseline_sum = 0.0;
    for (trial, r) in raw.iter().enumerate() {
        let report = MomentReport::new(exact_f2, exact_f4, r.estimate, r.encoded_bits);
        let sq = report.relative_error * report.relative_error;
        mse_sum += sq;
        if let Some(b) = r.baseline_estimate {
            let rel = MomentReport::new(exact_f2, exact_f4, b, 0).relative_error;
            baseline_sum += rel * rel;
        }
        rows.push(TrialRow {
            trial: trial as u32,
            seed: r.seed,
            exact_f2,
            estimate: r.estimate,
            relative_error: report.relative_error,
            squared_relative_error: sq,
            encoded_bits: r.encoded_bits,
            fixed_width_bits: r.fixed_width_bits,
            wall_time_ns: r.wall_time_ns,
        });
    }
    let trials = cfg.trials as f64;
    let empirical_mse = mse_sum / trials;
    let bound = cfg.epsilon * cfg.epsilon;
    let slack = 3.0 / trials.sqrt();
    let threshold = bound * (1.0 + slack);
    Ok(MseSummary {
        trials: cfg.trials,
        epsilon: cfg.epsilon,
        bucket_count: f2sketch::sketch::bucket_count_for_epsilon(cfg.epsilon)?,
        stream_len: stream.len() as u64,
        exact_f2,
        empirical_mse,
        bound,
        slack,
        threshold,
        pass: empirical_mse < threshold,
        baseline_mse: cfg.baseline.then(|| baseline_sum / trials),
        rows,
    })
}

/// Summary of the memory experiment.
#[derive(Clone, Debug)]
pub struct MemorySummary {
    pub trials: u32,
    pub bucket_count: u64,
    pub stream_len: u64,
    /// Mean size of the full encoding at rest, in bits.
    pub mean_encoded_bits: f64,
    /// Largest full encoding observed.
    pub max_encoded_bits: u64,
    /// Largest counter section observed.
    pub max_counter_bits: u64,
    /// Budget for the counter section: `2P ceil(log2(n/P+2)) + 4P`.
    pub counter_budget: u64,
    /// Counter budget plus fixed header overhead.
    pub total_budget: u64,
    /// Fixed-width baseline `64 P`.
    pub fixed_width_bits: u64,
    pub pass: bool,
    pub rows: Vec<TrialRow>,
}

/// Encodes `trials` independently seeded sketches of one stream and
/// checks every encoding against the bit budget.
pub fn run_memory_experiment(cfg: &ExperimentConfig) -> Result<MemorySummary> {
    cfg.validate()?;
    let stream = workload_stream(cfg)?;
    let n = stream.len() as u64;
    let bucket_count = f2sketch::sketch::bucket_count_for_epsilon(cfg.epsilon)?;
    let counter_budget = codec::counter_bit_budget(bucket_count, n);
    let total_budget = codec::bit_budget(bucket_count, n);

    let histogram = Histogram::from_stream(&stream);
    let exact_f2 = histogram.moment(2)?;
    let exact_f4 = histogram.moment(4)?;

    let mut rows = Vec::with_capacity(cfg.trials as usize);
    let mut sum_bits = 0u128;
    let mut max_encoded_bits = 0u64;
    let mut max_counter_bits = 0u64;
    for trial in 0..cfg.trials {
        let seed = derive_seed(cfg.seed, 1 + trial as u64);
        let started = Instant::now();
        let mut sketch = F2Sketch::new(cfg.epsilon, seed)?;
        sketch.update_stream(&stream)?;
        let wall_time_ns = started.elapsed().as_nanos();
        let encoded = codec::encode(&sketch);
        sum_bits += encoded.total_bits() as u128;
        max_encoded_bits = max_encoded_bits.max(encoded.total_bits());
        max_counter_bits = max_counter_bits.max(encoded.counter_bit_len());
        let report = MomentReport::new(exact_f2, exact_f4, sketch.estimate(), encoded.total_bits());
        rows.push(TrialRow {
            trial,
            seed,
            exact_f2,
            estimate: report.estimate,
            relative_error: report.relative_error,
            squared_relative_error: report.relative_error * report.relative_error,
            encoded_bits: encoded.total_bits(),
            fixed_width_bits: 64 * bucket_count,
            wall_time_ns,
        });
    }
    let pass = max_counter_bits <= counter_budget && max_encoded_bits <= total_budget;
    Ok(MemorySummary {
        trials: cfg.trials,
        bucket_count,
        stream_len: n,
        mean_encoded_bits: sum_bits as f64 / cfg.trials as f64,
        max_encoded_bits,
        max_counter_bits,
        counter_budget,
        total_budget,
        fixed_width_bits: 64 * bucket_count,
        pass,
        rows,
    })
}

/// Summary of the distinguishing experiment.
#[derive(Clone, Debug)]
pub struct EdisjSummary {
    pub trials_per_label: u32,
    pub t: u64,
    pub d: u64,
    pub yes_f2: u128,
    pub max_no_f2: u128,
    pub threshold: u128,
    pub gap: u128,
    pub sketch_epsilon: f64,
    pub bucket_count: u64,
    pub stream_len: u64,
    pub correct: u32,
    pub total: u32,
    pub accuracy: f64,
    /// Accuracy of classifying by the exact F2 instead of the sketch;
    /// deterministic 1.0 since the gap never closes.
    pub oracle_accuracy: f64,
    /// accuracy >= 2/3.
    pub pass: bool,
}

/// Generates `trials` YES and `trials` worst-case NO instances, sketches
/// each stream at the (finer) sketch error, and classifies by comparing
/// the estimate to the closed-form midpoint threshold.
pub fn run_edisj_experiment(cfg: &ExperimentConfig) -> Result<EdisjSummary> {
    cfg.validate()?;
    let d = cfg.edisj_width();
    let forms = EdisjInstance::closed_forms(cfg.n, cfg.t, cfg.epsilon, d)?;
    let sketch_epsilon = cfg.sketch_epsilon.unwrap_or(cfg.epsilon / 8.0);
    if !(sketch_epsilon > 0.0 && sketch_epsilon <= 1.0) {
        bail!("sketch epsilon {sketch_epsilon} outside (0, 1]");
    }
    let bucket_count = f2sketch::sketch::bucket_count_for_epsilon(sketch_epsilon)?;

    let mut correct = 0u32;
    let mut oracle_correct = 0u32;
    let mut total = 0u32;
    let mut stream_len = 0u64;
    for trial in 0..cfg.trials {
        for (offset, label) in [(0u64, EdisjLabel::Yes), (1, EdisjLabel::NoWrongExam)] {
            let instance_seed = derive_seed(cfg.seed, 2 * trial as u64 + offset);
            let instance = edisj_instance(cfg.n, cfg.t, cfg.epsilon, d, label, instance_seed)?;
            let stream = instance.stream();
            stream_len = stream.len() as u64;

            let mut sketch = F2Sketch::new(sketch_epsilon, derive_seed(instance_seed, 1))?;
            sketch.update_stream(&stream)?;
            let is_yes = label == EdisjLabel::Yes;
            if (sketch.estimate() >= forms.threshold) == is_yes {
                correct += 1;
            }
            if (instance.exact_f2() >= forms.threshold) == is_yes {
                oracle_correct += 1;
            }
            total += 1;
        }
    }
    let accuracy = correct as f64 / total as f64;
    Ok(EdisjSummary {
        trials_per_label: cfg.trials,
        t: cfg.t,
        d,
        yes_f2: forms.yes_f2,
        max_no_f2: forms.max_no_f2,
        threshold: forms.threshold,
        gap: forms.gap,
        sketch_epsilon,
        bucket_count,
        stream_len,
        correct,
        total,
        accuracy,
        oracle_accuracy: oracle_correct as f64 / total as f64,
        // Integer comparison: correct/total >= 2/3.
        pass: 3 * correct >= 2 * total,
    })
}

/// Reruns the exhaustive oracle over a frequency vector and checks the
/// two exact identities; returns `(mean, variance, f2, f4)` stringified
/// for display plus the verdict.
pub fn check_exhaustive(freqs: &[u64], bucket_count: u64) -> Result<(String, String, bool)> {
    use f2sketch::oracle::exhaustive_sketch_moments;
    let (mean, variance) = exhaustive_sketch_moments(freqs, bucket_count)?;
    let h = Histogram::from_counts(freqs.iter().enumerate().map(|(i, &f)| (i as u64, f)));
    let f2 = h.moment(2)?;
    let f4 = h.moment(4)?;
    // mean == F2 and variance == (2/P)(F2^2 - F4), exactly.
    let f2_big = num_bigint_from_u128(f2);
    let expected_var = num_rational_from(2 * (f2 * f2 - f4), bucket_count as u128);
    let ok = mean == num_rational_from_int(f2_big) && variance == expected_var;
    Ok((mean.to_string(), variance.to_string(), ok))
}

// Small constructors kept here so the binary does not need num-* deps.
fn num_bigint_from_u128(v: u128) -> num_bigint::BigInt {
    num_bigint::BigInt::from(v)
}

fn num_rational_from_int(v: num_bigint::BigInt) -> num_rational::BigRational {
    num_rational::BigRational::from_integer(v)
}

fn num_rational_from(num: u128, den: u128) -> num_rational::BigRational {
    num_rational::BigRational::new(num_bigint::BigInt::from(num), num_bigint::BigInt::from(den))
}
