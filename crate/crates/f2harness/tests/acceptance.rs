//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible with `--nocapture`; the test name itself carries the
//! verdict in normal runs). Exact identities are checked in rational
//! arithmetic with zero tolerance; statistical criteria pin their
//! thresholds and slack here, not in helper code.

use f2harness::config::{ExperimentConfig, Workload};
use f2harness::experiments::{run_edisj_experiment, run_mse_experiment, run_memory_experiment};
use f2sketch::codec;
use f2sketch::hashing::derive_seed;
use f2sketch::oracle::{exhaustive_sketch_moments, Histogram};
use f2sketch::streamgen::{
    edisj_instance, multilevel_layout, uniform_stream, EdisjInstance, EdisjLabel,
};
use f2sketch::F2Sketch;
use num_bigint::BigInt;
use num_rational::BigRational;

const VECTORS: [&[u64]; 6] = [&[1], &[2], &[1, 1], &[2, 1], &[2, 1, 1], &[3, 2, 1]];

fn moments_of(freqs: &[u64]) -> (u128, u128) {
    let h = Histogram::from_counts(freqs.iter().enumerate().map(|(i, &f)| (i as u64, f)));
    (h.moment(2).unwrap(), h.moment(4).unwrap())
}

fn rational(num: u128, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

// Criterion 1: the exhaustive mean over all P^u * 2^u assignments equals
// F2 exactly for every vector and P, zero tolerance.
#[test]
fn criterion_1_exact_unbiasedness() {
    for freqs in VECTORS {
        let (f2, _) = moments_of(freqs);
        for p in 1..=3u64 {
            let (mean, _) = exhaustive_sketch_moments(freqs, p).unwrap();
            assert_eq!(
                mean,
                BigRational::from_integer(BigInt::from(f2)),
                "criterion 1 FAIL: mean != F2 for freqs={freqs:?} P={p}"
            );
        }
    }
    println!("criterion 1 (exact unbiasedness): PASS — 6 vectors x P in {{1,2,3}}, zero tolerance");
}

// Criterion 2: the exhaustive variance equals (2/P)(F2^2 - F4) exactly.
#[test]
fn criterion_2_exact_variance_identity() {
    for freqs in VECTORS {
        let (f2, f4) = moments_of(freqs);
        for p in 1..=3u64 {
            let (_, variance) = exhaustive_sketch_moments(freqs, p).unwrap();
            let expected = rational(2 * (f2 * f2 - f4), p);
            assert_eq!(
                variance, expected,
                "criterion 2 FAIL: variance != (2/P)(F2^2-F4) for freqs={freqs:?} P={p}"
            );
        }
    }
    println!("criterion 2 (exact variance identity): PASS — variance = (2/P)(F2^2 - F4), zero tolerance");
}

// Criterion 3: eps=0.25 (P=65), one uniform stream of n=10^5, 400 hash
// seeds: empirical mean of ((A-F2)/F2)^2 below eps^2 = 0.0625 with slack
// 3/sqrt(400).
#[test]
fn criterion_3_mse_bound_at_desk_scale() {
    let cfg = ExperimentConfig {
        workload: Workload::Uniform,
        n: 100_000,
        epsilon: 0.25,
        trials: 400,
        seed: 20_260_809,
        ..ExperimentConfig::default()
    };
    let summary = run_mse_experiment(&cfg).unwrap();
    assert_eq!(summary.bucket_count, 65);
    let slack = 3.0 / (400.0f64).sqrt();
    let threshold = 0.0625 * (1.0 + slack);
    assert!(
        summary.empirical_mse < threshold,
        "criterion 3 FAIL: empirical MSE {} not below {}",
        summary.empirical_mse,
        threshold
    );
    println!(
        "criterion 3 (MSE bound): PASS — empirical {:.5} < {:.5} (bound 0.0625, slack {:.3}; variance formula predicts ~2/65 = {:.5})",
        summary.empirical_mse,
        threshold,
        slack,
        2.0 / 65.0
    );
}

// Criterion 4: encoded counter bits within 2P ceil(log2(n/P+2)) + 4P for
// eps=0.1, n=10^6 uniform; and for eps=0.01 (P=40001), n=10^5, the whole
// encoding stays under 25% of the fixed-width 64P baseline.
#[test]
fn criterion_4_memory_claim() {
    let cfg = ExperimentConfig {
        workload: Workload::Uniform,
        n: 1_000_000,
        epsilon: 0.1,
        trials: 3,
        seed: 41,
        ..ExperimentConfig::default()
    };
    let summary = run_memory_experiment(&cfg).unwrap();
    assert_eq!(summary.bucket_count, 401);
    let budget = codec::counter_bit_budget(401, 1_000_000);
    assert!(
        summary.max_counter_bits <= budget,
        "criterion 4 FAIL: counter bits {} exceed budget {budget}",
        summary.max_counter_bits
    );

    let small_eps = ExperimentConfig {
        workload: Workload::Uniform,
        n: 100_000,
        epsilon: 0.01,
        trials: 2,
        seed: 42,
        ..ExperimentConfig::default()
    };
    let small = run_memory_experiment(&small_eps).unwrap();
    assert_eq!(small.bucket_count, 40_001);
    let fixed = 64 * 40_001u64;
    assert!(
        small.max_encoded_bits * 4 < fixed,
        "criterion 4 FAIL: encoded bits {} not below 25% of fixed-width {fixed}",
        small.max_encoded_bits
    );
    println!(
        "criterion 4 (memory claim): PASS — n=10^6/P=401: {} <= {} counter bits; n=10^5/P=40001: {} bits = {:.1}% of 64P",
        summary.max_counter_bits,
        budget,
        small.max_encoded_bits,
        100.0 * small.max_encoded_bits as f64 / fixed as f64
    );
}

// Criterion 5: for 50 seeded instances per label at (n=4096, t in
// {2,4,8}, d in {1, floor(eps^2 n/t^2)}, eps=1/4), the histogram-oracle
// F2 equals the label's closed form exactly, and the YES-to-max-NO gap
// follows the chain 2dk(t-1) >= dkt >= d t^2/eps, reaching eps*n at the
// full variant width.
#[test]
fn criterion_5_closed_forms_and_gap() {
    let n = 4096u64;
    let epsilon = 0.25;
    let eps_n = 1024u128; // eps * n
    let labels = [
        EdisjLabel::Yes,
        EdisjLabel::NoDisjoint,
        EdisjLabel::NoWrongExam,
    ];
    let mut checked = 0u32;
    for t in [2u64, 4, 8] {
        let variant_d = (epsilon * epsilon * n as f64 / (t * t) as f64) as u64;
        for d in [1, variant_d] {
            let forms = EdisjInstance::closed_forms(n, t, epsilon, d).unwrap();
            let (k, dd, tt) = (forms.k as u128, d as u128, t as u128);
            assert_eq!(forms.gap, 2 * dd * k * (tt - 1), "gap closed form");
            assert!(forms.gap >= dd * k * tt, "gap >= dkt for t={t} d={d}");
            // k = ceil(t/eps) so dkt >= d t^2 / eps.
            assert!(dd * k * tt >= dd * tt * tt * 4, "dkt >= d t^2/eps");
            if d == variant_d {
                assert!(
                    forms.gap >= eps_n,
                    "criterion 5 FAIL: variant gap {} below eps*n for t={t}",
                    forms.gap
                );
            }
            for label in labels {
                for trial in 0..50u64 {
                    let seed = derive_seed(0xC5, trial * 100 + t * 10 + d);
                    let inst = edisj_instance(n, t, epsilon, d, label, seed).unwrap();
                    inst.validate().unwrap();
                    let f2 = Histogram::from_stream(&inst.stream()).moment(2).unwrap();
                    let expected = match label {
                        EdisjLabel::Yes => forms.yes_f2,
                        EdisjLabel::NoDisjoint => forms.no_disjoint_f2,
                        EdisjLabel::NoWrongExam => forms.no_wrong_exam_f2,
                    };
                    assert_eq!(
                        f2, expected,
                        "criterion 5 FAIL: oracle F2 != closed form, label={label:?} t={t} d={d} trial={trial}"
                    );
                    assert_eq!(f2, inst.exact_f2());
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 50 * 3 * 3 * 2);
    println!(
        "criterion 5 (closed forms): PASS — {checked} instances, oracle F2 exact, gap chain holds"
    );
}

// Criterion 6: a sketch at eps/8 classifies 200 YES + 200 NO instances
// (n=4096, t=8, d=1) at accuracy >= 2/3 by midpoint thresholding.
#[test]
fn criterion_6_end_to_end_distinguishing() {
    let cfg = ExperimentConfig {
        workload: Workload::Edisj,
        n: 4096,
        epsilon: 0.25,
        t: 8,
        d: Some(1),
        trials: 200,
        seed: 66,
        ..ExperimentConfig::default()
    };
    let summary = run_edisj_experiment(&cfg).unwrap();
    assert_eq!(summary.sketch_epsilon, 0.25 / 8.0);
    assert_eq!(summary.total, 400);
    assert_eq!(
        summary.oracle_accuracy, 1.0,
        "criterion 6 FAIL: exact-F2 classification must be perfect"
    );
    assert!(
        summary.accuracy >= 2.0 / 3.0,
        "criterion 6 FAIL: accuracy {} below 2/3",
        summary.accuracy
    );
    println!(
        "criterion 6 (distinguishing): PASS — accuracy {:.3} over {} instances (threshold {}, gap {})",
        summary.accuracy, summary.total, summary.threshold, summary.gap
    );
}

// Criterion 7: layout invariants hold with zero tolerance for
// (n=4096, eps=1/4) and for every valid shape up to n=4^9.
#[test]
fn criterion_7_multilevel_geometry() {
    let mut shapes = 0u32;
    for a in 3..=9u32 {
        let n = 1u64 << (2 * a);
        for b in 0..=(a - 3) {
            let epsilon = 1.0 / (1u64 << b) as f64;
            let layout = multilevel_layout(n, epsilon).unwrap();
            layout.validate().unwrap();
            assert_eq!(layout.levels.len() as u32, a - b - 2);
            for level in &layout.levels {
                let l = level.level;
                assert_eq!(level.t, 1u64 << l);
                assert_eq!(level.bucket_count, 1u64 << (l + 2));
                assert_eq!(level.bucket_count * level.bucket_len, n, "bucket tiling");
                let active: Vec<u64> =
                    (1..=level.bucket_count).filter(|i| i % 4 == 0).collect();
                assert_eq!(level.active_indices, active, "active indices");
                assert_eq!(
                    level.super_elements_per_bucket,
                    n / (4 * level.d * level.t),
                    "super-element count n/(4 d t)"
                );
                assert_eq!(level.d * level.super_elements_per_bucket, level.bucket_len);
            }
            shapes += 1;
        }
    }
    // The worked example from the geometry: n=4096, eps=1/4.
    let layout = multilevel_layout(4096, 0.25).unwrap();
    assert_eq!(layout.levels[0].active_indices, vec![4, 8]);
    assert_eq!(layout.levels[0].bucket_len, 512);
    println!("criterion 7 (multilevel geometry): PASS — {shapes} valid shapes, zero tolerance");
}

// Criterion 8: merge-concatenation equivalence and order invariance of
// the estimate, 100 randomized trials each, exact equality.
#[test]
fn criterion_8_merge_and_permutation() {
    let epsilons = [1.0, 0.5, 0.25];
    for trial in 0..100u64 {
        let seed = derive_seed(0xC8, trial);
        let epsilon = epsilons[(trial % 3) as usize];
        let n = 50 + (derive_seed(seed, 1) % 950);
        let universe = 1 + derive_seed(seed, 2) % 500;
        let stream = uniform_stream(n, universe, seed);
        let split = (derive_seed(seed, 3) % (n + 1)) as usize;
        let (left, right) = stream.split_at(split);

        let mut full = F2Sketch::new(epsilon, seed).unwrap();
        full.update_stream(&stream).unwrap();
        let mut a = F2Sketch::new(epsilon, seed).unwrap();
        a.update_stream(left).unwrap();
        let mut b = F2Sketch::new(epsilon, seed).unwrap();
        b.update_stream(right).unwrap();
        let merged = a.merge(&b).unwrap();
        assert_eq!(merged.counters(), full.counters(), "merge trial {trial}");
        assert_eq!(merged.estimate(), full.estimate(), "merge trial {trial}");

        // Order invariance: estimate of a shuffled copy is identical.
        let mut shuffled = stream.clone();
        for i in (1..shuffled.len()).rev() {
            let j = (derive_seed(seed, 100 + i as u64) % (i as u64 + 1)) as usize;
            shuffled.swap(i, j);
        }
        let mut s = F2Sketch::new(epsilon, seed).unwrap();
        s.update_stream(&shuffled).unwrap();
        assert_eq!(s.counters(), full.counters(), "permutation trial {trial}");
        assert_eq!(s.estimate(), full.estimate(), "permutation trial {trial}");
    }
    println!("criterion 8 (merge/permutation): PASS — 100 exact trials each");
}
