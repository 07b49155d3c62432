//! Reproducible workload generators.
//!
//! Three families of streams:
//!
//! * Background workloads: [`uniform_stream`] (i.i.d. uniform draws) and
//!   [`zipf_stream`].
//! * Gap instances ([`EdisjInstance`]): `t` player sets of `d`-wide
//!   super-elements written one after another, followed by the exam
//!   super-element repeated `k = ceil(t/eps)` times. The exact F2 of the
//!   resulting stream is a closed form of the label, and the YES value
//!   exceeds every NO value by `2dk(t-1)`, a gap any `(1 ± Θ(eps))`
//!   F2 estimate can detect.
//! * The multi-level packing ([`multilevel_stream`]): a uniform stream of
//!   length `n` (a power of four) carved, at every level `l`, into
//!   `2^(l+2)` buckets whose indices divisible by four are "active" and
//!   can carry one player's set of a planted gap instance
//!   ([`multilevel_planted_stream`]).
//!
//! All generators are pure functions of their parameters and seed.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::hashing::derive_seed;

/// A finite sequence of universe element ids.
pub type Stream = Vec<u64>;

const PLANT_SALT: u64 = 0x243F_6A88_85A3_08D3;

/// `n` i.i.d. uniform draws from `[0, universe_size)`.
///
/// A universe of `n^3` or larger keeps collisions (and hence F2 - n)
/// negligible.
pub fn uniform_stream(n: u64, universe_size: u64, seed: u64) -> Stream {
    assert!(universe_size >= 1, "universe_size must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0..universe_size)).collect()
}

/// `n` i.i.d. Zipf(`exponent`) draws over `[0, universe_size)`, element
/// `i` weighted `(i+1)^-exponent`.
///
/// Exponent zero is exactly the uniform stream (same seed, same output).
/// Sampling precomputes an `O(universe_size)` cumulative table.
pub fn zipf_stream(n: u64, universe_size: u64, exponent: f64, seed: u64) -> Stream {
    assert!(universe_size >= 1, "universe_size must be at least 1");
    assert!(
        exponent >= 0.0 && exponent.is_finite(),
        "exponent must be finite and non-negative"
    );
    if exponent == 0.0 {
        return uniform_stream(n, universe_size, seed);
    }
    let mut cumulative = Vec::with_capacity(universe_size as usize);
    let mut total = 0.0f64;
    for i in 0..universe_size {
        total += libm::pow((i + 1) as f64, -exponent);
        cumulative.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = rng.gen::<f64>() * total;
            (cumulative.partition_point(|&c| c < u) as u64).min(universe_size - 1)
        })
        .collect()
}

/// Label of a gap instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdisjLabel {
    /// The exam super-element appears in every player set.
    Yes,
    /// All player sets are pairwise disjoint; the exam super-element
    /// appears in exactly one of them.
    NoDisjoint,
    /// Every player set shares one common super-element that differs from
    /// the exam; the exam appears in exactly one set.
    NoWrongExam,
}

impl EdisjLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdisjLabel::Yes => "yes",
            EdisjLabel::NoDisjoint => "no-disjoint",
            EdisjLabel::NoWrongExam => "no-wrong-exam",
        }
    }
}

/// The default super-element width `floor(eps^2 n / t^2)` of the
/// single-instance construction. The multi-level packing instead uses
/// `eps^2 n / (4 t^2)`, carried per level by [`LevelLayout::d`].
pub fn default_super_element_width(n: u64, t: u64, epsilon: f64) -> u64 {
    (epsilon * epsilon * n as f64 / (t * t) as f64) as u64
}

/// Closed-form F2 values shared by every instance with the same
/// parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdisjClosedForms {
    pub k: u64,
    pub yes_f2: u128,
    pub no_disjoint_f2: u128,
    pub no_wrong_exam_f2: u128,
    /// The larger of the two NO values (always the wrong-exam case).
    pub max_no_f2: u128,
    /// Midpoint of the YES and max-NO values, the classification
    /// threshold.
    pub threshold: u128,
    /// `yes_f2 - max_no_f2 = 2dk(t-1)`.
    pub gap: u128,
}

/// One gap instance: `t` player sets of super-elements plus the exam.
///
/// Super-elements are `d` consecutive universe ids identified by their
/// base id; distinct super-elements never share ids. NO-labelled
/// instances place the exam in exactly one set, realizing the largest
/// possible NO-side F2, so the closed forms below are exact rather than
/// upper bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct EdisjInstance {
    /// Player count.
    pub t: u64,
    /// Super-elements per player set.
    pub set_size: u64,
    /// Super-element width.
    pub d: u64,
    /// Referee repetitions of the exam, `ceil(t / epsilon)`.
    pub k: u64,
    /// Generation stream-length parameter.
    pub n: u64,
    pub epsilon: f64,
    pub label: EdisjLabel,
    /// Sorted base ids, one vector per player.
    pub sets: Vec<Vec<u64>>,
    /// Base id of the exam super-element.
    pub exam: u64,
    pub universe_size: u64,
}

impl EdisjInstance {
    /// Total super-element slots across all sets.
    pub fn total_tuples(&self) -> u64 {
        self.t * self.set_size
    }

    /// Length of [`Self::stream`]: `t * set_size * d + k * d`.
    pub fn stream_len(&self) -> u64 {
        (self.total_tuples() + self.k) * self.d
    }

    /// Writes the instance as a stream: the sets one after another (each
    /// super-element flattened to its `d` ids, super-elements in sorted
    /// order within a set), then `k` repetitions of the exam.
    pub fn stream(&self) -> Stream {
        let mut out = Vec::with_capacity(self.stream_len() as usize);
        for set in &self.sets {
            for &base in set {
                out.extend(base..base + self.d);
            }
        }
        for _ in 0..self.k {
            out.extend(self.exam..self.exam + self.d);
        }
        out
    }

    /// Exact F2 of [`Self::stream`], by the label's closed form.
    pub fn exact_f2(&self) -> u128 {
        let forms = Self::closed_forms_for(self.total_tuples(), self.t, self.d, self.k);
        match self.label {
            EdisjLabel::Yes => forms.yes_f2,
            EdisjLabel::NoDisjoint => forms.no_disjoint_f2,
            EdisjLabel::NoWrongExam => forms.no_wrong_exam_f2,
        }
    }

    /// Closed forms for a standalone instance of stream parameter `n`
    /// (total super-element slots `n / d`).
    pub fn closed_forms(n: u64, t: u64, epsilon: f64, d: u64) -> Result<EdisjClosedForms, Error> {
        validate_edisj_params(n, t, epsilon, d)?;
        let k = referee_repetitions(t, epsilon)?;
        Ok(Self::closed_forms_for(n / d, t, d, k))
    }

    /// Closed forms from explicit slot and repetition counts.
    ///
    /// With `m` total slots: YES is `d(m - t) + d(t+k)^2`, disjoint-NO is
    /// `d(m - 1) + d(1+k)^2`, wrong-exam-NO adds `d(t^2 - t)` to that.
    pub fn closed_forms_for(total_tuples: u64, t: u64, d: u64, k: u64) -> EdisjClosedForms {
        let (m, t, d, k) = (
            total_tuples as u128,
            t as u128,
            d as u128,
            k as u128,
        );
        let yes = d * (m - t) + d * (t + k) * (t + k);
        let no_disjoint = d * (m - 1) + d * (1 + k) * (1 + k);
        let no_wrong_exam = no_disjoint + d * (t * t - t);
        EdisjClosedForms {
            k: k as u64,
            yes_f2: yes,
            no_disjoint_f2: no_disjoint,
            no_wrong_exam_f2: no_wrong_exam,
            max_no_f2: no_wrong_exam,
            threshold: (yes + no_wrong_exam) / 2,
            gap: yes - no_wrong_exam,
        }
    }

    /// Checks every structural invariant from the raw sets: sizes,
    /// sortedness, super-element non-overlap, and the label's
    /// membership pattern.
    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: &str| Err(Error::InvalidStreamParams(format!("invalid instance: {msg}")));
        if self.t < 2 || self.d == 0 || self.k == 0 || self.set_size < 2 {
            return fail("t >= 2, d >= 1, k >= 1, set_size >= 2 required");
        }
        if self.sets.len() != self.t as usize {
            return fail("player count does not match t");
        }
        let mut multiplicity: BTreeMap<u64, u64> = BTreeMap::new();
        for set in &self.sets {
            if set.len() != self.set_size as usize {
                return fail("set size mismatch");
            }
            if !set.windows(2).all(|w| w[0] < w[1]) {
                return fail("set not strictly ascending");
            }
            for &base in set {
                *multiplicity.entry(base).or_insert(0) += 1;
            }
        }
        // Super-element intervals [base, base+d) must tile disjointly.
        let mut bases: Vec<u64> = multiplicity.keys().copied().collect();
        if !bases.contains(&self.exam) {
            bases.push(self.exam);
            bases.sort_unstable();
        }
        for pair in bases.windows(2) {
            if pair[1] - pair[0] < self.d {
                return fail("super-elements overlap");
            }
        }
        if let Some(&last) = bases.last() {
            if last > self.universe_size - self.d {
                return fail("super-element outside the universe");
            }
        }
        let exam_mult = multiplicity.get(&self.exam).copied().unwrap_or(0);
        let common: Vec<u64> = multiplicity
            .iter()
            .filter(|&(_, &m)| m > 1)
            .map(|(&b, _)| b)
            .collect();
        match self.label {
            EdisjLabel::Yes => {
                if exam_mult != self.t {
                    return fail("YES: exam must appear in every set");
                }
                if common != [self.exam] {
                    return fail("YES: intersection must be exactly the exam");
                }
            }
            EdisjLabel::NoDisjoint => {
                if !common.is_empty() {
                    return fail("NO-disjoint: sets must be pairwise disjoint");
                }
                if exam_mult > 1 {
                    return fail("NO-disjoint: exam in more than one set");
                }
            }
            EdisjLabel::NoWrongExam => {
                let &[w] = common.as_slice() else {
                    return fail("NO-wrong-exam: need exactly one shared super-element");
                };
                if w == self.exam {
                    return fail("NO-wrong-exam: shared super-element equals the exam");
                }
                if multiplicity[&w] != self.t {
                    return fail("NO-wrong-exam: shared super-element missing from a set");
                }
                if exam_mult > 1 {
                    return fail("NO-wrong-exam: exam in more than one set");
                }
            }
        }
        Ok(())
    }
}

fn referee_repetitions(t: u64, epsilon: f64) -> Result<u64, Error> {
    let q = t as f64 / epsilon;
    if !q.is_finite() || q > (1u64 << 32) as f64 {
        return Err(Error::InvalidStreamParams(format!(
            "referee repetitions ceil({t}/{epsilon}) out of range"
        )));
    }
    let mut k = q as u64;
    if (k as f64) < q {
        k += 1;
    }
    Ok(k.max(1))
}

fn edisj_universe(n: u64) -> Result<u64, Error> {
    n.checked_pow(3)
        .and_then(|c| c.checked_add(1))
        .ok_or_else(|| {
            Error::InvalidStreamParams(format!("n = {n} too large for a universe above n^3"))
        })
}

fn validate_edisj_params(n: u64, t: u64, epsilon: f64, d: u64) -> Result<(), Error> {
    let fail = |msg: alloc::string::String| Err(Error::InvalidStreamParams(msg));
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return fail(format!("epsilon {epsilon} must be positive and finite"));
    }
    if t < 2 {
        return fail(format!("player count t = {t} must be at least 2"));
    }
    if d == 0 {
        return fail("super-element width d must be positive".into());
    }
    if (t * t) as f64 > epsilon * epsilon * n as f64 {
        return fail(format!(
            "t = {t} exceeds eps*sqrt(n) = {}",
            epsilon * libm::sqrt(n as f64)
        ));
    }
    if n == 0 || !n.is_multiple_of(d * t) {
        return fail(format!("d*t = {} must divide n = {n}", d * t));
    }
    if n / (d * t) < 2 {
        return fail(format!(
            "set size n/(d*t) = {} must be at least 2",
            n / (d * t)
        ));
    }
    Ok(())
}

/// Generates a gap instance with the single-instance parameters of the
/// construction: set size `n/(d*t)`, `k = ceil(t/eps)`, universe above
/// `n^3`.
///
/// Requires `2 <= t <= eps*sqrt(n)`, `d >= 1`, and `d*t | n`.
pub fn edisj_instance(
    n: u64,
    t: u64,
    epsilon: f64,
    d: u64,
    label: EdisjLabel,
    seed: u64,
) -> Result<EdisjInstance, Error> {
    validate_edisj_params(n, t, epsilon, d)?;
    let k = referee_repetitions(t, epsilon)?;
    let universe = edisj_universe(n)?;
    build_instance(BuildParams {
        n,
        t,
        epsilon,
        d,
        k,
        set_size: n / (d * t),
        universe,
        label,
        seed,
    })
}

struct BuildParams {
    n: u64,
    t: u64,
    epsilon: f64,
    d: u64,
    k: u64,
    set_size: u64,
    universe: u64,
    label: EdisjLabel,
    seed: u64,
}

/// Reserves non-overlapping `d`-wide id blocks at uniform positions.
struct TupleAllocator {
    universe: u64,
    d: u64,
    reserved: BTreeMap<u64, u64>, // start -> end (exclusive)
}

impl TupleAllocator {
    fn fresh(&mut self, rng: &mut ChaCha8Rng) -> u64 {
        loop {
            let base = rng.gen_range(0..=self.universe - self.d);
            let end = base + self.d;
            let clash_left = self
                .reserved
                .range(..=base)
                .next_back()
                .is_some_and(|(_, &e)| e > base);
            let clash_right = self
                .reserved
                .range(base..)
                .next()
                .is_some_and(|(&s, _)| s < end);
            if !clash_left && !clash_right {
                self.reserved.insert(base, end);
                return base;
            }
        }
    }
}

fn build_instance(p: BuildParams) -> Result<EdisjInstance, Error> {
    if p.set_size < 2 {
        return Err(Error::InvalidStreamParams(format!(
            "set size {} must be at least 2",
            p.set_size
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut alloc = TupleAllocator {
        universe: p.universe,
        d: p.d,
        reserved: BTreeMap::new(),
    };
    let exam = alloc.fresh(&mut rng);
    let ss = p.set_size as usize;
    let mut sets: Vec<Vec<u64>> = Vec::with_capacity(p.t as usize);
    match p.label {
        EdisjLabel::Yes => {
            for _ in 0..p.t {
                let mut set = Vec::with_capacity(ss);
                set.push(exam);
                while set.len() < ss {
                    set.push(alloc.fresh(&mut rng));
                }
                sets.push(set);
            }
        }
        EdisjLabel::NoDisjoint => {
            let host = rng.gen_range(0..p.t);
            for i in 0..p.t {
                let mut set = Vec::with_capacity(ss);
                if i == host {
                    set.push(exam);
                }
                while set.len() < ss {
                    set.push(alloc.fresh(&mut rng));
                }
                sets.push(set);
            }
        }
        EdisjLabel::NoWrongExam => {
            let common = alloc.fresh(&mut rng);
            let host = rng.gen_range(0..p.t);
            for i in 0..p.t {
                let mut set = Vec::with_capacity(ss);
                set.push(common);
                if i == host {
                    set.push(exam);
                }
                while set.len() < ss {
                    set.push(alloc.fresh(&mut rng));
                }
                sets.push(set);
            }
        }
    }
    for set in sets.iter_mut() {
        set.sort_unstable();
    }
    Ok(EdisjInstance {
        t: p.t,
        set_size: p.set_size,
        d: p.d,
        k: p.k,
        n: p.n,
        epsilon: p.epsilon,
        label: p.label,
        sets,
        exam,
        universe_size: p.universe,
    })
}

/// Geometry of one packing level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelLayout {
    /// Level index `l >= 1`.
    pub level: u32,
    /// Player count `t = 2^l`.
    pub t: u64,
    /// Super-element width `eps^2 n / (4 t^2)`.
    pub d: u64,
    /// Buckets at this level: `2^(l+2)`.
    pub bucket_count: u64,
    /// Elements per bucket: `n / 2^(l+2)`.
    pub bucket_len: u64,
    /// 1-based bucket indices divisible by four, one per player.
    pub active_indices: Vec<u64>,
    /// Super-elements per active bucket: `n / (4 d t)`.
    pub super_elements_per_bucket: u64,
}

impl LevelLayout {
    /// Half-open element ranges `[start, end)` of the active buckets.
    pub fn active_ranges(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.active_indices
            .iter()
            .map(move |&i| ((i - 1) * self.bucket_len, i * self.bucket_len))
    }
}

/// Geometry of every level of the multi-level packing.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiLevelLayout {
    pub n: u64,
    pub epsilon: f64,
    pub levels: Vec<LevelLayout>,
}

impl MultiLevelLayout {
    /// Checks the geometric invariants of every level: buckets tile
    /// `[0, n)`, active indices are exactly the multiples of four, active
    /// ranges are disjoint, super-elements tile each active bucket, and
    /// the widths match `eps^2 n / (4 t^2)`.
    pub fn validate(&self) -> Result<(), Error> {
        let fail =
            |msg: alloc::string::String| Err(Error::InvalidStreamParams(format!("layout: {msg}")));
        for (i, level) in self.levels.iter().enumerate() {
            let l = level.level;
            if l as usize != i + 1 {
                return fail(format!("level indices must be 1.. contiguous, got {l}"));
            }
            if level.t != 1u64 << l {
                return fail(format!("level {l}: t = {} != 2^l", level.t));
            }
            if level.bucket_count != 4 * level.t {
                return fail(format!("level {l}: bucket count != 4t"));
            }
            if level.bucket_count * level.bucket_len != self.n {
                return fail(format!("level {l}: buckets do not tile the stream"));
            }
            let expected_active: Vec<u64> =
                (1..=level.bucket_count).filter(|i| i % 4 == 0).collect();
            if level.active_indices != expected_active {
                return fail(format!(
                    "level {l}: active buckets must be the indices divisible by four"
                ));
            }
            let mut prev_end = 0u64;
            for (start, end) in level.active_ranges() {
                if start < prev_end || end > self.n {
                    return fail(format!("level {l}: active ranges overlap or overflow"));
                }
                prev_end = end;
            }
            if level.d == 0 || level.d * level.super_elements_per_bucket != level.bucket_len {
                return fail(format!(
                    "level {l}: super-elements do not tile the bucket"
                ));
            }
            if level.super_elements_per_bucket != self.n / (4 * level.d * level.t) {
                return fail(format!("level {l}: super-element count != n/(4dt)"));
            }
            let expected_d =
                self.epsilon * self.epsilon * self.n as f64 / (4 * level.t * level.t) as f64;
            if level.d as f64 != expected_d {
                return fail(format!(
                    "level {l}: d = {} != eps^2 n / (4 t^2) = {expected_d}",
                    level.d
                ));
            }
        }
        Ok(())
    }
}

/// `(a, b)` with `sqrt(n) = 2^a` and `epsilon = 2^-b`, or the shape error
/// carrying the nearest valid pair.
fn shape_exponents(n: u64, epsilon: f64) -> Result<(u32, u32), Error> {
    let shape_err = |n: u64, epsilon: f64| {
        let nearest_n = nearest_power_of_four(n);
        let a = nearest_n.trailing_zeros() / 2;
        let mut nearest_b = nearest_inverse_power_of_two(epsilon);
        // epsilon > 4/sqrt(n) requires b <= a - 3.
        if a >= 3 {
            nearest_b = nearest_b.min(a - 3);
        }
        Error::InvalidMultilevelShape {
            n,
            epsilon,
            nearest_n,
            nearest_epsilon: 1.0 / (1u64 << nearest_b) as f64,
        }
    };
    if n < 4 || !n.is_power_of_two() || !n.trailing_zeros().is_multiple_of(2) {
        return Err(shape_err(n, epsilon));
    }
    let a = n.trailing_zeros() / 2;
    let Some(b) = (0..=60u32).find(|&b| epsilon == 1.0 / (1u64 << b) as f64) else {
        return Err(shape_err(n, epsilon));
    };
    // epsilon > 4/sqrt(n), i.e. at least one level must exist.
    if a < b + 3 {
        return Err(shape_err(n, epsilon));
    }
    Ok((a, b))
}

fn nearest_power_of_four(n: u64) -> u64 {
    let mut best = 4u64;
    let mut pow = 4u64;
    loop {
        if pow.abs_diff(n) < best.abs_diff(n) {
            best = pow;
        }
        match pow.checked_mul(4) {
            Some(next) if pow < n * 4 => pow = next,
            _ => return best,
        }
    }
}

fn nearest_inverse_power_of_two(epsilon: f64) -> u32 {
    let mut best = 0u32;
    let mut best_diff = f64::INFINITY;
    for b in 0..=60u32 {
        let cand = 1.0 / (1u64 << b) as f64;
        let diff = if cand > epsilon {
            cand - epsilon
        } else {
            epsilon - cand
        };
        if diff < best_diff {
            best_diff = diff;
            best = b;
        }
    }
    best
}

/// Layout of the multi-level packing for a length-`n` stream.
///
/// Requires `n` a power of four, `1/epsilon` a power of two, and
/// `epsilon > 4/sqrt(n)`; levels run over `1..=log2(eps*sqrt(n)) - 2`.
pub fn multilevel_layout(n: u64, epsilon: f64) -> Result<MultiLevelLayout, Error> {
    let (a, b) = shape_exponents(n, epsilon)?;
    let levels = (1..=a - b - 2)
        .map(|l| {
            let t = 1u64 << l;
            let bucket_count = 1u64 << (l + 2);
            let bucket_len = n >> (l + 2);
            let d = 1u64 << (2 * (a - b - 1 - l));
            LevelLayout {
                level: l,
                t,
                d,
                bucket_count,
                bucket_len,
                active_indices: (1..=bucket_count).filter(|i| i % 4 == 0).collect(),
                super_elements_per_bucket: bucket_len / d,
            }
        })
        .collect();
    Ok(MultiLevelLayout {
        n,
        epsilon,
        levels,
    })
}

/// An unplanted multi-level stream: uniform draws (the background
/// distribution) plus the layout metadata. Identical to
/// [`uniform_stream`] with universe `n^3 + 1` under the same seed.
pub fn multilevel_stream(n: u64, epsilon: f64, seed: u64) -> Result<(Stream, MultiLevelLayout), Error> {
    let layout = multilevel_layout(n, epsilon)?;
    let universe = edisj_universe(n)?;
    Ok((uniform_stream(n, universe, seed), layout))
}

/// A multi-level stream with a gap instance planted at `level`: the
/// level's active buckets are overwritten with the players' sets (set
/// size `n/(4dt)`) and the referee suffix of `k*d = t*d/eps` elements is
/// appended. Everything outside the active buckets matches the unplanted
/// stream for the same seed.
pub fn multilevel_planted_stream(
    n: u64,
    epsilon: f64,
    seed: u64,
    level: u32,
    label: EdisjLabel,
) -> Result<(Stream, MultiLevelLayout, EdisjInstance), Error> {
    let layout = multilevel_layout(n, epsilon)?;
    let Some(lvl) = layout.levels.iter().find(|l| l.level == level) else {
        return Err(Error::InvalidStreamParams(format!(
            "level {level} outside 1..={}",
            layout.levels.len()
        )));
    };
    let universe = edisj_universe(n)?;
    // k = t/eps exactly; epsilon is a reciprocal power of two here.
    let k = referee_repetitions(lvl.t, epsilon)?;
    let instance = build_instance(BuildParams {
        n,
        t: lvl.t,
        epsilon,
        d: lvl.d,
        k,
        set_size: lvl.super_elements_per_bucket,
        universe,
        label,
        seed: derive_seed(derive_seed(seed, PLANT_SALT), level as u64),
    })?;
    let mut stream = uniform_stream(n, universe, seed);
    for (set, (start, _)) in instance.sets.iter().zip(lvl.active_ranges()) {
        let mut pos = start as usize;
        for &base in set {
            for id in base..base + lvl.d {
                stream[pos] = id;
                pos += 1;
            }
        }
    }
    for _ in 0..instance.k {
        stream.extend(instance.exam..instance.exam + lvl.d);
    }
    Ok((stream, layout, instance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Histogram;

    #[test]
    fn uniform_stream_basics() {
        assert!(uniform_stream(0, 100, 1).is_empty());
        let a = uniform_stream(1000, 50, 9);
        let b = uniform_stream(1000, 50, 9);
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x < 50));
        assert_ne!(a, uniform_stream(1000, 50, 10));
    }

    // Universe of n^3: collisions are negligible so F2 stays within a few
    // counts of n.
    #[test]
    fn uniform_stream_f2_near_n_for_huge_universe() {
        let n = 100_000u64;
        let s = uniform_stream(n, 1_000_000_000_000_000, 77);
        let f2 = Histogram::from_stream(&s).moment(2).unwrap();
        assert!(f2 >= n as u128);
        assert!(f2 <= (n + 20) as u128, "f2 = {f2}");
    }

    #[test]
    fn zipf_zero_exponent_is_uniform() {
        assert_eq!(
            zipf_stream(500, 64, 0.0, 3),
            uniform_stream(500, 64, 3)
        );
    }

    #[test]
    fn zipf_large_exponent_concentrates_mass() {
        let n = 1000u64;
        let s = zipf_stream(n, 2, 10.0, 5);
        let f2 = Histogram::from_stream(&s).moment(2).unwrap();
        assert!(f2 > (n as u128 * n as u128) * 9 / 10, "f2 = {f2}");
    }

    #[test]
    fn zipf_unit_exponent_f2_between_extremes() {
        let n = 100_000u64;
        let s = zipf_stream(n, n, 1.0, 11);
        let f2 = Histogram::from_stream(&s).moment(2).unwrap();
        assert!(f2 > n as u128);
        assert!(f2 < n as u128 * n as u128);
        assert_eq!(s, zipf_stream(n, n, 1.0, 11));
    }

    #[test]
    fn edisj_yes_instance_structure() {
        // n=16, t=4, eps=1, d=1: four sets of four singletons sharing
        // exactly one element; k = 4.
        let inst = edisj_instance(16, 4, 1.0, 1, EdisjLabel::Yes, 42).unwrap();
        assert_eq!(inst.k, 4);
        assert_eq!(inst.set_size, 4);
        inst.validate().unwrap();

        let stream = inst.stream();
        assert_eq!(stream.len() as u64, 16 + 4);
        let h = Histogram::from_stream(&stream);
        // One element of frequency t+k = 8, n-t = 12 singletons.
        assert_eq!(h.count_of(inst.exam), 8);
        assert_eq!(h.iter().filter(|&(_, f)| f == 1).count(), 12);
        assert_eq!(h.moment(2).unwrap(), 76);
        assert_eq!(inst.exact_f2(), 76);
    }

    #[test]
    fn edisj_no_disjoint_structure() {
        let inst = edisj_instance(16, 4, 1.0, 1, EdisjLabel::NoDisjoint, 42).unwrap();
        inst.validate().unwrap();
        // 16 distinct elements across the sets.
        let mut all: Vec<u64> = inst.sets.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 16);
        // Worst NO case: exam in exactly one set, F2 = n + k^2 + 2k = 40.
        let f2 = Histogram::from_stream(&inst.stream()).moment(2).unwrap();
        assert_eq!(f2, 40);
        assert_eq!(inst.exact_f2(), 40);
    }

    #[test]
    fn edisj_wrong_exam_structure() {
        let inst = edisj_instance(16, 4, 1.0, 1, EdisjLabel::NoWrongExam, 42).unwrap();
        inst.validate().unwrap();
        // F2 = n + k^2 + 2k + t^2 - t = 52.
        let f2 = Histogram::from_stream(&inst.stream()).moment(2).unwrap();
        assert_eq!(f2, 52);
        assert_eq!(inst.exact_f2(), 52);
    }

    #[test]
    fn edisj_super_element_variant() {
        // n=64, t=2, eps=0.5, d = floor(eps^2 n / t^2) = 4: two sets of
        // eight width-4 super-elements sharing one.
        assert_eq!(default_super_element_width(64, 2, 0.5), 4);
        let inst = edisj_instance(64, 2, 0.5, 4, EdisjLabel::Yes, 3).unwrap();
        assert_eq!(inst.set_size, 8);
        assert_eq!(inst.k, 4);
        inst.validate().unwrap();
        let stream = inst.stream();
        assert_eq!(stream.len() as u64, 64 + 4 * 4);
        // d * (n/d + t^2 - t + k^2 + 2tk) = 4 * (16 + 2 + 16 + 16) = 200.
        let f2 = Histogram::from_stream(&stream).moment(2).unwrap();
        assert_eq!(f2, 200);
        assert_eq!(inst.exact_f2(), 200);
    }

    #[test]
    fn edisj_gap_chain() {
        // YES - maxNO = 2k(t-1) >= kt >= t^2/eps >= eps*n at full width.
        let forms = EdisjInstance::closed_forms(16, 4, 1.0, 1).unwrap();
        assert_eq!(forms.gap, 24);
        assert_eq!(forms.yes_f2 - forms.max_no_f2, forms.gap);
        assert!(forms.gap >= (forms.k * 4) as u128);
        assert!((forms.k * 4) as u128 >= 16);
    }

    #[test]
    fn edisj_rejects_bad_parameters() {
        // d*t does not divide n.
        assert!(edisj_instance(17, 4, 1.0, 1, EdisjLabel::Yes, 1).is_err());
        // t exceeds eps*sqrt(n).
        assert!(edisj_instance(16, 8, 1.0, 1, EdisjLabel::Yes, 1).is_err());
        // t below 2.
        assert!(edisj_instance(16, 1, 1.0, 1, EdisjLabel::Yes, 1).is_err());
        // universe n^3 overflows u64.
        assert!(edisj_instance(1 << 22, 2, 1.0, 1 << 21, EdisjLabel::Yes, 1).is_err());
    }

    #[test]
    fn edisj_validator_catches_corruption() {
        let mut inst = edisj_instance(16, 4, 1.0, 1, EdisjLabel::Yes, 11).unwrap();
        inst.validate().unwrap();
        // Remove the exam from one set: no longer a YES instance.
        let pos = inst.sets[0].iter().position(|&b| b == inst.exam).unwrap();
        inst.sets[0][pos] = inst.exam + 1_000_000;
        inst.sets[0].sort_unstable();
        assert!(inst.validate().is_err());
    }

    #[test]
    fn edisj_deterministic_per_seed() {
        let a = edisj_instance(4096, 8, 0.25, 4, EdisjLabel::NoWrongExam, 5).unwrap();
        let b = edisj_instance(4096, 8, 0.25, 4, EdisjLabel::NoWrongExam, 5).unwrap();
        assert_eq!(a, b);
        let c = edisj_instance(4096, 8, 0.25, 4, EdisjLabel::NoWrongExam, 6).unwrap();
        assert_ne!(a.exam, c.exam);
    }

    #[test]
    fn multilevel_layout_example() {
        // (n=4096, eps=1/4): levels 1..=2; level 1 has 8 buckets of 512
        // with active indices 4 and 8.
        let layout = multilevel_layout(4096, 0.25).unwrap();
        layout.validate().unwrap();
        assert_eq!(layout.levels.len(), 2);

        let l1 = &layout.levels[0];
        assert_eq!(l1.bucket_count, 8);
        assert_eq!(l1.bucket_len, 512);
        assert_eq!(l1.active_indices, vec![4, 8]);
        assert_eq!(l1.d, 16);
        assert_eq!(l1.super_elements_per_bucket, 32);

        let l2 = &layout.levels[1];
        assert_eq!(l2.bucket_count, 16);
        assert_eq!(l2.bucket_len, 256);
        assert_eq!(l2.active_indices, vec![4, 8, 12, 16]);
        assert_eq!(l2.d, 4);
        assert_eq!(l2.super_elements_per_bucket, 64);
    }

    #[test]
    fn multilevel_shape_rejection_suggests_nearest() {
        let err = multilevel_layout(1000, 0.25).unwrap_err();
        match err {
            Error::InvalidMultilevelShape {
                nearest_n,
                nearest_epsilon,
                ..
            } => {
                assert_eq!(nearest_n, 1024);
                assert_eq!(nearest_epsilon, 0.25);
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = multilevel_layout(4096, 0.3).unwrap_err();
        match err {
            Error::InvalidMultilevelShape {
                nearest_epsilon, ..
            } => assert_eq!(nearest_epsilon, 0.25),
            other => panic!("unexpected {other:?}"),
        }
        // epsilon too small for n: 1/16 needs n > 4096.
        assert!(multilevel_layout(4096, 1.0 / 16.0).is_err());
    }

    #[test]
    fn multilevel_unplanted_matches_uniform() {
        let n = 4096u64;
        let (stream, layout) = multilevel_stream(n, 0.25, 123).unwrap();
        layout.validate().unwrap();
        assert_eq!(stream, uniform_stream(n, n * n * n + 1, 123));
    }

    #[test]
    fn multilevel_planted_overwrites_exactly_the_active_buckets() {
        let n = 4096u64;
        let seed = 9u64;
        let (base, _) = multilevel_stream(n, 0.25, seed).unwrap();
        let (planted, layout, inst) =
            multilevel_planted_stream(n, 0.25, seed, 1, EdisjLabel::Yes).unwrap();
        inst.validate().unwrap();
        assert_eq!(inst.set_size, 32);
        assert_eq!(inst.k, 8); // t/eps = 2*4

        let lvl = &layout.levels[0];
        assert_eq!(planted.len() as u64, n + inst.k * lvl.d);
        let active: Vec<(u64, u64)> = lvl.active_ranges().collect();
        for i in 0..n {
            let in_active = active.iter().any(|&(s, e)| s <= i && i < e);
            if !in_active {
                assert_eq!(planted[i as usize], base[i as usize], "position {i}");
            }
        }
        // Active buckets hold the flattened sorted sets.
        for (set, &(start, end)) in inst.sets.iter().zip(&active) {
            let got = &planted[start as usize..end as usize];
            let want: Vec<u64> = set.iter().flat_map(|&b| b..b + lvl.d).collect();
            assert_eq!(got, &want[..]);
            assert_eq!((end - start), inst.set_size * lvl.d);
        }
        // Suffix is k repetitions of the exam super-element.
        let suffix = &planted[n as usize..];
        let want: Vec<u64> = (0..inst.k)
            .flat_map(|_| inst.exam..inst.exam + lvl.d)
            .collect();
        assert_eq!(suffix, &want[..]);
    }

    #[test]
    fn multilevel_planted_rejects_missing_level() {
        assert!(multilevel_planted_stream(4096, 0.25, 1, 3, EdisjLabel::Yes).is_err());
        assert!(multilevel_planted_stream(4096, 0.25, 1, 0, EdisjLabel::Yes).is_err());
    }
}
