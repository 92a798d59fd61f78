//! Exact finite-n statistics of classical three-outcome tests by summing
//! over type classes.
//!
//! Enumeration is split into chunks by the first count; chunks run in
//! parallel, accumulate in lexicographic order and are combined in a fixed
//! binary tree, so results do not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::divergences::Family;
use crate::error::{Error, Result};
use crate::optimize::{log_add, tree_log_sum, LogSum};
use crate::regions::hoeffding;
use crate::states::{ClassicalDistribution, DensityMatrix};

/// Largest number of type classes enumerated exactly.
pub const TYPE_BUDGET: f64 = 1e8;
const CLOSED_TOL: f64 = 1e-12;

/// Empirical distribution of a sequence as integer counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TypeVector {
    pub counts: Vec<u64>,
    pub n: u64,
}

impl TypeVector {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }
}

/// Counts each symbol of `sequence` over an alphabet of `alphabet_size` symbols.
pub fn type_of(sequence: &[usize], alphabet_size: usize) -> Result<TypeVector> {
    if sequence.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts = vec![0u64; alphabet_size];
    for &x in sequence {
        if x >= alphabet_size {
            return Err(Error::InvalidInput(format!("symbol {x} outside alphabet of size {alphabet_size}")));
        }
        counts[x] += 1;
    }
    Ok(TypeVector { counts, n: sequence.len() as u64 })
}

/// `C(n + k - 1, k - 1)`, as a float.
pub fn type_count(n: u64, alphabet_size: usize) -> f64 {
    let k = alphabet_size as u64;
    ln_binomial(n + k - 1, k - 1).exp().round()
}

fn check_budget(n: u64, alphabet_size: usize, budget: f64) -> Result<()> {
    if n == 0 || alphabet_size < 2 {
        return Err(Error::InvalidInput(format!("need n >= 1 and alphabet >= 2, got n={n}, k={alphabet_size}")));
    }
    let count = type_count(n, alphabet_size);
    if count > budget {
        return Err(Error::TooManyTypes { count, budget });
    }
    Ok(())
}

/// Advances `c` to the next composition of `sum(c)` in lexicographic order.
fn next_composition(c: &mut [u64]) -> bool {
    let r = c.len();
    let mut tail = 0;
    for j in (0..r.saturating_sub(1)).rev() {
        tail += c[j + 1];
        if tail > 0 {
            c[j] += 1;
            for x in &mut c[j + 1..] {
                *x = 0;
            }
            c[r - 1] = tail - 1;
            return true;
        }
    }
    false
}

/// Iterator over all types with denominator `n`, lexicographic in the counts.
pub struct TypeIter {
    current: Option<Vec<u64>>,
    n: u64,
}

impl Iterator for TypeIter {
    type Item = TypeVector;

    fn next(&mut self) -> Option<TypeVector> {
        let c = self.current.as_mut()?;
        let out = TypeVector { counts: c.clone(), n: self.n };
        if !next_composition(c) {
            self.current = None;
        }
        Some(out)
    }
}

/// All types of length-`n` sequences; refuses beyond [`TYPE_BUDGET`] classes.
pub fn enumerate_types(n: u64, alphabet_size: usize) -> Result<TypeIter> {
    check_budget(n, alphabet_size, TYPE_BUDGET)?;
    let mut start = vec![0; alphabet_size];
    start[alphabet_size - 1] = n;
    Ok(TypeIter { current: Some(start), n })
}

fn log_multinomial(counts: &[u64], n: u64) -> f64 {
    ln_factorial(n) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

fn log_weight(counts: &[u64], log_p: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&c, &lp) in counts.iter().zip(log_p) {
        if c > 0 {
            acc += c as f64 * lp;
        }
    }
    acc
}

/// Exact log-probability of the type class of `t` under i.i.d. `p`.
pub fn log_prob_type_class(t: &TypeVector, p: &ClassicalDistribution) -> f64 {
    let log_p: Vec<f64> = p.probs().iter().map(|x| x.ln()).collect();
    log_multinomial(&t.counts, t.n) + log_weight(&t.counts, &log_p)
}

/// `D(t‖q)` for a type given by counts.
fn type_divergence(counts: &[u64], n: u64, log_q: &[f64]) -> f64 {
    let nf = n as f64;
    let mut acc = 0.0;
    for (&c, &lq) in counts.iter().zip(log_q) {
        if c > 0 {
            let f = c as f64 / nf;
            acc += f * (f.ln() - lq);
        }
    }
    acc
}

fn within_closed(x: f64, bound: f64) -> bool {
    x <= bound + CLOSED_TOL * bound.abs().max(1.0)
}

/// Sums `R` log-domain accumulators over every type, chunked by first count.
fn accumulate<const R: usize>(
    n: u64,
    k: usize,
    budget: f64,
    f: impl Fn(&[u64]) -> [f64; R] + Sync,
) -> Result<[f64; R]> {
    check_budget(n, k, budget)?;
    let chunks: Vec<[f64; R]> = (0..=n)
        .into_par_iter()
        .map(|first| {
            let mut acc = [LogSum::new(); R];
            let mut c = vec![0u64; k];
            c[0] = first;
            c[k - 1] += n - first;
            loop {
                let v = f(&c);
                for (a, x) in acc.iter_mut().zip(v) {
                    a.add(x);
                }
                if !next_composition(&mut c[1..]) {
                    break;
                }
            }
            acc.map(|a| a.value())
        })
        .collect();
    Ok(std::array::from_fn(|r| tree_log_sum(chunks.iter().map(|c| c[r]).collect())))
}

/// What a three-outcome test decides on a given type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    /// The `M` effect: guess the first hypothesis.
    First,
    /// The `N` effect: guess the second hypothesis.
    Second,
    Abstain,
}

/// What to do when exact enumeration exceeds the budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Fallback {
    Refuse,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EngineConfig {
    pub budget: f64,
    pub fallback: Fallback,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { budget: TYPE_BUDGET, fallback: Fallback::MonteCarlo { trials: 100_000, seed: 0x5EED } }
    }
}

impl EngineConfig {
    pub fn exact_only() -> Self {
        EngineConfig { budget: TYPE_BUDGET, fallback: Fallback::Refuse }
    }
}

/// Conditional errors and conclusive probabilities of a three-outcome test,
/// as natural logarithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestStatistics {
    pub n: u64,
    pub exact: bool,
    /// `log P(N) / P(M + N)`: conditional error under the first hypothesis.
    pub log_alpha_bar: f64,
    /// `log Q(M) / Q(M + N)`.
    pub log_beta_bar: f64,
    pub log_pi_p: f64,
    pub log_pi_q: f64,
    /// `log(1 - π_n(P))`.
    pub log_abstain_p: f64,
    pub log_abstain_q: f64,
    /// Set when some conditional error is `0/0` or a decision set is empty.
    pub degenerate: bool,
}

impl TestStatistics {
    /// Builds the statistics from log-masses `[P(M), P(N), P(abstain), Q(M), Q(N), Q(abstain)]`.
    pub fn from_log_masses(n: u64, exact: bool, m: [f64; 6]) -> Self {
        let [pm, pn, pa, qm, qn, qa] = m;
        let log_pi_p = log_add(pm, pn);
        let log_pi_q = log_add(qm, qn);
        let degenerate = m[..2].iter().chain(&m[3..5]).any(|&x| x == f64::NEG_INFINITY);
        TestStatistics {
            n,
            exact,
            log_alpha_bar: pn - log_pi_p,
            log_beta_bar: qm - log_pi_q,
            log_pi_p,
            log_pi_q,
            log_abstain_p: pa,
            log_abstain_q: qa,
            degenerate,
        }
    }

    /// `-(1/n) log ᾱ_n`.
    pub fn alpha_exponent(&self) -> f64 {
        -self.log_alpha_bar / self.n as f64
    }

    pub fn beta_exponent(&self) -> f64 {
        -self.log_beta_bar / self.n as f64
    }

    /// `-(1/n) log(1 - π_n(P))`.
    pub fn abstain_exponent_p(&self) -> f64 {
        -self.log_abstain_p / self.n as f64
    }

    pub fn abstain_exponent_q(&self) -> f64 {
        -self.log_abstain_q / self.n as f64
    }

    /// All fields in nats, with a `base2` block of the same logs in bits.
    pub fn to_json(&self) -> serde_json::Value {
        let b = |x: f64| x / std::f64::consts::LN_2;
        serde_json::json!({
            "n": self.n,
            "exact": self.exact,
            "degenerate": self.degenerate,
            "log_alpha_bar": self.log_alpha_bar,
            "log_beta_bar": self.log_beta_bar,
            "log_pi_P": self.log_pi_p,
            "log_pi_Q": self.log_pi_q,
            "log_abstain_P": self.log_abstain_p,
            "log_abstain_Q": self.log_abstain_q,
            "base2": {
                "log_alpha_bar": b(self.log_alpha_bar),
                "log_beta_bar": b(self.log_beta_bar),
                "log_pi_P": b(self.log_pi_p),
                "log_pi_Q": b(self.log_pi_q),
                "log_abstain_P": b(self.log_abstain_p),
                "log_abstain_Q": b(self.log_abstain_q),
                "alpha_exponent": b(self.alpha_exponent()),
                "beta_exponent": b(self.beta_exponent()),
            },
        })
    }
}

fn same_alphabet(p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<usize> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::InvalidInput(format!(
            "alphabet sizes differ: {} vs {}",
            p.alphabet_size(),
            q.alphabet_size()
        )));
    }
    Ok(p.alphabet_size())
}

fn slot(d: Decision) -> usize {
    match d {
        Decision::First => 0,
        Decision::Second => 1,
        Decision::Abstain => 2,
    }
}

fn sample_counts(n: u64, probs: &[f64], rng: &mut ChaCha8Rng, out: &mut [u64]) {
    let mut remaining = n;
    let mut mass = 1.0;
    let k = probs.len();
    for i in 0..k - 1 {
        let c = if remaining == 0 {
            0
        } else {
            let p = (probs[i] / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, p).expect("valid binomial").sample(rng)
        };
        out[i] = c;
        remaining -= c;
        mass -= probs[i];
    }
    out[k - 1] = remaining;
}

const MC_CHUNK: u64 = 4096;

/// Monte Carlo estimate of the decision frequencies under `probs`.
fn monte_carlo(
    n: u64,
    probs: &[f64],
    trials: u64,
    seed: u64,
    stream: u64,
    classify: &(impl Fn(&[u64]) -> Decision + Sync),
) -> [f64; 3] {
    let chunks = trials.div_ceil(MC_CHUNK);
    let counts: Vec<[u64; 3]> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ci * 2 + stream);
            let mut buf = vec![0u64; probs.len()];
            let mut acc = [0u64; 3];
            let len = MC_CHUNK.min(trials - ci * MC_CHUNK);
            for _ in 0..len {
                sample_counts(n, probs, &mut rng, &mut buf);
                acc[slot(classify(&buf))] += 1;
            }
            acc
        })
        .collect();
    let mut total = [0u64; 3];
    for c in counts {
        for i in 0..3 {
            total[i] += c[i];
        }
    }
    total.map(|c| if c == 0 { f64::NEG_INFINITY } else { (c as f64 / trials as f64).ln() })
}

/// Statistics of an arbitrary type-based test.
pub fn evaluate_test(
    p: &ClassicalDistribution,
    q: &ClassicalDistribution,
    n: u64,
    cfg: &EngineConfig,
    classify: impl Fn(&[u64]) -> Decision + Sync,
) -> Result<TestStatistics> {
    let k = same_alphabet(p, q)?;
    let log_p: Vec<f64> = p.probs().iter().map(|x| x.ln()).collect();
    let log_q: Vec<f64> = q.probs().iter().map(|x| x.ln()).collect();
    let exact = accumulate(n, k, cfg.budget, |c| {
        let coef = log_multinomial(c, n);
        let mut out = [f64::NEG_INFINITY; 6];
        let s = slot(classify(c));
        out[s] = coef + log_weight(c, &log_p);
        out[3 + s] = coef + log_weight(c, &log_q);
        out
    });
    match (exact, cfg.fallback) {
        (Ok(m), _) => Ok(TestStatistics::from_log_masses(n, true, m)),
        (Err(Error::TooManyTypes { .. }), Fallback::MonteCarlo { trials, seed }) => {
            let a = monte_carlo(n, p.probs(), trials, seed, 0, &classify);
            let b = monte_carlo(n, q.probs(), trials, seed, 1, &classify);
            Ok(TestStatistics::from_log_masses(n, false, [a[0], a[1], a[2], b[0], b[1], b[2]]))
        }
        (Err(e), _) => Err(e),
    }
}

/// Default typicality radius `n^{-1/3}`.
pub fn stein_delta(n: u64) -> f64 {
    (n as f64).powf(-1.0 / 3.0)
}

/// Typical-set test: guess `P` on the sup-norm ball of radius `δ` around
/// `P`, guess `Q` on the ball around `Q`, abstain elsewhere.
pub fn eval_stein_test(
    p: &ClassicalDistribution,
    q: &ClassicalDistribution,
    n: u64,
    delta: f64,
    cfg: &EngineConfig,
) -> Result<TestStatistics> {
    same_alphabet(p, q)?;
    let half_gap = 0.5 * p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if !(delta < half_gap) {
        return Err(Error::OverlappingSets { delta, half_gap });
    }
    let nf = n as f64;
    let ball = |c: &[u64], centre: &[f64]| {
        let dist = c.iter().zip(centre).map(|(&x, &m)| (x as f64 / nf - m).abs()).fold(0.0, f64::max);
        within_closed(dist, delta)
    };
    evaluate_test(p, q, n, cfg, |c| {
        if ball(c, p.probs()) {
            Decision::First
        } else if ball(c, q.probs()) {
            Decision::Second
        } else {
            Decision::Abstain
        }
    })
}

/// Rejection test: guess `P` when `D(t‖Q) > H_K(Q‖P)`, guess `Q` when
/// `D(t‖Q) ≤ L`, abstain in between. `K` and `L` are in nats.
pub fn eval_reject_test(
    p: &ClassicalDistribution,
    q: &ClassicalDistribution,
    n: u64,
    k: f64,
    l: f64,
    cfg: &EngineConfig,
) -> Result<TestStatistics> {
    same_alphabet(p, q)?;
    if !(k >= 0.0 && l >= 0.0) {
        return Err(Error::InvalidThresholds(format!("K = {k} and L = {l} must be nonnegative")));
    }
    let (pm, qm) = (DensityMatrix::from_distribution(p)?, DensityMatrix::from_distribution(q)?);
    let h = hoeffding(k, &qm, &pm, Family::Petz)?;
    if h < l {
        return Err(Error::InvalidThresholds(format!("H_K(Q||P) = {h} is below L = {l}; decision sets overlap")));
    }
    let log_q: Vec<f64> = q.probs().iter().map(|x| x.ln()).collect();
    evaluate_test(p, q, n, cfg, |c| {
        let d = type_divergence(c, n, &log_q);
        if !within_closed(d, h) {
            Decision::First
        } else if within_closed(d, l) {
            Decision::Second
        } else {
            Decision::Abstain
        }
    })
}

/// Two-outcome likelihood test: guess `P` when `D(t‖P) ≤ A`, else `Q`.
pub fn eval_hoeffding_test(
    p: &ClassicalDistribution,
    q: &ClassicalDistribution,
    n: u64,
    a: f64,
    cfg: &EngineConfig,
) -> Result<TestStatistics> {
    same_alphabet(p, q)?;
    let log_p: Vec<f64> = p.probs().iter().map(|x| x.ln()).collect();
    evaluate_test(p, q, n, cfg, |c| {
        if within_closed(type_divergence(c, n, &log_p), a) {
            Decision::First
        } else {
            Decision::Second
        }
    })
}

/// `log Pr_{under^n}{D(t‖center) ≤ A}`, or of the complement.
pub fn sanov_log_prob(
    center: &ClassicalDistribution,
    radius: f64,
    under: &ClassicalDistribution,
    n: u64,
    complement: bool,
) -> Result<f64> {
    let k = same_alphabet(center, under)?;
    let log_c: Vec<f64> = center.probs().iter().map(|x| x.ln()).collect();
    let log_u: Vec<f64> = under.probs().iter().map(|x| x.ln()).collect();
    let [v] = accumulate(n, k, TYPE_BUDGET, |c| {
        let inside = within_closed(type_divergence(c, n, &log_c), radius);
        if inside != complement {
            [log_multinomial(c, n) + log_weight(c, &log_u)]
        } else {
            [f64::NEG_INFINITY]
        }
    })?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(p: f64) -> ClassicalDistribution {
        ClassicalDistribution::bernoulli(p).unwrap()
    }

    #[test]
    fn types_of_sequences() {
        assert_eq!(type_of(&[0, 0, 1], 2).unwrap().counts, vec![2, 1]);
        assert_eq!(type_of(&[0; 5], 2).unwrap().counts, vec![5, 0]);
        assert_eq!(type_of(&[0, 1, 0, 1, 2, 2, 2], 3).unwrap().counts, vec![2, 2, 3]);
        assert_eq!(type_of(&[], 2), Err(Error::EmptySequence));
    }

    #[test]
    fn enumeration_counts_and_order() {
        assert_eq!(enumerate_types(3, 2).unwrap().count(), 4);
        let t: Vec<_> = enumerate_types(2, 3).unwrap().map(|t| t.counts).collect();
        assert_eq!(t.len(), 6);
        assert_eq!(t[0], vec![0, 0, 2]);
        assert_eq!(t[5], vec![2, 0, 0]);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(enumerate_types(10, 2).unwrap().count(), 11);
        assert!(matches!(enumerate_types(100_000, 6), Err(Error::TooManyTypes { .. })));
    }

    #[test]
    fn type_class_probabilities() {
        let p = bern(0.9);
        let t = TypeVector { counts: vec![10, 0], n: 10 };
        assert!((log_prob_type_class(&t, &p) - 10.0 * 0.9f64.ln()).abs() < 1e-12);
        let t = TypeVector { counts: vec![8, 2], n: 10 };
        let oracle = (45.0 * 0.9f64.powi(8) * 0.01).ln();
        assert!((log_prob_type_class(&t, &p) - oracle).abs() < 1e-12);
        let total = tree_log_sum(enumerate_types(10, 2).unwrap().map(|t| log_prob_type_class(&t, &p)).collect());
        assert!(total.abs() < 1e-12);
    }

    #[test]
    fn stein_small_instance() {
        let s = eval_stein_test(&bern(0.9), &bern(0.2), 10, 0.15, &EngineConfig::exact_only()).unwrap();
        let binom = |k: i32| {
            let c = (1..=k).fold(1.0, |acc, i| acc * (10 - k + i) as f64 / i as f64);
            c * 0.9f64.powi(k) * 0.1f64.powi(10 - k)
        };
        let guess_p: f64 = (8..=10).map(binom).sum();
        let guess_q: f64 = (1..=3).map(binom).sum();
        assert!((guess_p - 0.929_809_173_6).abs() < 1e-9);
        assert!((s.log_pi_p.exp() - (guess_p + guess_q)).abs() < 1e-12);
        assert!((s.log_alpha_bar.exp() - guess_q / (guess_p + guess_q)).abs() < 1e-12);
        assert!(matches!(
            eval_stein_test(&bern(0.9), &bern(0.9), 10, 0.01, &EngineConfig::default()),
            Err(Error::OverlappingSets { .. })
        ));
    }

    #[test]
    fn sanov_special_cases() {
        let p = bern(0.9);
        assert!(sanov_log_prob(&p, 1e6, &p, 10, false).unwrap().abs() < 1e-12);
        let exact = sanov_log_prob(&p, 0.0, &p, 10, false).unwrap();
        assert!((exact - (10.0 * 0.9f64.powi(9) * 0.1).ln()).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_fallback_is_flagged() {
        let cfg = EngineConfig { budget: 10.0, fallback: Fallback::MonteCarlo { trials: 20_000, seed: 7 } };
        let s = eval_stein_test(&bern(0.9), &bern(0.2), 50, 0.2, &cfg).unwrap();
        assert!(!s.exact);
        let e = eval_stein_test(&bern(0.9), &bern(0.2), 50, 0.2, &EngineConfig::exact_only()).unwrap();
        assert!((s.log_pi_p.exp() - e.log_pi_p.exp()).abs() < 0.01);
        let refuse = EngineConfig { budget: 10.0, fallback: Fallback::Refuse };
        assert!(matches!(eval_stein_test(&bern(0.9), &bern(0.2), 50, 0.2, &refuse), Err(Error::TooManyTypes { .. })));
    }
}
