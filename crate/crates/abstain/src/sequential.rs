//! Adaptive three-outcome protocol driven by a log-likelihood random walk.
//!
//! At step `k` the protocol measures with `M_ρ` when `S_{k-1} ≥ 0` and with
//! `M_σ` otherwise, adds the log-likelihood ratio of the outcome to `S`, and
//! after `n` steps guesses ρ if `S_n ≥ B_n`, σ if `S_n ≤ -A_n`, and abstains
//! in between.
//!
//! Randomness is keyed by `(seed, trial, hypothesis)` through the stream of a
//! ChaCha8 generator and advances one word per step, so any trial can be
//! replayed in isolation and results do not depend on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measured::{measured_relative_entropy, MeasurementQuality, Povm};
use crate::states::DensityMatrix;
use crate::types::TestStatistics;

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;
/// Smallest trial count accepted by [`estimate_statistics`].
pub const MIN_TRIALS: u64 = 1000;

/// The two measurements of the protocol with their outcome tables.
#[derive(Clone, Debug)]
pub struct MeasurementPair {
    pub m_rho: Povm,
    pub m_sigma: Povm,
    /// `probs_rho[m][x]`: probability of outcome `x` of measurement `m`
    /// (0 for `M_ρ`, 1 for `M_σ`) when the state is ρ.
    pub probs_rho: [Vec<f64>; 2],
    pub probs_sigma: [Vec<f64>; 2],
    /// Achieved `D(M_ρ(ρ)‖M_ρ(σ))`.
    pub d_rho_sigma: f64,
    /// Achieved `D(M_σ(σ)‖M_σ(ρ))`.
    pub d_sigma_rho: f64,
    pub quality: [MeasurementQuality; 2],
    /// False when both measurements have the same effects up to ordering.
    pub distinct: bool,
    log_ratio: [Vec<f64>; 2],
}

fn same_effects(a: &Povm, b: &Povm) -> bool {
    a.len() == b.len()
        && a.effects().iter().all(|e| b.effects().iter().any(|f| e.sub(f).max_abs() <= 1e-9))
}

impl MeasurementPair {
    pub fn new(m_rho: Povm, m_sigma: Povm, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        let probs_rho = [m_rho.probabilities(rho), m_sigma.probabilities(rho)];
        let probs_sigma = [m_rho.probabilities(sigma), m_sigma.probabilities(sigma)];
        if probs_rho.iter().chain(&probs_sigma).flatten().any(|&p| p <= 0.0) {
            return Err(Error::InvalidInput("a measurement outcome has zero probability".into()));
        }
        let log_ratio: [Vec<f64>; 2] = std::array::from_fn(|m| {
            probs_rho[m].iter().zip(&probs_sigma[m]).map(|(a, b)| a.ln() - b.ln()).collect()
        });
        let d_rho_sigma = crate::classical::kl(&probs_rho[0], &probs_sigma[0]);
        let d_sigma_rho = crate::classical::kl(&probs_sigma[1], &probs_rho[1]);
        let distinct = !same_effects(&m_rho, &m_sigma);
        Ok(MeasurementPair {
            distinct,
            m_rho,
            m_sigma,
            probs_rho,
            probs_sigma,
            d_rho_sigma,
            d_sigma_rho,
            quality: [MeasurementQuality::Converged; 2],
            log_ratio,
        })
    }

    /// Largest `|Z|` over all outcomes of both measurements.
    pub fn l_bound(&self) -> f64 {
        self.log_ratio.iter().flatten().fold(0.0, |m, z| m.max(z.abs()))
    }

    /// `Z = log Pr_ρ(x) / Pr_σ(x)` for outcome `x` of measurement `m`.
    pub fn log_ratio(&self, m: usize, x: usize) -> f64 {
        self.log_ratio[m][x]
    }

    /// `E[Z | measurement m]` under the given hypothesis.
    pub fn conditional_drift(&self, m: usize, truth: Hypothesis) -> f64 {
        let probs = match truth {
            Hypothesis::Rho => &self.probs_rho[m],
            Hypothesis::Sigma => &self.probs_sigma[m],
        };
        probs.iter().zip(&self.log_ratio[m]).map(|(p, z)| p * z).sum()
    }

    fn outcome_probs(&self, m: usize, truth: Hypothesis) -> &[f64] {
        match truth {
            Hypothesis::Rho => &self.probs_rho[m],
            Hypothesis::Sigma => &self.probs_sigma[m],
        }
    }
}

/// Measurements maximising the measured relative entropy in each direction.
pub fn optimal_measurements(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<MeasurementPair> {
    let fwd = measured_relative_entropy(rho, sigma)?;
    let bwd = measured_relative_entropy(sigma, rho)?;
    let mut pair = MeasurementPair::new(fwd.povm(), bwd.povm(), rho, sigma)?;
    pair.quality = [fwd.quality, bwd.quality];
    Ok(pair)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Rho,
    Sigma,
}

impl Hypothesis {
    fn stream(self) -> u64 {
        match self {
            Hypothesis::Rho => 0,
            Hypothesis::Sigma => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SequentialDecision {
    GuessRho,
    GuessSigma,
    Inconclusive,
}

/// Protocol parameters. Thresholds are in nats.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolConfig {
    pub n: usize,
    pub epsilon: f64,
    pub a_n: f64,
    pub b_n: f64,
    pub seed: u64,
    pub trials: u64,
    pub l_bound: f64,
    pub record_trajectories: bool,
}

impl ProtocolConfig {
    /// `A_n = n(D_M(σ‖ρ) - ε)`, `B_n = n(D_M(ρ‖σ) - ε)` from the achieved values of `pair`.
    pub fn new(pair: &MeasurementPair, n: usize, epsilon: f64, seed: u64, trials: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        if !(epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon = {epsilon} must be positive")));
        }
        let a_n = n as f64 * (pair.d_sigma_rho - epsilon);
        let b_n = n as f64 * (pair.d_rho_sigma - epsilon);
        if a_n <= 0.0 || b_n <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "thresholds must be positive: A_n = {a_n}, B_n = {b_n} (epsilon = {epsilon} nats)"
            )));
        }
        Ok(ProtocolConfig { n, epsilon, a_n, b_n, seed, trials, l_bound: pair.l_bound(), record_trajectories: false })
    }

    pub fn with_trajectories(mut self, on: bool) -> Self {
        self.record_trajectories = on;
        self
    }

    pub fn decide(&self, s: f64) -> SequentialDecision {
        if s >= self.b_n {
            SequentialDecision::GuessRho
        } else if s <= -self.a_n {
            SequentialDecision::GuessSigma
        } else {
            SequentialDecision::Inconclusive
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub decision: SequentialDecision,
    pub final_s: f64,
    /// `S_1, ..., S_n` when trajectories are recorded.
    pub trajectory: Option<Vec<f64>>,
    /// Number of steps whose measurement differs physically from the previous step's.
    pub switches: u32,
    /// `max_k |M_k|` of the Doob martingale part.
    pub max_martingale: f64,
    pub final_martingale: f64,
    /// Steps measured with the measurement of the other hypothesis.
    pub wrong_side_steps: u32,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn sample(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn measurement_for(s_prev: f64) -> usize {
    if s_prev >= 0.0 {
        0
    } else {
        1
    }
}

fn preferred(truth: Hypothesis) -> usize {
    match truth {
        Hypothesis::Rho => 0,
        Hypothesis::Sigma => 1,
    }
}

/// Runs trial `trial_index` with the given true state.
pub fn run_trial(truth: Hypothesis, pair: &MeasurementPair, cfg: &ProtocolConfig, trial_index: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial_index.wrapping_mul(2).wrapping_add(truth.stream()));
    let drift = [pair.conditional_drift(0, truth), pair.conditional_drift(1, truth)];
    let mut trajectory = cfg.record_trajectories.then(|| Vec::with_capacity(cfg.n));
    let (mut s, mut compensator, mut max_mart) = (0.0f64, 0.0f64, 0.0f64);
    let (mut switches, mut wrong) = (0u32, 0u32);
    let mut last = None;
    for _ in 0..cfg.n {
        let m = measurement_for(s);
        if pair.distinct && last.is_some_and(|l| l != m) {
            switches += 1;
        }
        if m != preferred(truth) {
            wrong += 1;
        }
        last = Some(m);
        let x = sample(pair.outcome_probs(m, truth), uniform(&mut rng));
        s += pair.log_ratio(m, x);
        compensator += drift[m];
        max_mart = max_mart.max((s - compensator).abs());
        if let Some(t) = trajectory.as_mut() {
            t.push(s);
        }
    }
    TrialOutcome {
        decision: cfg.decide(s),
        final_s: s,
        trajectory,
        switches,
        max_martingale: max_mart,
        final_martingale: s - compensator,
        wrong_side_steps: wrong,
    }
}

/// Doob-decomposition summary of a set of walks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriftReport {
    /// Mean over walks of `(1/n) max_k |M_k|`.
    pub martingale_part_scale: f64,
    /// Mean fraction of steps spent on the side of zero that selects the
    /// other hypothesis' measurement (`S_{k-1} < 0` under ρ, `≥ 0` under σ).
    pub negative_time_fraction: f64,
}

/// Recomputes the drift report from recorded trajectories `S_1..S_n`.
pub fn drift_diagnostic(pair: &MeasurementPair, truth: Hypothesis, trajectories: &[Vec<f64>]) -> Result<DriftReport> {
    if trajectories.is_empty() || trajectories.iter().any(|t| t.is_empty()) {
        return Err(Error::InvalidInput("drift diagnostics need non-empty trajectories".into()));
    }
    let drift = [pair.conditional_drift(0, truth), pair.conditional_drift(1, truth)];
    let (mut scale, mut frac) = (0.0, 0.0);
    for t in trajectories {
        let (mut prev, mut comp, mut max_mart, mut wrong) = (0.0, 0.0, 0.0f64, 0usize);
        for &s in t {
            let m = measurement_for(prev);
            if m != preferred(truth) {
                wrong += 1;
            }
            comp += drift[m];
            max_mart = max_mart.max((s - comp).abs());
            prev = s;
        }
        scale += max_mart / t.len() as f64;
        frac += wrong as f64 / t.len() as f64;
    }
    let count = trajectories.len() as f64;
    Ok(DriftReport { martingale_part_scale: scale / count, negative_time_fraction: frac / count })
}

/// Wilson score interval for `successes / total` at 95%.
pub fn wilson_interval(successes: u64, total: u64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let t = total as f64;
    let p = successes as f64 / t;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / t;
    let center = (p + z2 / (2.0 * t)) / denom;
    let half = WILSON_Z / denom * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct DecisionCounts {
    pub guess_rho: u64,
    pub guess_sigma: u64,
    pub inconclusive: u64,
}

impl DecisionCounts {
    pub fn conclusive(&self) -> u64 {
        self.guess_rho + self.guess_sigma
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    fn ratio(k: u64, total: u64) -> Self {
        let (lower, upper) = wilson_interval(k, total);
        let value = if total == 0 { f64::NAN } else { k as f64 / total as f64 };
        Estimate { value, lower, upper }
    }
}

/// Observed error count against `trials·e^{-threshold}` plus three Poisson deviations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorBoundCheck {
    pub count: u64,
    pub bound: f64,
    pub holds: bool,
}

impl ErrorBoundCheck {
    fn new(count: u64, trials: u64, threshold: f64) -> Self {
        let mean = trials as f64 * (-threshold).exp();
        let bound = mean + 3.0 * mean.sqrt();
        ErrorBoundCheck { count, bound, holds: count as f64 <= bound }
    }
}

/// Empirical tail `Pr(|M_n| ≥ nδ)` against the Azuma bound with `δ = 0.2 L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AzumaCheck {
    pub delta: f64,
    pub exceedances: u64,
    pub bound: f64,
    pub holds: bool,
}

impl AzumaCheck {
    fn new(final_martingales: impl Iterator<Item = f64>, n: usize, trials: u64, l: f64) -> Self {
        let delta = 0.2 * l;
        let exceedances = final_martingales.filter(|m| m.abs() >= n as f64 * delta).count() as u64;
        let prob = (2.0 * (-(n as f64) * delta * delta / (8.0 * l * l)).exp()).min(1.0);
        let mean = trials as f64 * prob;
        let bound = mean + 3.0 * (mean * (1.0 - prob)).sqrt();
        AzumaCheck { delta, exceedances, bound, holds: exceedances as f64 <= bound }
    }
}

/// Per-hypothesis Monte Carlo summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisSummary {
    pub truth: Hypothesis,
    pub counts: DecisionCounts,
    /// Conditional error: wrong guesses over conclusive trials.
    pub conditional_error: Estimate,
    pub conclusive: Estimate,
    pub mean_rate: f64,
    pub drift: DriftReport,
    pub error_bound: ErrorBoundCheck,
    pub azuma: AzumaCheck,
    /// Fraction of trials that never switched measurement.
    pub no_switch_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequentialReport {
    pub config: ProtocolConfig,
    pub d_rho_sigma: f64,
    pub d_sigma_rho: f64,
    pub statistics: TestStatistics,
    pub rho: HypothesisSummary,
    pub sigma: HypothesisSummary,
}

fn ln_ratio(k: u64, total: u64) -> f64 {
    if k == 0 {
        f64::NEG_INFINITY
    } else {
        (k as f64 / total as f64).ln()
    }
}

fn summarize(truth: Hypothesis, pair: &MeasurementPair, cfg: &ProtocolConfig) -> HypothesisSummary {
    let light = ProtocolConfig { record_trajectories: false, ..cfg.clone() };
    let outcomes: Vec<TrialOutcome> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(truth, pair, &light, t)).collect();
    let mut counts = DecisionCounts::default();
    let (mut rate, mut scale, mut frac, mut still) = (0.0, 0.0, 0.0, 0u64);
    let n = cfg.n as f64;
    for o in &outcomes {
        match o.decision {
            SequentialDecision::GuessRho => counts.guess_rho += 1,
            SequentialDecision::GuessSigma => counts.guess_sigma += 1,
            SequentialDecision::Inconclusive => counts.inconclusive += 1,
        }
        rate += o.final_s / n;
        scale += o.max_martingale / n;
        frac += o.wrong_side_steps as f64 / n;
        still += u64::from(o.switches == 0);
    }
    let t = cfg.trials as f64;
    let (errors, threshold) = match truth {
        Hypothesis::Rho => (counts.guess_sigma, cfg.a_n),
        Hypothesis::Sigma => (counts.guess_rho, cfg.b_n),
    };
    HypothesisSummary {
        truth,
        counts,
        conditional_error: Estimate::ratio(errors, counts.conclusive()),
        conclusive: Estimate::ratio(counts.conclusive(), cfg.trials),
        mean_rate: rate / t,
        drift: DriftReport { martingale_part_scale: scale / t, negative_time_fraction: frac / t },
        error_bound: ErrorBoundCheck::new(errors, cfg.trials, threshold),
        azuma: AzumaCheck::new(outcomes.iter().map(|o| o.final_martingale), cfg.n, cfg.trials, cfg.l_bound),
        no_switch_fraction: still as f64 / t,
    }
}

/// Monte Carlo estimates of all four statistics under both hypotheses.
pub fn estimate_statistics(pair: &MeasurementPair, cfg: &ProtocolConfig) -> Result<SequentialReport> {
    if cfg.trials < MIN_TRIALS {
        return Err(Error::InvalidConfig(format!("trials = {} is below the minimum of {MIN_TRIALS}", cfg.trials)));
    }
    let rho = summarize(Hypothesis::Rho, pair, cfg);
    let sigma = summarize(Hypothesis::Sigma, pair, cfg);
    let tr = cfg.trials;
    let masses = [
        ln_ratio(rho.counts.guess_rho, tr),
        ln_ratio(rho.counts.guess_sigma, tr),
        ln_ratio(rho.counts.inconclusive, tr),
        ln_ratio(sigma.counts.guess_rho, tr),
        ln_ratio(sigma.counts.guess_sigma, tr),
        ln_ratio(sigma.counts.inconclusive, tr),
    ];
    Ok(SequentialReport {
        config: cfg.clone(),
        d_rho_sigma: pair.d_rho_sigma,
        d_sigma_rho: pair.d_sigma_rho,
        statistics: TestStatistics::from_log_masses(cfg.n as u64, false, masses),
        rho,
        sigma,
    })
}
