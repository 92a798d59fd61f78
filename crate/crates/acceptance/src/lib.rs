//! Acceptance criteria as executable checks.
//!
//! Every criterion returns a [`CriterionReport`] holding one [`Check`] row per
//! measured quantity. Rows compare a measured value against an expected
//! value or bound at a stated tolerance, so the same report can be printed as
//! a one-line verdict or as a full table.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use abstain::divergences::{
    chernoff, d_star, fidelity, max_relative_entropy, petz, projective_metrics, relative_entropy, sandwiched, Family,
};
use abstain::linalg::C64;
use abstain::pinching::{
    pinched_hoeffding_rate, pinched_hoeffding_target, pinching_scan, PinchDirection,
};
use abstain::regions::{
    boundary_scan, conclusive_region, d_plus, han_kobayashi, hoeffding, milan_threshold, symmetric_boundary,
    BoundaryKind, ExponentQuery, ScanParams, SymmetricMode, SymmetricQuery,
};
use abstain::sequential::{estimate_statistics, optimal_measurements, ProtocolConfig};
use abstain::states::{qubit, ClassicalDistribution, DensityMatrix};
use abstain::types::{eval_hoeffding_test, eval_reject_test, eval_stein_test, stein_delta, EngineConfig};
use abstain::Result;

const LN2: f64 = std::f64::consts::LN_2;
/// Seed for every randomly drawn instance.
pub const ACCEPTANCE_SEED: u64 = 0x5EED;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured - expected| ≤ tolerance`.
    Close,
    /// `|measured - expected| ≤ tolerance · |expected|`.
    Relative,
    /// `measured ≤ expected + tolerance`.
    AtMost,
    /// `measured ≥ expected - tolerance`.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64, relation: Relation) -> Self {
        let pass = match relation {
            Relation::Close => (measured - expected).abs() <= tolerance,
            Relation::Relative => (measured - expected).abs() <= tolerance * expected.abs(),
            Relation::AtMost => measured <= expected + tolerance,
            Relation::AtLeast => measured >= expected - tolerance,
        };
        Check { name: name.into(), measured, expected, tolerance, relation, pass }
    }

    pub fn close(name: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        Self::new(name, measured, expected, tol, Relation::Close)
    }

    pub fn relative(name: impl Into<String>, measured: f64, expected: f64, rel: f64) -> Self {
        Self::new(name, measured, expected, rel, Relation::Relative)
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64, tol: f64) -> Self {
        Self::new(name, measured, bound, tol, Relation::AtMost)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64, tol: f64) -> Self {
        Self::new(name, measured, bound, tol, Relation::AtLeast)
    }

    /// A yes/no condition encoded as `1 ≥ 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0, Relation::AtLeast)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Divergences,
    Regions,
    Classical,
    Sequential,
    Pinching,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Divergences, Suite::Regions, Suite::Classical, Suite::Sequential, Suite::Pinching];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Divergences => "divergences",
            Suite::Regions => "regions",
            Suite::Classical => "classical",
            Suite::Sequential => "sequential",
            Suite::Pinching => "pinching",
        }
    }

    /// Parses a suite name; `all` yields every suite.
    pub fn parse(name: &str) -> Option<Vec<Suite>> {
        if name == "all" {
            return Some(Self::ALL.to_vec());
        }
        Self::ALL.iter().copied().find(|s| s.name() == name).map(|s| vec![s])
    }

    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Divergences => &[1],
            Suite::Regions => &[2, 3, 4, 5, 10],
            Suite::Classical => &[6, 7],
            Suite::Sequential => &[8],
            Suite::Pinching => &[9],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed_secs: f64,
    /// Set when a computation returned an error instead of a value.
    pub error: Option<String>,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "divergence suite"),
    (2, "region reductions"),
    (3, "Hoeffding inverse identity"),
    (4, "Han-Kobayashi linear regime"),
    (5, "Bernoulli boundary endpoints"),
    (6, "exact classical Stein test"),
    (7, "exact classical reject test"),
    (8, "sequential protocol"),
    (9, "pinching convergence"),
    (10, "symmetric boundaries"),
];

/// Runs criterion `id` (1 to 10).
pub fn run_criterion(id: u8) -> CriterionReport {
    let title = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown criterion");
    let start = Instant::now();
    let outcome = match id {
        1 => divergence_suite(),
        2 => region_reductions(),
        3 => hoeffding_inverse(),
        4 => linear_regime(),
        5 => bernoulli_endpoints(),
        6 => stein_test(),
        7 => reject_test(),
        8 => sequential_protocol(),
        9 => pinching_convergence(),
        10 => symmetric_boundaries(),
        _ => Err(abstain::Error::InvalidInput(format!("no criterion {id}"))),
    };
    let elapsed = start.elapsed();
    let (mut checks, error) = match outcome {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let limit = match id {
        1 => Some(Duration::from_secs(60)),
        6 | 8 => Some(Duration::from_secs(120)),
        _ => None,
    };
    if let Some(limit) = limit {
        checks.push(Check::at_most("runtime seconds", elapsed.as_secs_f64(), limit.as_secs_f64(), 0.0));
    }
    CriterionReport { id, title, checks, elapsed_secs: elapsed.as_secs_f64(), error }
}

pub fn run_suites(suites: &[Suite]) -> Vec<CriterionReport> {
    suites.iter().flat_map(|s| s.criteria().iter().map(|&id| run_criterion(id))).collect()
}

fn bloch_state(v: [f64; 3]) -> DensityMatrix {
    qubit((1.0 + v[2]) / 2.0, C64::new(v[0] / 2.0, -v[1] / 2.0)).expect("Bloch vector inside the ball")
}

/// Uniform direction, radius uniform in `[0.05, 0.95]`.
fn random_qubit(rng: &mut ChaCha8Rng) -> DensityMatrix {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            let r = rng.random_range(0.05..0.95);
            return bloch_state(v.map(|x| x / n * r));
        }
    }
}

pub fn random_qubit_pairs(count: usize, seed: u64) -> Vec<(DensityMatrix, DensityMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (random_qubit(&mut rng), random_qubit(&mut rng))).collect()
}

fn random_distribution(k: usize, rng: &mut ChaCha8Rng) -> ClassicalDistribution {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let t: f64 = w.iter().sum();
    ClassicalDistribution::new(w.iter().map(|x| x / t).collect()).expect("positive weights")
}

pub fn bernoulli_pair() -> (DensityMatrix, DensityMatrix) {
    (
        DensityMatrix::from_probs(&[0.9, 0.1]).expect("valid"),
        DensityMatrix::from_probs(&[0.2, 0.8]).expect("valid"),
    )
}

/// `ρ = [[0.5,0.25],[0.25,0.5]]`, `σ = diag(0.75,0.25)`.
pub fn fixed_qubit_pair() -> (DensityMatrix, DensityMatrix) {
    (
        qubit(0.5, C64::new(0.25, 0.0)).expect("valid"),
        DensityMatrix::from_probs(&[0.75, 0.25]).expect("valid"),
    )
}

/// A non-commuting pair whose measured relative entropies both exceed one bit.
pub fn sequential_qubit_pair() -> (DensityMatrix, DensityMatrix) {
    (qubit(0.85, C64::new(0.2, 0.0)).expect("valid"), qubit(0.2, C64::new(0.0, 0.1)).expect("valid"))
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn divergence_suite() -> Result<Vec<Check>> {
    let pairs = random_qubit_pairs(200, ACCEPTANCE_SEED);
    let rows: Vec<[f64; 7]> = pairs
        .par_iter()
        .map(|(r, s)| -> Result<[f64; 7]> {
            let mut alt = f64::NEG_INFINITY;
            for order in [0.3, 0.7, 1.3, 1.9] {
                alt = alt.max(sandwiched(order, r, s)? - petz(order, r, s)?);
            }
            let neg_log_f = -fidelity(r, s).ln();
            let half = (sandwiched(0.5, r, s)? - neg_log_f).abs();
            let (xi, xi_rev) = (chernoff(r, s)?, chernoff(s, r)?);
            let (d_rs, d_sr) = (relative_entropy(r, s)?, relative_entropy(s, r)?);
            let ds = d_star(r, s)?.value;
            Ok([
                alt,
                half,
                (xi - xi_rev).abs(),
                xi - 0.5 * d_rs.max(d_sr),
                d_rs - max_relative_entropy(r, s)?,
                neg_log_f - ds,
                ds - d_rs,
            ])
        })
        .collect::<Result<_>>()?;
    let col = |i: usize| worst(rows.iter().map(|r| r[i]));

    let mut rng = ChaCha8Rng::seed_from_u64(ACCEPTANCE_SEED + 1);
    let mut classical_err: f64 = 0.0;
    for k in [2, 3, 4] {
        for _ in 0..20 {
            let (p, q) = (random_distribution(k, &mut rng), random_distribution(k, &mut rng));
            let (pm, qm) = (DensityMatrix::from_distribution(&p)?, DensityMatrix::from_distribution(&q)?);
            let (pv, qv) = (p.probs(), q.probs());
            let kl: f64 = pv.iter().zip(qv).map(|(a, b)| a * (a / b).ln()).sum();
            let ratio = pv.iter().zip(qv).map(|(a, b)| a / b).fold(0.0, f64::max).ln();
            let bhatt: f64 = pv.iter().zip(qv).map(|(a, b)| (a * b).sqrt()).sum::<f64>().powi(2);
            classical_err = classical_err.max((relative_entropy(&pm, &qm)? - kl).abs());
            classical_err = classical_err.max((max_relative_entropy(&pm, &qm)? - ratio).abs());
            classical_err = classical_err.max((fidelity(&pm, &qm) - bhatt).abs());
            for order in [0.3, 0.7, 1.3, 1.9] {
                let scalar = pv.iter().zip(qv).map(|(a, b)| a.powf(order) * b.powf(1.0 - order)).sum::<f64>().ln()
                    / (order - 1.0);
                classical_err = classical_err.max((petz(order, &pm, &qm)? - scalar).abs());
                classical_err = classical_err.max((sandwiched(order, &pm, &qm)? - scalar).abs());
            }
        }
    }
    Ok(vec![
        Check::at_most("max D~_s - D_s over s in {0.3,0.7,1.3,1.9}", col(0), 0.0, 1e-9),
        Check::at_most("max |D~_1/2 + log F|", col(1), 0.0, 1e-8),
        Check::at_most("max |xi(rho||sigma) - xi(sigma||rho)|", col(2), 0.0, 1e-8),
        Check::at_most("max xi - max{D,D}/2", col(3), 0.0, 1e-9),
        Check::at_most("max D - D_max", col(4), 0.0, 1e-9),
        Check::at_most("max -log F - D*", col(5), 0.0, 1e-5),
        Check::at_most("max D* - D", col(6), 0.0, 1e-5),
        Check::at_most("max commuting embedding error", classical_err, 0.0, 1e-10),
    ])
}

fn region_reductions() -> Result<Vec<Check>> {
    let pairs = random_qubit_pairs(50, ACCEPTANCE_SEED + 2);
    let guard = 1e-6;
    let results: Vec<(u64, u64, f64)> = pairs
        .par_iter()
        .map(|(r, s)| -> Result<(u64, u64, f64)> {
            let d_rs = relative_entropy(r, s)?;
            let d_sr = relative_entropy(s, r)?;
            let (omega, _) = projective_metrics(r, s)?;
            let (mut mismatches, mut compared) = (0u64, 0u64);
            for i in 0..50 {
                for j in 0..50 {
                    let a = 1.5 * d_sr * i as f64 / 49.0;
                    let b = 1.5 * d_rs * j as f64 / 49.0;
                    if (a - d_sr).abs() < guard || (b - d_rs).abs() < guard {
                        continue;
                    }
                    let inside = conclusive_region(&ExponentQuery::new(a, b, 0.0, 0.0)?, r, s)?.inside;
                    compared += 1;
                    mismatches += u64::from(inside != (a <= d_sr && b <= d_rs));
                }
            }
            let mut excess = f64::NEG_INFINITY;
            let params = ScanParams { k: 0.1, l: 0.1, ..ScanParams::default() };
            for kind in BoundaryKind::ALL {
                if kind == BoundaryKind::Symmetric {
                    continue;
                }
                let boundary = boundary_scan(kind, &params, r, s, 32)?;
                excess = excess.max(worst(boundary.points.iter().map(|p| p.x + p.y - omega)));
            }
            Ok((mismatches, compared, excess))
        })
        .collect::<Result<_>>()?;
    let mismatches: u64 = results.iter().map(|r| r.0).sum();
    let compared: u64 = results.iter().map(|r| r.1).sum();
    Ok(vec![
        Check::close("rectangle mismatches at K=L=0", mismatches as f64, 0.0, 0.0),
        Check::at_least("grid points compared", compared as f64, 50.0 * 2400.0, 0.0),
        Check::at_most("max A+B - D_Omega on boundaries", worst(results.iter().map(|r| r.2)), 0.0, 1e-6),
    ])
}

fn hoeffding_inverse() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ACCEPTANCE_SEED + 3);
    let mut pairs = vec![bernoulli_pair()];
    for _ in 0..10 {
        let (p, q) = (random_distribution(3, &mut rng), random_distribution(3, &mut rng));
        pairs.push((DensityMatrix::from_distribution(&p)?, DensityMatrix::from_distribution(&q)?));
    }
    let mut err: f64 = 0.0;
    for (p, q) in &pairs {
        let d_qp = relative_entropy(q, p)?;
        for i in 1..=10 {
            let r = d_qp * i as f64 / 11.0;
            let h = hoeffding(r, q, p, Family::Petz)?;
            err = err.max((hoeffding(h, p, q, Family::Petz)? - r).abs());
        }
    }
    Ok(vec![Check::at_most("max |H_{H_R(Q||P)}(P||Q) - R|", err, 0.0, 1e-5)])
}

fn linear_regime() -> Result<Vec<Check>> {
    let pairs = random_qubit_pairs(20, ACCEPTANCE_SEED + 4);
    let errs: Vec<f64> = pairs
        .par_iter()
        .map(|(r, s)| -> Result<f64> {
            let rate = milan_threshold(r, s)? + 0.5;
            Ok((han_kobayashi(rate, r, s)? - (rate - max_relative_entropy(r, s)?)).abs())
        })
        .collect::<Result<_>>()?;
    Ok(vec![Check::at_most("max |H*_R - (R - D_max)| at threshold + 0.5", worst(errs), 0.0, 1e-6)])
}

fn bernoulli_endpoints() -> Result<Vec<Check>> {
    let (p, q) = bernoulli_pair();
    let params = ScanParams::default();
    let det = boundary_scan(BoundaryKind::DeterministicHoeffding, &params, &p, &q, 256)?.scaled(1.0 / LN2);
    let high = boundary_scan(BoundaryKind::HighConclusiveness, &params, &p, &q, 256)?.scaled(1.0 / LN2);
    let one = boundary_scan(BoundaryKind::Onesided, &params, &p, &q, 512)?.scaled(1.0 / LN2);
    let (d_first, d_last) = (det.points[0], *det.points.last().expect("samples"));
    let corner = *high.points.last().expect("samples");
    let one_last = *one.points.last().expect("samples");
    let flat = worst(one.points.iter().filter(|pt| pt.x <= 1.966_015).map(|pt| (pt.y - 1.652_933).abs()));
    let dp = d_plus(&q, &p)? / LN2;
    Ok(vec![
        Check::close("deterministic x at A=0", d_first.x, 0.0, 1e-4),
        Check::close("deterministic y at A=0", d_first.y, 1.652_933, 1e-4),
        Check::close("deterministic x at B=0", d_last.x, 1.966_015, 1e-4),
        Check::close("deterministic y at last point", d_last.y, 0.0, 1e-4),
        Check::close("rectangle corner x", corner.x, 1.966_015, 1e-6),
        Check::close("rectangle corner y", corner.y, 1.652_933, 1e-6),
        Check::at_most("one-sided deviation from 1.652933 for A <= 1.966015", flat, 0.0, 1e-4),
        Check::close("one-sided endpoint x = d_plus", one_last.x, dp, 1e-4),
        Check::close("one-sided y at d_plus", one_last.y, 0.0, 1e-4),
    ])
}

fn bern(p: f64) -> ClassicalDistribution {
    ClassicalDistribution::bernoulli(p).expect("valid Bernoulli")
}

fn stein_test() -> Result<Vec<Check>> {
    let (p, q) = (bern(0.9), bern(0.2));
    let (d_pq, d_qp) = (1.652_933_127_459_81, 1.966_015_447_619_41);
    let cfg = EngineConfig::exact_only();
    let stats: Vec<_> = [200u64, 500, 1000, 2000]
        .par_iter()
        .map(|&n| eval_stein_test(&p, &q, n, stein_delta(n), &cfg))
        .collect::<Result<_>>()?;
    let (first, last) = (&stats[0], &stats[3]);
    let beta = |s: &abstain::types::TestStatistics| s.beta_exponent() / LN2;
    let alpha = |s: &abstain::types::TestStatistics| s.alpha_exponent() / LN2;
    Ok(vec![
        Check::holds("exact enumeration at n=2000", last.exact),
        Check::relative("beta exponent at n=2000 (bits)", beta(last), d_pq, 0.15),
        Check::relative("alpha exponent at n=2000 (bits)", alpha(last), d_qp, 0.15),
        Check::at_least("pi_n(P) at n=2000", last.log_pi_p.exp(), 0.99, 0.0),
        Check::at_least("pi_n(Q) at n=2000", last.log_pi_q.exp(), 0.99, 0.0),
        Check::at_most("beta gap n=2000 minus gap n=200", (beta(last) - d_pq).abs() - (beta(first) - d_pq).abs(), 0.0, -1e-12),
        Check::at_most("alpha gap n=2000 minus gap n=200", (alpha(last) - d_qp).abs() - (alpha(first) - d_qp).abs(), 0.0, -1e-12),
    ])
}

fn reject_test() -> Result<Vec<Check>> {
    let (p, q) = (bern(0.9), bern(0.2));
    let (pm, qm) = (DensityMatrix::from_distribution(&p)?, DensityMatrix::from_distribution(&q)?);
    let n = 2000;
    let cfg = EngineConfig::exact_only();
    let (k, l) = (0.1 * LN2, 0.1 * LN2);
    let predict = |a: f64| abstain::regions::classical_reject_region(a, k, l, &p, &q);
    let h_l = hoeffding(l, &pm, &qm, Family::Petz)?;
    let d_qp = relative_entropy(&qm, &pm)?;

    let rej = eval_reject_test(&p, &q, n, k, l, &cfg)?;
    let low_a = 0.5 * k;
    let high_a = 0.5 * (h_l + d_qp);
    let low = eval_hoeffding_test(&p, &q, n, low_a, &cfg)?;
    let high = eval_hoeffding_test(&p, &q, n, high_a, &cfg)?;
    let mut checks = vec![
        Check::at_least("abstention exponent under P (bits)", rej.abstain_exponent_p() / LN2, 0.09, 0.0),
        Check::at_least("abstention exponent under Q (bits)", rej.abstain_exponent_q() / LN2, 0.09, 0.0),
    ];
    for (label, stats, a) in [("A < K", &low, low_a), ("K <= A <= H_L", &rej, h_l), ("A > H_L", &high, high_a)] {
        checks.push(Check::relative(format!("{label}: alpha exponent vs A"), stats.alpha_exponent(), a, 0.10));
        checks.push(Check::relative(format!("{label}: beta exponent vs prediction"), stats.beta_exponent(), predict(a)?, 0.10));
    }
    Ok(checks)
}

fn sequential_protocol() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (label, (r, s)) in [("commuting", bernoulli_pair()), ("non-commuting", sequential_qubit_pair())] {
        let pair = optimal_measurements(&r, &s)?;
        let cfg = ProtocolConfig::new(&pair, 400, 0.3 * LN2, ACCEPTANCE_SEED, 100_000)?;
        let rep = estimate_statistics(&pair, &cfg)?;
        let t = cfg.trials as f64;
        checks.push(Check::at_most(format!("{label}: inconclusive fraction under rho"), rep.rho.counts.inconclusive as f64 / t, 0.02, 0.0));
        checks.push(Check::at_most(format!("{label}: inconclusive fraction under sigma"), rep.sigma.counts.inconclusive as f64 / t, 0.02, 0.0));
        checks.push(Check::at_most(format!("{label}: errors under rho"), rep.rho.error_bound.count as f64, rep.rho.error_bound.bound, 0.0));
        checks.push(Check::at_most(format!("{label}: errors under sigma"), rep.sigma.error_bound.count as f64, rep.sigma.error_bound.bound, 0.0));
        checks.push(Check::close(format!("{label}: mean S_n/n under rho (bits)"), rep.rho.mean_rate / LN2, pair.d_rho_sigma / LN2, 0.05));
        checks.push(Check::close(format!("{label}: mean S_n/n under sigma (bits)"), rep.sigma.mean_rate / LN2, -pair.d_sigma_rho / LN2, 0.05));
    }
    Ok(checks)
}

fn pinching_convergence() -> Result<Vec<Check>> {
    let (r, s) = fixed_qubit_pair();
    let mut checks = Vec::new();
    for order in [0.7, 1.0] {
        let rows = pinching_scan(order, &r, &s, 8, PinchDirection::PinchFirstArg)?;
        let min_gap = rows.iter().map(|x| x.gap).fold(f64::INFINITY, f64::min);
        let over = worst(rows.iter().map(|x| x.gap - 2.0 * ((x.k + 1) as f64).ln() / x.k as f64));
        let rise = worst(rows.windows(2).map(|w| w[1].gap - w[0].gap));
        checks.push(Check::at_least(format!("s={order}: min gap over k=1..8"), min_gap, 0.0, 1e-9));
        checks.push(Check::at_most(format!("s={order}: max gap - 2 log(k+1)/k"), over, 0.0, 0.0));
        checks.push(Check::at_most(format!("s={order}: max gap increase"), rise, 0.0, 1e-9));
    }
    for bits in [0.5, 0.1] {
        let a = bits * LN2;
        let target = pinched_hoeffding_target(a, &r, &s, PinchDirection::PinchFirstArg)?;
        let rates: Vec<f64> = (1..=8)
            .map(|k| pinched_hoeffding_rate(a, &r, &s, k, PinchDirection::PinchFirstArg))
            .collect::<Result<_>>()?;
        let drop = worst(rates.windows(2).map(|w| w[0] - w[1]));
        checks.push(Check::at_most(format!("A={bits} bits: max Hoeffding rate decrease"), drop, 0.0, 1e-9));
        checks.push(Check::at_most(format!("A={bits} bits: max rate - H~_A"), worst(rates.iter().copied()), target, 1e-9));
    }
    Ok(checks)
}

fn symmetric_boundaries() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (label, (r, s)) in [("Bernoulli", bernoulli_pair()), ("qubit", fixed_qubit_pair())] {
        let (d_rs, d_sr) = (relative_entropy(&r, &s)?, relative_entropy(&s, &r)?);
        let (_, xi) = projective_metrics(&r, &s)?;
        let e = |z: f64, mode| symmetric_boundary(&SymmetricQuery::new(0.0, z, 0.5, mode)?, &r, &s);
        checks.push(Check::close(format!("{label}: average mode at Z=0"), e(0.0, SymmetricMode::Average)?, d_rs.max(d_sr), 1e-8));
        checks.push(Check::close(format!("{label}: maximal mode at Z=0"), e(0.0, SymmetricMode::Maximal)?, d_rs.min(d_sr), 1e-8));
        checks.push(Check::close(format!("{label}: average mode at Z=100 bits"), e(100.0 * LN2, SymmetricMode::Average)? / LN2, xi / LN2, 1e-3));
        for mode in [SymmetricMode::Average, SymmetricMode::Maximal] {
            let vals: Vec<f64> = (0..20).map(|i| e(2.0 * xi * i as f64 / 19.0, mode)).collect::<Result<_>>()?;
            let drop = worst(vals.windows(2).map(|w| w[0] - w[1]));
            checks.push(Check::at_most(format!("{label}: {mode:?} max decrease over Z grid"), drop, 0.0, 1e-9));
        }
    }
    Ok(checks)
}
