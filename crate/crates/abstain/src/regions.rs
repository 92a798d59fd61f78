//! Achievable exponent regions for testing with an abstain outcome.
//!
//! Exponents are in nats. Suprema and infima over orders `s > 1` are taken
//! in `u = 1/s ∈ (0, 1)`, so that `u → 1` is the Umegaki limit and `u → 0`
//! the max-relative-entropy limit; both are supplied in closed form.

use rayon::prelude::*;
use serde::Serialize;

use crate::divergences::{
    d_star, log_petz_q, log_sandwiched_q, max_relative_entropy, projective_metrics, relative_entropy, Family,
};
use crate::error::{Error, Result};
use crate::linalg::{cluster_eigenvalues, eig, jacobi, matrix_function, CMat, MatFn};
use crate::optimize::{golden_max, inf_open_unit, sup_open_unit, EDGE, GOLDEN_TOL};
use crate::states::{ClassicalDistribution, DensityMatrix};

/// Conditional-error and conclusiveness exponents `(A, B, K, L)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentQuery {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub l: f64,
}

impl ExponentQuery {
    pub fn new(a: f64, b: f64, k: f64, l: f64) -> Result<Self> {
        for (name, v) in [("A", a), ("B", b), ("K", k), ("L", l)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!("{name} = {v} must be finite and nonnegative")));
            }
        }
        Ok(ExponentQuery { a, b, k, l })
    }
}

/// How the two conditional errors are combined in symmetric testing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetricMode {
    Average,
    Maximal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetricQuery {
    pub e: f64,
    pub z: f64,
    pub prior: f64,
    pub mode: SymmetricMode,
}

impl SymmetricQuery {
    pub fn new(e: f64, z: f64, prior: f64, mode: SymmetricMode) -> Result<Self> {
        if !(prior > 0.0 && prior < 1.0) {
            return Err(Error::InvalidInput(format!("prior {prior} must lie strictly inside (0, 1)")));
        }
        if !(e >= 0.0 && z >= 0.0) {
            return Err(Error::InvalidInput("E and Z must be nonnegative".into()));
        }
        Ok(SymmetricQuery { e, z, prior, mode })
    }
}

/// An exponent that was clamped to zero if its formula came out negative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Clipped {
    pub value: f64,
    pub clipped: bool,
}

impl Clipped {
    fn of(raw: f64) -> Self {
        if raw < 0.0 {
            Clipped { value: 0.0, clipped: true }
        } else {
            Clipped { value: raw, clipped: false }
        }
    }
}

fn same_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::InvalidInput(format!("dimension mismatch: {} vs {}", rho.dim(), sigma.dim())));
    }
    rho.require_full_rank()?;
    sigma.require_full_rank()
}

/// `D̃_{1/u}(x‖y)` for `u ∈ [0, 1]`, with the closed-form endpoints.
fn sandwiched_at_u(u: f64, x: &DensityMatrix, y: &DensityMatrix, d: f64, dmax: f64) -> f64 {
    if u <= 0.0 {
        return dmax;
    }
    if u >= 1.0 {
        return d;
    }
    let s = 1.0 / u;
    log_sandwiched_q(s, x, y).map(|q| q / (s - 1.0)).unwrap_or(f64::NAN)
}

/// `H_A(ρ‖σ) = sup_{s∈(0,1)} ((s-1)/s)(A - D_s(ρ‖σ))` for the chosen family.
pub fn hoeffding(a: f64, rho: &DensityMatrix, sigma: &DensityMatrix, family: Family) -> Result<f64> {
    same_dims(rho, sigma)?;
    let lim0 = if a > 0.0 {
        f64::NEG_INFINITY
    } else {
        match family {
            Family::Petz | Family::ReverseSandwiched => relative_entropy(sigma, rho)?,
            Family::Sandwiched => d_star(sigma, rho)?.value,
        }
    };
    let objective = |s: f64| match family {
        Family::Petz => ((s - 1.0) * a - log_petz_q(s, rho, sigma)) / s,
        Family::Sandwiched => match log_sandwiched_q(s, rho, sigma) {
            Ok(q) => ((s - 1.0) * a - q) / s,
            Err(_) => f64::NAN,
        },
        Family::ReverseSandwiched => match log_sandwiched_q(1.0 - s, sigma, rho) {
            Ok(q) => (s - 1.0) / s * a - q / s,
            Err(_) => f64::NAN,
        },
    };
    Ok(sup_open_unit(objective, lim0, 0.0).value.max(0.0))
}

/// Han–Kobayashi anti-divergence `H*_R(ρ‖σ) = sup_{s>1} ((s-1)/s)(R - D̃_s(ρ‖σ))`.
pub fn han_kobayashi(r: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dims(rho, sigma)?;
    let dmax = max_relative_entropy(rho, sigma)?;
    let objective = |u: f64| match log_sandwiched_q(1.0 / u, rho, sigma) {
        Ok(q) => (1.0 - u) * r - u * q,
        Err(_) => f64::NAN,
    };
    Ok(sup_open_unit(objective, r - dmax, 0.0).value.max(0.0))
}

const MILAN_PROBE: f64 = 1e-4;

/// Smallest `R` from which `H*_R(ρ‖σ) = R - D_max(ρ‖σ)`:
/// `D_max + sup_{s≥1} (s-1)(D_max - D̃_s(ρ‖σ))`.
///
/// The objective is nondecreasing in `s`, so the supremum is the `s → ∞`
/// limit, estimated by linear extrapolation in `u = 1/s` from two small
/// probes and never allowed below the best sampled value.
pub fn milan_threshold(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dims(rho, sigma)?;
    let dmax = max_relative_entropy(rho, sigma)?;
    let g = |u: f64| match log_sandwiched_q(1.0 / u, rho, sigma) {
        Ok(q) => (1.0 / u - 1.0) * dmax - q,
        Err(_) => f64::NAN,
    };
    let tail = 2.0 * g(MILAN_PROBE) - g(2.0 * MILAN_PROBE);
    let best = sup_open_unit(g, tail, 0.0).value;
    Ok(dmax + best.max(tail))
}

/// Membership in the conclusive region and the slack of both constraints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConclusiveRegion {
    pub inside: bool,
    /// `inf_{t>1}(t/(t-1) L + D̃_t(σ‖ρ)) - (A + K)`.
    pub slack1: f64,
    /// `inf_{s>1}(s/(s-1) K + D̃_s(ρ‖σ)) - (B + L)`.
    pub slack2: f64,
}

/// `inf_{s>1}(s/(s-1) c + D̃_s(x‖y))`.
fn weighted_sandwiched_inf(c: f64, x: &DensityMatrix, y: &DensityMatrix) -> Result<f64> {
    let d = relative_entropy(x, y)?;
    let dmax = max_relative_entropy(x, y)?;
    let lim1 = if c > 0.0 { f64::INFINITY } else { d };
    let f = |u: f64| c / (1.0 - u) + sandwiched_at_u(u, x, y, d, dmax);
    Ok(inf_open_unit(f, c + dmax, lim1).value)
}

pub fn conclusive_region(q: &ExponentQuery, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ConclusiveRegion> {
    same_dims(rho, sigma)?;
    let slack1 = weighted_sandwiched_inf(q.l, sigma, rho)? - (q.a + q.k);
    let slack2 = weighted_sandwiched_inf(q.k, rho, sigma)? - (q.b + q.l);
    Ok(ConclusiveRegion { inside: slack1 >= 0.0 && slack2 >= 0.0, slack1, slack2 })
}

const KSTAR_GRID: usize = 128;
const KSTAR_ROUNDS: usize = 60;

/// `K*_{A,B}(ρ‖σ)`: the smallest conclusiveness exponent under `ρ` compatible
/// with conditional-error exponents `(A, B)`.
///
/// Evaluated as a supremum over `(u_s, u_t) ∈ [0,1)×[0,1]` on a 128×129 grid
/// followed by alternating golden-section refinement. Infinite when
/// `A + B > D_Ω(ρ‖σ)`.
pub fn min_conclusiveness_exponent(a: f64, b: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dims(rho, sigma)?;
    let (d_rs, d_sr) = (relative_entropy(rho, sigma)?, relative_entropy(sigma, rho)?);
    let (m_rs, m_sr) = (max_relative_entropy(rho, sigma)?, max_relative_entropy(sigma, rho)?);
    if a + b > m_rs + m_sr {
        return Ok(f64::INFINITY);
    }
    let ds = |u: f64| sandwiched_at_u(u, rho, sigma, d_rs, m_rs);
    let dt = |u: f64| sandwiched_at_u(u, sigma, rho, d_sr, m_sr);
    let value = |us: f64, ut: f64, vs: f64, vt: f64| {
        let den = us / (1.0 - us) + ut;
        if den <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let v = (b - vs + (1.0 - ut) * (a - vt)) / den;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let n = KSTAR_GRID as f64;
    let us_grid: Vec<f64> = (0..KSTAR_GRID).map(|i| i as f64 / n).collect();
    let ut_grid: Vec<f64> = (0..=KSTAR_GRID).map(|j| j as f64 / n).collect();
    let s_vals: Vec<f64> = us_grid.par_iter().map(|&u| ds(u)).collect();
    let t_vals: Vec<f64> = ut_grid.par_iter().map(|&u| dt(u)).collect();
    let (mut bi, mut bj, mut best) = (0, 0, f64::NEG_INFINITY);
    for (i, (&us, &vs)) in us_grid.iter().zip(&s_vals).enumerate() {
        for (j, (&ut, &vt)) in ut_grid.iter().zip(&t_vals).enumerate() {
            let v = value(us, ut, vs, vt);
            if v > best {
                (bi, bj, best) = (i, j, v);
            }
        }
    }
    let (mut us, mut ut) = (us_grid[bi], ut_grid[bj]);
    let (mut vs, mut vt) = (s_vals[bi], t_vals[bj]);
    let h = 1.0 / n;
    for _ in 0..KSTAR_ROUNDS {
        let start = best;
        let lo = (us - h).max(EDGE);
        let hi = (us + h).min(1.0 - EDGE);
        if lo < hi {
            let (u, v) = golden_max(&|u| value(u, ut, ds(u), vt), lo, hi, GOLDEN_TOL);
            if v > best {
                (us, vs, best) = (u, ds(u), v);
            }
        }
        let lo = (ut - h).max(EDGE);
        let hi = (ut + h).min(1.0 - EDGE);
        if lo < hi {
            let (u, v) = golden_max(&|u| value(us, u, vs, dt(u)), lo, hi, GOLDEN_TOL);
            if v > best {
                (ut, vt, best) = (u, dt(u), v);
            }
        }
        if best - start <= 1e-14 * best.abs().max(1.0) {
            break;
        }
    }
    Ok(best.max(0.0))
}

/// Largest `B` with `π_n(ρ) → 1`: `D(ρ‖σ) - H*_A(σ‖ρ)`, clipped at zero.
pub fn onesided_boundary(a: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Clipped> {
    Ok(Clipped::of(relative_entropy(rho, sigma)? - han_kobayashi(a, sigma, rho)?))
}

/// `D_+(σ‖ρ) = inf_{s>1}(s/(s-1) D(ρ‖σ) + D̃_s(σ‖ρ))`, the intercept of the
/// one-sided boundary with `B = 0`.
pub fn d_plus(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    same_dims(sigma, rho)?;
    weighted_sandwiched_inf(relative_entropy(rho, sigma)?, sigma, rho)
}

/// Sufficient condition under which `D_+(σ‖ρ) = D(ρ‖σ) + D_max(σ‖ρ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DPlusSimplification {
    pub condition_holds: bool,
    /// `D(ρ‖σ) + D_max(σ‖ρ)`.
    pub lhs: f64,
    /// `-log Tr Π exp(Π log ρ Π)` on the support of `Π`.
    pub rhs: f64,
    pub simplified: Option<f64>,
}

pub fn d_plus_simplification(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<DPlusSimplification> {
    same_dims(sigma, rho)?;
    let lhs = relative_entropy(rho, sigma)? + max_relative_entropy(sigma, rho)?;
    let inv_sqrt = rho.spectrum().apply(|l| l.powf(-0.5));
    let delta = eig(&inv_sqrt.matmul(sigma.matrix()).matmul(&inv_sqrt).hermitian_part())?;
    let top = &cluster_eigenvalues(&delta.values, 1e-10)[0];
    let d = rho.dim();
    let w = CMat::from_fn(d, |i, j| if j < top.len() { delta.vectors[(i, top[j])] } else { Default::default() });
    let log_rho = matrix_function(rho.matrix(), MatFn::Log)?;
    let compressed = log_rho.conjugate_by(&w).submatrix(&(0..top.len()).collect::<Vec<_>>());
    let trace: f64 = jacobi(compressed.hermitian_part()).values.iter().map(|v| v.exp()).sum();
    let rhs = -trace.ln();
    let condition_holds = lhs >= rhs;
    Ok(DPlusSimplification { condition_holds, lhs, rhs, simplified: condition_holds.then_some(lhs) })
}

/// Largest `B` for classical testing with exponentially small abstention:
/// `max{H_A(Q‖P), [A ≤ H_L(P‖Q)] H_K(Q‖P)}`.
pub fn classical_reject_region(
    a: f64,
    k: f64,
    l: f64,
    p: &ClassicalDistribution,
    q: &ClassicalDistribution,
) -> Result<f64> {
    let (pm, qm) = (DensityMatrix::from_distribution(p)?, DensityMatrix::from_distribution(q)?);
    petz_reject(a, k, l, &pm, &qm)
}

fn petz_reject(a: f64, k: f64, l: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let base = hoeffding(a, sigma, rho, Family::Petz)?;
    if a <= hoeffding(l, rho, sigma, Family::Petz)? {
        Ok(base.max(hoeffding(k, sigma, rho, Family::Petz)?))
    } else {
        Ok(base)
    }
}

/// Achievable and converse envelopes for quantum testing with exponentially
/// small abstention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RejectEnvelopes {
    pub achievable_b: f64,
    pub converse_b: f64,
}

impl RejectEnvelopes {
    pub fn gap(&self) -> f64 {
        self.converse_b - self.achievable_b
    }
}

/// Achievable `B` from the sandwiched and reverse-sandwiched Hoeffding
/// variants, and the Petz converse that is tight for commuting states.
pub fn quantum_reject_region(
    a: f64,
    k: f64,
    l: f64,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<RejectEnvelopes> {
    let base = hoeffding(a, sigma, rho, Family::Petz)?;
    let mut achievable = base;
    if a <= hoeffding(l, rho, sigma, Family::ReverseSandwiched)? {
        achievable = achievable.max(hoeffding(k, sigma, rho, Family::Sandwiched)?);
    }
    if a <= hoeffding(l, rho, sigma, Family::Sandwiched)? {
        achievable = achievable.max(hoeffding(k, sigma, rho, Family::ReverseSandwiched)?);
    }
    let converse = petz_reject(a, k, l, rho, sigma)?;
    Ok(RejectEnvelopes { achievable_b: achievable, converse_b: converse })
}

/// `inf_{s>1}(Z/(s-1) + D̃_s(x‖y))`.
fn symmetric_direction(z: f64, x: &DensityMatrix, y: &DensityMatrix) -> Result<f64> {
    let d = relative_entropy(x, y)?;
    let dmax = max_relative_entropy(x, y)?;
    let lim1 = if z > 0.0 { f64::INFINITY } else { d };
    let f = |u: f64| z * u / (1.0 - u) + sandwiched_at_u(u, x, y, d, dmax);
    Ok(inf_open_unit(f, dmax, lim1).value)
}

/// Largest conditional-error exponent `E` in symmetric testing when the
/// average conclusive probability decays with exponent `Z`.
pub fn symmetric_boundary(q: &SymmetricQuery, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dims(rho, sigma)?;
    let first = symmetric_direction(q.z, rho, sigma)?;
    let second = symmetric_direction(q.z, sigma, rho)?;
    Ok(match q.mode {
        SymmetricMode::Average => first.max(second),
        SymmetricMode::Maximal => first.min(second),
    })
}

/// Which boundary curve to sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    DeterministicHoeffding,
    HighConclusiveness,
    Onesided,
    #[serde(rename = "conclusive_KL_slice")]
    ConclusiveKlSlice,
    ClassicalReject,
    Symmetric,
}

impl BoundaryKind {
    pub const ALL: [BoundaryKind; 6] = [
        BoundaryKind::DeterministicHoeffding,
        BoundaryKind::HighConclusiveness,
        BoundaryKind::Onesided,
        BoundaryKind::ConclusiveKlSlice,
        BoundaryKind::ClassicalReject,
        BoundaryKind::Symmetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::DeterministicHoeffding => "deterministic_hoeffding",
            BoundaryKind::HighConclusiveness => "high_conclusiveness",
            BoundaryKind::Onesided => "onesided",
            BoundaryKind::ConclusiveKlSlice => "conclusive_KL_slice",
            BoundaryKind::ClassicalReject => "classical_reject",
            BoundaryKind::Symmetric => "symmetric",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown boundary kind '{name}'")))
    }
}

/// Extra parameters used by some boundary kinds (nats).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanParams {
    pub k: f64,
    pub l: f64,
    /// Fixed `Z` for a single-row symmetric query.
    pub z: Option<f64>,
    /// Upper end of the `Z` grid for symmetric scans; defaults to `2 D_Ξ`.
    pub z_max: Option<f64>,
    pub mode: SymmetricMode,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams { k: 0.0, l: 0.0, z: None, z_max: None, mode: SymmetricMode::Average }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub x: f64,
    pub y: f64,
    pub clipped: bool,
}

/// A sampled boundary curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionBoundary {
    pub x_label: String,
    pub y_label: String,
    pub meta: String,
    pub points: Vec<BoundaryPoint>,
}

impl RegionBoundary {
    /// Multiplies both coordinates by `factor`, e.g. `1/ln 2` for bits.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            p.x *= factor;
            p.y *= factor;
        }
        out
    }

    /// `x,y` header followed by one row per point, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y\n");
        for p in &self.points {
            s.push_str(&crate::io::fmt17(p.x));
            s.push(',');
            s.push_str(&crate::io::fmt17(p.y));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let points: Vec<[f64; 2]> = self.points.iter().map(|p| [p.x, p.y]).collect();
        serde_json::json!({
            "x_label": self.x_label,
            "y_label": self.y_label,
            "meta": self.meta,
            "points": points,
        })
    }
}

fn uniform(x_max: f64, samples: usize) -> Vec<f64> {
    let last = (samples - 1) as f64;
    (0..samples).map(|i| if i + 1 == samples { x_max } else { x_max * i as f64 / last }).collect()
}

/// Samples a boundary on a uniform grid of `samples` points.
pub fn boundary_scan(
    kind: BoundaryKind,
    params: &ScanParams,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    samples: usize,
) -> Result<RegionBoundary> {
    same_dims(rho, sigma)?;
    let single_row = kind == BoundaryKind::Symmetric && params.z.is_some();
    if samples < 2 && !single_row {
        return Err(Error::InvalidInput(format!("samples = {samples}, need at least 2")));
    }
    let d_rs = relative_entropy(rho, sigma)?;
    let d_sr = relative_entropy(sigma, rho)?;
    let (x_label, y_label) = match kind {
        BoundaryKind::Symmetric => ("Z", "E"),
        _ => ("A", "B"),
    };
    let meta = format!("{} k={} l={} mode={:?}", kind.name(), params.k, params.l, params.mode);
    let x_max = match kind {
        BoundaryKind::DeterministicHoeffding | BoundaryKind::HighConclusiveness | BoundaryKind::ClassicalReject => d_sr,
        BoundaryKind::Onesided => d_plus(sigma, rho)?,
        BoundaryKind::ConclusiveKlSlice => (weighted_sandwiched_inf(params.l, sigma, rho)? - params.k).max(0.0),
        BoundaryKind::Symmetric => match params.z_max {
            Some(z) => z,
            None => 2.0 * projective_metrics(rho, sigma)?.1,
        },
    };
    let xs = if single_row {
        vec![params.z.expect("checked above")]
    } else {
        if !(x_max > 0.0 && x_max.is_finite()) {
            return Err(Error::InvalidInput(format!("degenerate abscissa range [0, {x_max}]")));
        }
        uniform(x_max, samples)
    };
    let slice_b = if kind == BoundaryKind::ConclusiveKlSlice {
        weighted_sandwiched_inf(params.k, rho, sigma)? - params.l
    } else {
        0.0
    };
    let points: Result<Vec<BoundaryPoint>> = xs
        .par_iter()
        .map(|&x| {
            let raw = match kind {
                BoundaryKind::DeterministicHoeffding => hoeffding(x, sigma, rho, Family::Petz)?,
                BoundaryKind::HighConclusiveness => d_rs,
                BoundaryKind::Onesided => d_rs - han_kobayashi(x, sigma, rho)?,
                BoundaryKind::ConclusiveKlSlice => slice_b,
                BoundaryKind::ClassicalReject => petz_reject(x, params.k, params.l, rho, sigma)?,
                BoundaryKind::Symmetric => {
                    let q = SymmetricQuery::new(0.0, x, 0.5, params.mode)?;
                    symmetric_boundary(&q, rho, sigma)?
                }
            };
            let c = Clipped::of(raw);
            Ok(BoundaryPoint { x, y: c.value, clipped: c.clipped })
        })
        .collect();
    Ok(RegionBoundary { x_label: x_label.into(), y_label: y_label.into(), meta, points: points? })
}
