//! Measured relative entropy over rank-one projective measurements.
//!
//! The search starts from a handful of structured bases (eigenbases, the
//! pinching basis, the eigenbasis of `log ρ - log σ`) and a fixed set of
//! random unitaries, then improves each by Givens coordinate ascent: every
//! pair of basis vectors is rotated by the 2×2 unitary that maximises the
//! objective restricted to their span.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::kl;
use crate::error::{Error, Result};
use crate::linalg::{cluster_eigenvalues, eig, jacobi, matrix_function, CMat, MatFn, C64};
use crate::optimize::golden_max;
use crate::states::DensityMatrix;

/// Largest dimension searched by the default optimizer.
pub const MEASURED_MAX_DIM: usize = 8;
const RANDOM_RESTARTS: u64 = 8;
const RESTART_SEED: u64 = 0x4D45_4153;
const BLOCH_GRID: usize = 64;
const MAX_SWEEPS: usize = 200;
const SWEEP_TOL: f64 = 1e-13;
const COMMUTE_TOL: f64 = 1e-12;

/// A measurement given by its effects.
#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<CMat>,
}

impl Povm {
    /// Checks positivity (to -1e-10) and completeness (to 1e-9).
    pub fn new(effects: Vec<CMat>) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(Error::InvalidInput("a POVM needs at least one effect".into()));
        };
        let d = first.dim();
        let mut total = CMat::zeros(d);
        for e in &effects {
            if e.dim() != d {
                return Err(Error::InvalidInput("POVM effects differ in dimension".into()));
            }
            let m = eig(e)?.min();
            if m < -1e-10 {
                return Err(Error::InvalidInput(format!("POVM effect has eigenvalue {m:e}")));
            }
            total = total.add(e);
        }
        let defect = total.sub(&CMat::identity(d)).max_abs();
        if defect > 1e-9 {
            return Err(Error::InvalidInput(format!("POVM effects miss the identity by {defect:e}")));
        }
        Ok(Povm { effects })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &CMat) -> Self {
        let d = u.dim();
        let effects = (0..d)
            .map(|k| {
                let v = u.column(k);
                CMat::from_fn(d, |i, j| v[i] * v[j].conj())
            })
            .collect();
        Povm { effects }
    }

    pub fn effects(&self) -> &[CMat] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Outcome distribution `Tr(E_k X)`, clamped at zero.
    pub fn probabilities(&self, state: &DensityMatrix) -> Vec<f64> {
        let x = state.matrix();
        let d = x.dim();
        self.effects
            .iter()
            .map(|e| {
                let mut acc = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        acc += (e[(i, j)] * x[(j, i)]).re;
                    }
                }
                acc.max(0.0)
            })
            .collect()
    }
}

/// How much the reported value can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MeasurementQuality {
    /// Commuting states: the common eigenbasis attains the relative entropy.
    Exact,
    /// Coordinate ascent reached a stationary point from every restart.
    Converged,
    /// Some restart exhausted its sweep budget; the value is a lower bound.
    #[serde(rename = "OptimizerStalled")]
    Stalled,
}

/// Best projective measurement found and its classical relative entropy.
#[derive(Clone, Debug)]
pub struct MeasuredRelativeEntropy {
    pub value: f64,
    /// Columns are the measurement basis vectors.
    pub basis: CMat,
    pub quality: MeasurementQuality,
}

impl MeasuredRelativeEntropy {
    pub fn povm(&self) -> Povm {
        Povm::from_basis(&self.basis)
    }
}

fn diag_forms(u: &CMat, x: &CMat) -> Vec<f64> {
    (0..u.dim()).map(|k| x.quadratic_form(&u.column(k)).re.max(0.0)).collect()
}

fn objective(u: &CMat, rho: &CMat, sigma: &CMat) -> f64 {
    kl(&diag_forms(u, rho), &diag_forms(u, sigma))
}

/// Restriction of `x` to `span(a, b)` in that basis: `(x_aa, x_ab, x_bb)`.
fn restrict(x: &CMat, a: &[C64], b: &[C64]) -> (f64, C64, f64) {
    let d = a.len();
    let mut xb = vec![C64::new(0.0, 0.0); d];
    for i in 0..d {
        for j in 0..d {
            xb[i] += x[(i, j)] * b[j];
        }
    }
    let ab: C64 = a.iter().zip(&xb).map(|(ai, v)| ai.conj() * v).sum();
    (x.quadratic_form(a).re, ab, x.quadratic_form(b).re)
}

/// Diagonal of the 2×2 form after `a' = c a + e^{iφ} s b`, `b' = -e^{-iφ} s a + c b`.
fn rotated_pair(form: (f64, C64, f64), theta: f64, phi: f64) -> (f64, f64) {
    let (xa, xab, xb) = form;
    let (s, c) = theta.sin_cos();
    let cross = 2.0 * s * c * (xab * C64::from_polar(1.0, phi)).re;
    let a = c * c * xa + s * s * xb + cross;
    let b = s * s * xa + c * c * xb - cross;
    (a.max(0.0), b.max(0.0))
}

fn pair_term(p: (f64, f64), q: (f64, f64)) -> f64 {
    kl(&[p.0, p.1], &[q.0, q.1])
}

/// Maximises the pair contribution over `(θ, φ)`; returns the best angles and gain.
fn best_rotation(fr: (f64, C64, f64), fs: (f64, C64, f64)) -> (f64, f64, f64) {
    let f = |t: f64, ph: f64| pair_term(rotated_pair(fr, t, ph), rotated_pair(fs, t, ph));
    let base = f(0.0, 0.0);
    let (nt, np) = (24, 24);
    let (mut bt, mut bp, mut bv) = (0.0, 0.0, base);
    for i in 0..nt {
        let t = std::f64::consts::FRAC_PI_2 * i as f64 / nt as f64;
        for j in 0..np {
            let ph = std::f64::consts::TAU * j as f64 / np as f64;
            let v = f(t, ph);
            if v > bv {
                (bt, bp, bv) = (t, ph, v);
            }
        }
    }
    let dt = std::f64::consts::FRAC_PI_2 / nt as f64;
    let dp = std::f64::consts::TAU / np as f64;
    for _ in 0..4 {
        let (t, v) = golden_max(&|t| f(t, bp), bt - dt, bt + dt, 1e-12);
        if v > bv {
            (bt, bv) = (t, v);
        }
        let (ph, v) = golden_max(&|ph| f(bt, ph), bp - dp, bp + dp, 1e-12);
        if v > bv {
            (bp, bv) = (ph, v);
        }
    }
    (bt, bp, bv - base)
}

fn rotate_columns(u: &mut CMat, a: usize, b: usize, theta: f64, phi: f64) {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(1.0, phi);
    for i in 0..u.dim() {
        let (ua, ub) = (u[(i, a)], u[(i, b)]);
        u[(i, a)] = ua * c + e * ub * s;
        u[(i, b)] = -e.conj() * ua * s + ub * c;
    }
}

/// Givens coordinate ascent; returns the refined basis and whether it converged.
fn ascend(mut u: CMat, rho: &CMat, sigma: &CMat) -> (CMat, bool) {
    let d = u.dim();
    let mut value = objective(&u, rho, sigma);
    for _ in 0..MAX_SWEEPS {
        let start = value;
        for a in 0..d {
            for b in a + 1..d {
                let (ca, cb) = (u.column(a), u.column(b));
                let (t, ph, gain) = best_rotation(restrict(rho, &ca, &cb), restrict(sigma, &ca, &cb));
                if gain > 0.0 {
                    rotate_columns(&mut u, a, b, t, ph);
                }
            }
        }
        value = objective(&u, rho, sigma);
        if value - start <= SWEEP_TOL * value.abs().max(1.0) {
            return (u, true);
        }
    }
    (u, false)
}

/// Eigenspaces of `sigma` refined by the compression of `rho` to each.
pub fn pinching_basis(rho: &DensityMatrix, sigma: &DensityMatrix) -> CMat {
    let spec = sigma.spectrum();
    let d = sigma.dim();
    let mut out = CMat::zeros(d);
    let mut col = 0;
    for cluster in cluster_eigenvalues(&spec.values, 1e-10) {
        let vs: Vec<Vec<C64>> = cluster.iter().map(|&k| spec.vectors.column(k)).collect();
        let m = vs.len();
        let block = CMat::from_fn(m, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d {
                for c in 0..d {
                    acc += vs[i][r].conj() * rho.matrix()[(r, c)] * vs[j][c];
                }
            }
            acc
        });
        let inner = jacobi(block.hermitian_part());
        for k in 0..m {
            for r in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for (i, v) in vs.iter().enumerate() {
                    acc += v[r] * inner.vectors[(i, k)];
                }
                out[(r, col)] = acc;
            }
            col += 1;
        }
    }
    out
}

/// Haar-distributed unitary via Gram–Schmidt on a complex Gaussian matrix.
fn random_unitary(d: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d)
            .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        for c in &cols {
            let proj: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= proj * ci;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    CMat::from_fn(d, |i, j| cols[j][i])
}

/// Best basis on a Bloch-sphere grid for qubits.
fn bloch_seed(rho: &CMat, sigma: &CMat) -> CMat {
    let mut best = (f64::NEG_INFINITY, CMat::identity(2));
    for i in 0..BLOCH_GRID {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / BLOCH_GRID as f64;
        for j in 0..BLOCH_GRID {
            let phi = std::f64::consts::TAU * j as f64 / BLOCH_GRID as f64;
            let (s, c) = (0.5 * theta).sin_cos();
            let e = C64::from_polar(1.0, phi);
            let u = CMat::from_rows(vec![
                vec![C64::new(c, 0.0), -e.conj() * s],
                vec![e * s, C64::new(c, 0.0)],
            ])
            .expect("2x2 rows");
            let v = objective(&u, rho, sigma);
            if v > best.0 {
                best = (v, u);
            }
        }
    }
    best.1
}

/// `D_M(ρ‖σ)` restricted to rank-one projective measurements.
///
/// Returns the best value over all restarts; restarts run in parallel and
/// ties resolve to the earliest seed, so the output is schedule-independent.
pub fn measured_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<MeasuredRelativeEntropy> {
    let d = rho.dim();
    if d != sigma.dim() {
        return Err(Error::InvalidInput(format!("dimension mismatch: {d} vs {}", sigma.dim())));
    }
    rho.require_full_rank()?;
    sigma.require_full_rank()?;
    if d > MEASURED_MAX_DIM {
        return Err(Error::DimensionBudget { dim: d, budget: MEASURED_MAX_DIM });
    }
    let (r, s) = (rho.matrix(), sigma.matrix());
    let pinch = pinching_basis(rho, sigma);
    if rho.commutes_with(sigma, COMMUTE_TOL) {
        return Ok(MeasuredRelativeEntropy {
            value: objective(&pinch, r, s),
            basis: pinch,
            quality: MeasurementQuality::Exact,
        });
    }
    let diff = matrix_function(r, MatFn::Log)?.sub(&matrix_function(s, MatFn::Log)?);
    let mut seeds = vec![
        rho.spectrum().vectors.clone(),
        sigma.spectrum().vectors.clone(),
        pinch,
        eig(&diff)?.vectors,
    ];
    if d == 2 {
        seeds.push(bloch_seed(r, s));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    for _ in 0..RANDOM_RESTARTS {
        seeds.push(random_unitary(d, &mut rng));
    }
    let results: Vec<(CMat, bool)> = seeds.into_par_iter().map(|u| ascend(u, r, s)).collect();
    let all_converged = results.iter().all(|(_, ok)| *ok);
    let mut best: Option<(f64, CMat)> = None;
    for (u, _) in results {
        let v = objective(&u, r, s);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, u));
        }
    }
    let (value, basis) = best.expect("at least one seed");
    let quality = if all_converged { MeasurementQuality::Converged } else { MeasurementQuality::Stalled };
    Ok(MeasuredRelativeEntropy { value, basis, quality })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::relative_entropy;
    use crate::states::qubit;

    #[test]
    fn commuting_pair_is_exact() {
        let p = DensityMatrix::from_probs(&[0.9, 0.1]).unwrap();
        let q = DensityMatrix::from_probs(&[0.2, 0.8]).unwrap();
        let m = measured_relative_entropy(&p, &q).unwrap();
        assert_eq!(m.quality, MeasurementQuality::Exact);
        assert!((m.value - relative_entropy(&p, &q).unwrap()).abs() < 1e-12);
        let povm = m.povm();
        assert!(Povm::new(povm.effects().to_vec()).is_ok());
    }

    #[test]
    fn noncommuting_pair_below_umegaki() {
        let r = qubit(0.5, C64::new(0.25, 0.0)).unwrap();
        let s = DensityMatrix::from_probs(&[0.75, 0.25]).unwrap();
        let m = measured_relative_entropy(&r, &s).unwrap();
        assert_eq!(m.quality, MeasurementQuality::Converged);
        let pinched = objective(&pinching_basis(&r, &s), r.matrix(), s.matrix());
        assert!(m.value >= pinched - 1e-12);
        assert!(m.value <= relative_entropy(&r, &s).unwrap() + 1e-12);
    }

    #[test]
    fn povm_validation() {
        let half = CMat::identity(2).scale(0.5);
        assert!(Povm::new(vec![half.clone(), half.clone()]).is_ok());
        assert!(Povm::new(vec![half.clone()]).is_err());
    }
}
