//! Quantum Rényi divergences, relative entropies and derived quantities.
//!
//! Every quantity is returned in nats. Classical distributions enter
//! through their diagonal embedding, see [`DensityMatrix::from_distribution`].

use crate::error::{Error, Result};
use crate::linalg::{cluster_eigenvalues, graded_log_eigenvalues};
use crate::optimize::{log_sum_exp, sup_open_unit};
use crate::states::{DensityMatrix, FULL_RANK_TOL};

/// The three Rényi families used by the exponent formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Petz,
    Sandwiched,
    ReverseSandwiched,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Petz => "petz",
            Family::Sandwiched => "sandwiched",
            Family::ReverseSandwiched => "reverse_sandwiched",
        }
    }

    /// Whether `s` lies in the family's range of definition.
    pub fn accepts(self, s: f64) -> bool {
        let open_unit = s > 0.0 && s < 1.0;
        match self {
            Family::Petz => open_unit || (s > 1.0 && s <= 2.0),
            Family::Sandwiched => open_unit || (s > 1.0 && s.is_finite()),
            Family::ReverseSandwiched => open_unit,
        }
    }
}

/// A family tag together with its order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceFamily {
    pub tag: Family,
    pub order: f64,
}

impl DivergenceFamily {
    pub fn new(tag: Family, order: f64) -> Result<Self> {
        if !tag.accepts(order) {
            return Err(Error::UnsupportedOrder { family: tag.name(), order });
        }
        Ok(DivergenceFamily { tag, order })
    }
}

fn check_order(tag: Family, s: f64) -> Result<()> {
    if tag.accepts(s) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder { family: tag.name(), order: s })
    }
}

fn full_rank(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    rho.require_full_rank()?;
    sigma.require_full_rank()
}

/// `|<u_i|v_j>|^2` between the eigenvectors of `rho` (rows) and `sigma` (columns).
fn overlaps(rho: &DensityMatrix, sigma: &DensityMatrix) -> Vec<f64> {
    let u = &rho.spectrum().vectors;
    let v = &sigma.spectrum().vectors;
    let w = u.adjoint().matmul(v);
    w.as_slice().iter().map(|z| z.norm_sqr()).collect()
}

fn log_eigs(state: &DensityMatrix) -> Vec<f64> {
    state.spectrum().values.iter().map(|&l| if l > 0.0 { l.ln() } else { f64::NEG_INFINITY }).collect()
}

/// `log Tr rho^s sigma^{1-s}`.
///
/// For full-rank pairs and small `s` this is evaluated as
/// `log1p(Σ π_ij expm1(s X_ij))` with `π_ij ∝ |⟨r_i|s_j⟩|² σ_j` and
/// `X_ij = log λ_i - log σ_j`, so `log Q_s / s` keeps full relative accuracy
/// as `s → 0`. Both states are taken to have unit trace.
pub fn log_petz_q(s: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let w = overlaps(rho, sigma);
    let (lr, ls) = (log_eigs(rho), log_eigs(sigma));
    let d = rho.dim();
    let mut terms = Vec::with_capacity(d * d);
    let mut spread = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let wij = w[i * d + j];
            if wij > 0.0 {
                terms.push((s * lr[i] + (1.0 - s) * ls[j] + wij.ln(), wij.ln() + ls[j], lr[i] - ls[j]));
                spread = spread.max((lr[i] - ls[j]).abs());
            }
        }
    }
    if spread.is_finite() && s * spread < 0.5 {
        let norm: f64 = terms.iter().map(|t| t.1.exp()).sum();
        let mean: f64 = terms.iter().map(|t| t.1.exp() * (s * t.2).exp_m1()).sum::<f64>() / norm;
        return mean.ln_1p();
    }
    log_sum_exp(terms.into_iter().map(|t| t.0))
}

/// Petz–Rényi divergence `(1/(s-1)) log Tr rho^s sigma^{1-s}`.
pub fn petz(s: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_order(Family::Petz, s)?;
    full_rank(rho, sigma)?;
    Ok(log_petz_q(s, rho, sigma) / (s - 1.0))
}

/// Log-eigenvalues of `sigma^{γ} rho sigma^{γ}`, computed without forming powers.
fn sandwich_log_eigs(gamma: f64, inner: &DensityMatrix, outer: &DensityMatrix) -> Result<Vec<f64>> {
    let a = inner.matrix().conjugate_by(&outer.spectrum().vectors);
    let g: Vec<f64> = outer.spectrum().values.iter().map(|&m| gamma * m.ln()).collect();
    graded_log_eigenvalues(&g, &a)
}

/// `log Tr (sigma^{(1-s)/2s} rho sigma^{(1-s)/2s})^s`.
pub fn log_sandwiched_q(s: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let gamma = (1.0 - s) / (2.0 * s);
    let l = sandwich_log_eigs(gamma, rho, sigma)?;
    Ok(log_sum_exp(l.into_iter().map(|x| s * x)))
}

/// Sandwiched Rényi divergence.
pub fn sandwiched(s: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_order(Family::Sandwiched, s)?;
    full_rank(rho, sigma)?;
    Ok(log_sandwiched_q(s, rho, sigma)? / (s - 1.0))
}

/// Reverse sandwiched divergence `D̂_s(rho‖sigma) = (s/(1-s)) D̃_{1-s}(sigma‖rho)`.
pub fn reverse_sandwiched(s: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_order(Family::ReverseSandwiched, s)?;
    full_rank(rho, sigma)?;
    Ok(s / (1.0 - s) * sandwiched(1.0 - s, sigma, rho)?)
}

/// Dispatches on the family tag.
pub fn renyi(fam: DivergenceFamily, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    match fam.tag {
        Family::Petz => petz(fam.order, rho, sigma),
        Family::Sandwiched => sandwiched(fam.order, rho, sigma),
        Family::ReverseSandwiched => reverse_sandwiched(fam.order, rho, sigma),
    }
}

/// Umegaki relative entropy `Tr rho (log rho - log sigma)`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    full_rank(rho, sigma)?;
    let w = overlaps(rho, sigma);
    let (lr, ls) = (log_eigs(rho), log_eigs(sigma));
    let lam = &rho.spectrum().values;
    let d = rho.dim();
    let mut neg_entropy = 0.0;
    let mut cross = 0.0;
    for i in 0..d {
        neg_entropy += lam[i] * lr[i];
        for j in 0..d {
            cross += lam[i] * w[i * d + j] * ls[j];
        }
    }
    Ok(neg_entropy - cross)
}

/// `log λ_max(sigma^{-1/2} rho sigma^{-1/2})`.
pub fn max_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    sigma.require_full_rank()?;
    if rho.is_full_rank() {
        let l = sandwich_log_eigs(-0.5, rho, sigma)?;
        return Ok(l[0]);
    }
    let inv_sqrt = sigma.spectrum().apply(|m| m.powf(-0.5));
    let x = inv_sqrt.matmul(rho.matrix()).matmul(&inv_sqrt);
    Ok(crate::linalg::eig(&x)?.max().ln())
}

/// `-log Tr Π_rho sigma`, with `Π_rho` the support projector of `rho`.
pub fn min_relative_entropy_zero(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let spec = rho.spectrum();
    let mut overlap = 0.0;
    for (k, &l) in spec.values.iter().enumerate() {
        if l > FULL_RANK_TOL {
            overlap += sigma.matrix().quadratic_form(&spec.vectors.column(k)).re;
        }
    }
    -overlap.ln()
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let root = rho.spectrum().apply(|l| l.max(0.0).sqrt());
    let m = root.matmul(sigma.matrix()).matmul(&root).hermitian_part();
    let spec = crate::linalg::jacobi(m);
    let t: f64 = spec.values.iter().map(|&l| l.max(0.0).sqrt()).sum();
    t * t
}

/// Quantum Chernoff divergence `sup_{s∈(0,1)} -log Tr rho^s sigma^{1-s}`.
pub fn chernoff(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    full_rank(rho, sigma)?;
    let lim0 = min_relative_entropy_zero(rho, sigma);
    let lim1 = min_relative_entropy_zero(sigma, rho);
    Ok(sup_open_unit(|s| -log_petz_q(s, rho, sigma), lim0, lim1).value)
}

/// `(D_Ω, D_Ξ)`: sum and maximum of the two max-relative entropies.
pub fn projective_metrics(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(f64, f64)> {
    let a = max_relative_entropy(rho, sigma)?;
    let b = max_relative_entropy(sigma, rho)?;
    Ok((a + b, a.max(b)))
}

/// Result of the numeric limit defining `D⋆`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DStar {
    pub value: f64,
    /// Second extrapolant at half the step; agrees with `value` within 1e-5.
    pub check: f64,
    /// Largest step used in the extrapolation.
    pub step: f64,
    pub lower: f64,
    pub upper: f64,
    /// Whether `lower <= value <= upper` within 1e-6.
    pub bracket_ok: bool,
}

const DSTAR_STEP: f64 = 1e-3;
const DSTAR_MIN_STEP: f64 = 1e-7;
const DSTAR_AGREEMENT: f64 = 1e-5;

/// `-(1/ε) log Tr (rho^a sigma rho^a)^ε` with `a = (1-ε)/(2ε)`.
fn dstar_profile(eps: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let l = sandwich_log_eigs((1.0 - eps) / (2.0 * eps), sigma, rho)?;
    Ok(-log_sum_exp(l.into_iter().map(|x| eps * x)) / eps)
}

fn richardson(h: f64, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let f1 = dstar_profile(h, rho, sigma)?;
    let f2 = dstar_profile(h / 2.0, rho, sigma)?;
    let f4 = dstar_profile(h / 4.0, rho, sigma)?;
    Ok((8.0 * f4 - 6.0 * f2 + f1) / 3.0)
}

/// `D⋆(rho‖sigma) = lim_{s→1⁻} (s/(1-s)) D̃_{1-s}(sigma‖rho)`.
///
/// Three-point Richardson extrapolation at steps `h, h/2, h/4`. The step
/// shrinks below `1e-3` when `rho` has nearly degenerate eigenvalues, since
/// the profile is only smooth on scales finer than the log-eigenvalue gaps.
pub fn d_star(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DStar> {
    full_rank(rho, sigma)?;
    let vals = &rho.spectrum().values;
    let mut min_gap = f64::INFINITY;
    let clusters = cluster_eigenvalues(vals, 1e-10);
    for w in clusters.windows(2) {
        min_gap = min_gap.min(vals[w[0][0]].ln() - vals[w[1][0]].ln());
    }
    let step = (min_gap / 50.0).clamp(DSTAR_MIN_STEP, DSTAR_STEP);
    let value = richardson(step, rho, sigma)?;
    let check = richardson(step / 2.0, rho, sigma)?;
    if (value - check).abs() > DSTAR_AGREEMENT {
        return Err(Error::ConvergenceFailure(format!(
            "D-star extrapolants {value} and {check} differ by more than {DSTAR_AGREEMENT}"
        )));
    }
    let lower = -fidelity(rho, sigma).ln();
    let upper = relative_entropy(rho, sigma)?;
    let bracket_ok = value >= lower - 1e-6 && value <= upper + 1e-6;
    Ok(DStar { value, check, step, lower, upper, bracket_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::states::qubit;

    const LN2: f64 = std::f64::consts::LN_2;

    fn pq() -> (DensityMatrix, DensityMatrix) {
        (
            DensityMatrix::from_probs(&[0.9, 0.1]).unwrap(),
            DensityMatrix::from_probs(&[0.2, 0.8]).unwrap(),
        )
    }

    fn noncommuting() -> (DensityMatrix, DensityMatrix) {
        (
            qubit(0.5, C64::new(0.25, 0.0)).unwrap(),
            DensityMatrix::from_probs(&[0.75, 0.25]).unwrap(),
        )
    }

    #[test]
    fn bernoulli_values_in_bits() {
        let (p, q) = pq();
        assert!((relative_entropy(&p, &q).unwrap() / LN2 - 1.652_933).abs() < 5e-7);
        assert!((relative_entropy(&q, &p).unwrap() / LN2 - 1.966_015).abs() < 5e-7);
        assert!((petz(0.5, &p, &q).unwrap() / LN2 - 1.0).abs() < 1e-12);
        assert!((sandwiched(0.5, &p, &q).unwrap() / LN2 - 1.0).abs() < 1e-12);
        assert!((fidelity(&p, &q) - 0.5).abs() < 1e-12);
        assert!((max_relative_entropy(&p, &q).unwrap() - 4.5f64.ln()).abs() < 1e-12);
        let (omega, xi) = projective_metrics(&p, &q).unwrap();
        assert!((omega / LN2 - 5.169_925).abs() < 5e-7);
        assert!((xi / LN2 - 3.0).abs() < 1e-12);
        let (o2, x2) = projective_metrics(&q, &p).unwrap();
        assert!((o2 - omega).abs() < 1e-15 && (x2 - xi).abs() < 1e-15);
    }

    #[test]
    fn identical_states_vanish() {
        let m = DensityMatrix::from_probs(&[0.5, 0.5]).unwrap();
        for fam in [Family::Petz, Family::Sandwiched, Family::ReverseSandwiched] {
            let v = renyi(DivergenceFamily::new(fam, 0.5).unwrap(), &m, &m).unwrap();
            assert!(v.abs() < 1e-15);
        }
        let (r, _) = noncommuting();
        assert!(relative_entropy(&r, &r).unwrap().abs() < 1e-14);
        assert!(max_relative_entropy(&r, &r).unwrap().abs() < 1e-14);
        assert!(min_relative_entropy_zero(&r, &r).abs() < 1e-14);
        assert!(chernoff(&r, &r).unwrap().abs() < 1e-14);
        assert!(d_star(&r, &r).unwrap().value.abs() < 1e-10);
        assert!((fidelity(&r, &r) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orders_outside_range() {
        let (p, q) = pq();
        assert!(matches!(petz(2.5, &p, &q), Err(Error::UnsupportedOrder { .. })));
        assert!(matches!(petz(1.0, &p, &q), Err(Error::UnsupportedOrder { .. })));
        assert!(matches!(reverse_sandwiched(1.5, &p, &q), Err(Error::UnsupportedOrder { .. })));
        assert!(sandwiched(40.0, &p, &q).is_ok());
    }

    #[test]
    fn min_relative_entropy_of_pure_state() {
        let pure = DensityMatrix::from_probs(&[1.0, 0.0]).unwrap();
        let mixed = DensityMatrix::from_probs(&[0.5, 0.5]).unwrap();
        assert!((min_relative_entropy_zero(&pure, &mixed) / LN2 - 1.0).abs() < 1e-15);
        assert!((fidelity(&pure, &mixed) - 0.5).abs() < 1e-15);
        assert!(matches!(relative_entropy(&pure, &mixed), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn chernoff_symmetric() {
        let (p, q) = pq();
        let a = chernoff(&p, &q).unwrap();
        let b = chernoff(&q, &p).unwrap();
        assert!((a - b).abs() < 1e-12);
        let d1 = relative_entropy(&p, &q).unwrap();
        let d2 = relative_entropy(&q, &p).unwrap();
        assert!(a > 0.0 && a <= 0.5 * d1.max(d2));
    }

    #[test]
    fn d_star_classical_and_bracket() {
        let (p, q) = pq();
        let ds = d_star(&p, &q).unwrap();
        assert!((ds.value / LN2 - 1.652_933).abs() < 1e-6, "{}", ds.value / LN2);
        let (r, s) = noncommuting();
        let ds = d_star(&r, &s).unwrap();
        assert!(ds.bracket_ok, "{ds:?}");
    }
}
