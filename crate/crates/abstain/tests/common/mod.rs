#![allow(dead_code)]

use abstain::linalg::{CMat, C64};
use abstain::states::{validate_state, DensityMatrix};
use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const LN2: f64 = std::f64::consts::LN_2;

pub fn bits(x: f64) -> f64 {
    x / LN2
}

pub fn nats(x: f64) -> f64 {
    x * LN2
}

pub fn to_na(m: &CMat) -> DMatrix<Complex<f64>> {
    let d = m.dim();
    DMatrix::from_fn(d, d, |i, j| m[(i, j)])
}

pub fn from_na(m: &DMatrix<Complex<f64>>) -> CMat {
    CMat::from_fn(m.nrows(), |i, j| m[(i, j)])
}

/// `f(X)` through nalgebra's Hermitian eigendecomposition.
pub fn na_fn(m: &DMatrix<Complex<f64>>, f: impl Fn(f64) -> f64) -> DMatrix<Complex<f64>> {
    let h = (m + m.adjoint()) * Complex::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|x| Complex::new(f(x), 0.0)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

pub fn na_eigs(m: &DMatrix<Complex<f64>>) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex::new(0.5, 0.0);
    let mut v: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn re_trace(m: &DMatrix<Complex<f64>>) -> f64 {
    m.trace().re
}

pub fn oracle_petz(s: f64, r: &DensityMatrix, q: &DensityMatrix) -> f64 {
    let (a, b) = (to_na(r.matrix()), to_na(q.matrix()));
    re_trace(&(na_fn(&a, |x| x.powf(s)) * na_fn(&b, |x| x.powf(1.0 - s)))).ln() / (s - 1.0)
}

pub fn oracle_sandwiched(s: f64, r: &DensityMatrix, q: &DensityMatrix) -> f64 {
    let (a, b) = (to_na(r.matrix()), to_na(q.matrix()));
    let g = na_fn(&b, |x| x.powf((1.0 - s) / (2.0 * s)));
    let inner = &g * a * &g;
    na_eigs(&inner).iter().map(|x| x.max(0.0).powf(s)).sum::<f64>().ln() / (s - 1.0)
}

pub fn oracle_umegaki(r: &DensityMatrix, q: &DensityMatrix) -> f64 {
    let (a, b) = (to_na(r.matrix()), to_na(q.matrix()));
    re_trace(&(&a * (na_fn(&a, f64::ln) - na_fn(&b, f64::ln))))
}

pub fn oracle_dmax(r: &DensityMatrix, q: &DensityMatrix) -> f64 {
    let (a, b) = (to_na(r.matrix()), to_na(q.matrix()));
    let g = na_fn(&b, |x| x.powf(-0.5));
    na_eigs(&(&g * a * &g))[0].ln()
}

pub fn oracle_fidelity(r: &DensityMatrix, q: &DensityMatrix) -> f64 {
    let (a, b) = (to_na(r.matrix()), to_na(q.matrix()));
    let g = na_fn(&b, f64::sqrt);
    na_eigs(&(&g * a * &g)).iter().map(|x| x.max(0.0).sqrt()).sum::<f64>().powi(2)
}

/// Full-rank state `(1-w) G G†/Tr + w I/d` from a seeded Ginibre matrix.
pub fn random_state(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = DMatrix::<Complex<f64>>::from_fn(d, d, |_, _| {
        Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let w = 0.05;
    let gg = &g * g.adjoint();
    let t = gg.trace().re;
    let m = CMat::from_fn(d, |i, j| {
        let id = if i == j { w / d as f64 } else { 0.0 };
        gg[(i, j)] * (1.0 - w) / t + C64::new(id, 0.0)
    });
    validate_state(&m.hermitian_part(), true).unwrap()
}

pub fn random_pairs(d: usize, count: usize, seed: u64) -> Vec<(DensityMatrix, DensityMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (random_state(d, &mut rng), random_state(d, &mut rng))).collect()
}

pub fn bernoulli_pair() -> (DensityMatrix, DensityMatrix) {
    (DensityMatrix::from_probs(&[0.9, 0.1]).unwrap(), DensityMatrix::from_probs(&[0.2, 0.8]).unwrap())
}

/// `ρ = [[0.5,0.25],[0.25,0.5]]`, `σ = diag(0.75,0.25)`.
pub fn fixed_qubit_pair() -> (DensityMatrix, DensityMatrix) {
    (
        abstain::states::qubit(0.5, C64::new(0.25, 0.0)).unwrap(),
        DensityMatrix::from_probs(&[0.75, 0.25]).unwrap(),
    )
}

pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!((got - want).abs() <= tol, "{what}: got {got:.15e}, want {want:.15e}, tol {tol:e}");
}
