//! Pinching maps and the k-copy rates that approach the sandwiched and
//! reverse-sandwiched divergences.

use rayon::prelude::*;
use serde::Serialize;

use crate::classical;
use crate::divergences::{relative_entropy, reverse_sandwiched, sandwiched};
use crate::error::{Error, Result};
use crate::linalg::{cluster_eigenvalues, jacobi, CMat, MAX_DIM};
use crate::regions::hoeffding;
use crate::states::DensityMatrix;
use crate::divergences::Family;

/// Relative tolerance for merging eigenvalues into one pinching block.
pub const CLUSTER_TOL: f64 = 1e-10;
/// Largest `k` accepted by [`spectrum_count`].
pub const MAX_COUNT_COPIES: usize = 12;

/// Spectral projectors of a state, one per eigenvalue cluster.
#[derive(Clone, Debug)]
pub struct PinchingBasis {
    pub clustered_eigenvalues: Vec<f64>,
    pub projectors: Vec<CMat>,
    pub tolerance: f64,
}

impl PinchingBasis {
    pub fn new(state: &DensityMatrix) -> Self {
        let spec = state.spectrum();
        let d = state.dim();
        let clusters = cluster_eigenvalues(&spec.values, CLUSTER_TOL);
        let mut values = Vec::with_capacity(clusters.len());
        let mut projectors = Vec::with_capacity(clusters.len());
        for c in clusters {
            values.push(c.iter().map(|&i| spec.values[i]).sum::<f64>() / c.len() as f64);
            let cols: Vec<_> = c.iter().map(|&i| spec.vectors.column(i)).collect();
            projectors.push(CMat::from_fn(d, |i, j| cols.iter().map(|v| v[i] * v[j].conj()).sum()));
        }
        PinchingBasis { clustered_eigenvalues: values, projectors, tolerance: CLUSTER_TOL }
    }

    /// `Σ P_i X P_i`.
    pub fn apply(&self, x: &CMat) -> CMat {
        let d = x.dim();
        let mut out = CMat::zeros(d);
        for p in &self.projectors {
            out = out.add(&p.matmul(x).matmul(p));
        }
        out
    }
}

/// `E_σ(X)`: dephases `x` in the eigenspaces of `basis_state`.
pub fn pinch(basis_state: &DensityMatrix, x: &CMat) -> Result<CMat> {
    if x.dim() != basis_state.dim() {
        return Err(Error::InvalidInput(format!("dimension mismatch: {} vs {}", x.dim(), basis_state.dim())));
    }
    let out = PinchingBasis::new(basis_state).apply(x);
    debug_assert!((out.trace() - x.trace()).norm() <= 1e-9 * x.trace().norm().max(1.0));
    debug_assert!({
        let s = basis_state.matrix();
        s.matmul(&out).sub(&out.matmul(s)).max_abs() <= 1e-9 * x.max_abs().max(1.0)
    });
    Ok(out)
}

/// Which argument of the divergence is pinched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PinchDirection {
    /// `E_{σ⊗k}(ρ⊗k)` against `σ⊗k`; tends to the sandwiched divergence.
    PinchFirstArg,
    /// `ρ⊗k` against `E_{ρ⊗k}(σ⊗k)`; tends to the reverse sandwiched divergence.
    PinchSecondArg,
}

impl PinchDirection {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "pinch_first_arg" | "first" => Ok(PinchDirection::PinchFirstArg),
            "pinch_second_arg" | "second" => Ok(PinchDirection::PinchSecondArg),
            other => Err(Error::InvalidInput(format!("unknown pinching direction '{other}'"))),
        }
    }
}

/// The commuting pair produced by pinching `k` copies, as probability vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct PinchedPair {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub blocks: usize,
}

fn eigen_products(values: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..k {
        out = out.iter().flat_map(|&a| values.iter().map(move |&b| a * b)).collect();
    }
    out
}

/// Diagonalises `k`-copy pinching in the eigenbasis of the pinching state.
pub fn pinched_pair(rho: &DensityMatrix, sigma: &DensityMatrix, k: usize, dir: PinchDirection) -> Result<PinchedPair> {
    if rho.dim() != sigma.dim() {
        return Err(Error::InvalidInput(format!("dimension mismatch: {} vs {}", rho.dim(), sigma.dim())));
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    rho.require_full_rank()?;
    sigma.require_full_rank()?;
    let (outer, inner) = match dir {
        PinchDirection::PinchFirstArg => (sigma, rho),
        PinchDirection::PinchSecondArg => (rho, sigma),
    };
    let rotated = inner.matrix().conjugate_by(&outer.spectrum().vectors);
    let tensor = rotated.tensor_power(k)?;
    let products = eigen_products(&outer.spectrum().values, k);
    let clusters = cluster_eigenvalues(&products, CLUSTER_TOL);
    let (mut p, mut q) = (Vec::with_capacity(products.len()), Vec::with_capacity(products.len()));
    for c in &clusters {
        let level = c.iter().map(|&i| products[i]).sum::<f64>() / c.len() as f64;
        let block = jacobi(tensor.submatrix(c).hermitian_part());
        for &e in &block.values {
            let e = e.max(0.0);
            match dir {
                PinchDirection::PinchFirstArg => {
                    p.push(e);
                    q.push(level);
                }
                PinchDirection::PinchSecondArg => {
                    p.push(level);
                    q.push(e);
                }
            }
        }
    }
    Ok(PinchedPair { p, q, blocks: clusters.len() })
}

fn check_order(s: f64, dir: PinchDirection) -> Result<()> {
    let ok = match dir {
        PinchDirection::PinchFirstArg => s > 0.0 && s <= 2.0,
        PinchDirection::PinchSecondArg => s > 0.0 && s < 1.0,
    };
    if ok {
        Ok(())
    } else {
        let family = match dir {
            PinchDirection::PinchFirstArg => "pinched petz",
            PinchDirection::PinchSecondArg => "pinched reverse",
        };
        Err(Error::UnsupportedOrder { family, order: s })
    }
}

/// `(1/k) D_s` of the pinched `k`-copy pair. `s = 1` gives the relative entropy.
pub fn pinched_renyi_rate(s: f64, rho: &DensityMatrix, sigma: &DensityMatrix, k: usize, dir: PinchDirection) -> Result<f64> {
    check_order(s, dir)?;
    let pair = pinched_pair(rho, sigma, k, dir)?;
    Ok(classical::renyi(s, &pair.p, &pair.q) / k as f64)
}

/// The single-copy divergence the pinched rate converges to.
pub fn pinching_target(s: f64, rho: &DensityMatrix, sigma: &DensityMatrix, dir: PinchDirection) -> Result<f64> {
    check_order(s, dir)?;
    match dir {
        PinchDirection::PinchFirstArg if s == 1.0 => relative_entropy(rho, sigma),
        PinchDirection::PinchFirstArg => sandwiched(s, rho, sigma),
        PinchDirection::PinchSecondArg => reverse_sandwiched(s, rho, sigma),
    }
}

/// Upper bound on `target - rate` after `k` copies in dimension `d`.
pub fn pinching_gap_bound(s: f64, d: usize, k: usize, dir: PinchDirection) -> f64 {
    let base = d as f64 * ((k + 1) as f64).ln() / k as f64;
    match dir {
        PinchDirection::PinchFirstArg => base,
        PinchDirection::PinchSecondArg => s / (1.0 - s) * base,
    }
}

/// Number of distinct eigenvalues of `σ⊗k` after clustering.
pub fn spectrum_count(sigma: &DensityMatrix, k: usize) -> Result<usize> {
    if k == 0 || k > MAX_COUNT_COPIES {
        return Err(Error::InvalidInput(format!("k = {k} must lie in 1..={MAX_COUNT_COPIES}")));
    }
    let total = (sigma.dim() as f64).powi(k as i32);
    if total > (MAX_DIM as f64).powi(2) {
        return Err(Error::DimensionBudget { dim: total as usize, budget: MAX_DIM * MAX_DIM });
    }
    let products = eigen_products(&sigma.spectrum().values, k);
    Ok(cluster_eigenvalues(&products, CLUSTER_TOL).len())
}

/// `(1/k) H_{Ak}` of the pinched `k`-copy pair.
pub fn pinched_hoeffding_rate(a: f64, rho: &DensityMatrix, sigma: &DensityMatrix, k: usize, dir: PinchDirection) -> Result<f64> {
    let pair = pinched_pair(rho, sigma, k, dir)?;
    Ok(classical::hoeffding(a * k as f64, &pair.p, &pair.q) / k as f64)
}

/// The sandwiched or reverse-sandwiched Hoeffding divergence the rate tends to.
pub fn pinched_hoeffding_target(a: f64, rho: &DensityMatrix, sigma: &DensityMatrix, dir: PinchDirection) -> Result<f64> {
    let family = match dir {
        PinchDirection::PinchFirstArg => Family::Sandwiched,
        PinchDirection::PinchSecondArg => Family::ReverseSandwiched,
    };
    hoeffding(a, rho, sigma, family)
}

/// One row of a `k`-sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PinchingRow {
    pub k: usize,
    pub rate: f64,
    pub target: f64,
    pub gap: f64,
    pub bound: f64,
}

/// Rates for `k = 1..=k_max`, computed in parallel.
pub fn pinching_scan(
    s: f64,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    k_max: usize,
    dir: PinchDirection,
) -> Result<Vec<PinchingRow>> {
    let target = pinching_target(s, rho, sigma, dir)?;
    let d = rho.dim();
    (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let rate = pinched_renyi_rate(s, rho, sigma, k, dir)?;
            Ok(PinchingRow { k, rate, target, gap: target - rate, bound: pinching_gap_bound(s, d, k, dir) })
        })
        .collect()
}
