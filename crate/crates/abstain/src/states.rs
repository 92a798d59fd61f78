//! Validated quantum states and classical distributions.

use crate::error::{Error, Result};
use crate::linalg::{eig, CMat, Spectrum, C64, HERMITIAN_TOL};

/// Smallest eigenvalue a full-rank state must exceed.
pub const FULL_RANK_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;

/// A validated density matrix together with its eigen-decomposition.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMat,
    spectrum: Spectrum,
}

impl DensityMatrix {
    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min()
    }

    pub fn is_full_rank(&self) -> bool {
        self.min_eigenvalue() > FULL_RANK_TOL
    }

    pub fn require_full_rank(&self) -> Result<()> {
        if self.is_full_rank() {
            Ok(())
        } else {
            Err(Error::RankDeficient { min_eig: self.min_eigenvalue() })
        }
    }

    /// Diagonal embedding of a probability vector.
    pub fn from_probs(p: &[f64]) -> Result<Self> {
        validate_state(&CMat::from_real_diag(p), false)
    }

    /// Full-rank diagonal embedding of a classical distribution.
    pub fn from_distribution(p: &ClassicalDistribution) -> Result<Self> {
        validate_state(&CMat::from_real_diag(p.probs()), true)
    }

    /// The diagonal of the matrix, if the state is diagonal within `tol`.
    pub fn diagonal_probs(&self, tol: f64) -> Option<Vec<f64>> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.mat[(i, j)].norm() > tol {
                    return None;
                }
            }
        }
        Some((0..n).map(|i| self.mat[(i, i)].re).collect())
    }

    /// Whether `self` and `other` commute up to `tol` in max-entry norm.
    pub fn commutes_with(&self, other: &DensityMatrix, tol: f64) -> bool {
        let ab = self.mat.matmul(&other.mat);
        let ba = other.mat.matmul(&self.mat);
        ab.sub(&ba).max_abs() <= tol
    }
}

/// Checks Hermiticity, unit trace and positivity; optionally demands full rank.
pub fn validate_state(x: &CMat, require_full_rank: bool) -> Result<DensityMatrix> {
    let defect = x.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotAState(format!("not Hermitian (max |X - X^dagger| = {defect:e})")));
    }
    let tr = x.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::NotAState(format!("trace is {} + {}i, expected 1", tr.re, tr.im)));
    }
    let mat = x.hermitian_part();
    let spectrum = eig(&mat)?;
    let min = spectrum.min();
    if min < -FULL_RANK_TOL {
        return Err(Error::NotAState(format!("not positive semidefinite (eigenvalue {min:e})")));
    }
    if require_full_rank && min <= FULL_RANK_TOL {
        return Err(Error::RankDeficient { min_eig: min });
    }
    Ok(DensityMatrix { mat, spectrum })
}

/// Probability vector on a finite alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    /// Full-support distribution; entries must be positive and sum to one within 1e-12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::build(probs, false)
    }

    /// Like [`ClassicalDistribution::new`] but zero entries are permitted.
    pub fn with_zeros(probs: Vec<f64>) -> Result<Self> {
        Self::build(probs, true)
    }

    fn build(probs: Vec<f64>, allow_zeros: bool) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidInput("a distribution needs at least two outcomes".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidInput(format!("probability {bad} is negative or not finite")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("probabilities sum to {sum}, expected 1")));
        }
        if !allow_zeros && probs.contains(&0.0) {
            return Err(Error::InvalidInput("distribution must have full support".into()));
        }
        Ok(ClassicalDistribution { probs })
    }

    /// `(p, 1 - p)`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![p, 1.0 - p])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }
}

/// Builds `[[a, b], [conj b, 1 - a]]`, the general qubit state.
pub fn qubit(a: f64, b: C64) -> Result<DensityMatrix> {
    let m = CMat::from_rows(vec![
        vec![C64::new(a, 0.0), b],
        vec![b.conj(), C64::new(1.0 - a, 0.0)],
    ])?;
    validate_state(&m, true)
}
