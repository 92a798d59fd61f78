//! Dense complex Hermitian linear algebra for small dimensions.
//!
//! Matrices are row-major `Vec<Complex64>`. The eigensolver is a cyclic
//! Jacobi method, and matrix functions are applied through the spectrum.

use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest dimension handled by the dense routines.
pub const MAX_DIM: usize = 256;

/// Relative Frobenius threshold on the off-diagonal mass that ends the sweeps.
pub const JACOBI_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Tolerance on `max |X - X^dagger|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Builds a matrix from rows; fails unless the rows form a square array.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
            data.extend(r);
        }
        Ok(CMat { n, data })
    }

    /// Real matrix from rows (convenience for tests and examples).
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        CMat { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &CMat) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CMat { n: self.n, data }
    }

    pub fn sub(&self, other: &CMat) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CMat { n: self.n, data }
    }

    pub fn scale(&self, s: f64) -> Self {
        CMat { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// `max |X - X^dagger|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn matmul(&self, other: &CMat) -> Self {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `A^dagger X A`, i.e. X expressed in the basis given by the columns of A.
    pub fn conjugate_by(&self, a: &CMat) -> Self {
        a.adjoint().matmul(self).matmul(a)
    }

    pub fn kron(&self, other: &CMat) -> Self {
        let (n, m) = (self.n, other.n);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)])
    }

    /// `X^{⊗k}`; refuses when the result would exceed [`MAX_DIM`].
    pub fn tensor_power(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Ok(CMat::identity(1));
        }
        let dim = (self.n as f64).powi(k as i32);
        if dim > MAX_DIM as f64 {
            return Err(Error::DimensionBudget { dim: dim as usize, budget: MAX_DIM });
        }
        let mut out = self.clone();
        for _ in 1..k {
            out = out.kron(self);
        }
        Ok(out)
    }

    /// Principal submatrix on the given row/column indices.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    /// `<v| X |v>` for a column vector `v`.
    pub fn quadratic_form(&self, v: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.n {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..self.n {
                row += self[(i, j)] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMat,
}

impl Spectrum {
    /// `U f(Λ) U^dagger`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let u = &self.vectors;
        CMat::from_fn(n, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += u[(i, k)] * u[(j, k)].conj() * fv[k];
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> CMat {
        self.apply(|x| x)
    }

    pub fn min(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    pub fn max(&self) -> f64 {
        *self.values.first().unwrap_or(&0.0)
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
pub fn eig(x: &CMat) -> Result<Spectrum> {
    let defect = x.hermitian_defect();
    if defect > HERMITIAN_TOL * x.max_abs().max(1.0) {
        return Err(Error::NonHermitian { defect });
    }
    Ok(jacobi(x.hermitian_part()))
}

/// Cyclic complex Jacobi. The input must already be exactly Hermitian.
pub(crate) fn jacobi(mut a: CMat) -> Spectrum {
    let n = a.dim();
    let mut v = CMat::identity(n);
    let scale = a.frobenius();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[(p, q)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= JACOBI_TOL * scale {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                rotated |= rotate(&mut a, &mut v, p, q);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = CMat::from_fn(n, |i, j| v[(i, order[j])]);
    normalize_phases(&mut vectors);
    Spectrum { values, vectors }
}

/// Applies one Jacobi rotation zeroing `a[p][q]`; returns false if skipped.
fn rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize) -> bool {
    let apq = a[(p, q)];
    let r = apq.norm();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if r == 0.0 || r <= 0.5 * f64::EPSILON * (app * aqq).abs().sqrt() {
        if r != 0.0 {
            a[(p, q)] = C64::new(0.0, 0.0);
            a[(q, p)] = C64::new(0.0, 0.0);
        }
        return false;
    }
    let phase = (apq / r).conj();
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = phase * (-s);
    let g_qq = phase * c;
    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    true
}

/// Makes the largest-modulus entry of each column real and positive.
fn normalize_phases(u: &mut CMat) {
    let n = u.dim();
    for j in 0..n {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..n {
            let m = u[(i, j)].norm();
            if m > best_abs + 1e-12 {
                best = i;
                best_abs = m;
            }
        }
        if best_abs <= 0.0 {
            continue;
        }
        let ph = (u[(best, j)] / best_abs).conj();
        for i in 0..n {
            u[(i, j)] *= ph;
        }
    }
}

/// Scalar functions that can be lifted to Hermitian matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatFn {
    Power(f64),
    Log,
    Exp,
}

/// Applies `f` through the eigen-decomposition of `x`.
pub fn matrix_function(x: &CMat, f: MatFn) -> Result<CMat> {
    let spec = eig(x)?;
    spectral_function(&spec, f)
}

/// Same as [`matrix_function`] but reuses an existing decomposition.
pub fn spectral_function(spec: &Spectrum, f: MatFn) -> Result<CMat> {
    let needs_pd = matches!(f, MatFn::Log) || matches!(f, MatFn::Power(t) if t < 0.0);
    let min = spec.min();
    if needs_pd && min <= 0.0 {
        return Err(Error::SingularMatrix { min_eig: min });
    }
    Ok(match f {
        MatFn::Power(1.0) => spec.reconstruct(),
        MatFn::Power(t) => spec.apply(|l| if l <= 0.0 { 0.0 } else { l.powf(t) }),
        MatFn::Log => spec.apply(f64::ln),
        MatFn::Exp => spec.apply(f64::exp),
    })
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
/// `a` is `n×n` and `b` is `n×m`, both row-major.
pub(crate) fn solve(a: &[C64], b: &[C64], n: usize, m: usize) -> Result<Vec<C64>> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
            .unwrap_or(col);
        let pv = a[piv * n + col];
        if pv.norm() == 0.0 {
            return Err(Error::SingularMatrix { min_eig: 0.0 });
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            for k in 0..m {
                b.swap(piv * m + k, col * m + k);
            }
        }
        for r in (col + 1)..n {
            let f = a[r * n + col] / pv;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let t = a[col * n + k];
                a[r * n + k] -= f * t;
            }
            for k in 0..m {
                let t = b[col * m + k];
                b[r * m + k] -= f * t;
            }
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n * m];
    for r in (0..n).rev() {
        for k in 0..m {
            let mut acc = b[r * m + k];
            for c in (r + 1)..n {
                acc -= a[r * n + c] * x[c * m + k];
            }
            x[r * m + k] = acc / a[r * n + r];
        }
    }
    Ok(x)
}

/// Consecutive log-scales further apart than this are treated as decoupled.
const GRADE_GAP: f64 = 20.0;

/// Natural logs of the eigenvalues of `D A D` with `D = diag(exp(g))`.
///
/// `A` must be Hermitian positive definite. The scales `g` may span
/// thousands of nats: indices are grouped into clusters of comparable
/// scale and each cluster is handled through the Schur complement of
/// `A` on all larger-scale indices, so nothing over- or underflows.
/// Output is sorted descending.
pub fn graded_log_eigenvalues(g: &[f64], a: &CMat) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| g[j].total_cmp(&g[i]).then(i.cmp(&j)));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos == 0 || g[order[pos - 1]] - g[i] > GRADE_GAP {
            clusters.push(vec![i]);
        } else {
            clusters.last_mut().expect("cluster exists").push(i);
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut earlier: Vec<usize> = Vec::new();
    for cl in &clusters {
        let s = schur_block(a, cl, &earlier)?;
        let gmax = g[cl[0]];
        let m = cl.len();
        let w: Vec<f64> = cl.iter().map(|&i| (g[i] - gmax).exp()).collect();
        let scaled = CMat::from_fn(m, |i, j| s[(i, j)] * (w[i] * w[j]));
        let spec = jacobi(scaled.hermitian_part());
        for &ev in &spec.values {
            if ev <= 0.0 {
                return Err(Error::SingularMatrix { min_eig: ev });
            }
            out.push(2.0 * gmax + ev.ln());
        }
        earlier.extend_from_slice(cl);
    }
    out.sort_by(|x, y| y.total_cmp(x));
    Ok(out)
}

/// `A[I,I] - A[I,E] A[E,E]^{-1} A[E,I]`.
fn schur_block(a: &CMat, idx: &[usize], elim: &[usize]) -> Result<CMat> {
    let m = idx.len();
    let base = a.submatrix(idx);
    if elim.is_empty() {
        return Ok(base);
    }
    let e = elim.len();
    let mut aee = Vec::with_capacity(e * e);
    for &r in elim {
        for &c in elim {
            aee.push(a[(r, c)]);
        }
    }
    let mut aei = Vec::with_capacity(e * m);
    for &r in elim {
        for &c in idx {
            aei.push(a[(r, c)]);
        }
    }
    let x = solve(&aee, &aei, e, m)?;
    Ok(CMat::from_fn(m, |i, j| {
        let mut acc = base[(i, j)];
        for (k, &r) in elim.iter().enumerate() {
            acc -= a[(idx[i], r)] * x[k * m + j];
        }
        acc
    }))
}

/// Groups descending eigenvalues whose relative separation is within `rel_tol`.
/// Returns the member indices of each cluster, in descending value order.
pub fn cluster_eigenvalues(values: &[f64], rel_tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut anchor = f64::NAN;
    for &i in &order {
        let v = values[i];
        let close = !anchor.is_nan() && (anchor - v).abs() <= rel_tol * anchor.abs().max(v.abs());
        if close {
            clusters.last_mut().expect("cluster exists").push(i);
        } else {
            clusters.push(vec![i]);
            anchor = v;
        }
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_and_diagonal() {
        let s = eig(&CMat::identity(2)).unwrap();
        assert_eq!(s.values, vec![1.0, 1.0]);
        let s = eig(&CMat::from_real_diag(&[0.1, 0.9])).unwrap();
        assert_eq!(s.values, vec![0.9, 0.1]);
        assert!((s.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_closed_form() {
        let x = CMat::from_real_rows(&[&[0.5, 0.25], &[0.25, 0.5]]).unwrap();
        let s = eig(&x).unwrap();
        assert!((s.values[0] - 0.75).abs() < 1e-15);
        assert!((s.values[1] - 0.25).abs() < 1e-15);
        let y = CMat::from_rows(vec![vec![c(0.6, 0.0), c(0.0, 0.1)], vec![c(0.0, -0.1), c(0.4, 0.0)]])
            .unwrap();
        let s = eig(&y).unwrap();
        let disc = (0.01f64 + 0.01).sqrt();
        assert!((s.values[0] - (0.5 + disc)).abs() < 1e-14);
        assert!((s.values[1] - (0.5 - disc)).abs() < 1e-14);
        assert!(s.reconstruct().sub(&y).frobenius() < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let x = CMat::from_real_rows(&[&[1.0, 0.5], &[0.0, 1.0]]).unwrap();
        assert!(matches!(eig(&x), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn matrix_functions() {
        let x = CMat::from_real_diag(&[0.25, 0.09]);
        let r = matrix_function(&x, MatFn::Power(0.5)).unwrap();
        assert!((r[(0, 0)].re - 0.5).abs() < 1e-15 && (r[(1, 1)].re - 0.3).abs() < 1e-15);
        let l = matrix_function(&CMat::identity(3), MatFn::Log).unwrap();
        assert!(l.max_abs() == 0.0);
        let x = CMat::from_real_rows(&[&[0.5, 0.25], &[0.25, 0.5]]).unwrap();
        let back = matrix_function(&matrix_function(&x, MatFn::Log).unwrap(), MatFn::Exp).unwrap();
        assert!(back.sub(&x).max_abs() < 1e-9);
        let one = matrix_function(&x, MatFn::Power(1.0)).unwrap();
        assert!(one.sub(&x).max_abs() < 1e-10);
        let singular = CMat::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(matrix_function(&singular, MatFn::Log), Err(Error::SingularMatrix { .. })));
        assert!(matches!(
            matrix_function(&singular, MatFn::Power(-0.5)),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn graded_matches_plain_on_mild_scales() {
        let a = CMat::from_rows(vec![
            vec![c(0.5, 0.0), c(0.1, 0.2), c(0.0, -0.1)],
            vec![c(0.1, -0.2), c(0.3, 0.0), c(0.05, 0.0)],
            vec![c(0.0, 0.1), c(0.05, 0.0), c(0.2, 0.0)],
        ])
        .unwrap();
        let g = [0.3, -1.2, 0.7];
        let d: Vec<f64> = g.iter().map(|x: &f64| x.exp()).collect();
        let y = CMat::from_fn(3, |i, j| a[(i, j)] * (d[i] * d[j]));
        let plain: Vec<f64> = eig(&y).unwrap().values.iter().map(|v| v.ln()).collect();
        let graded = graded_log_eigenvalues(&g, &a).unwrap();
        for (p, q) in plain.iter().zip(&graded) {
            assert!((p - q).abs() < 1e-12, "{p} vs {q}");
        }
    }

    #[test]
    fn graded_survives_extreme_scales() {
        // Diagonal input: the answer is exact.
        let a = CMat::from_real_diag(&[0.7, 0.3]);
        let g = [-900.0, -3000.0];
        let out = graded_log_eigenvalues(&g, &a).unwrap();
        assert!((out[0] - (-1800.0 + 0.7f64.ln())).abs() < 1e-9);
        assert!((out[1] - (-6000.0 + 0.3f64.ln())).abs() < 1e-9);
        // Off-diagonal coupling: the small eigenvalue is the Schur complement.
        let a = CMat::from_real_rows(&[&[0.5, 0.25], &[0.25, 0.5]]).unwrap();
        let out = graded_log_eigenvalues(&[0.0, -400.0], &a).unwrap();
        let schur = 0.5 - 0.25 * 0.25 / 0.5;
        assert!((out[1] - (-800.0 + f64::ln(schur))).abs() < 1e-12);
        assert!((out[0] - f64::ln(0.5)).abs() < 1e-12);
    }

    #[test]
    fn clustering_merges_product_collisions() {
        let v = [0.75 * 0.25, 0.25 * 0.75, 0.5, 0.5 + 1e-3];
        let cl = cluster_eigenvalues(&v, 1e-10);
        assert_eq!(cl.len(), 3);
        assert_eq!(cl[2], vec![0, 1]);
    }

    #[test]
    fn tensor_power_budget() {
        let x = CMat::identity(2);
        assert_eq!(x.tensor_power(8).unwrap().dim(), 256);
        assert!(matches!(x.tensor_power(9), Err(Error::DimensionBudget { .. })));
    }
}
