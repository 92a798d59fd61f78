//! Scalar formulas on raw probability vectors.
//!
//! These are used where the pair is already classical and large (pinched
//! tensor powers), so that no matrix machinery is involved.

use crate::optimize::{log_sum_exp, sup_open_unit};

/// `Σ p log(p/q)` with `0 log 0 = 0`.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a.ln() - b.ln()))
        .sum()
}

/// `log Σ p^s q^{1-s}` over the common support.
pub fn log_petz_q(s: f64, p: &[f64], q: &[f64]) -> f64 {
    log_sum_exp(
        p.iter()
            .zip(q)
            .filter(|(&a, &b)| a > 0.0 && b > 0.0)
            .map(|(&a, &b)| s * a.ln() + (1.0 - s) * b.ln()),
    )
}

/// Rényi divergence of order `s`; `s = 1` gives the Kullback–Leibler divergence.
pub fn renyi(s: f64, p: &[f64], q: &[f64]) -> f64 {
    if s == 1.0 {
        kl(p, q)
    } else {
        log_petz_q(s, p, q) / (s - 1.0)
    }
}

/// `sup_{s∈(0,1)} ((s-1)A - log Σ p^s q^{1-s}) / s`.
pub fn hoeffding(a: f64, p: &[f64], q: &[f64]) -> f64 {
    let lim0 = if a > 0.0 { f64::NEG_INFINITY } else { kl(q, p) };
    sup_open_unit(|s| ((s - 1.0) * a - log_petz_q(s, p, q)) / s, lim0, 0.0).value.max(0.0)
}
