mod common;

use abstain::divergences::{
    chernoff, d_star, fidelity, max_relative_entropy, min_relative_entropy_zero, petz, projective_metrics,
    relative_entropy, renyi, reverse_sandwiched, sandwiched, DivergenceFamily, Family,
};
use abstain::linalg::{eig, matrix_function, CMat, MatFn, C64};
use abstain::measured::measured_relative_entropy;
use abstain::pinching::{pinch, pinched_renyi_rate, spectrum_count, PinchDirection};
use abstain::regions::{classical_reject_region, hoeffding, quantum_reject_region};
use abstain::sequential::optimal_measurements;
use abstain::states::{qubit, validate_state, ClassicalDistribution, DensityMatrix};
use abstain::types::{eval_stein_test, log_prob_type_class, sanov_log_prob, type_of, EngineConfig};
use common::*;
use nalgebra::{Complex, DMatrix};

// Reference values computed once with independent dense-grid and
// high-precision evaluations, then frozen.
const CHERNOFF_BERNOULLI: f64 = 0.347_379_630_858_362_65;
const HOEFFDING_QP_TENTH_BIT: f64 = 0.756_953_457_463_727_6;
const HOEFFDING_QP_ONE_BIT: f64 = 0.127_777_253_265_068_22;
const DSTAR_FIXED_PAIR: f64 = 0.202_732_554_054_081_57;
const MEASURED_FIXED_PAIR: f64 = 0.261_912_022_663_151_94;

#[test]
fn eigensolver_matches_nalgebra() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
    for d in [2, 3, 5, 8] {
        for _ in 0..10 {
            let s = random_state(d, &mut rng);
            let got = eig(s.matrix()).unwrap().values;
            let want = na_eigs(&to_na(s.matrix()));
            for (g, w) in got.iter().zip(&want) {
                assert_close(*g, *w, 1e-13, "eigenvalue");
            }
        }
    }
}

#[test]
fn small_matrix_examples() {
    let x = CMat::from_real_rows(&[&[0.5, 0.25], &[0.25, 0.5]]).unwrap();
    let e = eig(&x).unwrap();
    assert_close(e.values[0], 0.75, 1e-15, "top eigenvalue");
    assert_close(e.values[1], 0.25, 1e-15, "bottom eigenvalue");
    let back = matrix_function(&matrix_function(&x, MatFn::Log).unwrap(), MatFn::Exp).unwrap();
    assert!(back.sub(&x).max_abs() < 1e-9);

    let y = CMat::from_rows(vec![
        vec![C64::new(0.6, 0.0), C64::new(0.0, 0.1)],
        vec![C64::new(0.0, -0.1), C64::new(0.4, 0.0)],
    ])
    .unwrap();
    let s = validate_state(&y, true).unwrap();
    let r = 0.02f64.sqrt();
    assert_close(s.spectrum().values[0], 0.5 + r, 1e-14, "0.6414");
    assert_close(s.spectrum().values[1], 0.5 - r, 1e-14, "0.3586");
}

#[test]
fn divergences_match_independent_matrix_functions() {
    for d in [2, 3] {
        for (r, s) in random_pairs(d, 25, 1000 + d as u64) {
            for order in [0.3, 0.7, 1.5] {
                assert_close(petz(order, &r, &s).unwrap(), oracle_petz(order, &r, &s), 1e-9, "petz");
            }
            for order in [0.3, 0.7, 1.5, 3.0] {
                assert_close(sandwiched(order, &r, &s).unwrap(), oracle_sandwiched(order, &r, &s), 1e-9, "sandwiched");
            }
            let rev = 0.4 / 0.6 * oracle_sandwiched(0.6, &s, &r);
            assert_close(reverse_sandwiched(0.4, &r, &s).unwrap(), rev, 1e-9, "reverse");
            assert_close(relative_entropy(&r, &s).unwrap(), oracle_umegaki(&r, &s), 1e-10, "umegaki");
            assert_close(max_relative_entropy(&r, &s).unwrap(), oracle_dmax(&r, &s), 1e-10, "dmax");
            assert_close(fidelity(&r, &s), oracle_fidelity(&r, &s), 1e-10, "fidelity");
        }
    }
}

#[test]
fn bernoulli_scalar_values() {
    let (p, q) = bernoulli_pair();
    assert_close(bits(relative_entropy(&p, &q).unwrap()), 1.652_933, 5e-7, "D(P||Q)");
    assert_close(bits(relative_entropy(&q, &p).unwrap()), 1.966_015, 5e-7, "D(Q||P)");
    let bhatt = -2.0 * (0.18f64.sqrt() + 0.08f64.sqrt()).log2();
    let petz_half = DivergenceFamily::new(Family::Petz, 0.5).unwrap();
    let sand_half = DivergenceFamily::new(Family::Sandwiched, 0.5).unwrap();
    assert_close(bits(renyi(petz_half, &p, &q).unwrap()), bhatt, 1e-12, "petz 1/2");
    assert_close(bits(renyi(sand_half, &p, &q).unwrap()), bhatt, 1e-12, "sandwiched 1/2");
    assert_close(bhatt, 1.0, 1e-12, "one bit");
    assert_close(bits(max_relative_entropy(&p, &q).unwrap()), 4.5f64.log2(), 1e-12, "dmax");
    assert_close(fidelity(&p, &q), 0.5, 1e-12, "fidelity");
    let (omega, xi) = projective_metrics(&p, &q).unwrap();
    assert_close(bits(omega), 4.5f64.log2() + 3.0, 1e-12, "D_Omega");
    assert_close(bits(xi), 3.0, 1e-12, "D_Xi");
    assert_eq!(projective_metrics(&q, &p).unwrap(), (omega, xi));
    assert_close(chernoff(&p, &q).unwrap(), CHERNOFF_BERNOULLI, 1e-9, "chernoff");
    assert_close(chernoff(&q, &p).unwrap(), CHERNOFF_BERNOULLI, 1e-9, "chernoff swapped");
}

#[test]
fn rank_deficient_examples() {
    let pure = validate_state(&CMat::from_real_diag(&[1.0, 0.0]), false).unwrap();
    let mixed = DensityMatrix::from_probs(&[0.5, 0.5]).unwrap();
    assert_close(bits(min_relative_entropy_zero(&pure, &mixed)), 1.0, 1e-12, "D_0");
    assert_close(fidelity(&pure, &mixed), 0.5, 1e-12, "fidelity");
    assert!(relative_entropy(&pure, &mixed).is_err());
}

#[test]
fn d_star_values() {
    let (p, q) = bernoulli_pair();
    assert_close(d_star(&p, &q).unwrap().value, relative_entropy(&p, &q).unwrap(), 1e-7, "classical D*");
    let (r, s) = fixed_qubit_pair();
    let ds = d_star(&r, &s).unwrap();
    assert_close(ds.value, DSTAR_FIXED_PAIR, 1e-7, "D* fixed pair");
    assert!(ds.bracket_ok);
    assert!(-fidelity(&r, &s).ln() <= ds.value && ds.value <= relative_entropy(&r, &s).unwrap());
}

#[test]
fn measured_entropy_matches_bloch_grid() {
    let (r, s) = fixed_qubit_pair();
    let fwd = measured_relative_entropy(&r, &s).unwrap();
    let bwd = measured_relative_entropy(&s, &r).unwrap();
    assert_close(fwd.value, MEASURED_FIXED_PAIR, 1e-9, "D_M(rho||sigma)");
    assert_close(bwd.value, MEASURED_FIXED_PAIR, 1e-9, "D_M(sigma||rho)");
    assert!(fwd.value <= relative_entropy(&r, &s).unwrap() + 1e-9);

    let (p, q) = bernoulli_pair();
    let pair = optimal_measurements(&p, &q).unwrap();
    assert_close(bits(pair.d_rho_sigma), 1.652_933, 5e-7, "commuting D_M");
    assert_close(bits(pair.d_sigma_rho), 1.966_015, 5e-7, "commuting D_M reversed");
    for e in pair.m_rho.effects() {
        assert!(e[(0, 1)].norm() < 1e-12, "computational basis expected");
    }
}

#[test]
fn measured_beats_pinched_basis_on_random_pairs() {
    for (r, s) in random_pairs(2, 10, 77) {
        let v = measured_relative_entropy(&r, &s).unwrap().value;
        let basis = eig(s.matrix()).unwrap().vectors;
        let probs = |x: &DensityMatrix| -> Vec<f64> {
            (0..2).map(|k| x.matrix().quadratic_form(&basis.column(k)).re).collect()
        };
        let pinched = abstain::classical::kl(&probs(&r), &probs(&s));
        assert!(v >= pinched - 1e-12);
        assert!(v <= relative_entropy(&r, &s).unwrap() + 1e-9);
    }
}

fn dense_kron_power(m: &DMatrix<Complex<f64>>, k: usize) -> DMatrix<Complex<f64>> {
    let mut out = m.clone();
    for _ in 1..k {
        out = out.kronecker(m);
    }
    out
}

/// Pinches `x` against a diagonal `σ⊗k` by zeroing entries between unequal products.
fn dense_diagonal_pinch(x: &DMatrix<Complex<f64>>, diag: &[f64]) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        if (diag[i] - diag[j]).abs() <= 1e-10 * diag[i].max(diag[j]) {
            x[(i, j)]
        } else {
            Complex::new(0.0, 0.0)
        }
    })
}

#[test]
fn pinched_rates_match_dense_k_copy_computation() {
    let (r, s) = fixed_qubit_pair();
    let rho = to_na(r.matrix());
    for k in 1..=5 {
        let rk = dense_kron_power(&rho, k);
        let diag: Vec<f64> = (0..1usize << k)
            .map(|idx| (0..k).map(|b| if idx >> (k - 1 - b) & 1 == 0 { 0.75 } else { 0.25 }).product())
            .collect();
        let pinched = dense_diagonal_pinch(&rk, &diag);
        for order in [0.7, 1.5] {
            let p_s = na_fn(&pinched, |x| x.max(0.0).powf(order));
            let q: f64 = (0..diag.len()).map(|i| p_s[(i, i)].re * diag[i].powf(1.0 - order)).sum();
            let want = q.ln() / (order - 1.0) / k as f64;
            let got = pinched_renyi_rate(order, &r, &s, k, PinchDirection::PinchFirstArg).unwrap();
            assert_close(got, want, 1e-11, "pinched rate");
        }
        let bound = ((k + 1) as f64).powi(2);
        let diff = pinched.map(|z| z * bound) - &rk;
        assert!(na_eigs(&diff).last().unwrap() >= &-1e-9, "pinching inequality at k = {k}");
    }
}

#[test]
fn pinch_and_spectrum_examples() {
    let (r, s) = fixed_qubit_pair();
    let out = pinch(&s, r.matrix()).unwrap();
    assert!(out.sub(&CMat::from_real_diag(&[0.5, 0.5])).max_abs() < 1e-15);
    let p = DensityMatrix::from_probs(&[0.3, 0.7]).unwrap();
    assert!(pinch(&s, p.matrix()).unwrap().sub(p.matrix()).max_abs() < 1e-15);
    assert_eq!(spectrum_count(&s, 4).unwrap(), 5);
    assert!(spectrum_count(&s, 4).unwrap() <= 25);
    let rotated = qubit(0.6, C64::new(0.1, -0.2)).unwrap();
    for k in 1..=10 {
        assert!(spectrum_count(&rotated, k).unwrap() <= (k + 1).pow(2));
    }
}

#[test]
fn hoeffding_values() {
    let (p, q) = bernoulli_pair();
    let d_pq = relative_entropy(&p, &q).unwrap();
    assert_close(hoeffding(0.0, &q, &p, Family::Petz).unwrap(), d_pq, 1e-10, "H_0(Q||P)");
    assert_eq!(hoeffding(nats(2.0), &q, &p, Family::Petz).unwrap(), 0.0);
    assert_close(hoeffding(nats(0.1), &q, &p, Family::Petz).unwrap(), HOEFFDING_QP_TENTH_BIT, 1e-9, "H_0.1");
    assert_close(hoeffding(nats(1.0), &q, &p, Family::Petz).unwrap(), HOEFFDING_QP_ONE_BIT, 1e-9, "H_1");
}

#[test]
fn reject_region_examples() {
    let (pd, qd) = (ClassicalDistribution::bernoulli(0.9).unwrap(), ClassicalDistribution::bernoulli(0.2).unwrap());
    let (k, l) = (nats(0.1), nats(0.1));
    let b = classical_reject_region(nats(1.0), k, l, &pd, &qd).unwrap();
    assert_close(b, HOEFFDING_QP_TENTH_BIT, 1e-9, "middle branch");
    assert!(b > HOEFFDING_QP_ONE_BIT);
    let below_k = classical_reject_region(nats(0.05), k, l, &pd, &qd).unwrap();
    let plain = abstain::classical::hoeffding(nats(0.05), &[0.2, 0.8], &[0.9, 0.1]);
    assert_close(below_k, plain, 1e-10, "conventional Hoeffding");

    let (p, q) = bernoulli_pair();
    let env = quantum_reject_region(nats(1.0), k, l, &p, &q).unwrap();
    assert_close(env.achievable_b, b, 1e-8, "commuting achievable");
    assert_close(env.converse_b, b, 1e-8, "commuting converse");
}

fn binomial_log(n: u64, k: u64, p: f64) -> f64 {
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    (c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)).ln()
}

#[test]
fn type_class_examples() {
    let p = ClassicalDistribution::bernoulli(0.9).unwrap();
    let t = type_of(&[0, 0, 0, 0, 1, 0, 0, 0, 0, 1], 2).unwrap();
    assert_eq!(t.counts, vec![8, 2]);
    assert_close(log_prob_type_class(&t, &p), (45.0 * 0.9f64.powi(8) * 0.01).ln(), 1e-13, "type class");
    let v = sanov_log_prob(&p, 0.0, &p, 10, false).unwrap();
    assert_close(v, binomial_log(10, 9, 0.9), 1e-12, "sanov centre");
}

/// Enumerates all `2^n` binary sequences.
fn brute_force_masses(n: u32, p1: f64, classify: impl Fn(u32) -> usize) -> [f64; 3] {
    let mut m = [0.0; 3];
    for seq in 0u32..(1 << n) {
        let ones = seq.count_ones();
        let prob = p1.powi(ones as i32) * (1.0 - p1).powi((n - ones) as i32);
        m[classify(ones)] += prob;
    }
    m
}

#[test]
fn stein_test_matches_sequence_enumeration() {
    let (p, q) = (ClassicalDistribution::bernoulli(0.9).unwrap(), ClassicalDistribution::bernoulli(0.2).unwrap());
    let n = 16u32;
    let delta = 0.15;
    let stats = eval_stein_test(&p, &q, n as u64, delta, &EngineConfig::exact_only()).unwrap();
    assert!(stats.exact);
    let classify = |ones: u32| {
        let f0 = (n - ones) as f64 / n as f64;
        if (f0 - 0.9).abs() <= delta + 1e-12 {
            0
        } else if (f0 - 0.2).abs() <= delta + 1e-12 {
            1
        } else {
            2
        }
    };
    let mp = brute_force_masses(n, 0.1, classify);
    let mq = brute_force_masses(n, 0.8, classify);
    assert_close(stats.log_pi_p, (mp[0] + mp[1]).ln(), 1e-12, "pi_P");
    assert_close(stats.log_pi_q, (mq[0] + mq[1]).ln(), 1e-12, "pi_Q");
    assert_close(stats.log_alpha_bar, (mp[1] / (mp[0] + mp[1])).ln(), 1e-10, "alpha bar");
    assert_close(stats.log_beta_bar, (mq[0] / (mq[0] + mq[1])).ln(), 1e-10, "beta bar");
}
