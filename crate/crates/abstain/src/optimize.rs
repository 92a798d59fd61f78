//! Scalar optimisation over open intervals and log-domain accumulation.

/// Interior grid size used before golden-section refinement.
pub const GRID_POINTS: usize = 512;
/// Bracket width at which golden-section refinement stops.
pub const GOLDEN_TOL: f64 = 1e-10;
/// Refinement never goes closer than this to either open endpoint.
pub const EDGE: f64 = 1e-7;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// `log Σ exp(x_i)`, evaluated in iteration order. Empty input gives `-inf`.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = LogSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// `log(exp(a) + exp(b))`.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(1 - exp(a))` for `a <= 0`.
pub fn log1m_exp(a: f64) -> f64 {
    if a > -std::f64::consts::LN_2 {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

/// Streaming log-sum-exp with a running maximum.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    max: f64,
    sum: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        LogSum { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Reduces log-values pairwise in a fixed binary tree.
pub fn tree_log_sum(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NEG_INFINITY;
    }
    while xs.len() > 1 {
        xs = xs
            .chunks(2)
            .map(|c| if c.len() == 2 { log_add(c[0], c[1]) } else { c[0] })
            .collect();
    }
    xs[0]
}

/// Outcome of a one-dimensional extremum search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub value: f64,
    /// Maximiser, or `None` when the extremum is an endpoint limit.
    pub arg: Option<f64>,
}

fn sanitize_max(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Golden-section maximisation of `f` on `(a, b)`.
pub fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = sanitize_max(f(c));
    let mut fd = sanitize_max(f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = sanitize_max(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = sanitize_max(f(d));
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Supremum of `f` over `u ∈ (0, 1)`.
///
/// `lim0` and `lim1` are the limits of `f` at the open endpoints; they come
/// from closed forms so `f` is never evaluated at a singular parameter.
/// The interior is scanned on a uniform grid and the best cell is refined
/// by golden section.
pub fn sup_open_unit(f: impl Fn(f64) -> f64, lim0: f64, lim1: f64) -> Extremum {
    let n = GRID_POINTS;
    let grid: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / (n + 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&u| sanitize_max(f(u))).collect();
    let mut best = 0;
    for i in 1..n {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    let mut out = Extremum { value: vals[best], arg: Some(grid[best]) };
    let lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let hi = if best + 1 == n { 1.0 } else { grid[best + 1] };
    let (u, v) = golden_max(&f, lo.max(EDGE), hi.min(1.0 - EDGE), GOLDEN_TOL);
    if v > out.value {
        out = Extremum { value: v, arg: Some(u) };
    }
    for lim in [lim0, lim1] {
        if sanitize_max(lim) >= out.value {
            out = Extremum { value: lim, arg: None };
        }
    }
    out
}

/// Infimum of `f` over `u ∈ (0, 1)`; see [`sup_open_unit`].
pub fn inf_open_unit(f: impl Fn(f64) -> f64, lim0: f64, lim1: f64) -> Extremum {
    let neg = |u: f64| {
        let v = f(u);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            -v
        }
    };
    let e = sup_open_unit(neg, -lim0, -lim1);
    Extremum { value: -e.value, arg: e.arg }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_basics() {
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
        let v = log_sum_exp([0.0f64.ln(), 0.25f64.ln(), 0.75f64.ln()]);
        assert!(v.abs() < 1e-15);
        let big = log_sum_exp([1000.0, 1000.0]);
        assert!((big - 1000.0 - 2f64.ln()).abs() < 1e-12);
        assert!((log_add(-1e-3, f64::NEG_INFINITY) + 1e-3).abs() == 0.0);
        assert!((log1m_exp(-1e-20) - (1e-20f64).ln()).abs() < 1e-9);
        let t = tree_log_sum(vec![0.1f64.ln(); 10]);
        assert!(t.abs() < 1e-15);
    }

    #[test]
    fn interior_and_endpoint_extrema() {
        let e = sup_open_unit(|u| -(u - 0.3141).powi(2), f64::NEG_INFINITY, -1.0);
        assert!((e.arg.unwrap() - 0.3141).abs() < 1e-6);
        assert!(e.value.abs() < 1e-12);
        let e = sup_open_unit(|u| -u, 0.0, -1.0);
        assert_eq!(e, Extremum { value: 0.0, arg: None });
        let e = inf_open_unit(|u| (u - 0.9).powi(2) + 1.0, 2.0, 1.5);
        assert!((e.value - 1.0).abs() < 1e-12);
    }
}
