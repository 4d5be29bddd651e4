//! Small numerical kernels shared by the exponent and oracle layers:
//! binary entropy, log-domain accumulation, log-binomials, bracketed root
//! finding and golden-section maximization.

use crate::error::{domain, Error, Result};

/// Binary entropy in nats with the convention `0 ln 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!(
            "binary entropy argument {x} outside [0, 1]"
        )));
    }
    Ok(entropy_unchecked(x))
}

/// Entropy without the domain check; callers guarantee `x` in `[0, 1]`.
pub(crate) fn entropy_unchecked(x: f64) -> f64 {
    -xlnx(x) - xlnx(1.0 - x)
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Numerically stable `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}` over a slice, evaluated in index order.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Table of `ln k!` for `k = 0..=n`.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for k in 1..=n {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_factorial(&self, k: usize) -> f64 {
        self.table[k]
    }

    /// `ln C(n, k)`, `-inf` when `k > n`.
    pub fn ln_choose(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// Log-pmf of Binomial(n, p) over `0..=n`. Handles `p = 0` and `p = 1`.
pub fn binomial_log_pmf(n: usize, p: f64, lf: &LogFactorials) -> Vec<f64> {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=n)
        .map(|k| {
            let ones = if k == 0 { 0.0 } else { k as f64 * lp };
            let zeros = if k == n { 0.0 } else { (n - k) as f64 * lq };
            lf.ln_choose(n, k) + ones + zeros
        })
        .collect()
}

/// Upper tails `ln P(X >= j)` for `j = 0..=n+1` from a log-pmf of length `n+1`.
/// Entry `n+1` is `-inf`.
pub fn log_upper_tails(log_pmf: &[f64]) -> Vec<f64> {
    let mut tails = vec![f64::NEG_INFINITY; log_pmf.len() + 1];
    let mut acc = f64::NEG_INFINITY;
    for j in (0..log_pmf.len()).rev() {
        acc = log_add_exp(acc, log_pmf[j]);
        tails[j] = acc;
    }
    tails
}

/// Finds the root of `f` in `[lo, hi]` given a sign change, by bisection
/// with safeguarded secant steps. Stops when the bracket is narrower than
/// `xtol` (plus a few ulps) or an exact zero is hit.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Numerical(format!(
            "root bracket [{lo}, {hi}] evaluates to NaN"
        )));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo}, {hi}]: f = {fa}, {fb}"
        )));
    }
    let mut use_secant = true;
    for _ in 0..400 {
        let width = (b - a).abs();
        if width <= xtol + 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        let mut x = 0.5 * (a + b);
        if use_secant && fa.is_finite() && fb.is_finite() {
            let s = b - fb * (b - a) / (fb - fa);
            // stay strictly inside, away from the endpoints
            let margin = 0.01 * width;
            if s > a.min(b) + margin && s < a.max(b) - margin {
                x = s;
            }
        }
        if x == a || x == b {
            break;
        }
        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::Numerical(format!(
                "NaN at x = {x} during root search"
            )));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // plain bisection next whenever the secant step failed to halve the bracket
        use_secant = (b - a).abs() <= 0.5 * width;
    }
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if c == d {
            break;
        }
    }
    // endpoints are candidates too: the maximum may sit on the boundary
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}
