//! Exact finite-length probabilities for the simplex triple of length `m`.
//!
//! With `x1 = 0^m` transmitted and the triple laid out in three parts of
//! `k = m/3` symbols (`x2 = 1 1 0`, `x3 = 1 0 1` part-wise), the received
//! block is summarized by the number of ones `A, B, C` in each part:
//!
//! ```text
//! d1 = A + B + C
//! d2 = (k - A) + (k - B) + C      d2 - d1 = 2 (k - A - B)
//! d3 = (k - A) + B + (k - C)      d3 - d1 = 2 (k - A - C)
//! ```
//!
//! A fractional offset `t` corresponds to the lattice offset `u = t k`,
//! i.e. `d2 - d1 = 2 t m / 3`. All sums are accumulated in log domain.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numeric::{
    binomial_log_pmf, entropy_unchecked as h, find_root, log_add_exp, log_sum_exp, log_upper_tails,
    LogFactorials,
};

/// How a log-probability is scaled into an exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Normalization {
    /// `-(3/m) ln P`, per part of the simplex layout.
    PerPart,
    /// `-(1/m) ln P`, per symbol of the effective length.
    PerSymbol,
}

impl Normalization {
    fn scale(self, m: usize) -> f64 {
        match self {
            Normalization::PerPart => 3.0 / m as f64,
            Normalization::PerSymbol => 1.0 / m as f64,
        }
    }
}

/// A probability computed exactly, kept in log domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactProbability {
    pub log_p: f64,
    pub m: usize,
    pub normalization: Normalization,
    pub normalized_exponent: f64,
    /// `false` when no lattice point satisfies the integer constraints.
    pub feasible: bool,
}

impl ExactProbability {
    fn new(log_p: f64, m: usize, normalization: Normalization, feasible: bool) -> Self {
        let log_p = log_p.min(0.0);
        Self {
            log_p,
            m,
            normalization,
            normalized_exponent: -normalization.scale(m) * log_p,
            feasible,
        }
    }

    pub fn probability(&self) -> f64 {
        self.log_p.exp()
    }
}

fn part_size(m: usize) -> Result<usize> {
    if m == 0 || !m.is_multiple_of(3) {
        return Err(domain(format!(
            "block length m = {m} is not a positive multiple of 3"
        )));
    }
    Ok(m / 3)
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 0.5 {
        Ok(())
    } else {
        Err(domain(format!("crossover p = {p} outside (0, 1/2]")))
    }
}

/// Converts a fractional offset to the lattice offset `t k`, which must be
/// an integer.
pub fn lattice_offset(t: f64, m: usize) -> Result<i64> {
    let k = part_size(m)?;
    if !(-1.0..=1.0).contains(&t) {
        return Err(domain(format!("offset t = {t} outside [-1, 1]")));
    }
    let x = t * k as f64;
    let r = x.round();
    if (x - r).abs() > 1e-9 {
        return Err(Error::Lattice(format!(
            "t·m/3 = {x} is not an integer for t = {t}, m = {m}"
        )));
    }
    Ok(r as i64)
}

/// `P(d2 = d1 + 2tm/3, d3 = d1 + 2 t1 m/3 | x1)`.
pub fn lemma_point_probability(m: usize, t: f64, t1: f64, p: f64) -> Result<ExactProbability> {
    let (u, v) = (lattice_offset(t, m)?, lattice_offset(t1, m)?);
    lemma_point_probability_lattice(m, u, v, p)
}

/// Point probability at integer offsets `d2 - d1 = 2u`, `d3 - d1 = 2v`.
pub fn lemma_point_probability_lattice(
    m: usize,
    u: i64,
    v: i64,
    p: f64,
) -> Result<ExactProbability> {
    let k = part_size(m)?;
    check_p(p)?;
    let lf = LogFactorials::new(k);
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let ki = k as i64;
    let mut acc = f64::NEG_INFINITY;
    let mut feasible = false;
    for a in 0..=ki {
        let (b, c) = (ki - u - a, ki - v - a);
        if !(0..=ki).contains(&b) || !(0..=ki).contains(&c) {
            continue;
        }
        feasible = true;
        let ones = (a + b + c) as f64;
        // B and C enter symmetrically so that swapping (u, v) is exact
        let coeff = lf.ln_choose(k, a as usize)
            + (lf.ln_choose(k, b as usize) + lf.ln_choose(k, c as usize));
        acc = log_add_exp(acc, coeff + ones * lp + (3.0 * k as f64 - ones) * lq);
    }
    Ok(ExactProbability::new(
        acc,
        m,
        Normalization::PerPart,
        feasible,
    ))
}

/// `P(d2 <= d1 + 2tm/3, d3 <= d1 + 2 t1 m/3 | x1)`.
pub fn lemma_tail_probability(m: usize, t: f64, t1: f64, p: f64) -> Result<ExactProbability> {
    let (u, v) = (lattice_offset(t, m)?, lattice_offset(t1, m)?);
    lemma_tail_probability_lattice(m, u, v, p)
}

/// Tail probability at integer offsets: `d2 - d1 <= 2u`, `d3 - d1 <= 2v`.
pub fn lemma_tail_probability_lattice(
    m: usize,
    u: i64,
    v: i64,
    p: f64,
) -> Result<ExactProbability> {
    let k = part_size(m)?;
    check_p(p)?;
    let lf = LogFactorials::new(k);
    let pmf = binomial_log_pmf(k, p, &lf);
    let tails = log_upper_tails(&pmf);
    let ki = k as i64;
    // ln P(Bin(k,p) >= j)
    let tail = |j: i64| -> f64 {
        if j <= 0 {
            0.0
        } else if j > ki {
            f64::NEG_INFINITY
        } else {
            tails[j as usize]
        }
    };
    let mut acc = f64::NEG_INFINITY;
    let mut feasible = false;
    for a in 0..=ki {
        // need B >= k - u - A and C >= k - v - A
        let (jb, jc) = (ki - u - a, ki - v - a);
        if jb > ki || jc > ki {
            continue;
        }
        feasible = true;
        acc = log_add_exp(acc, pmf[a as usize] + (tail(jb) + tail(jc)));
    }
    Ok(ExactProbability::new(
        acc,
        m,
        Normalization::PerPart,
        feasible,
    ))
}

/// Integer threshold `⌊2tm/3⌋` on `d(x3,y) - d(x2,y)` used for the
/// effective length `m`; identical to `⌊t·γn/2⌋` when `m = 3γn/4`.
pub fn distance_threshold(t: f64, m: usize) -> usize {
    (2.0 * t * m as f64 / 3.0 + 1e-9).floor().max(0.0) as usize
}

/// Exact probability of the pair-mismatch event
/// `{d(x3,y) >= d(x2,y) + ⌊2tm/3⌋, d(x3,x') <= d(x2,x')}` where `x'` is
/// `y` relayed through BSC(p1).
///
/// With `B`, `C` ones of `y` on the parts where `x2`, `x3` differ, the
/// transmitter's counts of ones there are `X2 ~ Bin(B, q1) + Bin(k-B, p1)`
/// and `X3 ~ Bin(C, q1) + Bin(k-C, p1)`, and the second condition is
/// `X2 <= X3`.
pub fn event_a1_probability(m: usize, t: f64, p: f64, p1: f64) -> Result<ExactProbability> {
    let k = part_size(m)?;
    check_p(p)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("threshold t = {t} outside [0, 1]")));
    }
    if !(0.0..=0.5).contains(&p1) {
        return Err(domain(format!(
            "feedback crossover p1 = {p1} outside [0, 1/2]"
        )));
    }
    let thr = distance_threshold(t, m);
    // 2(B - C) >= thr  <=>  B - C >= ceil(thr / 2)
    let gap = thr.div_ceil(2);
    let lf = LogFactorials::new(k);
    let pmf = binomial_log_pmf(k, p, &lf);

    if p1 == 0.0 {
        // X2 = B, X3 = C: needs B <= C together with B >= C + gap
        let log_p = if gap == 0 {
            log_sum_exp(&pmf.iter().map(|l| 2.0 * l).collect::<Vec<_>>())
        } else {
            f64::NEG_INFINITY
        };
        return Ok(ExactProbability::new(
            log_p,
            m,
            Normalization::PerSymbol,
            true,
        ));
    }

    let q1 = 1.0 - p1;
    // distribution of the relayed ones count on a part with j ones in y
    let relayed: Vec<Vec<f64>> = (0..=k)
        .into_par_iter()
        .map(|j| {
            let kept = binomial_log_pmf(j, q1, &lf);
            let flipped = binomial_log_pmf(k - j, p1, &lf);
            (0..=k)
                .map(|x| {
                    let lo = x.saturating_sub(k - j);
                    let hi = x.min(j);
                    let mut acc = f64::NEG_INFINITY;
                    for i in lo..=hi {
                        acc = log_add_exp(acc, kept[i] + flipped[x - i]);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let relayed_tails: Vec<Vec<f64>> = relayed.iter().map(|d| log_upper_tails(d)).collect();

    // one partial sum per B, each over ascending C, merged in B order
    let partials: Vec<f64> = (0..=k)
        .into_par_iter()
        .map(|b| {
            if b < gap {
                return f64::NEG_INFINITY;
            }
            let mut acc = f64::NEG_INFINITY;
            for c in 0..=(b - gap) {
                // P(X2 <= X3) = Σ_x P(X2 = x) P(X3 >= x)
                let mut cmp = f64::NEG_INFINITY;
                for x in 0..=k {
                    cmp = log_add_exp(cmp, relayed[b][x] + relayed_tails[c][x]);
                }
                acc = log_add_exp(acc, pmf[b] + pmf[c] + cmp);
            }
            acc
        })
        .collect();
    let log_p = log_sum_exp(&partials);
    Ok(ExactProbability::new(
        log_p,
        m,
        Normalization::PerSymbol,
        gap <= k,
    ))
}

fn check_f_args(a: f64, t: f64, t1: f64) -> Result<()> {
    for (name, x) in [("a", a), ("a+t", a + t), ("a+t1", a + t1)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(domain(format!("{name} = {x} outside [0, 1]")));
        }
    }
    Ok(())
}

/// `f(a,t,t1) = h(a) + h(a+t) + h(a+t1) + (a+t+t1) ln z`.
pub fn lemma_f(a: f64, t: f64, t1: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    check_f_args(a, t, t1)?;
    Ok(f_raw(a, t, t1, p))
}

fn f_raw(a: f64, t: f64, t1: f64, p: f64) -> f64 {
    h(a) + h(a + t) + h(a + t1) + (a + t + t1) * ((1.0 - p) / p).ln()
}

/// Maximizer over `a` of `f(a,t,t1)`, the root of the stationarity condition
/// `ln((1-a)/a) + ln((1-a-t)/(a+t)) + ln((1-a-t1)/(a+t1)) + ln z = 0`.
pub fn lemma_f_argmax(t: f64, t1: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    let lo = 0f64.max(-t).max(-t1);
    let hi = 1f64.min(1.0 - t).min(1.0 - t1);
    if !(t.abs() <= 1.0 && t1.abs() <= 1.0) || hi < lo {
        return Err(domain(format!("no admissible a for t = {t}, t1 = {t1}")));
    }
    if hi == lo {
        return Ok(lo);
    }
    let ln_z = ((1.0 - p) / p).ln();
    let ratio = |x: f64| {
        if x <= 0.0 {
            f64::INFINITY
        } else if x >= 1.0 {
            f64::NEG_INFINITY
        } else {
            ((1.0 - x) / x).ln()
        }
    };
    let slope = |a: f64| ratio(a) + ratio(a + t) + ratio(a + t1) + ln_z;
    find_root(slope, lo, hi, 1e-15)
}

/// `max_a f(a,t,t1)`.
pub fn lemma_f_max(t: f64, t1: f64, p: f64) -> Result<f64> {
    let a = lemma_f_argmax(t, t1, p)?;
    Ok(f_raw(a, t, t1, p))
}

/// The limit of `-(3/m) ln P1(t,t1)`: `ln(1/(p^2 q)) - max_a f(a,t,t1)`.
pub fn lemma_exponent(t: f64, t1: f64, p: f64) -> Result<f64> {
    let q = 1.0 - p;
    Ok(-(p * p * q).ln() - lemma_f_max(t, t1, p)?)
}
