//! Zero-rate error exponents of the binary symmetric channel with and
//! without feedback, all in nats per channel use.
//!
//! The central quantities are the phase-I exponent `G1(t, p)` (receiver
//! decides early, wrong), the pair-mismatch exponent `G2(t, p, p1)`
//! (transmitter misidentifies the receiver's two candidates through the
//! noisy feedback link), and their combination `F1(p, p1)` maximized over
//! the decision threshold `t`.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::numeric::{entropy_unchecked as h, find_root, golden_section_max};

const ROOT_XTOL: f64 = 1e-12;
const GRID_POINTS: usize = 64;

/// State of the feedback link. Noiseless feedback is kept distinct from a
/// tiny crossover so that `z1 = q1/p1` never has to be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "p1", rename_all = "lowercase")]
pub enum Feedback {
    Noiseless,
    Noisy(f64),
}

/// Forward crossover `p` and feedback crossover `p1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    p: f64,
    feedback: Feedback,
}

impl ChannelParams {
    /// `0 < p < 1/2` and `0 <= p1 <= 1/2`; `p1 = 0` selects noiseless feedback.
    pub fn new(p: f64, p1: f64) -> Result<Self> {
        check_forward(p)?;
        if !(0.0..=0.5).contains(&p1) {
            return Err(domain(format!(
                "feedback crossover p1 = {p1} outside [0, 1/2]"
            )));
        }
        let feedback = if p1 == 0.0 {
            Feedback::Noiseless
        } else {
            Feedback::Noisy(p1)
        };
        Ok(Self { p, feedback })
    }

    pub fn noiseless(p: f64) -> Result<Self> {
        Self::new(p, 0.0)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn z(&self) -> f64 {
        self.q() / self.p
    }

    pub fn feedback(&self) -> Feedback {
        self.feedback
    }

    /// Feedback crossover, `0` for noiseless feedback.
    pub fn p1(&self) -> f64 {
        match self.feedback {
            Feedback::Noiseless => 0.0,
            Feedback::Noisy(p1) => p1,
        }
    }

    pub fn q1(&self) -> f64 {
        1.0 - self.p1()
    }

    /// `q1/p1`, or `None` for noiseless feedback.
    pub fn z1(&self) -> Option<f64> {
        match self.feedback {
            Feedback::Noiseless => None,
            Feedback::Noisy(p1) => Some((1.0 - p1) / p1),
        }
    }
}

/// Everything `exponent_f1` computes for one channel pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub p: f64,
    pub p1: f64,
    /// No-feedback exponent `E(p)`.
    pub e: f64,
    /// Two-codeword exponent `E2(p) = 2 E(p)`.
    pub e2: f64,
    /// Noiseless-feedback exponent `F(p) = F3(p)`.
    pub f: f64,
    /// One-switch noisy-feedback exponent `F1(p, p1)`.
    pub f1: f64,
    /// Optimizing threshold; `0` (as a limit) for noiseless feedback.
    pub t_star: f64,
    /// Phase-I fraction balancing the error terms at `t_star`.
    pub gamma_star: f64,
    /// Feedback crossover below which `F1 > E`.
    pub p0: f64,
    pub g1_at_t_star: f64,
    /// `+inf` for noiseless feedback (serialized as `null` in JSON).
    pub g2_at_t_star: f64,
}

/// Exponent and time split of the three-phase active-feedback scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActiveExponent {
    pub exponent: f64,
    /// Phase-I fraction.
    pub gamma: f64,
    /// Phase-II (feedback report) fraction.
    pub gamma1: f64,
}

fn check_forward(p: f64) -> Result<()> {
    if p > 0.0 && p < 0.5 {
        Ok(())
    } else {
        Err(domain(format!(
            "forward crossover p = {p} outside (0, 1/2)"
        )))
    }
}

fn check_threshold(t: f64, p: f64) -> Result<()> {
    let top = 0.5 - p;
    if t >= 0.0 && t <= top + 1e-12 {
        Ok(())
    } else {
        Err(domain(format!("threshold t = {t} outside [0, {top}]")))
    }
}

/// `E(p) = (1/4) ln(1/(4pq))`.
pub fn exponent_e(p: f64) -> Result<f64> {
    check_forward(p)?;
    Ok(e_raw(p))
}

fn e_raw(p: f64) -> f64 {
    -0.25 * (4.0 * p * (1.0 - p)).ln()
}

/// `E2(p) = (1/2) ln(1/(4pq))`.
pub fn exponent_e2(p: f64) -> Result<f64> {
    Ok(2.0 * exponent_e(p)?)
}

/// `F(p) = -ln(p^{1/3} q^{2/3} + q^{1/3} p^{2/3})`.
pub fn exponent_f(p: f64) -> Result<f64> {
    check_forward(p)?;
    Ok(f_raw(p))
}

fn f_raw(p: f64) -> f64 {
    let q = 1.0 - p;
    let (cp, cq) = (p.cbrt(), q.cbrt());
    -(cp * cq * cq + cq * cp * cp).ln()
}

/// Unique root `a` in `(0, 1 - t)` of `q (1-a)^2 (1-a-t) = p a^2 (a+t)`,
/// the maximizer inside `G1`.
pub fn a0_root(t: f64, p: f64) -> Result<f64> {
    check_forward(p)?;
    check_threshold(t, p)?;
    a0_raw(t, p)
}

fn a0_raw(t: f64, p: f64) -> Result<f64> {
    let q = 1.0 - p;
    let t = t.min(0.5 - p);
    let residual = |a: f64| q * (1.0 - a) * (1.0 - a) * (1.0 - a - t) - p * a * a * (a + t);
    find_root(residual, 0.0, 1.0 - t, 1e-15)
}

/// `3 G1(t,p) = ln(1/(q p^2)) - max_a {2h(a) + h(a+t) + (a+t) ln z}` for
/// `t <= 1/2 - p`, and the plateau `(4/3) E(p)` beyond.
pub fn exponent_g1(t: f64, p: f64) -> Result<f64> {
    check_forward(p)?;
    if t.is_nan() || t < 0.0 {
        return Err(domain(format!("threshold t = {t} must be >= 0")));
    }
    g1_raw(t, p)
}

fn g1_raw(t: f64, p: f64) -> Result<f64> {
    if t >= 0.5 - p {
        return Ok(4.0 * e_raw(p) / 3.0);
    }
    let q = 1.0 - p;
    let a = a0_raw(t, p)?;
    let inner = 2.0 * h(a) + h(a + t) + (a + t) * (q / p).ln();
    Ok((-q.ln() - 2.0 * p.ln() - inner) / 3.0)
}

/// Closed-form maximizer `c0(t,p)` of `h(c) + h(c+t) - (2c+t) ln z`.
pub fn c0_of(t: f64, p: f64) -> Result<f64> {
    check_forward(p)?;
    if !(0.0..1.0).contains(&t) {
        return Err(domain(format!("threshold t = {t} outside [0, 1)")));
    }
    Ok(c0_raw(t, p))
}

fn c0_raw(t: f64, p: f64) -> f64 {
    let z = (1.0 - p) / p;
    let z2m1 = z * z - 1.0;
    2.0 * (1.0 - t) / (2.0 + t * z2m1 + (4.0 * z * z + t * t * z2m1 * z2m1).sqrt())
}

/// Closed-form feedback-side optimizer `b1(t,p1)`; requires `p1 > 0`.
pub fn b1_of(t: f64, p1: f64) -> Result<f64> {
    if !(p1 > 0.0 && p1 <= 0.5) {
        return Err(domain(format!(
            "b1 needs a noisy feedback link, got p1 = {p1}"
        )));
    }
    if !(0.0..1.0).contains(&t) {
        return Err(domain(format!("threshold t = {t} outside [0, 1)")));
    }
    Ok(b1_raw(t, p1))
}

// Written in w = 1/z1 = p1/q1 so that tiny p1 does not overflow z1^2.
fn b1_raw(t: f64, p1: f64) -> f64 {
    let w = p1 / (1.0 - p1);
    let w2 = w * w;
    let s = (4.0 * w2 + (1.0 - w2) * (1.0 - w2) * t * t).sqrt();
    2.0 / ((2.0 + t) - t * w2 + s)
}

/// `2 + t - 2(1+t) b1`, in the cancellation-free form.
fn feedback_distance_coeff(t: f64, p1: f64) -> f64 {
    let w = p1 / (1.0 - p1);
    let w2 = w * w;
    let s = (4.0 * w2 + (1.0 - w2) * (1.0 - w2) * t * t).sqrt();
    (4.0 * w2 + (1.0 - w2) * t * t) / (2.0 * w2 + s)
}

/// Pair-mismatch exponent `G2(t, p, p1)`: `0` at `t = 0`, `+inf` for
/// noiseless feedback and `t > 0`.
pub fn exponent_g2(t: f64, p: f64, p1: f64) -> Result<f64> {
    check_forward(p)?;
    check_threshold(t, p)?;
    if !(0.0..=0.5).contains(&p1) {
        return Err(domain(format!(
            "feedback crossover p1 = {p1} outside [0, 1/2]"
        )));
    }
    Ok(g2_raw(t, p, p1))
}

fn g2_raw(t: f64, p: f64, p1: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if p1 == 0.0 {
        return f64::INFINITY;
    }
    let q = 1.0 - p;
    let q1 = 1.0 - p1;
    let c = c0_raw(t, p);
    let forward = (2.0 * c + t) * (q / p).ln() - h(c + t) - h(c) - 2.0 * q.ln();
    let b = b1_raw(t, p1);
    let b2c = (((1.0 + t) * b - t) / (1.0 - t)).clamp(0.0, 1.0);
    let feedback = feedback_distance_coeff(t, p1) * (q1.ln() - p1.ln())
        - (1.0 + t) * h(b)
        - (1.0 - t) * h(b2c)
        - 2.0 * q1.ln();
    (forward + feedback) / 3.0
}

/// Feedback threshold `p0(p)`: the `p1` solving `3 G2(1/2-p, p, p1) = ln(1/(4pq))`.
pub fn threshold_p0(p: f64) -> Result<f64> {
    check_forward(p)?;
    let top = 0.5 - p;
    let target = 4.0 * e_raw(p);
    // searched in ln p1: p0 spans many decades as p -> 0
    let residual = |u: f64| 3.0 * g2_raw(top, p, u.exp()) - target;
    let hi = 0.5f64.ln();
    if residual(hi) >= 0.0 {
        return Err(crate::Error::Numerical(format!(
            "no threshold p0 below 1/2 for p = {p}"
        )));
    }
    let floor = 1e-300f64.ln();
    let mut lo = p.ln() - 2.0;
    while residual(lo) <= 0.0 {
        lo -= 10.0;
        if lo < floor {
            return Err(crate::Error::Numerical(format!(
                "could not bracket p0 from below for p = {p}"
            )));
        }
    }
    let u = find_root(residual, lo, hi, 1e-14)?;
    Ok(u.exp())
}

/// `6 m E / (3 m + 4 E)` maximized over `t` in `[0, 1/2 - p]`, where
/// `m = min{G1, G2}`.
pub fn exponent_f1(params: &ChannelParams) -> Result<ExponentReport> {
    let p = params.p();
    let e = e_raw(p);
    let f = f_raw(p);
    let p0 = threshold_p0(p)?;
    let combine = |m: f64| 6.0 * m * e / (3.0 * m + 4.0 * e);
    let gamma_of = |m: f64| 8.0 * e / (3.0 * m + 4.0 * e);

    let (t_star, g1, g2) = match params.feedback() {
        // sup over t > 0 of G1, approached as t -> 0+
        Feedback::Noiseless => (0.0, f, f64::INFINITY),
        Feedback::Noisy(p1) => {
            let top = 0.5 - p;
            let inner = |t: f64| -> f64 {
                let g1 = g1_raw(t, p).unwrap_or(f64::NAN);
                g1.min(g2_raw(t, p, p1))
            };
            let grid: Vec<f64> = (0..GRID_POINTS)
                .map(|i| top * i as f64 / (GRID_POINTS - 1) as f64)
                .collect();
            let best = grid
                .iter()
                .enumerate()
                .map(|(i, &t)| (i, inner(t)))
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, x| if x.1 > acc.1 { x } else { acc },
                )
                .0;
            let lo = grid[best.saturating_sub(1)];
            let hi = grid[(best + 1).min(GRID_POINTS - 1)];
            let (t, _) = golden_section_max(inner, lo, hi, ROOT_XTOL * 1e-2);
            (t, g1_raw(t, p)?, g2_raw(t, p, p1))
        }
    };
    let m = g1.min(g2);
    Ok(ExponentReport {
        p,
        p1: params.p1(),
        e,
        e2: 2.0 * e,
        f,
        f1: combine(m),
        t_star,
        gamma_star: gamma_of(m),
        p0,
        g1_at_t_star: g1,
        g2_at_t_star: g2,
    })
}

/// Exponent `E / (1/2 + 2E/(3F) + E/E(p1))` of the active-feedback scheme
/// with the balancing `gamma`, `gamma1`.
pub fn exponent_active(p: f64, p1: f64) -> Result<ActiveExponent> {
    check_forward(p)?;
    if !(p1 > 0.0 && p1 < 0.5) {
        return Err(domain(format!(
            "active feedback needs 0 < p1 < 1/2, got {p1}"
        )));
    }
    let e = e_raw(p);
    let f = f_raw(p);
    let e1 = e_raw(p1);
    let exponent = e / (0.5 + 2.0 * e / (3.0 * f) + e / e1);
    let gamma = 8.0 * e / (3.0 * f + 4.0 * e + 6.0 * f * e / e1);
    let gamma1 = 3.0 * gamma * f / (4.0 * e1);
    Ok(ActiveExponent {
        exponent,
        gamma,
        gamma1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values below were computed independently with 40-digit
    // arithmetic (mpmath) from the defining formulas.

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn channel_params_validation() {
        assert!(ChannelParams::new(0.1, 0.05).is_ok());
        let c = ChannelParams::new(0.1, 0.0).unwrap();
        assert_eq!(c.feedback(), Feedback::Noiseless);
        assert_eq!(c.z1(), None);
        assert!(close(c.z(), 9.0, 1e-12));
        assert!(ChannelParams::new(0.0, 0.1).is_err());
        assert!(ChannelParams::new(0.5, 0.1).is_err());
        assert!(ChannelParams::new(0.1, 0.6).is_err());
        assert!(ChannelParams::new(0.1, -0.1).is_err());
        let c = ChannelParams::new(0.1, 0.5).unwrap();
        assert!(close(c.z1().unwrap(), 1.0, 0.0));
    }

    #[test]
    fn basic_exponents() {
        assert!(close(
            exponent_e(0.1).unwrap(),
            0.255_412_811_882_995_3,
            1e-12
        ));
        assert!(close(
            exponent_e(0.25).unwrap(),
            0.071_920_518_112_945_23,
            1e-12
        ));
        assert!(close(
            exponent_e2(0.1).unwrap(),
            0.510_825_623_765_990_7,
            1e-12
        ));
        assert!(close(
            exponent_e2(0.25).unwrap(),
            0.143_841_036_225_890_5,
            1e-12
        ));
        assert!(close(
            exponent_f(0.1).unwrap(),
            0.445_220_088_656_892_8,
            1e-12
        ));
        for p in [0.0, 0.5, -0.1, 0.7] {
            assert!(exponent_e(p).is_err());
            assert!(exponent_e2(p).is_err());
            assert!(exponent_f(p).is_err());
        }
        let eps: f64 = 0.01;
        let e = exponent_e((1.0 - eps) / 2.0).unwrap();
        assert!((e - eps * eps / 4.0).abs() < eps.powi(4));
    }

    #[test]
    fn a0_root_values() {
        let a = a0_root(0.0, 0.1).unwrap();
        assert!(close(a, 0.675_333_511_212_967_9, 1e-12));
        for p in [0.01, 0.1, 0.3, 0.45] {
            let q = 1.0 - p;
            for t in [0.0, 0.1 * (0.5 - p), 0.5 - p] {
                let a = a0_root(t, p).unwrap();
                let r = q * (1.0 - a).powi(2) * (1.0 - a - t) - p * a * a * (a + t);
                assert!(r.abs() < 1e-12, "p={p} t={t} residual {r}");
            }
        }
        // slope -1/3 near t = 0
        let (a0, t) = (a0_root(0.0, 0.1).unwrap(), 1e-4);
        let a = a0_root(t, 0.1).unwrap();
        assert!(((a - a0) / t + 1.0 / 3.0).abs() < 1e-2);
        assert!(a0_root(0.41, 0.1).is_err());
        assert!(a0_root(-0.01, 0.1).is_err());
    }

    #[test]
    fn g1_endpoints() {
        for p in [0.01, 0.1, 0.25, 0.4] {
            let f = exponent_f(p).unwrap();
            assert!(close(exponent_g1(0.0, p).unwrap(), f, 1e-9));
            let plateau = 4.0 * exponent_e(p).unwrap() / 3.0;
            assert!(close(exponent_g1(0.5 - p, p).unwrap(), plateau, 0.0));
            assert!(close(exponent_g1(0.9, p).unwrap(), plateau, 0.0));
            // continuity at the junction
            let below = exponent_g1((0.5 - p) * (1.0 - 1e-9), p).unwrap();
            assert!(close(below, plateau, 1e-7), "p={p}: {below} vs {plateau}");
        }
        assert!(exponent_g1(-0.1, 0.1).is_err());
    }

    #[test]
    fn c0_b1_closed_forms() {
        assert!(close(
            c0_of(0.1, 0.1).unwrap(),
            0.060_610_722_522_451_31,
            1e-12
        ));
        assert!(close(
            b1_of(0.1, 0.05).unwrap(),
            0.890_978_523_594_432_3,
            1e-12
        ));
        for p in [0.01, 0.1, 0.3] {
            assert!(close(c0_of(0.0, p).unwrap(), p, 1e-12));
            assert!(close(b1_of(0.0, p).unwrap(), 1.0 - p, 1e-12));
        }
        assert!(b1_of(0.1, 0.0).is_err());
        assert!(c0_of(-0.1, 0.1).is_err());
    }

    #[test]
    fn g2_special_cases() {
        assert_eq!(exponent_g2(0.0, 0.1, 0.05).unwrap(), 0.0);
        assert_eq!(exponent_g2(0.1, 0.1, 0.0).unwrap(), f64::INFINITY);
        assert!(exponent_g2(0.1, 0.1, 0.05).unwrap() > 0.0);
        assert!(exponent_g2(0.45, 0.1, 0.05).is_err());
        assert!(exponent_g2(0.1, 0.1, 0.51).is_err());
        // feedback that carries no information leaves only the forward part
        let g = exponent_g2(0.2, 0.1, 0.5).unwrap();
        assert!(g.is_finite() && g > 0.0);
    }

    #[test]
    fn noiseless_feedback_closed_form_and_gamma() {
        let r = exponent_f1(&ChannelParams::noiseless(0.1).unwrap()).unwrap();
        assert!(close(r.f1, 0.289_435_437_190_109_4, 1e-12));
        assert!(close(r.gamma_star, 0.866_793_583_860_234, 1e-12));
        assert_eq!(r.t_star, 0.0);
        assert_eq!(r.g2_at_t_star, f64::INFINITY);
    }

    #[test]
    fn threshold_values() {
        let p0 = threshold_p0(0.1).unwrap();
        assert!(close(p0, 0.029_130_824_179_380_22, 1e-10));
        let p0 = threshold_p0(0.01).unwrap();
        assert!(close(p0, 0.005_101_878_492_785, 1e-11));
        assert!(threshold_p0(0.5).is_err());
    }

    #[test]
    fn active_scheme() {
        let a = exponent_active(0.1, 0.01).unwrap();
        assert!(close(a.exponent, 0.213_046_821_475_345_2, 1e-12));
        assert!(a.gamma + a.gamma1 < 1.0);
        assert!(exponent_active(0.1, 0.0).is_err());
        assert!(exponent_active(0.1, 0.5).is_err());
    }
}
