//! Parallel Monte Carlo estimation of error rates, split by error category.
//!
//! Trial `i` uses only streams derived from `(seed, i)`, and per-thread
//! tallies are integer counts, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::schemes::{ErrorCategory, Scheme, SchemeParams, SchemeSetup};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Error counts below which a rate is too noisy to read a slope from.
pub const RELIABLE_ERRORS: u64 = 20;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CategoryCounts {
    pub p1: u64,
    pub p2: u64,
    pub p2n: u64,
    pub p3: u64,
}

impl CategoryCounts {
    pub fn record(&mut self, category: ErrorCategory) {
        match category {
            ErrorCategory::None => {}
            ErrorCategory::P1 => self.p1 += 1,
            ErrorCategory::P2 => self.p2 += 1,
            ErrorCategory::P2n => self.p2n += 1,
            ErrorCategory::P3 => self.p3 += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.p1 + self.p2 + self.p2n + self.p3
    }

    fn merge(self, other: Self) -> Self {
        Self {
            p1: self.p1 + other.p1,
            p2: self.p2 + other.p2,
            p2n: self.p2n + other.p2n,
            p3: self.p3 + other.p3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Interval {
    if trials == 0 {
        return Interval {
            estimate: f64::NAN,
            low: 0.0,
            high: 1.0,
        };
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    // the bounds are exact at the extremes; the formula only cancels to them
    Interval {
        estimate: phat,
        low: if successes == 0 {
            0.0
        } else {
            (center - half).max(0.0)
        },
        high: if successes == trials {
            1.0
        } else {
            (center + half).min(1.0)
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryIntervals {
    pub p1: Interval,
    pub p2: Interval,
    pub p2n: Interval,
    pub p3: Interval,
    pub total: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub scheme: Scheme,
    pub params: SchemeParams,
    pub seed: u64,
    pub trials: u64,
    pub errors_by_category: CategoryCounts,
    pub total_errors: u64,
    pub wilson_intervals: CategoryIntervals,
}

impl SimulationSummary {
    fn new(setup: &SchemeSetup, seed: u64, trials: u64, counts: CategoryCounts) -> Self {
        let ci = |k| wilson_interval(k, trials, Z95);
        Self {
            scheme: setup.scheme(),
            params: *setup.params(),
            seed,
            trials,
            errors_by_category: counts,
            total_errors: counts.total(),
            wilson_intervals: CategoryIntervals {
                p1: ci(counts.p1),
                p2: ci(counts.p2),
                p2n: ci(counts.p2n),
                p3: ci(counts.p3),
                total: ci(counts.total()),
            },
        }
    }

    pub fn error_rate(&self) -> f64 {
        self.total_errors as f64 / self.trials as f64
    }
}

/// Runs `trials` independent trials of an already built scheme.
pub fn estimate_with_setup(
    setup: &SchemeSetup,
    trials: u64,
    seed: u64,
) -> Result<SimulationSummary> {
    if trials == 0 {
        return Err(domain("number of trials must be positive"));
    }
    let counts = (0..trials)
        .into_par_iter()
        .fold(CategoryCounts::default, |mut acc, i| {
            acc.record(setup.run_trial(seed, i).error_category);
            acc
        })
        .reduce(CategoryCounts::default, CategoryCounts::merge);
    Ok(SimulationSummary::new(setup, seed, trials, counts))
}

/// Builds the codebooks from `params.seed` and runs `trials` trials whose
/// noise and true messages derive from `seed`.
pub fn estimate(
    scheme: Scheme,
    params: &SchemeParams,
    trials: u64,
    seed: u64,
) -> Result<SimulationSummary> {
    let setup = SchemeSetup::new(scheme, *params)?;
    estimate_with_setup(&setup, trials, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopePoint {
    pub n: usize,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    /// `-ln(rate)/n`; absent without errors.
    pub slope: Option<f64>,
    /// Slope range implied by the Wilson interval of the rate.
    pub slope_low: f64,
    pub slope_high: f64,
    pub reliable: bool,
}

/// Empirical `-ln(P_e)/n` along a ladder of blocklengths. All other
/// parameters are taken from `base`; phase fractions scale with `n`.
pub fn slope_ladder(
    scheme: Scheme,
    base: &SchemeParams,
    ladder: &[usize],
    trials: u64,
    seed: u64,
) -> Result<Vec<SlopePoint>> {
    ladder
        .iter()
        .map(|&n| {
            let params = SchemeParams { n, ..*base };
            let s = estimate(scheme, &params, trials, seed)?;
            let ci = s.wilson_intervals.total;
            let nf = n as f64;
            let rate = s.error_rate();
            Ok(SlopePoint {
                n,
                trials,
                errors: s.total_errors,
                error_rate: rate,
                slope: (s.total_errors > 0).then(|| -rate.ln() / nf),
                slope_low: -ci.high.ln() / nf,
                slope_high: -ci.low.ln() / nf,
                reliable: s.total_errors >= RELIABLE_ERRORS,
            })
        })
        .collect()
}
