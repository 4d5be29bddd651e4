//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use bsc_feedback::channel::{transmit, Leg, NoiseStream, StreamId};
use bsc_feedback::codes::make_simplex3;
use bsc_feedback::exponents::{
    b1_of, c0_of, exponent_e, exponent_e2, exponent_f, exponent_f1, exponent_g1, exponent_g2,
    threshold_p0, ChannelParams,
};
use bsc_feedback::montecarlo::estimate;
use bsc_feedback::numeric::{binomial_log_pmf, log_add_exp, LogFactorials};
use bsc_feedback::oracle::{
    event_a1_probability, lemma_exponent, lemma_point_probability, lemma_point_probability_lattice,
    lemma_tail_probability,
};
use bsc_feedback::schemes::{CodeKind, Scheme, SchemeParams, SchemeSetup};
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn formula_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.01, 0.1, 0.25, 0.4] {
        let (e, f) = (exponent_e(p).unwrap(), exponent_f(p).unwrap());
        worst = worst.max((exponent_g1(0.0, p).unwrap() - f).abs());
        worst = worst.max((c0_of(0.0, p).unwrap() - p).abs());
        worst = worst.max((exponent_e2(p).unwrap() - 2.0 * e).abs());
        let f1 = exponent_f1(&ChannelParams::noiseless(p).unwrap())
            .unwrap()
            .f1;
        worst = worst.max((f1 - 6.0 * e * f / (4.0 * e + 3.0 * f)).abs());
        for p1 in [1e-6, 0.01, 0.1, 0.3, 0.5] {
            worst = worst.max(exponent_g2(0.0, p, p1).unwrap().abs());
            worst = worst.max((b1_of(0.0, p1).unwrap() - (1.0 - p1)).abs());
        }
    }
    outcome(
        worst <= 1e-9,
        format!("max deviation {worst:.3e} (tol 1e-9)"),
    )
}

fn quoted_values() -> Outcome {
    let r = exponent_f(0.01).unwrap() / exponent_e(0.01).unwrap();
    let limit = 1.0 / (4.0 * (2.0 + 3f64.sqrt()));
    let p0_half = threshold_p0(0.4999).unwrap();
    let p0_small = threshold_p0(1e-4).unwrap() / 1e-4;
    let r87 = {
        let rep = exponent_f1(&ChannelParams::noiseless(0.4999).unwrap()).unwrap();
        rep.f1 / rep.e
    };
    let checks = [
        (r - 1.67).abs() <= 0.01,
        rel(p0_half, limit) <= 0.02,
        rel(p0_small, 16.0 / 27.0) <= 0.05,
        rel(r87, 8.0 / 7.0) <= 0.01,
    ];
    outcome(
        checks.iter().all(|&c| c),
        format!(
            "r(0.01)={r:.5}; p0(0.4999)={p0_half:.6} vs {limit:.6}; p0(1e-4)/p={p0_small:.4} vs {:.4}; F1/E(0.4999)={r87:.5} vs {:.5}",
            16.0 / 27.0,
            8.0 / 7.0
        ),
    )
}

fn small_noise_regime() -> Outcome {
    let p = 0.4999;
    let eps: f64 = 1.0 - 2.0 * p;
    let (mut w1, mut w2): (f64, f64) = (0.0, 0.0);
    for frac in [0.0, 0.125, 0.25, 0.375, 0.5] {
        let t = frac * eps;
        let approx = 4.0 * (eps * eps - eps * t + t * t) / 9.0;
        w1 = w1.max(rel(exponent_g1(t, p).unwrap(), approx));
        if t > 0.0 {
            for p1 in [1e-3, 0.01, 0.1, 0.3] {
                let approx2 = t * t / (12.0 * p1 * (1.0 - p1));
                w2 = w2.max(rel(exponent_g2(t, p, p1).unwrap(), approx2));
            }
        }
    }
    outcome(
        w1 <= 0.05 && w2 <= 0.05,
        format!("max relative error G1 {w1:.2e}, G2 {w2:.2e} (tol 5%)"),
    )
}

fn lemma_convergence() -> Outcome {
    let p = 0.1;
    let mut ok = true;
    let mut parts = Vec::new();
    for (t, t1) in [(0.0, 0.0), (0.0, 0.2), (0.1, 0.3)] {
        let target = lemma_exponent(t, t1, p).unwrap();
        let gaps: Vec<f64> = [300, 900, 2700]
            .iter()
            .map(|&m| {
                (lemma_point_probability(m, t, t1, p)
                    .unwrap()
                    .normalized_exponent
                    - target)
                    .abs()
            })
            .collect();
        ok &= strictly_decreasing(&gaps) && gaps[2] < 0.02;
        parts.push(format!(
            "({t},{t1}): {:.4}/{:.4}/{:.4}",
            gaps[0], gaps[1], gaps[2]
        ));
    }
    outcome(ok, format!("gaps at m=300/900/2700 {}", parts.join("; ")))
}

fn event_a1_convergence() -> Outcome {
    let (t, p, p1) = (0.2, 0.1, 0.05);
    let g2 = exponent_g2(t, p, p1).unwrap();
    let probs: Vec<_> = [150, 300, 600]
        .iter()
        .map(|&m| event_a1_probability(m, t, p, p1).unwrap())
        .collect();
    // ln P(A1) = -G2 m + o(m): the comparison is per symbol
    let gaps: Vec<f64> = probs
        .iter()
        .map(|r| (r.normalized_exponent - g2).abs())
        .collect();
    let per_part: Vec<f64> = probs.iter().map(|r| 3.0 * r.normalized_exponent).collect();
    outcome(
        strictly_decreasing(&gaps),
        format!(
            "|-(1/m)lnP - G2| at m=150/300/600: {:.5}/{:.5}/{:.5}, G2={g2:.6}; -(3/m)lnP={:.4}/{:.4}/{:.4} tracks 3G2={:.4}",
            gaps[0], gaps[1], gaps[2], per_part[0], per_part[1], per_part[2], 3.0 * g2
        ),
    )
}

fn within_3_sigma(hits: u64, trials: u64, exact: f64) -> (bool, f64) {
    let n = trials as f64;
    let sigma = (exact * (1.0 - exact) / n).sqrt();
    let z = (hits as f64 / n - exact) / sigma;
    (z.abs() <= 3.0, z)
}

fn oracle_vs_simulation() -> Outcome {
    const TRIALS: u64 = 1_000_000;
    let (m, p) = (30, 0.1);
    let code = make_simplex3(m).unwrap();
    let words = code.words();
    let sent = words[0].clone();
    // tail event {d2 <= d1, d3 <= d1 + 4} through the simulated forward channel
    let tail_hits = |p: f64| -> u64 {
        (0..TRIALS)
            .into_par_iter()
            .map(|i| {
                let mut s = NoiseStream::new(
                    2024,
                    StreamId {
                        trial: i,
                        leg: Leg::Forward,
                    },
                );
                let y = transmit(&sent, p, &mut s);
                let d: Vec<usize> = words.iter().map(|w| w.distance(&y)).collect();
                (d[1] <= d[0] && d[2] <= d[0] + 4) as u64
            })
            .sum()
    };
    let mut ok = true;
    let mut notes = Vec::new();
    for tp in [p, 0.3] {
        let hits = tail_hits(tp);
        let exact = lemma_tail_probability(m, 0.0, 0.2, tp)
            .unwrap()
            .probability();
        let (good, z) = within_3_sigma(hits, TRIALS, exact);
        ok &= good;
        notes.push(format!(
            "tail p={tp}: {hits} hits vs {:.1} expected (z={z:+.2})",
            exact * TRIALS as f64
        ));
    }

    // pair-mismatch event on noisy-switch transcripts, simplex triple padded to phase I
    let (t, p1) = (0.2, 0.05);
    let l1 = 4 * m / 3;
    let mut sp = SchemeParams::new(48, 3, p);
    sp.p1 = p1;
    sp.t = t;
    sp.gamma = l1 as f64 / 48.0;
    let setup =
        SchemeSetup::with_codebook(Scheme::NoisySwitch, sp, code.pad_common(l1 - m)).unwrap();
    let padded = setup.codebook().words();
    let thr = sp.threshold();
    let a1_hits: u64 = (0..TRIALS)
        .into_par_iter()
        .map(|i| {
            let tr = setup.run_trial_with_message(2025, i, 0);
            let y = &tr.phase1_received;
            let x = tr.phase1_feedback_seen.as_ref().unwrap();
            (padded[2].distance(y) >= padded[1].distance(y) + thr
                && padded[2].distance(x) <= padded[1].distance(x)) as u64
        })
        .sum();
    let a1 = event_a1_probability(m, t, p, p1).unwrap().probability();

    let (good, z) = within_3_sigma(a1_hits, TRIALS, a1);
    notes.push(format!(
        "A1: {a1_hits} hits vs {:.1} expected (z={z:+.2})",
        a1 * TRIALS as f64
    ));
    outcome(ok && good, notes.join("; "))
}

/// Two-word error at total distance `d`: `P(Bin > d/2) + P(Bin = d/2)/2`.
fn exact_two_word(d: usize, p: f64) -> f64 {
    let pmf = binomial_log_pmf(d, p, &LogFactorials::new(d));
    let mut acc = f64::NEG_INFINITY;
    for (k, &l) in pmf.iter().enumerate() {
        if 2 * k > d {
            acc = log_add_exp(acc, l);
        } else if 2 * k == d {
            acc = log_add_exp(acc, l - 2f64.ln());
        }
    }
    acc.exp()
}

fn simulation_mechanics() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (n, p, trials) in [(400, 0.1, 1_000_000), (40, 0.3, 1_000_000)] {
        let mut sp = SchemeParams::new(n, 2, p);
        sp.code = CodeKind::Complementary;
        let s = estimate(Scheme::Baseline, &sp, trials, 7).unwrap();
        let exact = exact_two_word(n, p);
        let ci = s.wilson_intervals.total;
        ok &= ci.low <= exact && exact <= ci.high;
        notes.push(format!(
            "n={n},p={p}: {} errors, exact {exact:.3e} in [{:.3e}, {:.3e}]",
            s.total_errors, ci.low, ci.high
        ));
    }

    let mut zero = SchemeParams::new(60, 4, 0.0);
    zero.gamma1 = 0.2;
    zero.slack_fraction = 0.2;
    let zero_errors: u64 = Scheme::ALL
        .iter()
        .map(|&s| estimate(s, &zero, 100_000, 8).unwrap().total_errors)
        .sum();
    ok &= zero_errors == 0;
    notes.push(format!("p=0 errors {zero_errors}"));

    let mut sp = SchemeParams::new(48, 4, 0.2);
    sp.p1 = 0.1;
    sp.t = 0.2;
    sp.gamma = 0.5;
    sp.gamma1 = 0.2;
    sp.slack_fraction = 0.2;
    let mut identical = true;
    for scheme in Scheme::ALL {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate(scheme, &sp, 200_000, 9).unwrap())
        };
        let (a, b) = (run(1), run(4));
        identical &= serde_json::to_string(&a).unwrap() == serde_json::to_string(&b).unwrap();
    }
    ok &= identical;
    notes.push(format!("1 vs 4 threads identical: {identical}"));
    outcome(ok, notes.join("; "))
}

fn feedback_gain_properties() -> Outcome {
    let mut ok = true;
    let mut worst_margin = f64::INFINITY;
    let mut worst_cross: f64 = 0.0;
    for p in [0.05, 0.1, 0.2, 0.3] {
        let p0 = threshold_p0(p).unwrap();
        for frac in [0.1, 0.5, 0.9] {
            let r = exponent_f1(&ChannelParams::new(p, frac * p0).unwrap()).unwrap();
            worst_margin = worst_margin.min(r.f1 - r.e);
            ok &= r.f1 > r.e;
            let endpoint = r.t_star <= 1e-9 || r.t_star >= 0.5 - p - 1e-9;
            if !endpoint {
                worst_cross = worst_cross.max((r.g1_at_t_star - r.g2_at_t_star).abs());
            }
        }
    }
    ok &= worst_cross <= 1e-6;
    outcome(
        ok,
        format!("min F1-E {worst_margin:.4e}; max |G1-G2| at t* {worst_cross:.2e} (tol 1e-6)"),
    )
}

fn oracle_invariants() -> Outcome {
    let mut worst_sum: f64 = 0.0;
    let mut symmetric = true;
    for m in [6, 9, 12, 18] {
        let k = (m / 3) as i64;
        let mut total = 0.0;
        for u in -k..=k {
            for v in -k..=k {
                let a = lemma_point_probability_lattice(m, u, v, 0.1).unwrap();
                let b = lemma_point_probability_lattice(m, v, u, 0.1).unwrap();
                symmetric &= a.log_p.to_bits() == b.log_p.to_bits();
                total += a.probability();
            }
        }
        worst_sum = worst_sum.max((total - 1.0).abs());
    }
    outcome(
        worst_sum <= 1e-9 && symmetric,
        format!("max |sum - 1| {worst_sum:.2e} (tol 1e-9); exchange symmetry exact: {symmetric}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("formula identities", formula_identities),
        ("quoted values", quoted_values),
        ("small-noise regime", small_noise_regime),
        ("lemma oracle convergence", lemma_convergence),
        ("pair-mismatch oracle convergence", event_a1_convergence),
        ("oracle vs simulation", oracle_vs_simulation),
        ("simulation mechanics", simulation_mechanics),
        ("feedback gain", feedback_gain_properties),
        ("oracle completeness and symmetry", oracle_invariants),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {} {}: {} [{:.2}s] {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
