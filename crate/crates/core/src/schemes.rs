//! Executable versions of the four transmission schemes: the no-feedback
//! baseline, the one-switch scheme over noiseless and over noisy passive
//! feedback, and the three-phase active-feedback scheme.
//!
//! Conventions shared by every scheme:
//! - rankings sort by Hamming distance, ties toward the lower index;
//! - a candidate pair is stored as `(lower, higher)` index and the lower
//!   member is assigned the all-zeros disambiguation word, the higher the
//!   all-ones word;
//! - the final two-way decision minimizes total Hamming distance, ties
//!   toward the lower index;
//! - the early-decision threshold is `⌊t · L1 / 2⌋` with `L1 = ⌊γ n⌋`.

use serde::{Deserialize, Serialize};

use crate::channel::{derive_seed, passive_feedback, transmit, Leg, NoiseStream, StreamId};
use crate::codes::{make_almost_simplex, make_simplex3, Codebook, DEFAULT_SLACK_FRACTION};
use crate::error::{domain, Result};
use crate::word::Word;

const CODEBOOK_LABEL: u64 = 0xC0DE_B00C;
const FEEDBACK_CODEBOOK_LABEL: u64 = 0xFEED_B00C;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Baseline,
    NoiselessSwitch,
    NoisySwitch,
    Active,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Baseline,
        Scheme::NoiselessSwitch,
        Scheme::NoisySwitch,
        Scheme::Active,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::NoiselessSwitch => "noiseless-switch",
            Scheme::NoisySwitch => "noisy-switch",
            Scheme::Active => "active",
        }
    }
}

/// Phase-I code family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    /// Random words with verified pairwise distances near `L/2`.
    AlmostSimplex,
    /// The exact simplex triple on `3L/4` positions plus `L/4` common
    /// positions (`M = 3`, `L` divisible by 4).
    Simplex3,
    /// All-zeros and all-ones (`M = 2`).
    Complementary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeParams {
    /// Total blocklength.
    pub n: usize,
    pub messages: usize,
    /// Forward crossover, `[0, 1/2]`.
    pub p: f64,
    /// Feedback crossover, `[0, 1/2]`.
    pub p1: f64,
    /// Phase-I fraction.
    pub gamma: f64,
    /// Early-decision threshold fraction.
    pub t: f64,
    /// Feedback report fraction (active scheme only).
    pub gamma1: f64,
    pub slack_fraction: f64,
    /// Seed of the codebooks; trial noise is seeded separately.
    pub seed: u64,
    pub code: CodeKind,
}

impl SchemeParams {
    pub fn new(n: usize, messages: usize, p: f64) -> Self {
        Self {
            n,
            messages,
            p,
            p1: 0.0,
            gamma: 0.5,
            t: 0.0,
            gamma1: 0.0,
            slack_fraction: DEFAULT_SLACK_FRACTION,
            seed: 0,
            code: CodeKind::AlmostSimplex,
        }
    }

    /// `L1 = ⌊γ n⌋`.
    pub fn phase1_len(&self) -> usize {
        (self.gamma * self.n as f64 + 1e-9).floor() as usize
    }

    /// `L2 = ⌊γ1 n⌋`, the feedback report length of the active scheme.
    pub fn report_len(&self) -> usize {
        (self.gamma1 * self.n as f64 + 1e-9).floor() as usize
    }

    /// `⌊t · L1 / 2⌋`.
    pub fn threshold(&self) -> usize {
        (self.t * self.phase1_len() as f64 / 2.0 + 1e-9).floor() as usize
    }

    pub fn validate(&self, scheme: Scheme) -> Result<()> {
        if self.n == 0 {
            return Err(domain("blocklength n must be positive"));
        }
        if self.messages < 2 {
            return Err(domain(format!(
                "need at least 2 messages, got {}",
                self.messages
            )));
        }
        if !(0.0..=0.5).contains(&self.p) {
            return Err(domain(format!("p = {} outside [0, 1/2]", self.p)));
        }
        if !(0.0..=0.5).contains(&self.p1) {
            return Err(domain(format!("p1 = {} outside [0, 1/2]", self.p1)));
        }
        if self.t.is_nan() || self.t < 0.0 {
            return Err(domain(format!("threshold t = {} must be >= 0", self.t)));
        }
        if scheme == Scheme::Baseline {
            return Ok(());
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(domain(format!("gamma = {} outside (0, 1)", self.gamma)));
        }
        let l1 = self.phase1_len();
        let mut rest = self.n.saturating_sub(l1);
        if scheme == Scheme::Active {
            if !(self.gamma1 > 0.0 && self.gamma + self.gamma1 < 1.0) {
                return Err(domain(format!(
                    "active scheme needs gamma1 > 0 and gamma + gamma1 < 1, got {} + {}",
                    self.gamma, self.gamma1
                )));
            }
            if self.report_len() == 0 {
                return Err(domain("feedback report phase is empty"));
            }
            rest = rest.saturating_sub(self.report_len());
        }
        if l1 == 0 || rest == 0 {
            return Err(domain(format!(
                "n = {} too short for the requested phase split",
                self.n
            )));
        }
        Ok(())
    }

    fn code_len(&self, scheme: Scheme) -> usize {
        match scheme {
            Scheme::Baseline => self.n,
            _ => self.phase1_len(),
        }
    }
}

/// Builds the message codebook for `scheme` from `params.code`.
pub fn build_codebook(scheme: Scheme, params: &SchemeParams) -> Result<Codebook> {
    let len = params.code_len(scheme);
    match params.code {
        CodeKind::AlmostSimplex => make_almost_simplex(
            params.messages,
            len,
            params.slack_fraction,
            derive_seed(params.seed, CODEBOOK_LABEL),
        ),
        CodeKind::Simplex3 => {
            if params.messages != 3 || !len.is_multiple_of(4) {
                return Err(domain(format!(
                    "simplex triple needs M = 3 and a length divisible by 4, got M = {}, L = {len}",
                    params.messages
                )));
            }
            Ok(make_simplex3(3 * len / 4)?.pad_common(len / 4))
        }
        CodeKind::Complementary => {
            if params.messages != 2 {
                return Err(domain("complementary code carries exactly 2 messages"));
            }
            Codebook::complementary_pair(len)
        }
    }
}

/// Codebook for the receiver's pair report: one word per unordered pair.
pub fn build_report_codebook(params: &SchemeParams) -> Result<Codebook> {
    let pairs = pair_count(params.messages);
    let len = params.report_len();
    if pairs == 1 {
        return Codebook::from_words(vec![Word::zeros(len)]);
    }
    make_almost_simplex(
        pairs,
        len,
        params.slack_fraction,
        derive_seed(params.seed, FEEDBACK_CODEBOOK_LABEL),
    )
}

pub fn pair_count(messages: usize) -> usize {
    messages * (messages - 1) / 2
}

/// Lexicographic index of the unordered pair `(i, j)`, `i < j`.
pub fn pair_index(pair: (usize, usize), messages: usize) -> usize {
    let (i, j) = pair;
    debug_assert!(i < j && j < messages);
    i * (2 * messages - i - 1) / 2 + (j - i - 1)
}

pub fn pair_from_index(index: usize, messages: usize) -> (usize, usize) {
    let mut rem = index;
    for i in 0..messages {
        let row = messages - i - 1;
        if rem < row {
            return (i, i + 1 + rem);
        }
        rem -= row;
    }
    panic!("pair index {index} out of range for {messages} messages");
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecodingCase {
    /// Decided right after phase I.
    Case1,
    /// Decided between the top two after the full block.
    Case2,
}

/// Which term of the error decomposition an erroneous trial belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCategory {
    #[serde(rename = "none")]
    None,
    /// Phase-I failure: early decision wrong, or truth not among the
    /// receiver's top two. Also every baseline error.
    P1,
    /// Truth in a correctly shared pair, final two-way test failed; in the
    /// active scheme, the transmitter misdecoded the pair report.
    P2,
    /// Truth in the receiver's pair, transmitter's pair differs (passive
    /// noisy feedback).
    P2n,
    /// Active scheme: pair shared correctly, final test failed.
    P3,
}

/// Everything observable about one transmission.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialTranscript {
    pub true_message: usize,
    pub phase1_sent: Word,
    pub phase1_received: Word,
    /// The transmitter's copy of the received block; absent when there is
    /// no passive feedback.
    pub phase1_feedback_seen: Option<Word>,
    /// Message indices ordered by `d(x_i, y)`.
    pub receiver_ranking: Vec<usize>,
    /// Message indices ordered by `d(x_i, x')`; empty when the transmitter
    /// does not rank.
    pub transmitter_ranking: Vec<usize>,
    pub case_taken: Option<DecodingCase>,
    pub receiver_pair: Option<(usize, usize)>,
    /// The pair the transmitter acted on.
    pub transmitter_pair: Option<(usize, usize)>,
    pub decision: usize,
    pub error_category: ErrorCategory,
}

/// Forward and feedback noise for one trial.
#[derive(Debug, Clone)]
pub struct TrialStreams {
    pub forward: NoiseStream,
    pub feedback: NoiseStream,
}

impl TrialStreams {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self {
            forward: NoiseStream::new(
                seed,
                StreamId {
                    trial,
                    leg: Leg::Forward,
                },
            ),
            feedback: NoiseStream::new(
                seed,
                StreamId {
                    trial,
                    leg: Leg::Feedback,
                },
            ),
        }
    }
}

/// Distances to every codeword and the induced ranking.
fn rank(codebook: &Codebook, received: &Word) -> (Vec<usize>, Vec<usize>) {
    let dist: Vec<usize> = codebook
        .words()
        .iter()
        .map(|w| w.distance(received))
        .collect();
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by_key(|&i| (dist[i], i));
    (order, dist)
}

fn top_pair(ranking: &[usize]) -> (usize, usize) {
    let (a, b) = (ranking[0], ranking[1]);
    (a.min(b), a.max(b))
}

fn contains(pair: (usize, usize), i: usize) -> bool {
    pair.0 == i || pair.1 == i
}

/// The disambiguation word a pair member is mapped to.
fn pair_word(pair: (usize, usize), member: usize, len: usize) -> Word {
    if member == pair.0 {
        Word::zeros(len)
    } else {
        Word::ones(len)
    }
}

/// What the transmitter sends after the switch: its pair's word for the
/// truth, or the intermediate block when the truth is not in its pair.
fn disambiguation_block(pair: (usize, usize), truth: usize, len: usize) -> Word {
    if contains(pair, truth) {
        pair_word(pair, truth, len)
    } else {
        Word::half_and_half(len)
    }
}

/// Minimum total distance over (phase-I codeword, assigned word).
fn decide_in_pair(
    codebook: &Codebook,
    pair: (usize, usize),
    received1: &Word,
    received2: &Word,
) -> usize {
    let total = |i: usize| {
        codebook.word(i).distance(received1)
            + pair_word(pair, i, received2.len()).distance(received2)
    };
    if total(pair.1) < total(pair.0) {
        pair.1
    } else {
        pair.0
    }
}

fn check_phase1(params: &SchemeParams, codebook: &Codebook, truth: usize) {
    assert_eq!(
        codebook.len(),
        params.phase1_len(),
        "codebook length must equal ⌊γn⌋"
    );
    assert!(
        truth < codebook.message_count(),
        "true message out of range"
    );
    assert!(codebook.message_count() >= 2, "need at least two messages");
}

/// One-switch scheme with noiseless feedback: the transmitter sees `y`
/// exactly, so both sides agree on the pair.
pub fn run_noiseless_switch_trial(
    params: &SchemeParams,
    codebook: &Codebook,
    true_message: usize,
    streams: &mut TrialStreams,
) -> TrialTranscript {
    check_phase1(params, codebook, true_message);
    let len2 = params.n - params.phase1_len();
    let sent = codebook.word(true_message).clone();
    let received = transmit(&sent, params.p, &mut streams.forward);
    let (ranking, _) = rank(codebook, &received);
    let pair = top_pair(&ranking);
    let block = disambiguation_block(pair, true_message, len2);
    let received2 = transmit(&block, params.p, &mut streams.forward);
    let decision = decide_in_pair(codebook, pair, &received, &received2);
    let error_category = if decision == true_message {
        ErrorCategory::None
    } else if !contains(pair, true_message) {
        ErrorCategory::P1
    } else {
        ErrorCategory::P2
    };
    TrialTranscript {
        true_message,
        phase1_sent: sent,
        phase1_feedback_seen: Some(received.clone()),
        phase1_received: received,
        transmitter_ranking: ranking.clone(),
        receiver_ranking: ranking,
        case_taken: None,
        receiver_pair: Some(pair),
        transmitter_pair: Some(pair),
        decision,
        error_category,
    }
}

/// One-switch scheme over passive noisy feedback with the receiver's
/// Case-1/Case-2 rule.
pub fn run_noisy_switch_trial(
    params: &SchemeParams,
    codebook: &Codebook,
    true_message: usize,
    streams: &mut TrialStreams,
) -> TrialTranscript {
    check_phase1(params, codebook, true_message);
    let len2 = params.n - params.phase1_len();
    let sent = codebook.word(true_message).clone();
    let received = transmit(&sent, params.p, &mut streams.forward);
    let seen = passive_feedback(&received, params.p1, &mut streams.feedback);

    // transmitter: acts on its own view, never on the receiver's case
    let (tx_ranking, _) = rank(codebook, &seen);
    let tx_pair = top_pair(&tx_ranking);
    let block = disambiguation_block(tx_pair, true_message, len2);
    let received2 = transmit(&block, params.p, &mut streams.forward);

    let (rx_ranking, rx_dist) = rank(codebook, &received);
    let rx_pair = top_pair(&rx_ranking);
    let early = rx_ranking.len() >= 3
        && rx_dist[rx_ranking[2]] <= rx_dist[rx_ranking[1]] + params.threshold();
    let (case, decision) = if early {
        (DecodingCase::Case1, rx_ranking[0])
    } else {
        (
            DecodingCase::Case2,
            decide_in_pair(codebook, rx_pair, &received, &received2),
        )
    };
    let error_category = if decision == true_message {
        ErrorCategory::None
    } else if case == DecodingCase::Case1 || !contains(rx_pair, true_message) {
        ErrorCategory::P1
    } else if tx_pair != rx_pair {
        ErrorCategory::P2n
    } else {
        ErrorCategory::P2
    };
    TrialTranscript {
        true_message,
        phase1_sent: sent,
        phase1_received: received,
        phase1_feedback_seen: Some(seen),
        receiver_ranking: rx_ranking,
        transmitter_ranking: tx_ranking,
        case_taken: Some(case),
        receiver_pair: Some(rx_pair),
        transmitter_pair: Some(tx_pair),
        decision,
        error_category,
    }
}

/// Three-phase scheme: the receiver reports its pair over the feedback
/// link with `report_code`, the transmitter decodes it and disambiguates.
pub fn run_active_trial(
    params: &SchemeParams,
    codebook: &Codebook,
    report_code: &Codebook,
    true_message: usize,
    streams: &mut TrialStreams,
) -> TrialTranscript {
    check_phase1(params, codebook, true_message);
    let messages = codebook.message_count();
    assert_eq!(
        report_code.message_count(),
        pair_count(messages),
        "one report word per pair"
    );
    assert_eq!(
        report_code.len(),
        params.report_len(),
        "report length must equal ⌊γ1 n⌋"
    );
    let len3 = params.n - params.phase1_len() - params.report_len();

    let sent = codebook.word(true_message).clone();
    let received = transmit(&sent, params.p, &mut streams.forward);
    let (rx_ranking, _) = rank(codebook, &received);
    let rx_pair = top_pair(&rx_ranking);

    let report = report_code.word(pair_index(rx_pair, messages));
    let report_seen = transmit(report, params.p1, &mut streams.feedback);
    let (decoded, _) = rank(report_code, &report_seen);
    let tx_pair = pair_from_index(decoded[0], messages);

    let block = disambiguation_block(tx_pair, true_message, len3);
    let received3 = transmit(&block, params.p, &mut streams.forward);
    let decision = decide_in_pair(codebook, rx_pair, &received, &received3);
    let error_category = if decision == true_message {
        ErrorCategory::None
    } else if !contains(rx_pair, true_message) {
        ErrorCategory::P1
    } else if tx_pair != rx_pair {
        ErrorCategory::P2
    } else {
        ErrorCategory::P3
    };
    TrialTranscript {
        true_message,
        phase1_sent: sent,
        phase1_received: received,
        phase1_feedback_seen: None,
        receiver_ranking: rx_ranking,
        transmitter_ranking: Vec::new(),
        case_taken: None,
        receiver_pair: Some(rx_pair),
        transmitter_pair: Some(tx_pair),
        decision,
        error_category,
    }
}

/// Minimum-distance decoding of a length-`n` code, no feedback.
pub fn run_no_feedback_baseline(
    params: &SchemeParams,
    codebook: &Codebook,
    true_message: usize,
    streams: &mut TrialStreams,
) -> TrialTranscript {
    assert_eq!(
        codebook.len(),
        params.n,
        "baseline codebook spans the whole block"
    );
    assert!(
        true_message < codebook.message_count(),
        "true message out of range"
    );
    let sent = codebook.word(true_message).clone();
    let received = transmit(&sent, params.p, &mut streams.forward);
    let (ranking, _) = rank(codebook, &received);
    let decision = ranking[0];
    TrialTranscript {
        true_message,
        phase1_sent: sent,
        phase1_received: received,
        phase1_feedback_seen: None,
        receiver_ranking: ranking,
        transmitter_ranking: Vec::new(),
        case_taken: None,
        receiver_pair: None,
        transmitter_pair: None,
        decision,
        error_category: if decision == true_message {
            ErrorCategory::None
        } else {
            ErrorCategory::P1
        },
    }
}

/// Validated parameters plus the codebooks a scheme needs, ready to run
/// trials.
#[derive(Debug, Clone)]
pub struct SchemeSetup {
    scheme: Scheme,
    params: SchemeParams,
    codebook: Codebook,
    report_code: Option<Codebook>,
}

impl SchemeSetup {
    pub fn new(scheme: Scheme, params: SchemeParams) -> Result<Self> {
        params.validate(scheme)?;
        let codebook = build_codebook(scheme, &params)?;
        let report_code = match scheme {
            Scheme::Active => Some(build_report_codebook(&params)?),
            _ => None,
        };
        Ok(Self {
            scheme,
            params,
            codebook,
            report_code,
        })
    }

    /// Uses a caller-supplied message codebook instead of building one.
    pub fn with_codebook(scheme: Scheme, params: SchemeParams, codebook: Codebook) -> Result<Self> {
        params.validate(scheme)?;
        if codebook.len() != params.code_len(scheme) || codebook.message_count() != params.messages
        {
            return Err(domain(format!(
                "codebook is {}×{}, scheme needs {}×{}",
                codebook.message_count(),
                codebook.len(),
                params.messages,
                params.code_len(scheme)
            )));
        }
        let report_code = match scheme {
            Scheme::Active => Some(build_report_codebook(&params)?),
            _ => None,
        };
        Ok(Self {
            scheme,
            params,
            codebook,
            report_code,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn report_code(&self) -> Option<&Codebook> {
        self.report_code.as_ref()
    }

    /// Runs trial number `trial` with all randomness derived from
    /// `(seed, trial)`; the true message is drawn uniformly.
    pub fn run_trial(&self, seed: u64, trial: u64) -> TrialTranscript {
        let mut pick = NoiseStream::new(
            seed,
            StreamId {
                trial,
                leg: Leg::Message,
            },
        );
        let truth = pick.index_below(self.params.messages);
        self.run_trial_with_message(seed, trial, truth)
    }

    pub fn run_trial_with_message(&self, seed: u64, trial: u64, truth: usize) -> TrialTranscript {
        let mut streams = TrialStreams::new(seed, trial);
        let (p, c) = (&self.params, &self.codebook);
        match self.scheme {
            Scheme::Baseline => run_no_feedback_baseline(p, c, truth, &mut streams),
            Scheme::NoiselessSwitch => run_noiseless_switch_trial(p, c, truth, &mut streams),
            Scheme::NoisySwitch => run_noisy_switch_trial(p, c, truth, &mut streams),
            Scheme::Active => {
                let report = self
                    .report_code
                    .as_ref()
                    .expect("active setup has a report code");
                run_active_trial(p, c, report, truth, &mut streams)
            }
        }
    }
}

/// Writes transcripts as JSON Lines, one record per trial, fields in
/// declaration order of [`TrialTranscript`].
pub fn write_transcripts<W: std::io::Write>(
    mut out: W,
    transcripts: &[TrialTranscript],
) -> std::io::Result<()> {
    for t in transcripts {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize, p: f64) -> SchemeParams {
        SchemeParams::new(n, m, p)
    }

    #[test]
    fn pair_indexing_round_trips() {
        for m in 2..8 {
            let mut k = 0;
            for i in 0..m {
                for j in i + 1..m {
                    assert_eq!(pair_index((i, j), m), k);
                    assert_eq!(pair_from_index(k, m), (i, j));
                    k += 1;
                }
            }
            assert_eq!(k, pair_count(m));
        }
    }

    #[test]
    fn threshold_integerization() {
        let mut sp = params(1200, 3, 0.1);
        sp.gamma = 0.8667;
        sp.t = 0.2;
        assert_eq!(sp.phase1_len(), 1040);
        assert_eq!(sp.threshold(), 104);
        sp.t = 0.0;
        assert_eq!(sp.threshold(), 0);
    }

    #[test]
    fn validation() {
        let mut sp = params(100, 3, 0.1);
        assert!(sp.validate(Scheme::NoisySwitch).is_ok());
        sp.gamma = 1.0;
        assert!(sp.validate(Scheme::NoisySwitch).is_err());
        assert!(sp.validate(Scheme::Baseline).is_ok());
        sp.gamma = 0.5;
        sp.gamma1 = 0.6;
        assert!(sp.validate(Scheme::Active).is_err());
        sp.gamma1 = 0.2;
        assert!(sp.validate(Scheme::Active).is_ok());
        sp.p = 0.6;
        assert!(sp.validate(Scheme::Baseline).is_err());
        assert!(params(100, 1, 0.1).validate(Scheme::Baseline).is_err());
        assert!(params(1, 2, 0.1).validate(Scheme::NoiselessSwitch).is_err());
    }

    #[test]
    fn noiseless_channels_never_err() {
        for scheme in Scheme::ALL {
            let mut sp = params(120, 4, 0.0);
            sp.p1 = 0.0;
            sp.gamma1 = 0.25;
            sp.slack_fraction = 0.2;
            let setup = SchemeSetup::new(scheme, sp).unwrap();
            for trial in 0..200 {
                let tr = setup.run_trial(5, trial);
                assert_eq!(tr.decision, tr.true_message, "{scheme:?}");
                assert_eq!(tr.error_category, ErrorCategory::None);
            }
        }
    }

    #[test]
    fn noisy_case_split_matches_distances() {
        let mut sp = params(60, 3, 0.25);
        sp.p1 = 0.1;
        sp.gamma = 0.8;
        sp.t = 0.2;
        sp.code = CodeKind::Simplex3;
        let setup = SchemeSetup::new(Scheme::NoisySwitch, sp).unwrap();
        for trial in 0..2000 {
            let tr = setup.run_trial(1, trial);
            let d: Vec<usize> = setup
                .codebook()
                .words()
                .iter()
                .map(|w| w.distance(&tr.phase1_received))
                .collect();
            let r = &tr.receiver_ranking;
            let early = d[r[2]] <= d[r[1]] + sp.threshold();
            assert_eq!(tr.case_taken == Some(DecodingCase::Case1), early);
            if early {
                assert_eq!(tr.decision, r[0]);
            }
        }
    }

    #[test]
    fn intermediate_block_when_truth_missing() {
        assert_eq!(disambiguation_block((1, 2), 0, 6).to_string(), "000111");
        assert_eq!(disambiguation_block((1, 2), 1, 3).to_string(), "000");
        assert_eq!(disambiguation_block((1, 2), 2, 3).to_string(), "111");
    }

    #[test]
    fn transcript_serializes_as_one_line() {
        let sp = params(40, 3, 0.2);
        let setup = SchemeSetup::new(
            Scheme::NoisySwitch,
            SchemeParams {
                p1: 0.1,
                slack_fraction: 0.2,
                ..sp
            },
        )
        .unwrap();
        let tr = setup.run_trial(3, 0);
        let mut buf = Vec::new();
        write_transcripts(&mut buf, &[tr.clone(), tr]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert!(keys.contains(&"error_category") && keys.contains(&"phase1_feedback_seen"));
    }
}
