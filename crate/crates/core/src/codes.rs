//! Codebooks: the exact three-word simplex layout used by the oracles and
//! randomly drawn "almost simplex" codes with a verified distance window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::word::Word;

/// Attempts made by [`make_almost_simplex`] before giving up.
pub const RETRY_BUDGET: usize = 100;

/// Default half-width of the distance window, as a fraction of the length.
pub const DEFAULT_SLACK_FRACTION: f64 = 0.05;

/// `M` distinct binary codewords of a common length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codebook {
    words: Vec<Word>,
    len: usize,
    /// Largest `|d(x_i, x_j) - len/2|` over all pairs, in symbols.
    distance_slack: f64,
}

impl Codebook {
    pub fn from_words(words: Vec<Word>) -> Result<Self> {
        let Some(first) = words.first() else {
            return Err(Error::Codebook("empty codebook".into()));
        };
        let len = first.len();
        if words.iter().any(|w| w.len() != len) {
            return Err(Error::Codebook("codewords of unequal length".into()));
        }
        let mut slack: f64 = 0.0;
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                let d = words[i].distance(&words[j]);
                if d == 0 {
                    return Err(Error::Codebook(format!("codewords {i} and {j} coincide")));
                }
                slack = slack.max((d as f64 - len as f64 / 2.0).abs());
            }
        }
        Ok(Self {
            words,
            len,
            distance_slack: slack,
        })
    }

    /// All-zeros and all-ones words of length `len`.
    pub fn complementary_pair(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(domain("complementary pair needs a positive length"));
        }
        Self::from_words(vec![Word::zeros(len), Word::ones(len)])
    }

    pub fn message_count(&self) -> usize {
        self.words.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn distance_slack(&self) -> f64 {
        self.distance_slack
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &Word {
        &self.words[i]
    }

    /// Appends `extra` positions on which every codeword is zero.
    pub fn pad_common(&self, extra: usize) -> Self {
        let pad = Word::zeros(extra);
        let words: Vec<Word> = self.words.iter().map(|w| w.concat(&pad)).collect();
        Self::from_words(words).expect("padding preserves distinctness")
    }

    pub fn pairwise_distances(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.words.len() {
            for j in i + 1..self.words.len() {
                out.push((i, j, self.words[i].distance(&self.words[j])));
            }
        }
        out
    }

    /// One codeword per line, characters `0`/`1`.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.words.len() * (self.len + 1));
        for w in &self.words {
            s.push_str(&w.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Word>>>()?;
        Self::from_words(words)
    }
}

/// The exact simplex triple of length `m`: `x1 = 0^m`, `x2` ones on the
/// first two thirds, `x3` ones on the first and last thirds.
pub fn make_simplex3(m: usize) -> Result<Codebook> {
    if m == 0 || !m.is_multiple_of(3) {
        return Err(domain(format!(
            "simplex triple length {m} is not a positive multiple of 3"
        )));
    }
    let k = m / 3;
    let x1 = Word::zeros(m);
    let x2 = Word::from_bits((0..m).map(|i| i < 2 * k));
    let x3 = Word::from_bits((0..m).map(|i| i < k || i >= 2 * k));
    Codebook::from_words(vec![x1, x2, x3])
}

/// Draws `messages` uniform random words of length `len` until every
/// pairwise distance lies in `len/2 ± slack_fraction·len`.
pub fn make_almost_simplex(
    messages: usize,
    len: usize,
    slack_fraction: f64,
    seed: u64,
) -> Result<Codebook> {
    if messages < 2 {
        return Err(domain(format!("need at least 2 messages, got {messages}")));
    }
    if len == 0 {
        return Err(domain("codeword length must be positive"));
    }
    if !(slack_fraction > 0.0 && slack_fraction < 0.5) {
        return Err(domain(format!(
            "slack fraction {slack_fraction} outside (0, 1/2)"
        )));
    }
    let half = len as f64 / 2.0;
    let window = slack_fraction * len as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..RETRY_BUDGET {
        let words: Vec<Word> = (0..messages)
            .map(|_| Word::from_bits((0..len).map(|_| rng.gen::<bool>())))
            .collect();
        for i in 0..messages {
            for j in i + 1..messages {
                let d = words[i].distance(&words[j]) as f64;
                if d == 0.0 || (d - half).abs() > window {
                    continue 'attempt;
                }
            }
        }
        return Codebook::from_words(words);
    }
    Err(Error::Codebook(format!(
        "no {messages}-word code of length {len} within slack {slack_fraction} after {RETRY_BUDGET} attempts"
    )))
}
