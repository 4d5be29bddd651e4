//! Forward BSC(p) and passive feedback BSC(p1) noise.
//!
//! Every noise symbol is a pure function of `(seed, trial, leg, position)`:
//! the key of a ChaCha8 generator is derived from `(seed, trial)`, the leg
//! selects the ChaCha stream, and the position is the block counter. Trials
//! can therefore run in any order or on any number of threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::word::Word;

/// Which physical or logical leg a stream drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Leg {
    Forward,
    Feedback,
    /// Choice of the transmitted message.
    Message,
}

impl Leg {
    fn stream_number(self) -> u64 {
        match self {
            Leg::Forward => 1,
            Leg::Feedback => 2,
            Leg::Message => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct StreamId {
    pub trial: u64,
    pub leg: Leg,
}

/// A reproducible source of Bernoulli noise for one `(trial, leg)`.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    id: StreamId,
    rng: ChaCha8Rng,
    position: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit seed from a parent seed and a label.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut s = seed ^ label.wrapping_mul(0xd1b5_4a32_d192_ed03);
    splitmix64(&mut s);
    splitmix64(&mut s)
}

impl NoiseStream {
    pub fn new(seed: u64, id: StreamId) -> Self {
        let mut state = seed;
        state = splitmix64(&mut state) ^ id.trial;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(id.leg.stream_number());
        Self {
            id,
            rng,
            position: 0,
        }
    }

    pub fn id(&self) -> StreamId {
        self.id
    }

    /// Number of symbols consumed so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Jumps to an absolute symbol position.
    pub fn seek(&mut self, position: u64) {
        self.rng.set_word_pos(2 * position as u128);
        self.position = position;
    }

    pub fn next_u64(&mut self) -> u64 {
        self.position += 1;
        self.rng.next_u64()
    }

    /// One Bernoulli(`prob`) draw, exact to 2^-64.
    pub fn flip(&mut self, prob: f64) -> bool {
        let threshold = if prob >= 1.0 {
            u64::MAX
        } else {
            (prob * 18_446_744_073_709_551_616.0) as u64
        };
        self.next_u64() < threshold
    }

    /// Uniform index in `0..n`.
    pub fn index_below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

/// Sends `bits` through a BSC with the given crossover.
pub fn transmit(bits: &Word, crossover: f64, stream: &mut NoiseStream) -> Word {
    assert!(
        (0.0..=0.5).contains(&crossover),
        "crossover {crossover} outside [0, 1/2]"
    );
    Word::from_bits(bits.iter().map(|b| b ^ stream.flip(crossover)))
}

/// What the transmitter sees of one receiver output through the passive
/// feedback link.
pub fn passive_feedback_step(forward_output: bool, p1: f64, stream: &mut NoiseStream) -> bool {
    assert!(
        (0.0..=0.5).contains(&p1),
        "feedback crossover {p1} outside [0, 1/2]"
    );
    forward_output ^ stream.flip(p1)
}

/// The whole received block relayed back to the transmitter.
pub fn passive_feedback(received: &Word, p1: f64, stream: &mut NoiseStream) -> Word {
    Word::from_bits(
        received
            .iter()
            .map(|b| passive_feedback_step(b, p1, stream)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(seed: u64, trial: u64, leg: Leg) -> NoiseStream {
        NoiseStream::new(seed, StreamId { trial, leg })
    }

    fn within_3_sigma(count: usize, n: usize, p: f64) -> bool {
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        (count as f64 - n as f64 * p).abs() <= 3.0 * sigma
    }

    #[test]
    fn zero_crossover_is_identity() {
        let w: Word = "0110100111".parse().unwrap();
        let mut s = stream(1, 0, Leg::Forward);
        assert_eq!(transmit(&w, 0.0, &mut s), w);
        assert!(passive_feedback_step(true, 0.0, &mut s));
    }

    #[test]
    fn flip_rates() {
        let n = 1_000_000;
        let zeros = Word::zeros(n);
        for (p, seed) in [(0.5, 3), (0.1, 4)] {
            let out = transmit(&zeros, p, &mut stream(seed, 0, Leg::Forward));
            assert_eq!(out.len(), n);
            assert!(
                within_3_sigma(out.weight(), n, p),
                "p={p}: {}",
                out.weight()
            );
        }
        let fed = passive_feedback(&zeros, 0.1, &mut stream(5, 0, Leg::Feedback));
        assert!(within_3_sigma(fed.weight(), n, 0.1));
    }

    #[test]
    fn reproducible_and_seekable() {
        let w = Word::zeros(500);
        let a = transmit(&w, 0.3, &mut stream(9, 17, Leg::Forward));
        let b = transmit(&w, 0.3, &mut stream(9, 17, Leg::Forward));
        assert_eq!(a, b);
        assert_ne!(a, transmit(&w, 0.3, &mut stream(9, 18, Leg::Forward)));

        let mut s = stream(9, 17, Leg::Forward);
        s.seek(200);
        let tail = transmit(&Word::zeros(300), 0.3, &mut s);
        assert_eq!(tail.to_string(), a.to_string()[200..]);
        assert_eq!(s.position(), 500);
    }

    #[test]
    fn forward_and_feedback_noise_uncorrelated() {
        let n = 1_000_000;
        let p = 0.5;
        let mut fw = stream(11, 3, Leg::Forward);
        let mut fb = stream(11, 3, Leg::Feedback);
        let mut both = 0usize;
        let (mut cf, mut cb) = (0usize, 0usize);
        for _ in 0..n {
            let (a, b) = (fw.flip(p), fb.flip(p));
            cf += a as usize;
            cb += b as usize;
            both += (a && b) as usize;
        }
        let (mf, mb) = (cf as f64 / n as f64, cb as f64 / n as f64);
        let cov = both as f64 / n as f64 - mf * mb;
        let corr = cov / (mf * (1.0 - mf) * mb * (1.0 - mb)).sqrt();
        // sample correlation of independent pairs has sd ~ 1/sqrt(n)
        assert!(corr.abs() <= 3.0 / (n as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn index_below_covers_range() {
        let mut s = stream(2, 0, Leg::Message);
        let mut seen = [0usize; 5];
        for _ in 0..10_000 {
            seen[s.index_below(5)] += 1;
        }
        assert!(seen.iter().all(|&c| c > 1_800 && c < 2_200), "{seen:?}");
    }
}
