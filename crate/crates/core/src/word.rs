use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::Error;

/// A packed binary sequence.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    blocks: Vec<u64>,
    len: usize,
}

impl Word {
    pub fn zeros(len: usize) -> Self {
        Self {
            blocks: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut w = Self {
            blocks: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        w.clear_tail();
        w
    }

    /// First `len / 2` symbols zero, the rest one.
    pub fn half_and_half(len: usize) -> Self {
        let mut w = Self::zeros(len);
        for i in len / 2..len {
            w.set(i, true);
        }
        w
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut w = Self::default();
        for b in bits {
            w.push(b);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "index {i} out of range for word of length {}",
            self.len
        );
        self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(
            i < self.len,
            "index {i} out of range for word of length {}",
            self.len
        );
        let mask = 1u64 << (i % 64);
        if bit {
            self.blocks[i / 64] |= mask;
        } else {
            self.blocks[i / 64] &= !mask;
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.blocks.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn weight(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Hamming distance; both words must have equal length.
    pub fn distance(&self, other: &Word) -> usize {
        assert_eq!(
            self.len, other.len,
            "distance between words of unequal length"
        );
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn xor(&self, other: &Word) -> Word {
        assert_eq!(self.len, other.len, "xor of words of unequal length");
        Word {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for b in other.iter() {
            out.push(b);
        }
        out
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word::from_bits)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
