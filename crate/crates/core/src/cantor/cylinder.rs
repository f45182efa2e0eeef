//! Finite unions of basic clopen sets `[w]` and the level sets of the
//! Schnorr test `V_n = {x : x(2i + 1) = 0 for all i <= n}`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};
use thiserror::Error;

use super::dyadic::Dyadic;
use super::stream::{join, parse_bits, EPStream};
use crate::par;

pub const MAX_WORD_LEN: usize = 128;
/// Largest Schnorr level that may be materialized.
pub const MAX_LEVEL: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CylinderError {
    #[error("bad word `{0}`: expected at most {MAX_WORD_LEN} bits 0/1")]
    Word(String),
    #[error("level {0} above {MAX_LEVEL}")]
    Level(usize),
}

/// A finite 0/1 word. Ordered lexicographically, prefixes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    // Bit i of the word is bit 127 - i here; the rest is zero.
    bits: u128,
    len: u8,
}

impl Word {
    pub const EMPTY: Word = Word { bits: 0, len: 0 };

    pub fn from_bits(bits: &[bool]) -> Option<Word> {
        if bits.len() > MAX_WORD_LEN {
            return None;
        }
        let mut w = Word::EMPTY;
        for &b in bits {
            w = w.push(b);
        }
        Some(w)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits >> (127 - i) & 1 == 1
    }

    pub fn push(self, b: bool) -> Word {
        assert!(self.len() < MAX_WORD_LEN, "word too long");
        Word { bits: self.bits | (b as u128) << (127 - self.len()), len: self.len + 1 }
    }

    fn mask(len: usize) -> u128 {
        if len == 0 {
            0
        } else {
            u128::MAX << (128 - len)
        }
    }

    pub fn truncate(self, len: usize) -> Word {
        let len = len.min(self.len());
        Word { bits: self.bits & Word::mask(len), len: len as u8 }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        self.len <= other.len && other.truncate(self.len()) == *self
    }

    fn parent(self) -> Word {
        self.truncate(self.len() - 1)
    }

    fn sibling(self) -> Word {
        Word { bits: self.bits ^ 1 << (128 - self.len()), len: self.len }
    }

    pub fn of_stream(x: &EPStream, len: usize) -> Word {
        Word::from_bits(&x.prefix(len)).expect("length checked by caller")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len()).map(|i| if self.bit(i) { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl FromStr for Word {
    type Err = CylinderError;

    fn from_str(s: &str) -> Result<Self, CylinderError> {
        parse_bits(s.trim()).and_then(|b| Word::from_bits(&b)).ok_or_else(|| CylinderError::Word(s.to_string()))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Canonical: prefix-free, no two sibling words, sorted. This is the coarsest
/// disjoint presentation, so equal unions have equal families.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CylinderFamily {
    words: Vec<Word>,
}

impl CylinderFamily {
    pub fn new<I: IntoIterator<Item = Word>>(words: I) -> Self {
        let mut sorted: Vec<Word> = words.into_iter().collect();
        sorted.sort_unstable();
        sorted.dedup();
        // A kept word covering `w` is always the last one kept.
        let mut free: Vec<Word> = Vec::with_capacity(sorted.len());
        for w in sorted {
            if free.last().is_some_and(|p| p.is_prefix_of(&w)) {
                continue;
            }
            free.push(w);
        }
        let mut set: BTreeSet<Word> = free.into_iter().collect();
        let max = set.iter().map(Word::len).max().unwrap_or(0);
        for len in (1..=max).rev() {
            let level: Vec<Word> = set.iter().filter(|w| w.len() == len && !w.bit(len - 1)).copied().collect();
            for w in level {
                if set.contains(&w.sibling()) {
                    set.remove(&w);
                    set.remove(&w.sibling());
                    set.insert(w.parent());
                }
            }
        }
        CylinderFamily { words: set.into_iter().collect() }
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn lengths(&self) -> BTreeSet<usize> {
        self.words.iter().map(Word::len).collect()
    }

    pub fn contains_word(&self, w: &Word) -> bool {
        self.words.binary_search(w).is_ok()
    }

    /// Some word of the family is a prefix of `x`.
    pub fn member(&self, x: &EPStream) -> bool {
        self.lengths().into_iter().any(|len| self.contains_word(&Word::of_stream(x, len)))
    }

    /// Sum of `2^-|w|`.
    pub fn measure(&self) -> Dyadic {
        let Some(max) = self.lengths().last().copied() else {
            return Dyadic::zero();
        };
        let mut num = BigUint::ZERO;
        for w in &self.words {
            num += BigUint::from(1u32) << (max - w.len());
        }
        Dyadic::new(num, max as u32)
    }
}

pub fn measure_of(f: &CylinderFamily) -> Dyadic {
    f.measure()
}

pub fn member(x: &EPStream, f: &CylinderFamily) -> bool {
    f.member(x)
}

/// The `2^(n+1)` words `i0 0 i1 0 ... in 0`, in lexicographic order.
pub fn schnorr_test_level(n: usize) -> Result<CylinderFamily, CylinderError> {
    if n > MAX_LEVEL {
        return Err(CylinderError::Level(n));
    }
    let count = 1usize << (n + 1);
    let words = par::map_range(count, |m| {
        let mut w = Word::EMPTY;
        for i in (0..=n).rev() {
            w = w.push(m >> i & 1 == 1).push(false);
        }
        w
    });
    // Already sorted, prefix-free and sibling-free.
    Ok(CylinderFamily { words })
}

/// `a (+) empty` lies in `V_n` for every `n <= depth`.
pub fn capture_check(a: &EPStream, depth: usize) -> Result<bool, CylinderError> {
    Ok(capture_check_many(std::slice::from_ref(a), depth)?[0])
}

/// [`capture_check`] for several streams, building each level once.
pub fn capture_check_many(streams: &[EPStream], depth: usize) -> Result<Vec<bool>, CylinderError> {
    let joined: Vec<EPStream> = streams.iter().map(|a| join(a, &EPStream::empty())).collect();
    let mut ok = vec![true; streams.len()];
    for n in 0..=depth {
        let level = schnorr_test_level(n)?;
        let hits = par::map(&joined, |x| level.member(x));
        for (o, h) in ok.iter_mut().zip(hits) {
            *o &= h;
        }
    }
    Ok(ok)
}
