//! Eventually periodic 0/1 streams `u p p p ...`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Largest bound accepted by [`tailset_closure`].
pub const MAX_CLOSURE_BOUND: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("empty period")]
    EmptyPeriod,
    #[error("bad stream literal `{0}`: expected `pre=BITS,per=BITS` or `{{n,...}}`")]
    Literal(String),
}

/// Canonical: the period is primitive and the preperiod is as short as possible.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EPStream {
    pre: Vec<bool>,
    per: Vec<bool>,
}

impl EPStream {
    pub fn new(pre: Vec<bool>, per: Vec<bool>) -> Result<Self, StreamError> {
        if per.is_empty() {
            return Err(StreamError::EmptyPeriod);
        }
        let mut s = EPStream { pre, per };
        s.canonicalize();
        Ok(s)
    }

    /// The stream `f(0) f(1) ...`, known to be periodic with period `per_len`
    /// from position `pre_len` on.
    pub fn from_fn(pre_len: usize, per_len: usize, f: impl Fn(usize) -> bool) -> Self {
        assert!(per_len > 0, "period must be nonempty");
        let pre = (0..pre_len).map(&f).collect();
        let per = (pre_len..pre_len + per_len).map(&f).collect();
        EPStream::new(pre, per).expect("nonempty period")
    }

    pub fn empty() -> Self {
        EPStream { pre: Vec::new(), per: vec![false] }
    }

    pub fn ones() -> Self {
        EPStream { pre: Vec::new(), per: vec![true] }
    }

    pub fn from_set<I: IntoIterator<Item = u64>>(set: I) -> Self {
        let set: BTreeSet<u64> = set.into_iter().collect();
        let len = set.last().map_or(0, |m| *m as usize + 1);
        let mut pre = vec![false; len];
        for &m in &set {
            pre[m as usize] = true;
        }
        EPStream::new(pre, vec![false]).expect("nonempty period")
    }

    fn canonicalize(&mut self) {
        let p = self.per.len();
        if let Some(d) = (1..=p).find(|&d| p.is_multiple_of(d) && (d..p).all(|i| self.per[i] == self.per[i - d])) {
            self.per.truncate(d);
        }
        while let Some(&last) = self.pre.last() {
            if last != *self.per.last().expect("nonempty") {
                break;
            }
            self.pre.pop();
            self.per.rotate_right(1);
        }
    }

    pub fn preperiod(&self) -> &[bool] {
        &self.pre
    }

    pub fn period(&self) -> &[bool] {
        &self.per
    }

    pub fn bit(&self, n: usize) -> bool {
        match n.checked_sub(self.pre.len()) {
            None => self.pre[n],
            Some(k) => self.per[k % self.per.len()],
        }
    }

    pub fn prefix(&self, len: usize) -> Vec<bool> {
        (0..len).map(|i| self.bit(i)).collect()
    }

    pub fn is_finite_set(&self) -> bool {
        self.per == [false]
    }

    /// The members, when the stream denotes a finite set.
    pub fn to_finite_set(&self) -> Option<Vec<u64>> {
        self.is_finite_set().then(|| (0..self.pre.len()).filter(|&i| self.pre[i]).map(|i| i as u64).collect())
    }

    /// Pointwise combination; the result is periodic from the longer
    /// preperiod on with period `lcm` of the two periods.
    pub fn zip_with(&self, other: &EPStream, f: impl Fn(bool, bool) -> bool) -> EPStream {
        let pre = self.pre.len().max(other.pre.len());
        let per = lcm(self.per.len(), other.per.len());
        EPStream::from_fn(pre, per, |i| f(self.bit(i), other.bit(i)))
    }

    pub fn symmetric_difference(&self, other: &EPStream) -> EPStream {
        self.zip_with(other, |a, b| a != b)
    }

    /// Flip the bits at the given positions.
    pub fn flip(&self, positions: &[usize]) -> EPStream {
        let pre = positions.iter().map(|p| p + 1).max().unwrap_or(0).max(self.pre.len());
        EPStream::from_fn(pre, self.per.len(), |i| self.bit(i) != positions.contains(&i))
    }
}

fn bits_str(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub(crate) fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

impl fmt::Display for EPStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pre={},per={}", bits_str(&self.pre), bits_str(&self.per))
    }
}

impl FromStr for EPStream {
    type Err = StreamError;

    fn from_str(s: &str) -> Result<Self, StreamError> {
        let bad = || StreamError::Literal(s.to_string());
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            let members = inner
                .split(',')
                .map(str::trim)
                .filter(|m| !m.is_empty())
                .map(|m| m.parse::<u64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?;
            if members.iter().any(|&m| m > 1 << 20) {
                return Err(bad());
            }
            return Ok(EPStream::from_set(members));
        }
        let (pre, per) = t.split_once(',').ok_or_else(bad)?;
        let pre = pre.trim().strip_prefix("pre=").and_then(parse_bits).ok_or_else(bad)?;
        let per = per.trim().strip_prefix("per=").and_then(parse_bits).ok_or_else(bad)?;
        EPStream::new(pre, per).map_err(|_| bad())
    }
}

impl Serialize for EPStream {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// `{2n : n in a} u {2n + 1 : n in b}`.
pub fn join(a: &EPStream, b: &EPStream) -> EPStream {
    let pre = 2 * a.pre.len().max(b.pre.len());
    let per = 2 * lcm(a.per.len(), b.per.len());
    EPStream::from_fn(pre, per, |i| if i % 2 == 0 { a.bit(i / 2) } else { b.bit(i / 2) })
}

/// The even and odd halves.
pub fn split(x: &EPStream) -> (EPStream, EPStream) {
    let pre = x.pre.len().div_ceil(2);
    let per = x.per.len();
    (EPStream::from_fn(pre, per, |n| x.bit(2 * n)), EPStream::from_fn(pre, per, |n| x.bit(2 * n + 1)))
}

/// Finite symmetric difference.
pub fn approx_eq(a: &EPStream, b: &EPStream) -> bool {
    a.symmetric_difference(b).is_finite_set()
}

/// Every stream that differs from a member of `xs` only below `bound`,
/// sorted and without repetitions.
pub fn tailset_closure(xs: &[EPStream], bound: usize) -> Vec<EPStream> {
    assert!(bound <= MAX_CLOSURE_BOUND, "closure bound above {MAX_CLOSURE_BOUND}");
    let mut out = BTreeSet::new();
    for x in xs {
        for mask in 0u32..1 << bound {
            let flips: Vec<usize> = (0..bound).filter(|&i| mask >> i & 1 == 1).collect();
            out.insert(x.flip(&flips));
        }
    }
    out.into_iter().collect()
}
