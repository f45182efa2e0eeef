use std::fmt;
use std::ops::Add;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

/// Exact `num / 2^exp`, reduced (odd numerator or `exp == 0`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: BigUint, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.reduce();
        d
    }

    pub fn zero() -> Self {
        Dyadic::new(BigUint::ZERO, 0)
    }

    pub fn one() -> Self {
        Dyadic::new(BigUint::from(1u32), 0)
    }

    /// `2^-k`.
    pub fn pow2_inv(k: u32) -> Self {
        Dyadic::new(BigUint::from(1u32), k)
    }

    fn reduce(&mut self) {
        if self.num == BigUint::ZERO {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp as u64);
        self.num >>= tz;
        self.exp -= tz as u32;
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    /// `p/2^k`.
    pub fn power_form(&self) -> String {
        format!("{}/2^{}", self.num, self.exp)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, other: &Dyadic) -> Dyadic {
        let exp = self.exp.max(other.exp);
        let num = (&self.num << (exp - self.exp)) + (&other.num << (exp - other.exp));
        Dyadic::new(num, exp)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let exp = self.exp.max(other.exp);
        (&self.num << (exp - self.exp)).cmp(&(&other.num << (exp - other.exp)))
    }
}

/// `p/q` with `q = 2^k` written out, or a bare integer.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigUint::from(1u32) << self.exp)
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
