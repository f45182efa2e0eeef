//! Coding finite families of finite sets by a single set.
//!
//! Pairs are coded with the Cantor pairing `<i, m> = (i + m)(i + m + 1)/2 + m`,
//! 0-based, and a family `S` by `{<i, m> : m in S[i]}`.

use std::collections::BTreeSet;

/// `None` on `u64` overflow.
pub fn try_pair(i: u64, m: u64) -> Option<u64> {
    let s = i.checked_add(m)?;
    let tri = if s % 2 == 0 { (s / 2).checked_mul(s + 1)? } else { s.checked_mul(s.div_ceil(2))? };
    tri.checked_add(m)
}

/// Panics on `u64` overflow.
pub fn pair(i: u64, m: u64) -> u64 {
    try_pair(i, m).expect("pairing overflows u64")
}

/// Inverse of [`pair`].
pub fn unpair(c: u64) -> (u64, u64) {
    // Largest w with w(w + 1)/2 <= c.
    let mut w = (((8.0 * c as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    let tri = |w: u64| w as u128 * (w as u128 + 1) / 2;
    while tri(w) > c as u128 {
        w -= 1;
    }
    while tri(w + 1) <= c as u128 {
        w += 1;
    }
    let m = c - tri(w) as u64;
    (w - m, m)
}

pub fn code_family(sets: &[BTreeSet<u64>]) -> BTreeSet<u64> {
    sets.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&m| pair(i as u64, m))).collect()
}

/// `(c)_i = {m : <i, m> in c}`.
pub fn project(c: &BTreeSet<u64>, i: u64) -> BTreeSet<u64> {
    c.iter().map(|&x| unpair(x)).filter(|&(j, _)| j == i).map(|(_, m)| m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(0, 1), 2);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(unpair(2), (0, 1));
        for c in 0..10_000 {
            let (i, m) = unpair(c);
            assert_eq!(pair(i, m), c);
        }
    }

    #[test]
    fn family_examples() {
        let fam = vec![BTreeSet::from([1]), BTreeSet::from([0])];
        assert_eq!(code_family(&fam), BTreeSet::from([1, 2]));
        assert_eq!(project(&BTreeSet::from([1, 2]), 0), BTreeSet::from([1]));
        assert_eq!(project(&BTreeSet::from([1, 2]), 1), BTreeSet::from([0]));
    }

    #[test]
    fn large_values() {
        let c = pair(3_000_000_000, 5);
        assert_eq!(unpair(c), (3_000_000_000, 5));
        assert_eq!(try_pair(u64::MAX, 1), None);
        let (i, m) = unpair(u64::MAX);
        assert_eq!(pair(i, m), u64::MAX);
    }
}
