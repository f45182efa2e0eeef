//! Exhaustive families of small relational structures, up to isomorphism.
//!
//! Family syntax: `TEMPLATE@MIN..MAX` followed by optional `+symmetric` /
//! `+irreflexive` filters. Templates are `graph` (one symmetric irreflexive
//! binary `E`), `digraph` (irreflexive binary `E`), `empty`, or
//! `rel:NAME/ARITY,...`.
//!
//! A labeled structure is coded by one bit per free tuple class. It is kept
//! iff its code is minimal among all relabelings, so each isomorphism class
//! appears exactly once, at its least code.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::model::{tuples, Element, FiniteStructure};
use crate::par;

/// Largest number of free tuple classes per size.
pub const MAX_BITS: usize = 24;
/// Largest universe, so that relabelings stay enumerable.
pub const MAX_SIZE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("bad family spec `{spec}`: {msg}")]
    Parse { spec: String, msg: String },
    #[error("size {size} needs {bits} tuple bits; at most {MAX_BITS} supported")]
    TooLarge { size: usize, bits: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureFamilySpec {
    pub relations: Vec<(String, usize)>,
    pub min_size: usize,
    pub max_size: usize,
    pub symmetric: bool,
    pub irreflexive: bool,
}

impl FromStr for StructureFamilySpec {
    type Err = FamilyError;

    fn from_str(spec: &str) -> Result<Self, FamilyError> {
        let err = |msg: &str| FamilyError::Parse { spec: spec.to_string(), msg: msg.to_string() };
        let mut parts = spec.trim().split('+');
        let head = parts.next().unwrap_or("");
        let (template, range) = head.split_once('@').ok_or_else(|| err("expected TEMPLATE@MIN..MAX"))?;
        let (lo, hi) = range.split_once("..").ok_or_else(|| err("expected MIN..MAX"))?;
        let min_size: usize = lo.trim().parse().map_err(|_| err("bad minimum size"))?;
        let max_size: usize = hi.trim().parse().map_err(|_| err("bad maximum size"))?;
        if min_size == 0 || min_size > max_size {
            return Err(err("need 1 <= MIN <= MAX"));
        }
        if max_size > MAX_SIZE {
            return Err(err(&format!("sizes above {MAX_SIZE} are not supported")));
        }
        let (mut symmetric, mut irreflexive) = (false, false);
        let relations = match template.trim() {
            "graph" => {
                symmetric = true;
                irreflexive = true;
                vec![("E".to_string(), 2)]
            }
            "digraph" => {
                irreflexive = true;
                vec![("E".to_string(), 2)]
            }
            "empty" => Vec::new(),
            other => {
                let list = other.strip_prefix("rel:").ok_or_else(|| err("unknown template"))?;
                let mut rels = Vec::new();
                for item in list.split(',') {
                    let (name, arity) = item.split_once('/').ok_or_else(|| err("expected NAME/ARITY"))?;
                    let name = name.trim();
                    if !crate::syntax::is_identifier(name) || rels.iter().any(|(n, _)| n == name) {
                        return Err(err(&format!("bad relation name `{name}`")));
                    }
                    let arity: usize = arity.trim().parse().map_err(|_| err("bad arity"))?;
                    rels.push((name.to_string(), arity));
                }
                rels
            }
        };
        for flag in parts {
            match flag.trim() {
                "symmetric" => symmetric = true,
                "irreflexive" => irreflexive = true,
                other => return Err(err(&format!("unknown filter `{other}`"))),
            }
        }
        Ok(StructureFamilySpec { relations, min_size, max_size, symmetric, irreflexive })
    }
}

impl fmt::Display for StructureFamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> = self.relations.iter().map(|(n, a)| format!("{n}/{a}")).collect();
        write!(f, "rel:{}@{}..{}", rels.join(","), self.min_size, self.max_size)?;
        if self.symmetric {
            write!(f, "+symmetric")?;
        }
        if self.irreflexive {
            write!(f, "+irreflexive")?;
        }
        Ok(())
    }
}

/// A member of a family: size and code of the canonical labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FamilyMember {
    pub size: usize,
    pub code: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeCount {
    pub size: usize,
    pub labeled: u64,
    pub classes: u64,
}

/// The free tuple classes of one size, with the induced action of relabelings.
pub struct Layout {
    pub size: usize,
    /// `(relation index, representative tuple)` per bit.
    units: Vec<(usize, Vec<Element>)>,
    /// For each permutation of the universe, the image bit of each bit.
    images: Vec<Vec<usize>>,
}

impl StructureFamilySpec {
    fn canonical_tuple(&self, t: &[Element]) -> Vec<Element> {
        let mut t = t.to_vec();
        if self.symmetric {
            t.sort_unstable();
        }
        t
    }

    fn admits(&self, t: &[Element]) -> bool {
        if self.irreflexive && t.len() > 1 {
            let mut sorted = t.to_vec();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
        }
        !self.symmetric || t.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn layout(&self, size: usize) -> Result<Layout, FamilyError> {
        let mut units = Vec::new();
        for (r, (_, arity)) in self.relations.iter().enumerate() {
            for t in tuples(size, *arity) {
                if self.admits(&t) {
                    units.push((r, t));
                }
            }
        }
        if units.len() > MAX_BITS {
            return Err(FamilyError::TooLarge { size, bits: units.len() });
        }
        let index = |r: usize, t: &[Element]| units.iter().position(|(q, u)| *q == r && u == t).expect("closed");
        let images = permutations(size)
            .iter()
            .map(|p| {
                units
                    .iter()
                    .map(|(r, t)| {
                        let image: Vec<Element> = t.iter().map(|&e| p[e]).collect();
                        index(*r, &self.canonical_tuple(&image))
                    })
                    .collect()
            })
            .collect();
        Ok(Layout { size, units, images })
    }

    pub fn structure(&self, layout: &Layout, code: u64) -> FiniteStructure {
        let mut s = FiniteStructure::new(layout.size).expect("nonempty");
        for (r, (name, arity)) in self.relations.iter().enumerate() {
            let mut set = Vec::new();
            for (bit, (q, t)) in layout.units.iter().enumerate() {
                if *q == r && code >> bit & 1 == 1 {
                    if self.symmetric {
                        set.extend(distinct_permutations(t));
                    } else {
                        set.push(t.clone());
                    }
                }
            }
            s = s.with_relation(name, *arity, set).expect("tuples in range");
        }
        s
    }

    /// Canonical members of every size, in enumeration order.
    pub fn members(&self) -> Result<(Vec<FamilyMember>, Vec<SizeCount>), FamilyError> {
        let mut members = Vec::new();
        let mut counts = Vec::new();
        for size in self.min_size..=self.max_size {
            let layout = self.layout(size)?;
            let labeled = 1u64 << layout.units.len();
            let keep = par::map_range(labeled as usize, |c| layout.is_canonical(c as u64));
            let before = members.len();
            members.extend((0..labeled).filter(|&c| keep[c as usize]).map(|code| FamilyMember { size, code }));
            counts.push(SizeCount { size, labeled, classes: (members.len() - before) as u64 });
        }
        Ok((members, counts))
    }
}

impl Layout {
    pub fn bits(&self) -> usize {
        self.units.len()
    }

    fn relabel(&self, image: &[usize], code: u64) -> u64 {
        let mut out = 0;
        for (bit, &to) in image.iter().enumerate() {
            out |= (code >> bit & 1) << to;
        }
        out
    }

    pub fn canonical_code(&self, code: u64) -> u64 {
        self.images.iter().map(|im| self.relabel(im, code)).min().unwrap_or(code)
    }

    pub fn is_canonical(&self, code: u64) -> bool {
        self.images.iter().all(|im| self.relabel(im, code) >= code)
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<Element>> {
    let mut out = Vec::new();
    let mut p: Vec<Element> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("exists");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

fn distinct_permutations(t: &[Element]) -> Vec<Vec<Element>> {
    let mut out: Vec<Vec<Element>> = permutations(t.len()).iter().map(|p| p.iter().map(|&i| t[i]).collect()).collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(spec: &str) -> Vec<u64> {
        let spec: StructureFamilySpec = spec.parse().unwrap();
        spec.members().unwrap().1.iter().map(|c| c.classes).collect()
    }

    #[test]
    fn graph_counts() {
        assert_eq!(classes("graph@1..5"), vec![1, 2, 4, 11, 34]);
    }

    #[test]
    fn binary_relation_counts() {
        assert_eq!(classes("rel:E/2@1..3"), vec![2, 10, 104]);
        assert_eq!(classes("digraph@1..3"), vec![1, 3, 16]);
    }

    #[test]
    fn labeled_counts_match_closed_form() {
        let spec: StructureFamilySpec = "graph@1..5".parse().unwrap();
        for c in spec.members().unwrap().1 {
            assert_eq!(c.labeled, 1 << (c.size * (c.size - 1) / 2));
        }
        let spec: StructureFamilySpec = "rel:E/2@1..3".parse().unwrap();
        for c in spec.members().unwrap().1 {
            assert_eq!(c.labeled, 1 << (c.size * c.size));
        }
        let spec: StructureFamilySpec = "empty@1..4".parse().unwrap();
        let counts = spec.members().unwrap().1;
        assert!(counts.iter().all(|c| c.labeled == 1 && c.classes == 1));
    }

    #[test]
    fn mixed_signature() {
        assert_eq!(classes("rel:P/1@1..3"), vec![2, 3, 4]);
        let spec: StructureFamilySpec = "rel:E/2,P/1@2..2+symmetric+irreflexive".parse().unwrap();
        assert_eq!(spec.layout(2).unwrap().bits(), 3);
    }

    #[test]
    fn members_are_graphs() {
        let spec: StructureFamilySpec = "graph@3..3".parse().unwrap();
        let layout = spec.layout(3).unwrap();
        let (members, _) = spec.members().unwrap();
        let edges: Vec<usize> =
            members.iter().map(|m| spec.structure(&layout, m.code).relations()["E"].tuples.len()).collect();
        assert_eq!(edges, vec![0, 2, 4, 6]);
    }

    #[test]
    fn bad_specs() {
        for bad in ["graph", "graph@0..2", "graph@3..2", "tree@1..2", "rel:E@1..2", "graph@1..2+odd", "graph@1..9"] {
            assert!(bad.parse::<StructureFamilySpec>().is_err(), "{bad}");
        }
        let spec: StructureFamilySpec = "graph@1..2".parse().unwrap();
        assert_eq!(spec.to_string(), "rel:E/2@1..2+symmetric+irreflexive");
        assert_eq!(spec.to_string().parse::<StructureFamilySpec>().unwrap(), spec);
    }

    #[test]
    fn permutation_order() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }
}
