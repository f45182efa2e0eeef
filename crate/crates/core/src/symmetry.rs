//! Automorphisms, pointwise stabilizers, orbits and definable closure.
//!
//! On a finite structure a set is definable with parameters `p` exactly when
//! it is invariant under the automorphisms fixing each element of `p`, so
//! orbits of the pointwise stabilizer are the atoms of the definable sets.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::model::{Element, FiniteStructure};
use crate::par;

/// Largest universe for which the whole group is listed.
pub const LISTING_LIMIT: usize = 10;
/// Groups up to this order are checked for closure when constructed.
const CLOSURE_CHECK_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymmetryError {
    #[error("element {element} is outside the universe 0..{size}")]
    OutOfRange { element: Element, size: usize },
}

/// A bijection on `0..n`, stored as its image array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Permutation(Vec<Element>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn from_images(images: Vec<Element>) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Permutation(images))
    }

    pub fn apply(&self, e: Element) -> Element {
        self.0[e]
    }

    pub fn images(&self) -> &[Element] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// `self` after `other`: `e -> self(other(e))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&e| self.0[e]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// `Aut(S / fixed)`: all members when `complete`, otherwise a set of
/// automorphisms with the same orbits (used above [`LISTING_LIMIT`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AutomorphismGroup {
    pub degree: usize,
    pub fixed: Vec<Element>,
    pub members: Vec<Permutation>,
    pub complete: bool,
}

impl AutomorphismGroup {
    pub fn order(&self) -> Option<usize> {
        self.complete.then_some(self.members.len())
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.members.binary_search(p).is_ok()
    }

    /// Identity, closure under composition and inverses.
    pub fn satisfies_group_axioms(&self) -> bool {
        if !self.complete {
            return false;
        }
        if !self.contains(&Permutation::identity(self.degree)) {
            return false;
        }
        let set: HashSet<&Permutation> = self.members.iter().collect();
        self.members
            .iter()
            .all(|p| set.contains(&p.inverse()) && self.members.iter().all(|q| set.contains(&p.compose(q))))
    }

    pub fn orbits(&self) -> OrbitPartition {
        let mut uf = UnionFind::new(self.degree);
        for p in &self.members {
            for e in 0..self.degree {
                uf.union(e, p.apply(e));
            }
        }
        OrbitPartition::from_union_find(&mut uf, self.fixed.clone())
    }
}

/// Orbits of a pointwise stabilizer, each ascending, ordered by least element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitPartition {
    pub blocks: Vec<Vec<Element>>,
    pub fixed: Vec<Element>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

impl OrbitPartition {
    fn from_union_find(uf: &mut UnionFind, fixed: Vec<Element>) -> Self {
        let n = uf.parent.len();
        let mut by_root: BTreeMap<usize, Vec<Element>> = BTreeMap::new();
        for e in 0..n {
            by_root.entry(uf.find(e)).or_default().push(e);
        }
        let mut blocks: Vec<Vec<Element>> = by_root.into_values().collect();
        blocks.sort();
        let mut block_of = vec![0; n];
        for (i, b) in blocks.iter().enumerate() {
            for &e in b {
                block_of[e] = i;
            }
        }
        OrbitPartition { blocks, fixed, block_of }
    }

    pub fn orbit_of(&self, e: Element) -> &[Element] {
        &self.blocks[self.block_of[e]]
    }

    pub fn block_index(&self, e: Element) -> usize {
        self.block_of[e]
    }

    pub fn universe_size(&self) -> usize {
        self.block_of.len()
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &OrbitPartition) -> bool {
        self.blocks.iter().all(|b| {
            let target = coarser.block_index(b[0]);
            b.iter().all(|&e| coarser.block_index(e) == target)
        })
    }

    /// Whether `set` is a union of blocks.
    pub fn is_union_of_blocks(&self, set: &[Element]) -> bool {
        let members: BTreeSet<Element> = set.iter().copied().collect();
        set.iter().all(|&e| self.orbit_of(e).iter().all(|o| members.contains(o)))
    }

    pub fn singletons(&self) -> Vec<Element> {
        self.blocks.iter().filter(|b| b.len() == 1).map(|b| b[0]).collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut e: usize) -> usize {
        while self.parent[e] != e {
            self.parent[e] = self.parent[self.parent[e]];
            e = self.parent[e];
        }
        e
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

// ------------------------------------------------------------------- search

/// Relations, function graphs and constants flattened into tuple lists, with
/// a refined colouring of the universe.
struct SearchContext {
    n: usize,
    /// (tuple set, tuples grouped by the search step at which they close)
    relations: Vec<HashSet<Vec<Element>>>,
    checks: Vec<Vec<(usize, Vec<Element>)>>,
    colour: Vec<usize>,
    order: Vec<Element>,
    is_fixed: Vec<bool>,
}

impl SearchContext {
    fn new(s: &FiniteStructure, fixed: &[Element]) -> Self {
        let n = s.size();
        let mut relations: Vec<HashSet<Vec<Element>>> = Vec::new();
        for r in s.relations().values() {
            relations.push(r.tuples.iter().cloned().collect());
        }
        for f in s.functions().values() {
            let graph = crate::model::tuples(n, f.arity)
                .map(|mut args| {
                    let v = f.apply(n, &args);
                    args.push(v);
                    args
                })
                .collect();
            relations.push(graph);
        }
        let mut is_fixed = vec![false; n];
        for &e in fixed {
            is_fixed[e] = true;
        }
        // Constants must be fixed by every automorphism.
        for &c in s.constants().values() {
            is_fixed[c] = true;
        }
        let colour = refine_colours(n, &relations, fixed, s);
        let order: Vec<Element> = (0..n).filter(|&e| !is_fixed[e]).collect();
        let mut step_of = vec![usize::MAX; n];
        for (i, &e) in order.iter().enumerate() {
            step_of[e] = i;
        }
        let mut checks = vec![Vec::new(); order.len()];
        for (ri, rel) in relations.iter().enumerate() {
            let mut sorted: Vec<&Vec<Element>> = rel.iter().collect();
            sorted.sort();
            for t in sorted {
                let step = t.iter().filter(|&&e| !is_fixed[e]).map(|&e| step_of[e]).max();
                if let Some(step) = step {
                    checks[step].push((ri, t.clone()));
                }
            }
        }
        SearchContext { n, relations, checks, colour, order, is_fixed }
    }

    fn consistent(&self, step: usize, image: &[Element]) -> bool {
        self.checks[step].iter().all(|(ri, t)| {
            let mapped: Vec<Element> = t.iter().map(|&e| image[e]).collect();
            self.relations[*ri].contains(&mapped)
        })
    }

    fn initial_image(&self) -> (Vec<Element>, Vec<bool>) {
        let mut image = vec![usize::MAX; self.n];
        let mut used = vec![false; self.n];
        for e in 0..self.n {
            if self.is_fixed[e] {
                image[e] = e;
                used[e] = true;
            }
        }
        (image, used)
    }

    fn candidates(&self, step: usize, used: &[bool]) -> Vec<Element> {
        let e = self.order[step];
        (0..self.n).filter(|&c| !used[c] && self.colour[c] == self.colour[e]).collect()
    }

    /// Extends the partial image from `step`, calling `emit` on each complete
    /// automorphism; stops early once `emit` returns false.
    fn extend(
        &self,
        step: usize,
        image: &mut Vec<Element>,
        used: &mut Vec<bool>,
        emit: &mut dyn FnMut(&[Element]) -> bool,
    ) -> bool {
        if step == self.order.len() {
            return emit(image);
        }
        let e = self.order[step];
        for c in self.candidates(step, used) {
            image[e] = c;
            used[c] = true;
            let keep_going = if self.consistent(step, image) { self.extend(step + 1, image, used, emit) } else { true };
            used[c] = false;
            image[e] = usize::MAX;
            if !keep_going {
                return false;
            }
        }
        true
    }

    fn all(&self) -> Vec<Permutation> {
        let (image, used) = self.initial_image();
        if self.order.is_empty() {
            return vec![Permutation(image)];
        }
        let first = self.candidates(0, &used);
        let chunks = par::map(&first, |&c| {
            let mut image = image.clone();
            let mut used = used.clone();
            let e = self.order[0];
            image[e] = c;
            used[c] = true;
            let mut out = Vec::new();
            if self.consistent(0, &image) {
                self.extend(1, &mut image, &mut used, &mut |img| {
                    out.push(Permutation(img.to_vec()));
                    true
                });
            }
            out
        });
        let mut all: Vec<Permutation> = chunks.into_iter().flatten().collect();
        all.sort();
        all
    }

    /// Some automorphism with `from -> to`, if one exists.
    fn find_mapping(&self, from: Element, to: Element) -> Option<Permutation> {
        if self.colour[from] != self.colour[to] {
            return None;
        }
        let (mut image, mut used) = self.initial_image();
        if self.is_fixed[from] {
            return (from == to).then(|| Permutation::identity(self.n));
        }
        if used[to] {
            return None;
        }
        // Search `from` first so the constraint is applied at the root.
        let mut order = vec![from];
        order.extend(self.order.iter().copied().filter(|&e| e != from));
        let reordered = SearchContext::with_order(self, order);
        image[from] = to;
        used[to] = true;
        if !reordered.consistent(0, &image) {
            return None;
        }
        let mut found = None;
        reordered.extend(1, &mut image, &mut used, &mut |img| {
            found = Some(Permutation(img.to_vec()));
            false
        });
        found
    }

    fn with_order(base: &SearchContext, order: Vec<Element>) -> SearchContext {
        let mut step_of = vec![usize::MAX; base.n];
        for (i, &e) in order.iter().enumerate() {
            step_of[e] = i;
        }
        let mut checks = vec![Vec::new(); order.len()];
        for (ri, rel) in base.relations.iter().enumerate() {
            for t in rel {
                let step = t.iter().filter(|&&e| !base.is_fixed[e]).map(|&e| step_of[e]).max();
                if let Some(step) = step {
                    checks[step].push((ri, t.clone()));
                }
            }
        }
        SearchContext {
            n: base.n,
            relations: base.relations.clone(),
            checks,
            colour: base.colour.clone(),
            order,
            is_fixed: base.is_fixed.clone(),
        }
    }
}

/// Colour refinement: start from fixed points, constants and tuple
/// participation counts, then split by neighbouring colours until stable.
fn refine_colours(n: usize, relations: &[HashSet<Vec<Element>>], fixed: &[Element], s: &FiniteStructure) -> Vec<usize> {
    let mut initial: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, sig) in initial.iter_mut().enumerate() {
        // Position in the fixed list (or usize::MAX) individualizes parameters.
        sig.push(fixed.iter().position(|&f| f == e).unwrap_or(usize::MAX));
        for (ci, &c) in s.constants().values().enumerate() {
            if c == e {
                sig.push(ci);
            }
        }
        sig.push(usize::MAX);
    }
    let mut colour = canonical_ids(&initial);
    let mut incidence: Vec<Vec<(usize, usize, &Vec<Element>)>> = vec![Vec::new(); n];
    for (ri, rel) in relations.iter().enumerate() {
        for t in rel {
            for (pos, &e) in t.iter().enumerate() {
                incidence[e].push((ri, pos, t));
            }
        }
    }
    loop {
        let sigs: Vec<Vec<usize>> = (0..n)
            .map(|e| {
                let mut parts: Vec<Vec<usize>> = incidence[e]
                    .iter()
                    .map(|(ri, pos, t)| {
                        let mut v = vec![*ri, *pos];
                        v.extend(t.iter().map(|&x| colour[x]));
                        v
                    })
                    .collect();
                parts.sort();
                let mut sig = vec![colour[e]];
                for p in parts {
                    sig.push(p.len());
                    sig.extend(p);
                }
                sig
            })
            .collect();
        let next = canonical_ids(&sigs);
        let classes = |c: &[usize]| c.iter().collect::<BTreeSet<_>>().len();
        if classes(&next) == classes(&colour) {
            return next;
        }
        colour = next;
    }
}

fn canonical_ids(sigs: &[Vec<usize>]) -> Vec<usize> {
    let distinct: BTreeSet<&Vec<usize>> = sigs.iter().collect();
    let ids: BTreeMap<&Vec<usize>, usize> = distinct.into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    sigs.iter().map(|s| ids[s]).collect()
}

fn check_range(s: &FiniteStructure, fixed: &[Element]) -> Result<(), SymmetryError> {
    match fixed.iter().find(|&&e| e >= s.size()) {
        Some(&element) => Err(SymmetryError::OutOfRange { element, size: s.size() }),
        None => Ok(()),
    }
}

/// Automorphisms of `s` fixing every element of `fixed`, in lexicographic order.
pub fn stabilizer_group(s: &FiniteStructure, fixed: &[Element]) -> Result<AutomorphismGroup, SymmetryError> {
    check_range(s, fixed)?;
    let ctx = SearchContext::new(s, fixed);
    if s.size() <= LISTING_LIMIT {
        let members = ctx.all();
        let group = AutomorphismGroup { degree: s.size(), fixed: fixed.to_vec(), members, complete: true };
        debug_assert!(group.contains(&Permutation::identity(s.size())));
        if group.members.len() <= CLOSURE_CHECK_LIMIT {
            assert!(group.satisfies_group_axioms(), "automorphism search returned a non-group");
        }
        Ok(group)
    } else {
        Ok(AutomorphismGroup {
            degree: s.size(),
            fixed: fixed.to_vec(),
            members: orbit_generators(&ctx),
            complete: false,
        })
    }
}

fn orbit_generators(ctx: &SearchContext) -> Vec<Permutation> {
    let n = ctx.n;
    let mut uf = UnionFind::new(n);
    let mut gens = vec![Permutation::identity(n)];
    for a in 0..n {
        if uf.find(a) != a {
            continue;
        }
        for b in a + 1..n {
            if uf.find(b) == uf.find(a) {
                continue;
            }
            if let Some(p) = ctx.find_mapping(a, b) {
                for e in 0..n {
                    uf.union(e, p.apply(e));
                }
                gens.push(p);
            }
        }
    }
    gens.sort();
    gens.dedup();
    gens
}

pub fn orbit_partition(s: &FiniteStructure, fixed: &[Element]) -> Result<OrbitPartition, SymmetryError> {
    Ok(stabilizer_group(s, fixed)?.orbits())
}

/// Elements definable from `fixed`: the singleton orbits of its stabilizer.
pub fn definable_closure(s: &FiniteStructure, fixed: &[Element]) -> Result<Vec<Element>, SymmetryError> {
    Ok(orbit_partition(s, fixed)?.singletons())
}

/// Whether `p` is an automorphism of `s` (fixing constants and preserving
/// relations and function tables).
pub fn is_automorphism(s: &FiniteStructure, p: &Permutation) -> bool {
    p.degree() == s.size() && s.relabel(p.images()) == *s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_structure;

    fn p3() -> FiniteStructure {
        load_structure("universe 3\nrelation E 2: (0,1) (1,0) (1,2) (2,1)\n").unwrap()
    }

    fn c4() -> FiniteStructure {
        load_structure("universe 4\nrelation E 2: (0,1) (1,0) (1,2) (2,1) (2,3) (3,2) (3,0) (0,3)\n").unwrap()
    }

    fn perms(list: &[&[usize]]) -> Vec<Permutation> {
        list.iter().map(|p| Permutation(p.to_vec())).collect()
    }

    #[test]
    fn path_group() {
        let g = stabilizer_group(&p3(), &[]).unwrap();
        assert_eq!(g.members, perms(&[&[0, 1, 2], &[2, 1, 0]]));
        assert_eq!(orbit_partition(&p3(), &[]).unwrap().blocks, vec![vec![0, 2], vec![1]]);
        assert_eq!(definable_closure(&p3(), &[]).unwrap(), vec![1]);
    }

    #[test]
    fn cycle_groups() {
        assert_eq!(stabilizer_group(&c4(), &[]).unwrap().members.len(), 8);
        let g = stabilizer_group(&c4(), &[0]).unwrap();
        assert_eq!(g.members, perms(&[&[0, 1, 2, 3], &[0, 3, 2, 1]]));
        assert_eq!(orbit_partition(&c4(), &[0]).unwrap().blocks, vec![vec![0], vec![1, 3], vec![2]]);
        assert_eq!(definable_closure(&c4(), &[0]).unwrap(), vec![0, 2]);
    }

    #[test]
    fn out_of_range() {
        assert_eq!(stabilizer_group(&p3(), &[3]).unwrap_err(), SymmetryError::OutOfRange { element: 3, size: 3 });
    }

    #[test]
    fn constants_and_functions_are_respected() {
        // Cyclic successor on 4 points: rotations only; the constant pins 0.
        let s = load_structure("universe 4\nfunction s 1: 0 -> 1 ; 1 -> 2 ; 2 -> 3 ; 3 -> 0\n").unwrap();
        assert_eq!(stabilizer_group(&s, &[]).unwrap().members.len(), 4);
        let s =
            load_structure("universe 4\nfunction s 1: 0 -> 1 ; 1 -> 2 ; 2 -> 3 ; 3 -> 0\nconstant z = 0\n").unwrap();
        assert_eq!(stabilizer_group(&s, &[]).unwrap().members.len(), 1);
    }

    #[test]
    fn large_structures_use_orbit_generators() {
        // A 12-cycle: transitive, and the stabilizer of 0 has orbits {0}, {6}, {k, 12-k}.
        let edges: Vec<Vec<usize>> = (0..12).flat_map(|i| [vec![i, (i + 1) % 12], vec![(i + 1) % 12, i]]).collect();
        let s = FiniteStructure::new(12).unwrap().with_relation("E", 2, edges).unwrap();
        let g = stabilizer_group(&s, &[]).unwrap();
        assert!(!g.complete);
        assert!(g.members.iter().all(|p| is_automorphism(&s, p)));
        assert_eq!(g.orbits().blocks, vec![(0..12).collect::<Vec<_>>()]);
        let orbits = orbit_partition(&s, &[0]).unwrap();
        assert_eq!(orbits.blocks.len(), 7);
        assert_eq!(orbits.orbit_of(6), &[6]);
        assert_eq!(orbits.orbit_of(1), &[1, 11]);
    }

    #[test]
    fn group_axioms_hold_for_members() {
        for s in [p3(), c4()] {
            for fixed in [vec![], vec![0], vec![1, 2]] {
                let g = stabilizer_group(&s, &fixed).unwrap();
                assert!(g.satisfies_group_axioms());
                assert!(g.members.iter().all(|p| is_automorphism(&s, p)));
                assert!(g.members.iter().all(|p| fixed.iter().all(|&f| p.apply(f) == f)));
            }
        }
    }
}
