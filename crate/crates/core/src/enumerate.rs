//! Size-stratified enumeration of formulas up to semantic equivalence.
//!
//! Formulas range over a finite pool of variables (`x` first). The meaning of
//! a formula is its set of satisfying configurations in an
//! [`AssignmentSpace`]; two formulas with the same free variables and the
//! same meaning are interchangeable as subformulas, so each stratum keeps
//! one representative (the first one generated) per `(free variables,
//! meaning)` pair. The representatives of size `<= budget` therefore cover
//! every meaning reachable by some formula of that size.
//!
//! The generalized quantifiers are not enumerated: the definable sets in
//! question are those of the first-order language itself.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::par;
use crate::syntax::{Formula, Quantifier, Term};

/// Default number of variables in the pool (`x`, `y`, `z`).
pub const DEFAULT_VARIABLES: usize = 3;
/// Default maximal AST size.
pub const DEFAULT_BUDGET: usize = 9;
/// Safety valve on the number of stored representatives.
pub const DEFAULT_NODE_LIMIT: usize = 4_000_000;

pub const VARIABLE_NAMES: [&str; 6] = ["x", "y", "z", "w", "u", "v"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("more than {limit} formula classes by size {size}; lower the budget")]
    NodeLimit { limit: usize, size: usize },
    #[error("variable pool must hold between 1 and {} variables", VARIABLE_NAMES.len())]
    BadPool,
}

/// Bitset over configurations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Meaning(Box<[u64]>);

impl Meaning {
    pub fn empty(len: usize) -> Self {
        Meaning(vec![0; len.div_ceil(64)].into_boxed_slice())
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> bool) -> Self {
        let mut m = Self::empty(len);
        for i in 0..len {
            if f(i) {
                m.insert(i);
            }
        }
        m
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            let mut b = bits;
            std::iter::from_fn(move || {
                if b == 0 {
                    return None;
                }
                let t = b.trailing_zeros() as usize;
                b &= b - 1;
                Some(w * 64 + t)
            })
        })
    }

    fn zip(&self, other: &Meaning, f: impl Fn(u64, u64) -> u64, len: usize) -> Meaning {
        let mut out: Box<[u64]> = self.0.iter().zip(other.0.iter()).map(|(&a, &b)| f(a, b)).collect();
        trim(&mut out, len);
        Meaning(out)
    }

    fn complement(&self, len: usize) -> Meaning {
        let mut out: Box<[u64]> = self.0.iter().map(|&a| !a).collect();
        trim(&mut out, len);
        Meaning(out)
    }
}

fn trim(words: &mut [u64], len: usize) {
    let rem = len % 64;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

/// A finite space of variable configurations with atomic formulas and the
/// "same except for variable v" equivalence needed for quantifiers.
pub struct AssignmentSpace {
    pub configs: usize,
    pub variables: usize,
    /// Atomic formulas, their AST size and meaning, in generation order.
    pub atoms: Vec<(Formula, usize, Meaning)>,
    /// `classes[v][c]`: identifier of the class of `c` modulo variable `v`.
    pub classes: Vec<Vec<u32>>,
    /// Value of `x` in each configuration, as an index into `0..x_values`.
    pub x_value: Vec<u32>,
    pub x_values: usize,
}

impl AssignmentSpace {
    fn exists(&self, v: usize, m: &Meaning) -> Meaning {
        let classes = &self.classes[v];
        let mut hit = vec![false; self.configs];
        for c in m.ones() {
            hit[classes[c] as usize] = true;
        }
        Meaning::from_fn(self.configs, |c| hit[classes[c] as usize])
    }

    fn forall(&self, v: usize, m: &Meaning) -> Meaning {
        self.exists(v, &m.complement(self.configs)).complement(self.configs)
    }

    /// Values of `x` satisfying a meaning that does not depend on other variables.
    pub fn x_extension(&self, m: &Meaning) -> Vec<u32> {
        let mut hit = vec![false; self.x_values];
        for c in m.ones() {
            hit[self.x_value[c] as usize] = true;
        }
        (0..self.x_values as u32).filter(|&v| hit[v as usize]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Connective {
    And,
    Or,
    Implies,
    Iff,
}

impl Connective {
    const ALL: [Connective; 4] = [Connective::And, Connective::Or, Connective::Implies, Connective::Iff];

    fn commutative(self) -> bool {
        !matches!(self, Connective::Implies)
    }

    fn apply(self, a: u64, b: u64) -> u64 {
        match self {
            Connective::And => a & b,
            Connective::Or => a | b,
            Connective::Implies => !a | b,
            Connective::Iff => !(a ^ b),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Atom(u32),
    Not(u32),
    Bin(Connective, u32, u32),
    Exists(u8, u32),
    Forall(u8, u32),
}

#[derive(Debug, Clone)]
struct Node {
    op: Op,
    size: u8,
    free: u8,
}

type Key = (u8, Meaning);

/// Representatives of every `(free variables, meaning)` pair up to a size.
pub struct Enumeration<'a> {
    space: &'a AssignmentSpace,
    nodes: Vec<Node>,
    meanings: Vec<Meaning>,
    strata: Vec<Vec<u32>>,
    seen: HashMap<Key, u32>,
    budget_reached: usize,
}

fn free_mask(phi: &Formula, variables: usize) -> u8 {
    let free = phi.free_symbols();
    let mut mask = 0u8;
    for (i, name) in VARIABLE_NAMES.iter().take(variables).enumerate() {
        if free.vars.contains(*name) {
            mask |= 1 << i;
        }
    }
    mask
}

impl<'a> Enumeration<'a> {
    pub fn new(space: &'a AssignmentSpace) -> Result<Self, EnumerationError> {
        if space.variables == 0 || space.variables > VARIABLE_NAMES.len() {
            return Err(EnumerationError::BadPool);
        }
        Ok(Enumeration {
            space,
            nodes: Vec::new(),
            meanings: Vec::new(),
            strata: vec![Vec::new()],
            seen: HashMap::new(),
            budget_reached: 0,
        })
    }

    /// Size of the largest completed stratum.
    pub fn completed_size(&self) -> usize {
        self.budget_reached
    }

    fn push(&mut self, node: Node, meaning: Meaning) -> Option<u32> {
        let key = (node.free, meaning);
        if self.seen.contains_key(&key) {
            return None;
        }
        let id = self.nodes.len() as u32;
        self.seen.insert(key.clone(), id);
        self.meanings.push(key.1);
        self.strata[node.size as usize].push(id);
        self.nodes.push(node);
        Some(id)
    }

    /// Builds the next stratum; returns the ids it added.
    pub fn grow(&mut self, limit: usize) -> Result<&[u32], EnumerationError> {
        let size = self.budget_reached + 1;
        self.strata.push(Vec::new());
        let space = self.space;
        let configs = space.configs;
        let vars = space.variables;

        for (i, (phi, atom_size, meaning)) in space.atoms.iter().enumerate() {
            if *atom_size == size {
                let free = free_mask(phi, vars);
                self.push(Node { op: Op::Atom(i as u32), size: size as u8, free }, meaning.clone());
            }
        }

        if size >= 2 {
            let prev = self.strata[size - 1].clone();
            let unary = par::map(&prev, |&id| {
                let node = &self.nodes[id as usize];
                let m = &self.meanings[id as usize];
                let mut out = vec![(Op::Not(id), node.free, m.complement(configs))];
                for v in 0..vars {
                    if node.free & (1 << v) != 0 {
                        let free = node.free & !(1 << v);
                        out.push((Op::Exists(v as u8, id), free, space.exists(v, m)));
                        out.push((Op::Forall(v as u8, id), free, space.forall(v, m)));
                    }
                }
                out.retain(|(_, free, m)| !self.seen.contains_key(&(*free, m.clone())));
                out
            });
            for (op, free, m) in unary.into_iter().flatten() {
                self.push(Node { op, size: size as u8, free }, m);
            }
        }

        for left_size in 1..size.saturating_sub(1) {
            let right_size = size - 1 - left_size;
            let lefts = self.strata[left_size].clone();
            let rights = &self.strata[right_size];
            let batches = par::map(&lefts, |&l| {
                let ln = &self.nodes[l as usize];
                let lm = &self.meanings[l as usize];
                let mut out = Vec::new();
                for &r in rights {
                    let rn = &self.nodes[r as usize];
                    let rm = &self.meanings[r as usize];
                    let free = ln.free | rn.free;
                    for conn in Connective::ALL {
                        if conn.commutative() && (left_size > right_size || (left_size == right_size && l > r)) {
                            continue;
                        }
                        let m = lm.zip(rm, |a, b| conn.apply(a, b), configs);
                        let key = (free, m);
                        if !self.seen.contains_key(&key) {
                            out.push((Op::Bin(conn, l, r), key.0, key.1));
                        }
                    }
                }
                out
            });
            for (op, free, m) in batches.into_iter().flatten() {
                self.push(Node { op, size: size as u8, free }, m);
                if self.nodes.len() > limit {
                    return Err(EnumerationError::NodeLimit { limit, size });
                }
            }
        }
        if self.nodes.len() > limit {
            return Err(EnumerationError::NodeLimit { limit, size });
        }
        self.budget_reached = size;
        Ok(&self.strata[size])
    }

    pub fn run(&mut self, budget: usize, limit: usize) -> Result<(), EnumerationError> {
        while self.budget_reached < budget {
            self.grow(limit)?;
        }
        Ok(())
    }

    /// Representatives whose free variables are among `{x}`.
    pub fn properties(&self) -> impl Iterator<Item = u32> + '_ {
        self.strata.iter().flatten().copied().filter(|&id| self.nodes[id as usize].free & !1 == 0)
    }

    pub fn stratum(&self, size: usize) -> &[u32] {
        &self.strata[size]
    }

    pub fn is_property(&self, id: u32) -> bool {
        self.nodes[id as usize].free & !1 == 0
    }

    pub fn meaning(&self, id: u32) -> &Meaning {
        &self.meanings[id as usize]
    }

    pub fn size_of(&self, id: u32) -> usize {
        self.nodes[id as usize].size as usize
    }

    pub fn x_extension(&self, id: u32) -> Vec<u32> {
        self.space.x_extension(&self.meanings[id as usize])
    }

    /// Distinct `x`-extensions of properties, each with its first representative.
    pub fn property_extensions(&self) -> BTreeMap<Vec<u32>, u32> {
        let mut out = BTreeMap::new();
        for id in self.properties() {
            out.entry(self.x_extension(id)).or_insert(id);
        }
        out
    }

    pub fn formula(&self, id: u32) -> Formula {
        let var = |v: u8| VARIABLE_NAMES[v as usize];
        match self.nodes[id as usize].op {
            Op::Atom(i) => self.space.atoms[i as usize].0.clone(),
            Op::Not(c) => Formula::not(self.formula(c)),
            Op::Bin(conn, l, r) => {
                let (l, r) = (self.formula(l), self.formula(r));
                match conn {
                    Connective::And => Formula::and(l, r),
                    Connective::Or => Formula::or(l, r),
                    Connective::Implies => Formula::implies(l, r),
                    Connective::Iff => Formula::iff(l, r),
                }
            }
            Op::Exists(v, c) => Formula::quant(Quantifier::Exists, var(v), self.formula(c)),
            Op::Forall(v, c) => Formula::quant(Quantifier::Forall, var(v), self.formula(c)),
        }
    }
}

/// Terms of the pool sorted by AST size (function applications count one each).
pub(crate) fn terms_by_size(base: Vec<Term>, functions: &[(String, usize)], max_size: usize) -> Vec<Vec<Term>> {
    let mut out = vec![base];
    for size in 1..=max_size {
        let mut level = Vec::new();
        for (f, arity) in functions {
            if *arity == 0 {
                if size == 1 {
                    level.push(Term::Apply(f.clone(), Vec::new()));
                }
                continue;
            }
            for split in compositions(size - 1, *arity) {
                let choices: Vec<&Vec<Term>> = split.iter().map(|&s| &out[s]).collect();
                for args in cartesian(&choices) {
                    level.push(Term::Apply(f.clone(), args));
                }
            }
        }
        out.push(level);
    }
    out
}

/// Ordered ways to write `total` as a sum of `parts` nonnegative integers.
pub(crate) fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub(crate) fn cartesian<T: Clone>(choices: &[&Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for o in options.iter() {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}
