//! Exhaustive checks of the typicality axioms on finite structures.
//!
//! Parameter lists are taken literally as tuples (order and repetitions
//! included); nothing is normalized to sets before asking `Tp`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::corpus;
use crate::engine::{classify_element, is_majority, EngineError};
use crate::family::{permutations, FamilyError, FamilyMember, SizeCount, StructureFamilySpec};
use crate::model::{extension, tuples, Element, FiniteStructure, Valuation};
use crate::par;
use crate::symmetry::{orbit_partition, OrbitPartition};
use crate::syntax::Formula;

/// Cap on stored violations; the total is always counted.
pub const VIOLATION_CAP: usize = 32;
/// Cap on the number of parameter tuples a single check may visit.
pub const TUPLE_LIMIT: usize = 200_000;
/// Largest universe for the raw (all subsets) filter check.
pub const RAW_FILTER_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AxiomError {
    #[error("budget exceeded: {needed} parameter tuples at arity {arity}, limit {TUPLE_LIMIT}")]
    Budget { needed: usize, arity: usize },
    #[error("universe of size {0} too large for an all-subsets check")]
    TooLarge(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Axiom {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    #[serde(rename = "FILTER")]
    Filter,
}

impl Axiom {
    pub const CHECKABLE: [Axiom; 6] = [Axiom::T1, Axiom::T2, Axiom::T3, Axiom::T4, Axiom::T5, Axiom::T6];
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::T1 => "T1",
            Axiom::T2 => "T2",
            Axiom::T3 => "T3",
            Axiom::T4 => "T4",
            Axiom::T5 => "T5",
            Axiom::T6 => "T6",
            Axiom::Filter => "FILTER",
        };
        f.write_str(s)
    }
}

impl FromStr for Axiom {
    type Err = AxiomError;

    fn from_str(s: &str) -> Result<Self, AxiomError> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(Axiom::T1),
            "T2" => Ok(Axiom::T2),
            "T3" => Ok(Axiom::T3),
            "T4" => Ok(Axiom::T4),
            "T5" => Ok(Axiom::T5),
            "T6" => Ok(Axiom::T6),
            "FILTER" => Ok(Axiom::Filter),
            _ => Err(AxiomError::UnknownAxiom(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bounds {
    /// Longest parameter tuple considered.
    pub arity: usize,
    /// Largest AST size of the formulas used for T6.
    pub budget: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { arity: 3, budget: crate::enumerate::DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    HoldsWithCaveat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterSets {
    Raw,
    Definable,
}

/// One failing instance. Every variant can be re-verified with
/// [`Violation::recheck`], which goes through `classify_element` directly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// No typical element over `params`.
    NoTypical {
        params: Vec<Element>,
    },
    /// `Tp(a, c b)` but not `Tp(a, b)`.
    Monotonicity {
        a: Element,
        c: Element,
        params: Vec<Element>,
    },
    /// `Tp(a, params)` differs from `Tp(a, variant)`.
    Permutation {
        a: Element,
        params: Vec<Element>,
        variant: Vec<Element>,
    },
    Duplication {
        a: Element,
        params: Vec<Element>,
        variant: Vec<Element>,
    },
    /// `Tp(a, a)`.
    Reflexive {
        a: Element,
    },
    /// `Tp(a, c)` and `Tp(b, a c)` but not `Tp(a, b c)`.
    Exchange {
        a: Element,
        b: Element,
        params: Vec<Element>,
    },
    /// Every `Tp(., z y)` satisfies the formula, but the `Tp(., y)` element `x` does not.
    Scheme {
        formula: String,
        names: Vec<String>,
        params: Vec<Element>,
        z: Element,
        x: Element,
    },
    /// Two majority sets whose intersection is not a majority.
    Intersection {
        sets: FilterSets,
        left: Vec<Element>,
        right: Vec<Element>,
        meet: Vec<Element>,
    },
}

fn cons(c: Element, rest: &[Element]) -> Vec<Element> {
    let mut v = Vec::with_capacity(rest.len() + 1);
    v.push(c);
    v.extend_from_slice(rest);
    v
}

impl Violation {
    /// True iff the instance is still a violation when recomputed from scratch.
    pub fn recheck(&self, s: &FiniteStructure) -> Result<bool, EngineError> {
        let tp = |a: Element, p: &[Element]| -> Result<bool, EngineError> { Ok(classify_element(s, a, p)?.typical) };
        Ok(match self {
            Violation::NoTypical { params } => {
                let mut any = false;
                for a in s.universe() {
                    any |= tp(a, params)?;
                }
                !any
            }
            Violation::Monotonicity { a, c, params } => tp(*a, &cons(*c, params))? && !tp(*a, params)?,
            Violation::Permutation { a, params, variant } | Violation::Duplication { a, params, variant } => {
                tp(*a, params)? != tp(*a, variant)?
            }
            Violation::Reflexive { a } => tp(*a, &[*a])?,
            Violation::Exchange { a, b, params } => {
                tp(*a, params)? && tp(*b, &cons(*a, params))? && !tp(*a, &cons(*b, params))?
            }
            Violation::Scheme { formula, names, params, z, x } => {
                let sig = s.signature();
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let Ok(phi) = crate::syntax::parse_formula_with_params(formula, sig, &refs) else {
                    return Ok(false);
                };
                let v: Valuation = refs.iter().copied().zip(params.iter().copied()).collect();
                let ext = extension(s, &phi, "x", &v).map_err(EngineError::from)?;
                let zy = cons(*z, params);
                let mut premise = true;
                for e in s.universe() {
                    if tp(e, &zy)? && !ext.contains(&e) {
                        premise = false;
                    }
                }
                premise && tp(*x, params)? && !ext.contains(x)
            }
            Violation::Intersection { sets, left, right, meet } => {
                let n = s.size();
                let expected: Vec<Element> = left.iter().copied().filter(|e| right.contains(e)).collect();
                let definable_ok = match sets {
                    FilterSets::Raw => true,
                    FilterSets::Definable => {
                        let orbits = orbit_partition(s, &[]).map_err(EngineError::from)?;
                        orbits.is_union_of_blocks(left) && orbits.is_union_of_blocks(right)
                    }
                };
                definable_ok
                    && expected == *meet
                    && is_majority(left.len(), n)
                    && is_majority(right.len(), n)
                    && !is_majority(meet.len(), n)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<String>,
    pub bounds: Bounds,
    pub verdict: Verdict,
    /// Instances examined.
    pub checked: usize,
    pub total_violations: usize,
    pub violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
}

impl AxiomReport {
    pub fn named(mut self, name: &str) -> Self {
        self.structure = Some(name.to_string());
        self
    }
}

struct Collector {
    checked: usize,
    total: usize,
    kept: Vec<Violation>,
}

impl Collector {
    fn new() -> Self {
        Collector { checked: 0, total: 0, kept: Vec::new() }
    }

    fn check(&mut self, ok: bool, v: impl FnOnce() -> Violation) {
        self.checked += 1;
        if !ok {
            self.total += 1;
            if self.kept.len() < VIOLATION_CAP {
                self.kept.push(v());
            }
        }
    }

    fn report(self, axiom: Axiom, bounds: Bounds, caveat: Option<String>) -> AxiomReport {
        let verdict = match (self.total, &caveat) {
            (0, None) => Verdict::Holds,
            (0, Some(_)) => Verdict::HoldsWithCaveat,
            _ => Verdict::Fails,
        };
        AxiomReport {
            axiom,
            structure: None,
            bounds,
            verdict,
            checked: self.checked,
            total_violations: self.total,
            violations: self.kept,
            caveat,
        }
    }
}

/// Stabilizer orbits for every parameter tuple up to a length.
pub struct TypicalityTable {
    n: usize,
    orbits: HashMap<Vec<Element>, OrbitPartition>,
}

impl TypicalityTable {
    pub fn build(s: &FiniteStructure, max_len: usize) -> Result<Self, AxiomError> {
        let n = s.size();
        let needed: usize = (0..=max_len).map(|k| n.saturating_pow(k as u32)).sum();
        if needed > TUPLE_LIMIT {
            return Err(AxiomError::Budget { needed, arity: max_len });
        }
        let all: Vec<Vec<Element>> = (0..=max_len).flat_map(|k| tuples(n, k)).collect();
        let parts = par::map(&all, |t| orbit_partition(s, t));
        let mut orbits = HashMap::with_capacity(all.len());
        for (t, p) in all.into_iter().zip(parts) {
            orbits.insert(t, p.map_err(EngineError::from)?);
        }
        Ok(TypicalityTable { n, orbits })
    }

    pub fn tp(&self, a: Element, params: &[Element]) -> bool {
        let orbits = self.orbits.get(params).expect("tuple within table bounds");
        2 * orbits.orbit_of(a).len() >= self.n
    }

    pub fn typical_set(&self, params: &[Element]) -> Vec<Element> {
        (0..self.n).filter(|&a| self.tp(a, params)).collect()
    }
}

fn param_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("a{i}")).collect()
}

/// The fixture formulas usable for T6 on `s`: parameters `a1..`, at most
/// `arity - 1` of them, and AST size within the budget.
pub fn default_scheme_formulas(s: &FiniteStructure, bounds: Bounds) -> Vec<Formula> {
    let k = bounds.arity.saturating_sub(1);
    let names = param_names(4);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    corpus::formulas(s.signature(), &refs)
        .into_iter()
        .filter(|phi| phi.size() <= bounds.budget)
        .filter(|phi| {
            let used = phi.free_symbols().params;
            used.len() <= k && used.iter().all(|p| refs[..used.len()].contains(&p.as_str()))
        })
        .collect()
}

pub fn check_axiom(axiom: Axiom, s: &FiniteStructure, bounds: Bounds) -> Result<AxiomReport, AxiomError> {
    let formulas = if axiom == Axiom::T6 { default_scheme_formulas(s, bounds) } else { Vec::new() };
    check_axiom_with_formulas(axiom, s, bounds, &formulas)
}

pub fn check_axiom_with_formulas(
    axiom: Axiom,
    s: &FiniteStructure,
    bounds: Bounds,
    formulas: &[Formula],
) -> Result<AxiomReport, AxiomError> {
    if axiom == Axiom::Filter {
        return Ok(check_majority_filter_closure(s)?.definable);
    }
    let table_len = match axiom {
        Axiom::T3 => bounds.arity + 1,
        _ => bounds.arity,
    };
    let table = TypicalityTable::build(s, table_len)?;
    check_with_table(axiom, s, bounds, formulas, &table)
}

fn check_with_table(
    axiom: Axiom,
    s: &FiniteStructure,
    bounds: Bounds,
    formulas: &[Formula],
    table: &TypicalityTable,
) -> Result<AxiomReport, AxiomError> {
    let n = s.size();
    let k = bounds.arity;
    let mut out = Collector::new();
    let mut caveat = None;
    match axiom {
        Axiom::T1 => {
            for len in 0..=k {
                for b in tuples(n, len) {
                    let ok = !table.typical_set(&b).is_empty();
                    out.check(ok, || Violation::NoTypical { params: b.clone() });
                }
            }
        }
        Axiom::T2 => {
            for len in 1..=k {
                for cb in tuples(n, len) {
                    let (c, b) = (cb[0], &cb[1..]);
                    for a in 0..n {
                        let ok = !table.tp(a, &cb) || table.tp(a, b);
                        out.check(ok, || Violation::Monotonicity { a, c, params: b.to_vec() });
                    }
                }
            }
        }
        Axiom::T3 => {
            for len in 0..=k {
                for b in tuples(n, len) {
                    for a in 0..n {
                        let base = table.tp(a, &b);
                        for p in permutations(len).iter().skip(1) {
                            let variant: Vec<Element> = p.iter().map(|&i| b[i]).collect();
                            let ok = table.tp(a, &variant) == base;
                            out.check(ok, || Violation::Permutation { a, params: b.clone(), variant: variant.clone() });
                        }
                        for i in 0..len {
                            let mut variant = b.clone();
                            variant.insert(i, b[i]);
                            let ok = table.tp(a, &variant) == base;
                            out.check(ok, || Violation::Duplication { a, params: b.clone(), variant: variant.clone() });
                        }
                    }
                }
            }
        }
        Axiom::T4 => {
            if k >= 1 {
                for a in 0..n {
                    out.check(!table.tp(a, &[a]), || Violation::Reflexive { a });
                }
            }
        }
        Axiom::T5 => {
            for len in 0..k {
                for c in tuples(n, len) {
                    for a in (0..n).filter(|&a| table.tp(a, &c)) {
                        let ac = cons(a, &c);
                        for b in (0..n).filter(|&b| table.tp(b, &ac)) {
                            let ok = table.tp(a, &cons(b, &c));
                            out.check(ok, || Violation::Exchange { a, b, params: c.clone() });
                        }
                    }
                }
            }
        }
        Axiom::T6 => {
            for phi in formulas {
                let used = phi.free_symbols().params;
                let len = used.len();
                if len + 1 > k {
                    continue;
                }
                let names: Vec<String> = used.into_iter().collect();
                let rendered = phi.render();
                for y in tuples(n, len) {
                    let v: Valuation = names.iter().map(String::as_str).zip(y.iter().copied()).collect();
                    let ext = extension(s, phi, "x", &v).map_err(EngineError::from)?;
                    let outside: Vec<Element> =
                        table.typical_set(&y).into_iter().filter(|e| !ext.contains(e)).collect();
                    for z in 0..n {
                        let zy = cons(z, &y);
                        let premise = table.typical_set(&zy).iter().all(|e| ext.contains(e));
                        let ok = !premise || outside.is_empty();
                        out.check(ok, || Violation::Scheme {
                            formula: rendered.clone(),
                            names: names.clone(),
                            params: y.clone(),
                            z,
                            x: outside[0],
                        });
                    }
                }
            }
            caveat = Some(format!("scheme checked for {} formulas only", formulas.len()));
        }
        Axiom::Filter => unreachable!("handled by the caller"),
    }
    Ok(out.report(axiom, bounds, caveat))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterClosureReport {
    pub raw: AxiomReport,
    pub definable: AxiomReport,
}

fn members(mask: u64, n: usize) -> Vec<Element> {
    (0..n).filter(|&e| mask >> e & 1 == 1).collect()
}

fn intersection_check(n: usize, sets: FilterSets, majorities: &[u64]) -> Collector {
    let mut out = Collector::new();
    for (i, &x) in majorities.iter().enumerate() {
        for &y in &majorities[i + 1..] {
            let meet = x & y;
            let ok = is_majority(meet.count_ones() as usize, n);
            out.check(ok, || Violation::Intersection {
                sets,
                left: members(x, n),
                right: members(y, n),
                meet: members(meet, n),
            });
        }
    }
    out
}

/// Closure of majority sets under pairwise intersection, over all subsets and
/// over the parameter-free definable sets (unions of orbits).
pub fn check_majority_filter_closure(s: &FiniteStructure) -> Result<FilterClosureReport, AxiomError> {
    let n = s.size();
    if n > RAW_FILTER_LIMIT {
        return Err(AxiomError::TooLarge(n));
    }
    let bounds = Bounds { arity: 0, budget: 0 };
    let raw_sets: Vec<u64> = (0..1u64 << n).filter(|m| is_majority(m.count_ones() as usize, n)).collect();
    let raw = intersection_check(n, FilterSets::Raw, &raw_sets).report(Axiom::Filter, bounds, None);

    let orbits = orbit_partition(s, &[]).map_err(EngineError::from)?;
    let blocks: Vec<u64> = orbits.blocks.iter().map(|b| b.iter().fold(0, |m, &e| m | 1 << e)).collect();
    let definable_sets: Vec<u64> = (0..1u64 << blocks.len())
        .map(|pick| blocks.iter().enumerate().filter(|(i, _)| pick >> i & 1 == 1).fold(0, |m, (_, b)| m | b))
        .filter(|m| is_majority(m.count_ones() as usize, n))
        .collect::<std::collections::BTreeSet<u64>>()
        .into_iter()
        .collect();
    let definable = intersection_check(n, FilterSets::Definable, &definable_sets).report(Axiom::Filter, bounds, None);
    Ok(FilterClosureReport { raw, definable })
}

// ------------------------------------------------------------------ search

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub member: FamilyMember,
    /// The structure in the line format accepted by `load_structure`.
    pub structure: String,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchCertificate {
    pub family: String,
    pub bounds: Bounds,
    pub sizes: Vec<SizeCount>,
    /// Isomorphism classes examined (all of them unless a witness was found).
    pub examined: usize,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub axiom: Axiom,
    pub witness: Option<Counterexample>,
    pub certificate: SearchCertificate,
}

/// First structure of the family, in enumeration order, violating the axiom.
pub fn search_counterexample(
    axiom: Axiom,
    family: &StructureFamilySpec,
    bounds: Bounds,
) -> Result<SearchOutcome, AxiomError> {
    let (members, sizes) = family.members()?;
    let layouts: HashMap<usize, crate::family::Layout> =
        (family.min_size..=family.max_size).map(|n| Ok((n, family.layout(n)?))).collect::<Result<_, FamilyError>>()?;
    let indexed: Vec<(usize, FamilyMember)> = members.iter().copied().enumerate().collect();
    let found = par::find_first(&indexed, |(i, m)| {
        let s = family.structure(&layouts[&m.size], m.code);
        match check_axiom(axiom, &s, bounds) {
            Ok(report) if report.total_violations > 0 => Some(Ok((*i, *m, s, report.violations[0].clone()))),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        }
    })
    .transpose()?;
    let (witness, examined) = match found {
        Some((i, member, s, violation)) => (Some(Counterexample { member, structure: s.to_text(), violation }), i + 1),
        None => (None, members.len()),
    };
    let exhaustive = witness.is_none();
    Ok(SearchOutcome {
        axiom,
        witness,
        certificate: SearchCertificate { family: family.to_string(), bounds, sizes, examined, exhaustive },
    })
}
