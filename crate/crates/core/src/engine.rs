//! Typical properties and typical elements of finite structures.
//!
//! A property is typical when its extension is a strict majority (or, in
//! Frechet mode, cofinite). An element is typical over parameters `p` when it
//! lies in no `p`-definable strict minority. Definable sets are unions of
//! orbits of the pointwise stabilizer of `p`, and the least one containing
//! `a` is the orbit of `a`, so `a` is typical iff `2 * |orbit(a)| >= n`.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::enumerate::{
    cartesian, compositions, terms_by_size, AssignmentSpace, Enumeration, EnumerationError, Meaning, DEFAULT_BUDGET,
    DEFAULT_NODE_LIMIT, DEFAULT_VARIABLES, VARIABLE_NAMES,
};
use crate::model::{evaluate, extension, property_variable, Element, EvalError, FiniteStructure, Valuation};
use crate::symmetry::{orbit_partition, OrbitPartition, SymmetryError};
use crate::syntax::{Formula, Quantifier, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    /// `|X| > |M \ X|`.
    Majority,
    /// `M \ X` finite.
    Frechet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyClassification {
    pub variable: String,
    pub extension: Vec<Element>,
    pub complement_size: usize,
    pub typical: bool,
    pub mode: FilterMode,
}

pub fn is_majority(set_size: usize, universe: usize) -> bool {
    set_size > universe - set_size
}

pub fn classify_property(
    s: &FiniteStructure,
    phi: &Formula,
    v: &Valuation,
    mode: FilterMode,
) -> Result<PropertyClassification, EngineError> {
    let variable = property_variable(phi, v)?;
    let ext = extension(s, phi, &variable, v)?;
    let complement_size = s.size() - ext.len();
    let typical = match mode {
        FilterMode::Majority => is_majority(ext.len(), s.size()),
        // Every complement is finite in a finite universe.
        FilterMode::Frechet => true,
    };
    Ok(PropertyClassification { variable, extension: ext, complement_size, typical, mode })
}

/// `Qmost x. phi` evaluated directly; agrees with the majority classification.
pub fn majority_quantifier_holds(s: &FiniteStructure, phi: &Formula, v: &Valuation) -> Result<bool, EngineError> {
    let variable = property_variable(phi, v)?;
    let quantified = Formula::quant(Quantifier::Most, &variable, phi.clone());
    let mut v = v.clone();
    if !phi.free_symbols().vars.contains(&variable) {
        v.set(&variable, 0);
    }
    Ok(evaluate(s, &quantified, &v)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitCertificate {
    pub orbit: Vec<Element>,
    pub orbit_size: usize,
    pub universe_size: usize,
}

impl OrbitCertificate {
    /// `2 * |orbit| >= n`: no definable strict minority contains the element.
    pub fn certifies_typical(&self) -> bool {
        2 * self.orbit_size >= self.universe_size
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub formula: String,
    #[serde(skip)]
    pub ast: Formula,
    pub parameters: Vec<(String, Element)>,
    pub extension: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypicalityVerdict {
    pub element: Element,
    pub params: Vec<Element>,
    pub typical: bool,
    pub certificate: OrbitCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

fn check_elements(s: &FiniteStructure, elements: &[Element]) -> Result<(), EngineError> {
    match elements.iter().find(|&&e| e >= s.size()) {
        Some(&element) => Err(SymmetryError::OutOfRange { element, size: s.size() }.into()),
        None => Ok(()),
    }
}

pub fn verdict_from_orbits(orbits: &OrbitPartition, a: Element, params: &[Element]) -> TypicalityVerdict {
    let orbit = orbits.orbit_of(a).to_vec();
    let certificate = OrbitCertificate { orbit_size: orbit.len(), orbit, universe_size: orbits.universe_size() };
    TypicalityVerdict {
        element: a,
        params: params.to_vec(),
        typical: certificate.certifies_typical(),
        certificate,
        witness: None,
    }
}

pub fn classify_element(s: &FiniteStructure, a: Element, params: &[Element]) -> Result<TypicalityVerdict, EngineError> {
    check_elements(s, &[a])?;
    let orbits = orbit_partition(s, params)?;
    Ok(verdict_from_orbits(&orbits, a, params))
}

/// `Tp(a, params)`.
pub fn is_typical(s: &FiniteStructure, a: Element, params: &[Element]) -> Result<bool, EngineError> {
    Ok(classify_element(s, a, params)?.typical)
}

pub fn typical_set(s: &FiniteStructure, params: &[Element]) -> Result<Vec<Element>, EngineError> {
    let orbits = orbit_partition(s, params)?;
    Ok(s.universe().filter(|&a| 2 * orbits.orbit_of(a).len() >= s.size()).collect())
}

// -------------------------------------------------------------- enumeration

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnumerationConfig {
    pub budget: usize,
    pub variables: usize,
    pub node_limit: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, variables: DEFAULT_VARIABLES, node_limit: DEFAULT_NODE_LIMIT }
    }
}

impl EnumerationConfig {
    pub fn with_budget(budget: usize) -> Self {
        Self { budget, ..Self::default() }
    }
}

/// Placeholder names for a parameter tuple, avoiding signature symbols.
pub fn parameter_names(s: &FiniteStructure, count: usize) -> Vec<String> {
    (1..=count)
        .map(|i| {
            let mut name = format!("b{i}");
            while s.signature().get(&name).is_some() {
                name.push('_');
            }
            name
        })
        .collect()
}

/// Configurations are assignments `pool -> 0..n`, encoded little-endian.
pub fn structure_space(
    s: &FiniteStructure,
    params: &[Element],
    variables: usize,
    max_atom_size: usize,
) -> Result<AssignmentSpace, EngineError> {
    check_elements(s, params)?;
    if variables == 0 || variables > VARIABLE_NAMES.len() {
        return Err(EnumerationError::BadPool.into());
    }
    let n = s.size();
    let configs = n.pow(variables as u32);
    let names = parameter_names(s, params.len());
    let mut base: Vec<Term> = VARIABLE_NAMES[..variables].iter().map(|v| Term::var(v)).collect();
    base.extend(names.iter().map(|p| Term::Param(p.clone())));
    base.extend(s.constants().keys().map(|c| Term::Const(c.clone())));
    let functions: Vec<(String, usize)> = s.functions().iter().map(|(f, t)| (f.clone(), t.arity)).collect();
    let max_term = max_atom_size.saturating_sub(1);
    let terms = terms_by_size(base, &functions, max_term);

    let mut valuation: Valuation = names.iter().map(String::as_str).zip(params.iter().copied()).collect();
    let assignment = |c: usize, v: &mut Valuation| {
        let mut code = c;
        for name in &VARIABLE_NAMES[..variables] {
            v.set(name, code % n);
            code /= n;
        }
    };
    let meaning_of = |phi: &Formula, valuation: &mut Valuation| -> Result<Meaning, EngineError> {
        let mut m = Meaning::empty(configs);
        for c in 0..configs {
            assignment(c, valuation);
            if evaluate(s, phi, valuation)? {
                m.insert(c);
            }
        }
        Ok(m)
    };

    let mut atoms = Vec::new();
    for atom_size in 1..=max_atom_size.max(1) {
        let term_budget = atom_size - 1;
        for (r, table) in s.relations() {
            for split in compositions(term_budget, table.arity) {
                let choices: Vec<&Vec<Term>> = split.iter().map(|&k| &terms[k]).collect();
                for args in cartesian(&choices) {
                    let phi = Formula::rel(r, args);
                    let m = meaning_of(&phi, &mut valuation)?;
                    atoms.push((phi, atom_size, m));
                }
            }
        }
        for split in compositions(term_budget, 2) {
            for a in &terms[split[0]] {
                for b in &terms[split[1]] {
                    let phi = Formula::eq(a.clone(), b.clone());
                    let m = meaning_of(&phi, &mut valuation)?;
                    atoms.push((phi, atom_size, m));
                }
            }
        }
    }

    let classes = (0..variables)
        .map(|v| {
            let weight = n.pow(v as u32);
            (0..configs).map(|c| (c - (c / weight % n) * weight) as u32).collect()
        })
        .collect();
    let x_value = (0..configs).map(|c| (c % n) as u32).collect();
    Ok(AssignmentSpace { configs, variables, atoms, classes, x_value, x_values: n })
}

/// Every distinct extension of a formula with at most `x` free and AST size
/// `<= config.budget`, over the given parameters.
pub fn enumerate_definable_sets(
    s: &FiniteStructure,
    params: &[Element],
    config: EnumerationConfig,
) -> Result<BTreeSet<Vec<Element>>, EngineError> {
    let space = structure_space(s, params, config.variables, config.budget)?;
    let mut en = Enumeration::new(&space)?;
    en.run(config.budget, config.node_limit)?;
    Ok(en.property_extensions().into_keys().map(|ext| ext.into_iter().map(|e| e as Element).collect()).collect())
}

/// Smallest formula (first in enumeration order) whose extension contains `a`
/// and is a strict minority. `None` when `a` is typical, or when nothing is
/// found within the budget.
pub fn find_witness(
    s: &FiniteStructure,
    a: Element,
    params: &[Element],
    config: EnumerationConfig,
) -> Result<Option<Witness>, EngineError> {
    if classify_element(s, a, params)?.typical {
        return Ok(None);
    }
    let n = s.size();
    let space = structure_space(s, params, config.variables, config.budget)?;
    let mut en = Enumeration::new(&space)?;
    let names = parameter_names(s, params.len());
    while en.completed_size() < config.budget {
        let added = en.grow(config.node_limit)?.to_vec();
        for id in added {
            if !en.is_property(id) {
                continue;
            }
            let ext = en.x_extension(id);
            if ext.contains(&(a as u32)) && 2 * ext.len() < n {
                let ast = en.formula(id);
                let parameters = names.iter().cloned().zip(params.iter().copied()).collect();
                return Ok(Some(Witness {
                    formula: ast.render(),
                    ast,
                    parameters,
                    extension: ext.into_iter().map(|e| e as Element).collect(),
                }));
            }
        }
    }
    Ok(None)
}

/// Typical set read off the enumeration: `a` is typical iff no enumerated
/// strict-minority extension contains it.
pub fn typical_set_by_enumeration(
    s: &FiniteStructure,
    params: &[Element],
    config: EnumerationConfig,
) -> Result<Vec<Element>, EngineError> {
    let sets = enumerate_definable_sets(s, params, config)?;
    let n = s.size();
    Ok(s.universe().filter(|a| !sets.iter().any(|x| 2 * x.len() < n && x.contains(a))).collect())
}
