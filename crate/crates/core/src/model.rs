//! Finite structures and Tarskian evaluation.
//!
//! Structure files are line oriented:
//!
//! ```text
//! # path on three vertices
//! universe 3
//! relation E 2: (0,1) (1,0) (1,2) (2,1)
//! function f 1: 0 -> 1 ; 1 -> 2 ; 2 -> 0
//! constant c = 0
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{Formula, Quantifier, Signature, SignatureError, SymbolKind, Term};

pub type Element = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: `{name}` has arity {arity} but a tuple has {got} entries")]
    Arity { line: usize, name: String, arity: usize, got: usize },
    #[error("function `{name}` is not total: no value for ({args})")]
    NotTotal { name: String, args: String },
    #[error("line {line}: element {element} is outside the universe 0..{size}")]
    OutOfRange { line: usize, element: usize, size: usize },
    #[error("missing `universe N` line")]
    NoUniverse,
    #[error("line {line}: {source}")]
    Signature { line: usize, source: SignatureError },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value for free variable or parameter `{0}`")]
    Uncovered(String),
    #[error("symbol `{0}` is not interpreted in this structure")]
    UnknownSymbol(String),
    #[error("element {0} is outside the universe")]
    OutOfRange(Element),
    #[error("more than one free variable left unassigned: {0:?}")]
    TooManyFree(Vec<String>),
}

/// Interpretation of a relation symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationTable {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<Element>>,
}

/// A total function table indexed by the mixed-radix encoding of the arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    pub arity: usize,
    pub values: Vec<Element>,
}

impl FunctionTable {
    pub fn apply(&self, size: usize, args: &[Element]) -> Element {
        self.values[encode(size, args)]
    }
}

fn encode(size: usize, args: &[Element]) -> usize {
    args.iter().fold(0, |acc, &a| acc * size + a)
}

fn decode(size: usize, arity: usize, mut code: usize) -> Vec<Element> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = code % size;
        code /= size;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    size: usize,
    signature: Signature,
    relations: BTreeMap<String, RelationTable>,
    functions: BTreeMap<String, FunctionTable>,
    constants: BTreeMap<String, Element>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("element {0} is outside the universe")]
    OutOfRange(Element),
    #[error("`{name}` has arity {arity} but received {got} entries")]
    Arity { name: String, arity: usize, got: usize },
    #[error("function `{0}` table has the wrong length")]
    NotTotal(String),
    #[error("universe must be nonempty")]
    Empty,
}

impl FiniteStructure {
    /// A structure over `0..size` with an empty signature.
    pub fn new(size: usize) -> Result<Self, BuildError> {
        if size == 0 {
            return Err(BuildError::Empty);
        }
        Ok(Self {
            size,
            signature: Signature::new(),
            relations: BTreeMap::new(),
            functions: BTreeMap::new(),
            constants: BTreeMap::new(),
        })
    }

    pub fn with_relation<I>(mut self, name: &str, arity: usize, tuples: I) -> Result<Self, BuildError>
    where
        I: IntoIterator<Item = Vec<Element>>,
    {
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != arity {
                return Err(BuildError::Arity { name: name.into(), arity, got: t.len() });
            }
            if let Some(&bad) = t.iter().find(|&&e| e >= self.size) {
                return Err(BuildError::OutOfRange(bad));
            }
            set.insert(t);
        }
        self.signature.declare(name, SymbolKind::Relation(arity))?;
        self.relations.insert(name.to_string(), RelationTable { arity, tuples: set });
        Ok(self)
    }

    /// `values[i]` is the image of the `i`-th argument tuple in lexicographic order.
    pub fn with_function(mut self, name: &str, arity: usize, values: Vec<Element>) -> Result<Self, BuildError> {
        if values.len() != self.size.pow(arity as u32) {
            return Err(BuildError::NotTotal(name.into()));
        }
        if let Some(&bad) = values.iter().find(|&&e| e >= self.size) {
            return Err(BuildError::OutOfRange(bad));
        }
        self.signature.declare(name, SymbolKind::Function(arity))?;
        self.functions.insert(name.to_string(), FunctionTable { arity, values });
        Ok(self)
    }

    pub fn with_constant(mut self, name: &str, value: Element) -> Result<Self, BuildError> {
        if value >= self.size {
            return Err(BuildError::OutOfRange(value));
        }
        self.signature.declare(name, SymbolKind::Constant)?;
        self.constants.insert(name.to_string(), value);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn relations(&self) -> &BTreeMap<String, RelationTable> {
        &self.relations
    }

    pub fn functions(&self) -> &BTreeMap<String, FunctionTable> {
        &self.functions
    }

    pub fn constants(&self) -> &BTreeMap<String, Element> {
        &self.constants
    }

    pub fn universe(&self) -> std::ops::Range<Element> {
        0..self.size
    }

    pub fn holds(&self, relation: &str, tuple: &[Element]) -> bool {
        self.relations.get(relation).is_some_and(|r| r.tuples.contains(tuple))
    }

    /// Image of this structure under the relabelling `e -> perm[e]`.
    pub fn relabel(&self, perm: &[Element]) -> FiniteStructure {
        let relations = self
            .relations
            .iter()
            .map(|(name, r)| {
                let tuples = r.tuples.iter().map(|t| t.iter().map(|&e| perm[e]).collect()).collect();
                (name.clone(), RelationTable { arity: r.arity, tuples })
            })
            .collect();
        let functions = self
            .functions
            .iter()
            .map(|(name, f)| {
                let mut values = vec![0; f.values.len()];
                for (code, &v) in f.values.iter().enumerate() {
                    let args: Vec<Element> = decode(self.size, f.arity, code).iter().map(|&e| perm[e]).collect();
                    values[encode(self.size, &args)] = perm[v];
                }
                (name.clone(), FunctionTable { arity: f.arity, values })
            })
            .collect();
        let constants = self.constants.iter().map(|(n, &c)| (n.clone(), perm[c])).collect();
        FiniteStructure { size: self.size, signature: self.signature.clone(), relations, functions, constants }
    }

    /// Renders in the structure file format; `load_structure` inverts this.
    pub fn to_text(&self) -> String {
        let mut out = format!("universe {}\n", self.size);
        for (name, r) in &self.relations {
            out.push_str(&format!("relation {name} {}:", r.arity));
            for t in &r.tuples {
                let items: Vec<String> = t.iter().map(|e| e.to_string()).collect();
                out.push_str(&format!(" ({})", items.join(",")));
            }
            out.push('\n');
        }
        for (name, f) in &self.functions {
            let rows: Vec<String> = f
                .values
                .iter()
                .enumerate()
                .map(|(code, v)| {
                    let args: Vec<String> = decode(self.size, f.arity, code).iter().map(|e| e.to_string()).collect();
                    format!("{} -> {v}", args.join(","))
                })
                .collect();
            out.push_str(&format!("function {name} {}: {}\n", f.arity, rows.join(" ; ")));
        }
        for (name, c) in &self.constants {
            out.push_str(&format!("constant {name} = {c}\n"));
        }
        out
    }
}

// ------------------------------------------------------------------ loading

fn parse_element(tok: &str, line: usize, size: usize) -> Result<Element, LoadError> {
    let e: usize = tok
        .trim()
        .parse()
        .map_err(|_| LoadError::Parse { line, msg: format!("expected an element, found `{}`", tok.trim()) })?;
    if e >= size {
        return Err(LoadError::OutOfRange { line, element: e, size });
    }
    Ok(e)
}

fn split_header(rest: &str, line: usize) -> Result<(&str, usize, &str), LoadError> {
    let (head, body) = rest.split_once(':').ok_or(LoadError::Parse { line, msg: "expected `NAME ARITY:`".into() })?;
    let mut parts = head.split_whitespace();
    let (Some(name), Some(arity), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(LoadError::Parse { line, msg: "expected `NAME ARITY:`".into() });
    };
    let arity = arity.parse().map_err(|_| LoadError::Parse { line, msg: format!("bad arity `{arity}`") })?;
    Ok((name, arity, body))
}

pub fn load_structure(text: &str) -> Result<FiniteStructure, LoadError> {
    let mut structure: Option<FiniteStructure> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        if keyword == "universe" {
            if structure.is_some() {
                return Err(LoadError::Parse { line, msg: "duplicate `universe` line".into() });
            }
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| LoadError::Parse { line, msg: format!("bad universe size `{}`", rest.trim()) })?;
            if n == 0 {
                return Err(LoadError::Parse { line, msg: "universe must be nonempty".into() });
            }
            structure = Some(FiniteStructure::new(n).expect("nonempty"));
            continue;
        }
        let s = structure.as_mut().ok_or(LoadError::NoUniverse)?;
        let size = s.size;
        match keyword {
            "relation" => {
                let (name, arity, body) = split_header(rest, line)?;
                let mut tuples = BTreeSet::new();
                let mut body = body.trim();
                while !body.is_empty() {
                    let Some(inner) = body.strip_prefix('(') else {
                        return Err(LoadError::Parse { line, msg: format!("expected `(`, found `{body}`") });
                    };
                    let (tuple, tail) =
                        inner.split_once(')').ok_or(LoadError::Parse { line, msg: "unclosed tuple".into() })?;
                    let items: Vec<Element> = if tuple.trim().is_empty() {
                        Vec::new()
                    } else {
                        tuple.split(',').map(|t| parse_element(t, line, size)).collect::<Result<_, _>>()?
                    };
                    if items.len() != arity {
                        return Err(LoadError::Arity { line, name: name.into(), arity, got: items.len() });
                    }
                    tuples.insert(items);
                    body = tail.trim_start();
                }
                s.signature
                    .declare(name, SymbolKind::Relation(arity))
                    .map_err(|source| LoadError::Signature { line, source })?;
                s.relations.insert(name.to_string(), RelationTable { arity, tuples });
            }
            "function" => {
                let (name, arity, body) = split_header(rest, line)?;
                let mut values: Vec<Option<Element>> = vec![None; size.pow(arity as u32)];
                for row in body.split(';').map(str::trim).filter(|r| !r.is_empty()) {
                    let (args, value) = row
                        .split_once("->")
                        .ok_or(LoadError::Parse { line, msg: format!("expected `args -> value`, found `{row}`") })?;
                    let args: Vec<Element> = if args.trim().is_empty() {
                        Vec::new()
                    } else {
                        args.split(',').map(|t| parse_element(t, line, size)).collect::<Result<_, _>>()?
                    };
                    if args.len() != arity {
                        return Err(LoadError::Arity { line, name: name.into(), arity, got: args.len() });
                    }
                    let value = parse_element(value, line, size)?;
                    let slot = &mut values[encode(size, &args)];
                    if slot.is_some_and(|v| v != value) {
                        return Err(LoadError::Parse { line, msg: format!("conflicting rows for `{name}`") });
                    }
                    *slot = Some(value);
                }
                let values = values
                    .iter()
                    .enumerate()
                    .map(|(code, v)| {
                        v.ok_or_else(|| LoadError::NotTotal {
                            name: name.into(),
                            args: decode(size, arity, code).iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                s.signature
                    .declare(name, SymbolKind::Function(arity))
                    .map_err(|source| LoadError::Signature { line, source })?;
                s.functions.insert(name.to_string(), FunctionTable { arity, values });
            }
            "constant" => {
                let (name, value) = rest
                    .split_once('=')
                    .ok_or(LoadError::Parse { line, msg: "expected `constant NAME = a`".into() })?;
                let name = name.trim();
                let value = parse_element(value, line, size)?;
                s.signature
                    .declare(name, SymbolKind::Constant)
                    .map_err(|source| LoadError::Signature { line, source })?;
                s.constants.insert(name.to_string(), value);
            }
            other => {
                return Err(LoadError::Parse { line, msg: format!("unknown directive `{other}`") });
            }
        }
    }
    structure.ok_or(LoadError::NoUniverse)
}

// --------------------------------------------------------------- evaluation

/// Assignment of elements to free variables and parameter placeholders.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Valuation(BTreeMap<String, Element>);

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: Element) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: Element) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<Element> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Element)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

impl<S: AsRef<str>> FromIterator<(S, Element)> for Valuation {
    fn from_iter<T: IntoIterator<Item = (S, Element)>>(iter: T) -> Self {
        Valuation(iter.into_iter().map(|(k, v)| (k.as_ref().to_string(), v)).collect())
    }
}

struct Env<'a> {
    base: &'a Valuation,
    bound: Vec<(&'a str, Element)>,
}

impl<'a> Env<'a> {
    fn lookup(&self, name: &str) -> Result<Element, EvalError> {
        if let Some(&(_, v)) = self.bound.iter().rev().find(|(n, _)| *n == name) {
            return Ok(v);
        }
        self.base.get(name).ok_or_else(|| EvalError::Uncovered(name.to_string()))
    }
}

impl FiniteStructure {
    fn term_value(&self, t: &Term, env: &Env<'_>) -> Result<Element, EvalError> {
        let v = match t {
            Term::Var(n) | Term::Param(n) => env.lookup(n)?,
            Term::Const(c) => *self.constants.get(c).ok_or_else(|| EvalError::UnknownSymbol(c.clone()))?,
            Term::Apply(f, args) => {
                let table = self.functions.get(f).ok_or_else(|| EvalError::UnknownSymbol(f.clone()))?;
                if table.arity != args.len() {
                    return Err(EvalError::UnknownSymbol(f.clone()));
                }
                let vals = args.iter().map(|a| self.term_value(a, env)).collect::<Result<Vec<_>, _>>()?;
                table.apply(self.size, &vals)
            }
        };
        if v >= self.size {
            return Err(EvalError::OutOfRange(v));
        }
        Ok(v)
    }

    fn eval<'a>(&self, phi: &'a Formula, env: &mut Env<'a>) -> Result<bool, EvalError> {
        Ok(match phi {
            Formula::Rel(r, args) => {
                let table = self.relations.get(r).ok_or_else(|| EvalError::UnknownSymbol(r.clone()))?;
                if table.arity != args.len() {
                    return Err(EvalError::UnknownSymbol(r.clone()));
                }
                let vals = args.iter().map(|a| self.term_value(a, env)).collect::<Result<Vec<_>, _>>()?;
                table.tuples.contains(&vals)
            }
            Formula::Eq(a, b) => self.term_value(a, env)? == self.term_value(b, env)?,
            Formula::Not(f) => !self.eval(f, env)?,
            Formula::And(a, b) => self.eval(a, env)? & self.eval(b, env)?,
            Formula::Or(a, b) => self.eval(a, env)? | self.eval(b, env)?,
            Formula::Implies(a, b) => !self.eval(a, env)? | self.eval(b, env)?,
            Formula::Iff(a, b) => self.eval(a, env)? == self.eval(b, env)?,
            Formula::Quant(q, v, body) => {
                let mut count = 0;
                for e in 0..self.size {
                    env.bound.push((v.as_str(), e));
                    let r = self.eval(body, env);
                    env.bound.pop();
                    if r? {
                        count += 1;
                    }
                }
                match q {
                    Quantifier::Forall => count == self.size,
                    Quantifier::Exists => count > 0,
                    Quantifier::Most => count > self.size - count,
                    // Every subset of a finite universe has a finite complement.
                    Quantifier::Inf => true,
                }
            }
        })
    }
}

/// Truth of `phi` in `s` under `v`; `v` must cover every free variable and parameter.
pub fn evaluate(s: &FiniteStructure, phi: &Formula, v: &Valuation) -> Result<bool, EvalError> {
    let free = phi.free_symbols();
    if let Some(missing) = free.vars.iter().chain(&free.params).find(|n| !v.contains(n)) {
        return Err(EvalError::Uncovered(missing.clone()));
    }
    if let Some((_, bad)) = v.iter().find(|&(_, e)| e >= s.size) {
        return Err(EvalError::OutOfRange(bad));
    }
    let mut env = Env { base: v, bound: Vec::new() };
    s.eval(phi, &mut env)
}

/// `{a : s |= phi[v, var := a]}`, ascending.
pub fn extension(s: &FiniteStructure, phi: &Formula, var: &str, v: &Valuation) -> Result<Vec<Element>, EvalError> {
    let mut v = v.clone();
    let mut out = Vec::new();
    for a in 0..s.size {
        v.set(var, a);
        if evaluate(s, phi, &v)? {
            out.push(a);
        }
    }
    Ok(out)
}

/// The single free variable of `phi` not covered by `v`; `x` when there is none.
pub fn property_variable(phi: &Formula, v: &Valuation) -> Result<String, EvalError> {
    let free: Vec<String> = phi.free_symbols().vars.into_iter().filter(|n| !v.contains(n)).collect();
    match free.len() {
        0 => Ok("x".to_string()),
        1 => Ok(free.into_iter().next().expect("one element")),
        _ => Err(EvalError::TooManyFree(free)),
    }
}

/// All `k`-tuples over `0..n` in lexicographic order.
pub fn tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<Element>> {
    let total = n.pow(k as u32);
    (0..total).map(move |code| decode(n, k, code))
}
