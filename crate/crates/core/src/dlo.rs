//! Dense linear orders without endpoints, over symbolic parameters
//! `a1 < a2 < ... < ak`.
//!
//! Everything is decided by the position of `x` among the parameters, so a
//! set of rationals definable over the parameters is a union of the `2k + 1`
//! cells `(-inf, a1), {a1}, (a1, a2), ..., {ak}, (ak, +inf)`. Cell `2g` is the
//! gap below parameter `g` (0-based) and cell `2i + 1` is parameter `i`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::engine::{EnumerationConfig, FilterMode};
use crate::enumerate::{AssignmentSpace, Enumeration, EnumerationError, Meaning, VARIABLE_NAMES};
use crate::syntax::{
    is_identifier, parse_formula_with_params, Formula, Quantifier, Signature, SyntaxError, Term, ORDER_SYMBOL,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DloError {
    #[error("bad parameter list `{0}`: expected names separated by `<`")]
    BadConfig(String),
    #[error("symbol `{0}` is not in the order signature")]
    Signature(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("free variable `{0}` besides `x`")]
    FreeVariable(String),
    #[error("formula has parameters")]
    ParametersPresent,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}

/// Parameter names in increasing order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ParamConfig {
    names: Vec<String>,
}

impl ParamConfig {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, DloError> {
        let names: Vec<String> = names.iter().map(|n| n.as_ref().to_string()).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            if !is_identifier(n) || n == ORDER_SYMBOL || n == "x" || !seen.insert(n.as_str()) {
                return Err(DloError::BadConfig(names.join("<")));
            }
        }
        Ok(ParamConfig { names })
    }

    /// `a1 < ... < ak`.
    pub fn standard(k: usize) -> Self {
        ParamConfig { names: (1..=k).map(|i| format!("a{i}")).collect() }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn cells(&self) -> usize {
        2 * self.len() + 1
    }

    pub fn parse_formula(&self, text: &str) -> Result<Formula, DloError> {
        let refs: Vec<&str> = self.names.iter().map(String::as_str).collect();
        Ok(parse_formula_with_params(text, &Signature::order(), &refs)?)
    }
}

impl FromStr for ParamConfig {
    type Err = DloError;

    fn from_str(s: &str) -> Result<Self, DloError> {
        if s.trim().is_empty() {
            return Ok(ParamConfig::default());
        }
        let names: Vec<&str> = s.split('<').map(str::trim).collect();
        ParamConfig::new(&names).map_err(|_| DloError::BadConfig(s.to_string()))
    }
}

impl fmt::Display for ParamConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names.join("<"))
    }
}

impl Serialize for ParamConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.names.serialize(s)
    }
}

// ------------------------------------------------------------------ formulas

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pt {
    Var(String),
    Param(usize),
}

/// Quantifier-free order formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QF {
    True,
    False,
    Lt(Pt, Pt),
    Eq(Pt, Pt),
    Not(Box<QF>),
    And(Vec<QF>),
    Or(Vec<QF>),
}

impl QF {
    fn not(q: QF) -> QF {
        QF::Not(Box::new(q))
    }

    fn vars(&self, out: &mut BTreeSet<String>) {
        let mut add = |p: &Pt| {
            if let Pt::Var(n) = p {
                out.insert(n.clone());
            }
        };
        match self {
            QF::True | QF::False => {}
            QF::Lt(a, b) | QF::Eq(a, b) => {
                add(a);
                add(b);
            }
            QF::Not(q) => q.vars(out),
            QF::And(qs) | QF::Or(qs) => qs.iter().for_each(|q| q.vars(out)),
        }
    }

    /// Truth value with every point placed at an integer position.
    pub fn eval_with(&self, pos: &dyn Fn(&Pt) -> i64) -> bool {
        match self {
            QF::True => true,
            QF::False => false,
            QF::Lt(a, b) => pos(a) < pos(b),
            QF::Eq(a, b) => pos(a) == pos(b),
            QF::Not(q) => !q.eval_with(pos),
            QF::And(qs) => qs.iter().all(|q| q.eval_with(pos)),
            QF::Or(qs) => qs.iter().any(|q| q.eval_with(pos)),
        }
    }
}

/// Folds constants, decides parameter-parameter atoms by the declared order,
/// orients equalities as `x = a`, and sorts conjunctions and disjunctions.
fn simplify(q: QF) -> QF {
    match q {
        QF::Lt(a, b) => match (&a, &b) {
            _ if a == b => QF::False,
            (Pt::Param(i), Pt::Param(j)) => bool_qf(i < j),
            _ => QF::Lt(a, b),
        },
        QF::Eq(a, b) => match (&a, &b) {
            _ if a == b => QF::True,
            (Pt::Param(_), Pt::Param(_)) => QF::False,
            _ if b < a => QF::Eq(b, a),
            _ => QF::Eq(a, b),
        },
        QF::Not(inner) => match simplify(*inner) {
            QF::True => QF::False,
            QF::False => QF::True,
            QF::Not(q) => *q,
            q => QF::not(q),
        },
        QF::And(qs) => {
            let mut out = Vec::new();
            for q in qs.into_iter().map(simplify) {
                match q {
                    QF::False => return QF::False,
                    QF::True => {}
                    QF::And(inner) => out.extend(inner),
                    q => out.push(q),
                }
            }
            out.sort();
            out.dedup();
            match out.len() {
                0 => QF::True,
                1 => out.pop().unwrap(),
                _ => QF::And(out),
            }
        }
        QF::Or(qs) => {
            let mut out = Vec::new();
            for q in qs.into_iter().map(simplify) {
                match q {
                    QF::True => return QF::True,
                    QF::False => {}
                    QF::Or(inner) => out.extend(inner),
                    q => out.push(q),
                }
            }
            out.sort();
            out.dedup();
            match out.len() {
                0 => QF::False,
                1 => out.pop().unwrap(),
                _ => QF::Or(out),
            }
        }
        q => q,
    }
}

fn bool_qf(b: bool) -> QF {
    if b {
        QF::True
    } else {
        QF::False
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Lit {
    Lt(Pt, Pt),
    Eq(Pt, Pt),
}

/// Disjunctive normal form over positive literals only: negated atoms are
/// rewritten with trichotomy.
fn dnf(q: &QF, positive: bool) -> Vec<Vec<Lit>> {
    match (q, positive) {
        (QF::True, true) | (QF::False, false) => vec![vec![]],
        (QF::True, false) | (QF::False, true) => vec![],
        (QF::Lt(a, b), true) => vec![vec![Lit::Lt(a.clone(), b.clone())]],
        (QF::Lt(a, b), false) => vec![vec![Lit::Lt(b.clone(), a.clone())], vec![Lit::Eq(a.clone(), b.clone())]],
        (QF::Eq(a, b), true) => vec![vec![Lit::Eq(a.clone(), b.clone())]],
        (QF::Eq(a, b), false) => vec![vec![Lit::Lt(a.clone(), b.clone())], vec![Lit::Lt(b.clone(), a.clone())]],
        (QF::Not(inner), p) => dnf(inner, !p),
        (QF::And(qs), true) | (QF::Or(qs), false) => {
            let mut acc: Vec<Vec<Lit>> = vec![vec![]];
            for part in qs.iter().map(|q| dnf(q, positive)) {
                let mut next = BTreeSet::new();
                for left in &acc {
                    for right in &part {
                        let mut c: Vec<Lit> = left.iter().chain(right).cloned().collect();
                        c.sort();
                        c.dedup();
                        next.insert(c);
                    }
                }
                acc = next.into_iter().collect();
            }
            acc
        }
        (QF::Or(qs), true) | (QF::And(qs), false) => {
            let all: BTreeSet<Vec<Lit>> = qs.iter().flat_map(|q| dnf(q, positive)).collect();
            all.into_iter().collect()
        }
    }
}

fn lit_qf(l: Lit) -> QF {
    match l {
        Lit::Lt(a, b) => QF::Lt(a, b),
        Lit::Eq(a, b) => QF::Eq(a, b),
    }
}

/// `exists v. q` for quantifier-free `q`.
fn eliminate_exists(v: &str, q: &QF) -> QF {
    let var = Pt::Var(v.to_string());
    let mut disjuncts = Vec::new();
    'conjunct: for conj in dnf(q, true) {
        let (with_v, without): (Vec<Lit>, Vec<Lit>) = conj.into_iter().partition(|l| match l {
            Lit::Lt(a, b) | Lit::Eq(a, b) => *a == var || *b == var,
        });
        let mut partner = None;
        let mut rest = Vec::new();
        for l in with_v {
            match &l {
                Lit::Eq(a, b) if a == b => {}
                Lit::Lt(a, b) if a == b => continue 'conjunct,
                Lit::Eq(a, b) if partner.is_none() => {
                    partner = Some(if *a == var { b.clone() } else { a.clone() });
                }
                _ => rest.push(l),
            }
        }
        let mut out: Vec<QF> = without.into_iter().map(lit_qf).collect();
        if let Some(t) = partner {
            let sub = |p: Pt| if p == var { t.clone() } else { p };
            out.extend(rest.into_iter().map(|l| match l {
                Lit::Lt(a, b) => QF::Lt(sub(a), sub(b)),
                Lit::Eq(a, b) => QF::Eq(sub(a), sub(b)),
            }));
        } else {
            let mut lower = Vec::new();
            let mut upper = Vec::new();
            for l in rest {
                if let Lit::Lt(a, b) = l {
                    if b == var {
                        lower.push(a);
                    } else {
                        upper.push(b);
                    }
                }
            }
            for l in &lower {
                for u in &upper {
                    out.push(QF::Lt(l.clone(), u.clone()));
                }
            }
        }
        disjuncts.push(QF::And(out));
    }
    simplify(QF::Or(disjuncts))
}

fn point(t: &Term, cfg: &ParamConfig) -> Result<Pt, DloError> {
    match t {
        Term::Var(v) => Ok(Pt::Var(v.clone())),
        Term::Param(p) => cfg.index(p).map(Pt::Param).ok_or_else(|| DloError::UnknownParameter(p.clone())),
        Term::Const(c) => Err(DloError::Signature(c.clone())),
        Term::Apply(f, _) => Err(DloError::Signature(f.clone())),
    }
}

fn qe(phi: &Formula, cfg: &ParamConfig) -> Result<QF, DloError> {
    Ok(match phi {
        Formula::Rel(r, args) => {
            if r != ORDER_SYMBOL || args.len() != 2 {
                return Err(DloError::Signature(r.clone()));
            }
            simplify(QF::Lt(point(&args[0], cfg)?, point(&args[1], cfg)?))
        }
        Formula::Eq(a, b) => simplify(QF::Eq(point(a, cfg)?, point(b, cfg)?)),
        Formula::Not(f) => simplify(QF::not(qe(f, cfg)?)),
        Formula::And(a, b) => simplify(QF::And(vec![qe(a, cfg)?, qe(b, cfg)?])),
        Formula::Or(a, b) => simplify(QF::Or(vec![qe(a, cfg)?, qe(b, cfg)?])),
        Formula::Implies(a, b) => simplify(QF::Or(vec![QF::not(qe(a, cfg)?), qe(b, cfg)?])),
        Formula::Iff(a, b) => {
            let (a, b) = (qe(a, cfg)?, qe(b, cfg)?);
            simplify(QF::Or(vec![QF::And(vec![a.clone(), b.clone()]), QF::And(vec![QF::not(a), QF::not(b)])]))
        }
        Formula::Quant(q, v, body) => {
            let b = qe(body, cfg)?;
            match q {
                Quantifier::Exists => eliminate_exists(v, &b),
                Quantifier::Forall => simplify(QF::not(eliminate_exists(v, &simplify(QF::not(b))))),
                // On a countable order both filters are the cofinite one: the
                // body must hold off the finitely many named points.
                Quantifier::Most | Quantifier::Inf => {
                    let var = Pt::Var(v.clone());
                    let mut named: Vec<Pt> = {
                        let mut vs = BTreeSet::new();
                        b.vars(&mut vs);
                        vs.into_iter().filter(|n| n != v).map(Pt::Var).collect()
                    };
                    named.extend((0..cfg.len()).map(Pt::Param));
                    let mut parts: Vec<QF> = named.into_iter().map(|p| QF::not(QF::Eq(var.clone(), p))).collect();
                    parts.push(QF::not(b));
                    simplify(QF::not(eliminate_exists(v, &simplify(QF::And(parts)))))
                }
            }
        }
    })
}

/// Quantifier-free formula in `x` and the parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QFOrderFormula {
    pub cfg: ParamConfig,
    pub body: QF,
}

impl QFOrderFormula {
    /// Truth value with `x` in the given cell.
    pub fn holds_in_cell(&self, cell: usize) -> bool {
        self.body.eval_with(&|p| match p {
            Pt::Var(_) => cell as i64,
            Pt::Param(i) => 2 * *i as i64 + 1,
        })
    }

    pub fn extension(&self) -> SemiLinearSet {
        SemiLinearSet::from_fn(&self.cfg, |c| self.holds_in_cell(c))
    }

    fn point_name(&self, p: &Pt) -> String {
        match p {
            Pt::Var(v) => v.clone(),
            Pt::Param(i) => self.cfg.names[*i].clone(),
        }
    }

    fn render_qf(&self, q: &QF, out: &mut String) {
        match q {
            QF::True => out.push_str("true"),
            QF::False => out.push_str("false"),
            QF::Lt(a, b) => out.push_str(&format!("{} < {}", self.point_name(a), self.point_name(b))),
            QF::Eq(a, b) => out.push_str(&format!("{} = {}", self.point_name(a), self.point_name(b))),
            QF::Not(inner) => match &**inner {
                QF::Eq(a, b) => out.push_str(&format!("{} != {}", self.point_name(a), self.point_name(b))),
                q => {
                    out.push_str("!(");
                    self.render_qf(q, out);
                    out.push(')');
                }
            },
            QF::And(qs) | QF::Or(qs) => {
                let sep = if matches!(q, QF::And(_)) { " & " } else { " | " };
                out.push('(');
                for (i, q) in qs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    self.render_qf(q, out);
                }
                out.push(')');
            }
        }
    }

    /// Back to an ordinary formula; the constants become `x = x` and `x != x`.
    pub fn to_formula(&self) -> Formula {
        fn term(p: &Pt, cfg: &ParamConfig) -> Term {
            match p {
                Pt::Var(v) => Term::var(v),
                Pt::Param(i) => Term::param(&cfg.names[*i]),
            }
        }
        fn go(q: &QF, cfg: &ParamConfig) -> Formula {
            let x = || Term::var("x");
            match q {
                QF::True => Formula::eq(x(), x()),
                QF::False => Formula::neq(x(), x()),
                QF::Lt(a, b) => Formula::rel(ORDER_SYMBOL, vec![term(a, cfg), term(b, cfg)]),
                QF::Eq(a, b) => Formula::eq(term(a, cfg), term(b, cfg)),
                QF::Not(q) => Formula::not(go(q, cfg)),
                QF::And(qs) => qs.iter().map(|q| go(q, cfg)).reduce(Formula::and).expect("nonempty"),
                QF::Or(qs) => qs.iter().map(|q| go(q, cfg)).reduce(Formula::or).expect("nonempty"),
            }
        }
        go(&self.body, &self.cfg)
    }
}

impl fmt::Display for QFOrderFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render_qf(&self.body, &mut s);
        f.write_str(&s)
    }
}

impl Serialize for QFOrderFormula {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn eliminate_quantifiers(phi: &Formula, cfg: &ParamConfig) -> Result<QFOrderFormula, DloError> {
    let body = qe(phi, cfg)?;
    let mut vars = BTreeSet::new();
    body.vars(&mut vars);
    if let Some(v) = vars.into_iter().find(|v| v != "x") {
        return Err(DloError::FreeVariable(v));
    }
    Ok(QFOrderFormula { cfg: cfg.clone(), body })
}

// ---------------------------------------------------------------- extensions

/// A union of cells. Rendered as points and maximal open intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SemiLinearSet {
    cfg: ParamConfig,
    cells: Vec<bool>,
}

impl PartialOrd for ParamConfig {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ParamConfig {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.names.cmp(&other.names)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Piece {
    Point(String),
    Interval(String, String),
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Point(p) => write!(f, "{{{p}}}"),
            Piece::Interval(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

impl SemiLinearSet {
    pub fn from_fn(cfg: &ParamConfig, f: impl Fn(usize) -> bool) -> Self {
        SemiLinearSet { cfg: cfg.clone(), cells: (0..cfg.cells()).map(f).collect() }
    }

    pub fn empty(cfg: &ParamConfig) -> Self {
        Self::from_fn(cfg, |_| false)
    }

    pub fn full(cfg: &ParamConfig) -> Self {
        Self::from_fn(cfg, |_| true)
    }

    /// All of Q except the parameter points.
    pub fn without_params(cfg: &ParamConfig) -> Self {
        Self::from_fn(cfg, |c| c % 2 == 0)
    }

    pub fn from_cells(cfg: &ParamConfig, cells: &[usize]) -> Self {
        Self::from_fn(cfg, |c| cells.contains(&c))
    }

    pub fn contains_cell(&self, c: usize) -> bool {
        self.cells[c]
    }

    pub fn cells(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&c| self.cells[c]).collect()
    }

    pub fn complement(&self) -> Self {
        SemiLinearSet { cfg: self.cfg.clone(), cells: self.cells.iter().map(|b| !b).collect() }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        SemiLinearSet {
            cfg: self.cfg.clone(),
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| *a && *b).collect(),
        }
    }

    /// Finite iff it contains no open interval.
    pub fn is_finite(&self) -> bool {
        (0..self.cells.len()).step_by(2).all(|c| !self.cells[c])
    }

    /// Number of points when finite.
    pub fn finite_size(&self) -> Option<usize> {
        self.is_finite().then(|| self.cells.iter().filter(|b| **b).count())
    }

    fn bound(&self, gap_edge: usize) -> String {
        // Left end of gap g is parameter g - 1, right end is parameter g.
        match gap_edge {
            0 => "-inf".into(),
            e if e > self.cfg.len() => "+inf".into(),
            e => self.cfg.names[e - 1].clone(),
        }
    }

    pub fn pieces(&self) -> Vec<Piece> {
        let mut out = Vec::new();
        let n = self.cells.len();
        let mut c = 0;
        while c < n {
            if !self.cells[c] {
                c += 1;
                continue;
            }
            let start = c;
            while c < n && self.cells[c] {
                c += 1;
            }
            let end = c - 1;
            if start % 2 == 1 {
                out.push(Piece::Point(self.cfg.names[start / 2].clone()));
            }
            let first_gap = if start % 2 == 0 { start } else { start + 1 };
            let last_gap = if end % 2 == 0 { end } else { end - 1 };
            if first_gap <= last_gap {
                out.push(Piece::Interval(self.bound(first_gap / 2), self.bound(last_gap / 2 + 1)));
            }
            if end % 2 == 1 && end != start {
                out.push(Piece::Point(self.cfg.names[end / 2].clone()));
            }
        }
        out
    }
}

impl fmt::Display for SemiLinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pieces = self.pieces();
        if pieces.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = pieces.iter().map(Piece::to_string).collect();
        f.write_str(&parts.join(" u "))
    }
}

impl Serialize for SemiLinearSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.pieces().serialize(s)
    }
}

// ------------------------------------------------------------ classification

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DloClassification {
    pub quantifier_free: QFOrderFormula,
    pub extension: SemiLinearSet,
    pub rendered: String,
    /// `|ext| > |Q \ ext|` as cardinals.
    pub majority: bool,
    /// `Q \ ext` finite.
    pub frechet: bool,
    pub typical: bool,
}

impl DloClassification {
    pub fn verdict(&self, mode: FilterMode) -> bool {
        match mode {
            FilterMode::Majority => self.majority,
            FilterMode::Frechet => self.frechet,
        }
    }
}

/// `Some(k)` for a set of `k` points, `None` for a countably infinite one.
fn cardinality(set: &SemiLinearSet) -> Option<usize> {
    set.finite_size()
}

fn cardinal_greater(a: Option<usize>, b: Option<usize>) -> bool {
    match (a, b) {
        (None, Some(_)) => true,
        (Some(x), Some(y)) => x > y,
        _ => false,
    }
}

pub fn classify_extension(extension: SemiLinearSet, quantifier_free: QFOrderFormula) -> DloClassification {
    let complement = extension.complement();
    let majority = cardinal_greater(cardinality(&extension), cardinality(&complement));
    let frechet = complement.is_finite();
    DloClassification {
        rendered: extension.to_string(),
        quantifier_free,
        extension,
        majority,
        frechet,
        typical: majority,
    }
}

pub fn classify_property_dlo(phi: &Formula, cfg: &ParamConfig) -> Result<DloClassification, DloError> {
    let qf = eliminate_quantifiers(phi, cfg)?;
    Ok(classify_extension(qf.extension(), qf))
}

pub fn typical_elements_dlo(cfg: &ParamConfig) -> Result<SemiLinearSet, DloError> {
    let mut out = SemiLinearSet::full(cfg);
    for name in cfg.names() {
        let phi = cfg.parse_formula(&format!("x != {name}"))?;
        let c = classify_property_dlo(&phi, cfg)?;
        debug_assert!(c.typical);
        out = out.intersect(&c.extension);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Formula,
    Negation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dichotomy {
    pub typical: Side,
    pub formula: DloClassification,
    pub negation: DloClassification,
}

pub fn dichotomy(phi: &Formula) -> Result<Dichotomy, DloError> {
    if !phi.free_symbols().params.is_empty() {
        return Err(DloError::ParametersPresent);
    }
    let cfg = ParamConfig::default();
    let formula = classify_property_dlo(phi, &cfg)?;
    let negation = classify_property_dlo(&Formula::not(phi.clone()), &cfg)?;
    let typical = if formula.typical { Side::Formula } else { Side::Negation };
    Ok(Dichotomy { typical, formula, negation })
}

// --------------------------------------------------------------- enumeration

/// `x` alone already reaches every union of cells for `k <= 4` at budget 9.
pub const DLO_VARIABLES: usize = 1;

pub fn dlo_enumeration_config(budget: usize) -> EnumerationConfig {
    EnumerationConfig { budget, variables: DLO_VARIABLES, ..EnumerationConfig::default() }
}

/// Configurations are the order types of the variable pool over the
/// parameters, realized by integers: parameter `i` sits at `(i + 1)(V + 1)`.
pub fn dlo_space(cfg: &ParamConfig, variables: usize) -> Result<AssignmentSpace, DloError> {
    if variables == 0 || variables > VARIABLE_NAMES.len() {
        return Err(EnumerationError::BadPool.into());
    }
    let k = cfg.len();
    let step = variables as i64 + 1;
    let params: Vec<i64> = (0..k as i64).map(|i| (i + 1) * step).collect();
    let range = (k as i64 + 1) * step + 1;
    let key = |vals: &[i64], skip: Option<usize>| -> Vec<i8> {
        let pts: Vec<i64> = vals
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, v)| *v)
            .chain(params.iter().copied())
            .collect();
        let mut out = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                out.push(pts[i].cmp(&pts[j]) as i8);
            }
        }
        out
    };

    let mut configs: Vec<Vec<i64>> = Vec::new();
    let mut seen = HashMap::new();
    let total = (range as usize).pow(variables as u32);
    for code in 0..total {
        let mut c = code;
        let vals: Vec<i64> = (0..variables)
            .map(|_| {
                let v = (c % range as usize) as i64;
                c /= range as usize;
                v
            })
            .collect();
        let kk = key(&vals, None);
        if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(kk) {
            e.insert(configs.len());
            configs.push(vals);
        }
    }

    let classes = (0..variables)
        .map(|v| {
            let mut first: HashMap<Vec<i8>, u32> = HashMap::new();
            configs.iter().enumerate().map(|(i, vals)| *first.entry(key(vals, Some(v))).or_insert(i as u32)).collect()
        })
        .collect();
    let x_value = configs
        .iter()
        .map(|vals| {
            let x = vals[0];
            match params.iter().position(|&p| p == x) {
                Some(i) => 2 * i as u32 + 1,
                None => 2 * params.iter().filter(|&&p| p < x).count() as u32,
            }
        })
        .collect();

    type Eval = Box<dyn Fn(&[i64]) -> i64>;
    let mut terms: Vec<(Term, Eval)> = Vec::new();
    for (i, name) in VARIABLE_NAMES[..variables].iter().enumerate() {
        terms.push((Term::var(name), Box::new(move |vals: &[i64]| vals[i])));
    }
    for (i, name) in cfg.names().iter().enumerate() {
        let p = params[i];
        terms.push((Term::param(name), Box::new(move |_: &[i64]| p)));
    }
    let n = configs.len();
    let mut atoms = Vec::new();
    for (s, fs) in &terms {
        for (t, ft) in &terms {
            let phi = Formula::rel(ORDER_SYMBOL, vec![s.clone(), t.clone()]);
            atoms.push((phi, 1, Meaning::from_fn(n, |c| fs(&configs[c]) < ft(&configs[c]))));
        }
    }
    for (i, (s, fs)) in terms.iter().enumerate() {
        for (t, ft) in &terms[i + 1..] {
            let phi = Formula::eq(s.clone(), t.clone());
            atoms.push((phi, 1, Meaning::from_fn(n, |c| fs(&configs[c]) == ft(&configs[c]))));
        }
    }
    Ok(AssignmentSpace { configs: n, variables, atoms, classes, x_value, x_values: cfg.cells() })
}

/// Every distinct extension of a formula in `x` over the parameters of AST
/// size `<= budget`, with the first formula found for it.
pub fn enumerate_dlo_properties(
    cfg: &ParamConfig,
    config: EnumerationConfig,
) -> Result<Vec<(SemiLinearSet, Formula)>, DloError> {
    let space = dlo_space(cfg, config.variables)?;
    let mut en = Enumeration::new(&space)?;
    en.run(config.budget, config.node_limit)?;
    Ok(en
        .property_extensions()
        .into_iter()
        .map(|(cells, id)| {
            let cells: Vec<usize> = cells.into_iter().map(|c| c as usize).collect();
            (SemiLinearSet::from_cells(cfg, &cells), en.formula(id))
        })
        .collect())
}
