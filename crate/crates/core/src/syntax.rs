//! First-order formulas with the generalized quantifiers `Qmost` and `Qinf`.
//!
//! Concrete syntax (ASCII):
//!
//! ```text
//! formula := iff ; iff := imp ("<->" imp)* ; imp := or ("->" or)* ;
//! or := and ("|" and)* ; and := unary ("&" unary)* ;
//! unary := "!" unary | quant | atom | "(" formula ")" ;
//! quant := ("forall"|"exists"|"Qmost"|"Qinf") ident formula ;
//! atom := ident "(" term ("," term)* ")" | term ("="|"!="|"<") term ;
//! term := ident | ident "(" term ("," term)* ")" .
//! ```
//!
//! `t1 != t2` is sugar for `!(t1 = t2)` and `t1 < t2` is sugar for `lt(t1, t2)`
//! (only when the signature declares a binary `lt`). Binary connectives
//! associate to the left. Parameters are identifiers declared up front; they
//! behave as free variables that no quantifier may bind.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Name of the binary relation that `<` abbreviates.
pub const ORDER_SYMBOL: &str = "lt";

const KEYWORDS: [&str; 4] = ["forall", "exists", "Qmost", "Qinf"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("symbol `{0}` is declared twice")]
    Duplicate(String),
    #[error("`{0}` is not a valid identifier")]
    BadName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Relation(usize),
    Function(usize),
    Constant,
}

/// A single-sorted first-order vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Signature {
    symbols: BTreeMap<String, SymbolKind>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// The vocabulary `{lt}` of linear orders.
    pub fn order() -> Self {
        Self::new().with_relation(ORDER_SYMBOL, 2).expect("fresh signature")
    }

    pub fn with_relation(mut self, name: &str, arity: usize) -> Result<Self, SignatureError> {
        self.declare(name, SymbolKind::Relation(arity))?;
        Ok(self)
    }

    pub fn with_function(mut self, name: &str, arity: usize) -> Result<Self, SignatureError> {
        self.declare(name, SymbolKind::Function(arity))?;
        Ok(self)
    }

    pub fn with_constant(mut self, name: &str) -> Result<Self, SignatureError> {
        self.declare(name, SymbolKind::Constant)?;
        Ok(self)
    }

    pub fn declare(&mut self, name: &str, kind: SymbolKind) -> Result<(), SignatureError> {
        if !is_identifier(name) || KEYWORDS.contains(&name) {
            return Err(SignatureError::BadName(name.to_string()));
        }
        if self.symbols.contains_key(name) {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        self.symbols.insert(name.to_string(), kind);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&SymbolKind> {
        self.symbols.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.symbols.iter().filter_map(|(n, k)| match k {
            SymbolKind::Relation(a) => Some((n.as_str(), *a)),
            _ => None,
        })
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.symbols.iter().filter_map(|(n, k)| match k {
            SymbolKind::Function(a) => Some((n.as_str(), *a)),
            _ => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().filter_map(|(n, k)| match k {
            SymbolKind::Constant => Some(n.as_str()),
            _ => None,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    fn has_order(&self) -> bool {
        matches!(self.get(ORDER_SYMBOL), Some(SymbolKind::Relation(2)))
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A parameter placeholder, interpreted by the valuation like a variable.
    Param(String),
    Const(String),
    Apply(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    pub fn param(name: &str) -> Self {
        Term::Param(name.to_string())
    }

    fn function_nodes(&self) -> usize {
        match self {
            Term::Apply(_, args) => 1 + args.iter().map(Term::function_nodes).sum::<usize>(),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Quantifier {
    Forall,
    Exists,
    /// Majority quantifier: the extension is a strict majority.
    Most,
    /// Frechet quantifier: the extension is cofinite.
    Inf,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
            Quantifier::Most => "Qmost",
            Quantifier::Inf => "Qinf",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "forall" => Quantifier::Forall,
            "exists" => Quantifier::Exists,
            "Qmost" => Quantifier::Most,
            "Qinf" => Quantifier::Inf,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant(Quantifier, String, Box<Formula>),
}

impl Formula {
    pub fn rel(name: &str, args: Vec<Term>) -> Self {
        Formula::Rel(name.to_string(), args)
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Formula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Self {
        Formula::not(Formula::Eq(a, b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn quant(q: Quantifier, var: &str, body: Formula) -> Self {
        Formula::Quant(q, var.to_string(), Box::new(body))
    }

    pub fn exists(var: &str, body: Formula) -> Self {
        Self::quant(Quantifier::Exists, var, body)
    }

    pub fn forall(var: &str, body: Formula) -> Self {
        Self::quant(Quantifier::Forall, var, body)
    }

    /// AST size: one per connective, quantifier and atom, plus one per
    /// function application inside terms.
    pub fn size(&self) -> usize {
        match self {
            Formula::Rel(_, args) => 1 + args.iter().map(Term::function_nodes).sum::<usize>(),
            Formula::Eq(a, b) => 1 + a.function_nodes() + b.function_nodes(),
            Formula::Not(f) | Formula::Quant(_, _, f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Rel(..) | Formula::Eq(..) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Quant(..) => false,
        }
    }

    pub fn free_symbols(&self) -> FreeSymbols {
        let mut out = FreeSymbols::default();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    /// Canonical rendering; re-parses (with the same parameter list) to an
    /// identical AST.
    pub fn render(&self) -> String {
        let mut s = String::new();
        write_formula(self, Position::Top, &mut s);
        s
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn render_formula(phi: &Formula) -> String {
    phi.render()
}

/// Free occurrences, split into ordinary variables and parameter placeholders.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FreeSymbols {
    pub vars: BTreeSet<String>,
    pub params: BTreeSet<String>,
}

pub fn free_variables(phi: &Formula) -> FreeSymbols {
    phi.free_symbols()
}

fn collect_term(t: &Term, bound: &[String], out: &mut FreeSymbols) {
    match t {
        Term::Var(v) => {
            if !bound.iter().any(|b| b == v) {
                out.vars.insert(v.clone());
            }
        }
        Term::Param(p) => {
            out.params.insert(p.clone());
        }
        Term::Const(_) => {}
        Term::Apply(_, args) => args.iter().for_each(|a| collect_term(a, bound, out)),
    }
}

fn collect_free(phi: &Formula, bound: &mut Vec<String>, out: &mut FreeSymbols) {
    match phi {
        Formula::Rel(_, args) => args.iter().for_each(|a| collect_term(a, bound, out)),
        Formula::Eq(a, b) => {
            collect_term(a, bound, out);
            collect_term(b, bound, out);
        }
        Formula::Not(f) => collect_free(f, bound, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Formula::Quant(_, v, f) => {
            bound.push(v.clone());
            collect_free(f, bound, out);
            bound.pop();
        }
    }
}

/// `(x != p1) & ... & (x != pn)` over the free variable `x`, with the given
/// names as parameter placeholders.
pub fn distinctness_formula(params: &[&str]) -> Result<Formula, SyntaxError> {
    let Some((first, rest)) = params.split_first() else {
        return Err(SyntaxError::new(0, SyntaxErrorKind::EmptyParameterList));
    };
    let mut seen = BTreeSet::new();
    for p in params {
        if !is_identifier(p) || *p == "x" {
            return Err(SyntaxError::new(0, SyntaxErrorKind::BadParameter(p.to_string())));
        }
        if !seen.insert(*p) {
            return Err(SyntaxError::new(0, SyntaxErrorKind::BadParameter(p.to_string())));
        }
    }
    let atom = |p: &str| Formula::neq(Term::var("x"), Term::param(p));
    Ok(rest.iter().fold(atom(first), |acc, p| Formula::and(acc, atom(p))))
}

// ---------------------------------------------------------------- rendering

#[derive(Clone, Copy, PartialEq, Eq)]
enum Position {
    /// Top level or quantifier body: greedy constructs are safe here.
    Top,
    /// Operand of a connective: quantifiers must be parenthesized.
    Operand,
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::Var(n) | Term::Param(n) | Term::Const(n) => out.push_str(n),
        Term::Apply(f, args) => {
            out.push_str(f);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(a, out);
                }
                out.push(')');
            }
        }
    }
}

fn write_formula(phi: &Formula, pos: Position, out: &mut String) {
    match phi {
        Formula::Rel(r, args) if r == ORDER_SYMBOL && args.len() == 2 => {
            write_term(&args[0], out);
            out.push_str(" < ");
            write_term(&args[1], out);
        }
        Formula::Rel(r, args) => {
            out.push_str(r);
            if !args.is_empty() {
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(a, out);
                }
                out.push(')');
            }
        }
        Formula::Eq(a, b) => {
            write_term(a, out);
            out.push_str(" = ");
            write_term(b, out);
        }
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Eq(a, b) => {
                write_term(a, out);
                out.push_str(" != ");
                write_term(b, out);
            }
            Formula::Quant(..) => {
                out.push_str("!(");
                write_formula(inner, Position::Top, out);
                out.push(')');
            }
            _ => {
                out.push('!');
                write_formula(inner, Position::Operand, out);
            }
        },
        Formula::And(a, b) => write_binary(a, "&", b, out),
        Formula::Or(a, b) => write_binary(a, "|", b, out),
        Formula::Implies(a, b) => write_binary(a, "->", b, out),
        Formula::Iff(a, b) => write_binary(a, "<->", b, out),
        Formula::Quant(q, v, body) => {
            if pos == Position::Operand {
                out.push('(');
            }
            out.push_str(q.keyword());
            out.push(' ');
            out.push_str(v);
            out.push(' ');
            if is_binary(body) {
                write_formula(body, Position::Top, out);
            } else {
                out.push('(');
                write_formula(body, Position::Top, out);
                out.push(')');
            }
            if pos == Position::Operand {
                out.push(')');
            }
        }
    }
}

fn is_binary(phi: &Formula) -> bool {
    matches!(phi, Formula::And(..) | Formula::Or(..) | Formula::Implies(..) | Formula::Iff(..))
}

fn write_binary(a: &Formula, op: &str, b: &Formula, out: &mut String) {
    out.push('(');
    write_formula(a, Position::Operand, out);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    write_formula(b, Position::Operand, out);
    out.push(')');
}

// ------------------------------------------------------------------ parsing

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at byte {pos}: {kind}")]
pub struct SyntaxError {
    pub pos: usize,
    pub kind: SyntaxErrorKind,
}

impl SyntaxError {
    fn new(pos: usize, kind: SyntaxErrorKind) -> Self {
        Self { pos, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxErrorKind {
    #[error("unexpected character `{0}`")]
    BadChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("`{0}` is a relation symbol and cannot be used as a term")]
    RelationAsTerm(String),
    #[error("quantifier binds parameter `{0}`")]
    CapturedParameter(String),
    #[error("parameter list is empty")]
    EmptyParameterList,
    #[error("invalid parameter name `{0}`")]
    BadParameter(String),
    #[error("`<` needs a binary `lt` in the signature")]
    NoOrder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Eq,
    Neq,
    Lt,
    Bang,
    And,
    Or,
    Arrow,
    DoubleArrow,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Bang => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DoubleArrow => "`<->`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        } else if text[i..].starts_with("<->") {
            i += 3;
            Tok::DoubleArrow
        } else if text[i..].starts_with("->") {
            i += 2;
            Tok::Arrow
        } else if text[i..].starts_with("!=") {
            i += 2;
            Tok::Neq
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '=' => Tok::Eq,
                '<' => Tok::Lt,
                '!' => Tok::Bang,
                '&' => Tok::And,
                '|' => Tok::Or,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or(c);
                    return Err(SyntaxError::new(start, SyntaxErrorKind::BadChar(ch)));
                }
            }
        };
        out.push((start, tok));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, SyntaxError> {
    parse_formula_with_params(text, sig, &[])
}

/// Parses with the given identifiers treated as parameter placeholders.
pub fn parse_formula_with_params(text: &str, sig: &Signature, params: &[&str]) -> Result<Formula, SyntaxError> {
    for p in params {
        if !is_identifier(p) || KEYWORDS.contains(p) || sig.get(p).is_some() {
            return Err(SyntaxError::new(0, SyntaxErrorKind::BadParameter(p.to_string())));
        }
    }
    let toks = tokenize(text)?;
    let mut parser = Parser { toks, at: 0, sig, params };
    let phi = parser.formula()?;
    parser.expect(Tok::End, "end of input")?;
    Ok(phi)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    sig: &'a Signature,
    params: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> SyntaxError {
        SyntaxError::new(
            self.pos(),
            SyntaxErrorKind::Unexpected { expected: expected.to_string(), found: self.peek().describe() },
        )
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::DoubleArrow {
            self.bump();
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.disjunction()?;
        while *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.disjunction()?;
            lhs = Formula::implies(lhs, rhs);
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(name) => {
                if let Some(q) = Quantifier::from_keyword(&name) {
                    self.bump();
                    let var_pos = self.pos();
                    let var = match self.bump() {
                        Tok::Ident(v) if !KEYWORDS.contains(&v.as_str()) => v,
                        _ => {
                            self.at -= 1;
                            return Err(self.unexpected("a variable after the quantifier"));
                        }
                    };
                    if self.params.contains(&var.as_str()) {
                        return Err(SyntaxError::new(var_pos, SyntaxErrorKind::CapturedParameter(var)));
                    }
                    if self.sig.get(&var).is_some() {
                        return Err(SyntaxError::new(
                            var_pos,
                            SyntaxErrorKind::Unexpected {
                                expected: "a variable after the quantifier".into(),
                                found: format!("symbol `{var}`"),
                            },
                        ));
                    }
                    let body = self.formula()?;
                    return Ok(Formula::Quant(q, var, Box::new(body)));
                }
                if let Some(SymbolKind::Relation(arity)) = self.sig.get(&name).cloned() {
                    let pos = self.pos();
                    self.bump();
                    let args = if *self.peek() == Tok::LParen { self.arguments()? } else { Vec::new() };
                    if args.len() != arity {
                        return Err(SyntaxError::new(
                            pos,
                            SyntaxErrorKind::Arity { name, expected: arity, got: args.len() },
                        ));
                    }
                    return Ok(Formula::Rel(name, args));
                }
                self.comparison()
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn comparison(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.term()?;
        let pos = self.pos();
        match self.bump() {
            Tok::Eq => Ok(Formula::Eq(lhs, self.term()?)),
            Tok::Neq => Ok(Formula::neq(lhs, self.term()?)),
            Tok::Lt => {
                if !self.sig.has_order() {
                    return Err(SyntaxError::new(pos, SyntaxErrorKind::NoOrder));
                }
                let rhs = self.term()?;
                Ok(Formula::Rel(ORDER_SYMBOL.to_string(), vec![lhs, rhs]))
            }
            _ => {
                self.at -= 1;
                Err(self.unexpected("`=`, `!=` or `<`"))
            }
        }
    }

    fn arguments(&mut self) -> Result<Vec<Term>, SyntaxError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let pos = self.pos();
        let name = match self.peek().clone() {
            Tok::Ident(n) if !KEYWORDS.contains(&n.as_str()) => n,
            _ => return Err(self.unexpected("a term")),
        };
        self.bump();
        match self.sig.get(&name).cloned() {
            Some(SymbolKind::Constant) => Ok(Term::Const(name)),
            Some(SymbolKind::Function(arity)) => {
                let args = if *self.peek() == Tok::LParen { self.arguments()? } else { Vec::new() };
                if args.len() != arity {
                    return Err(SyntaxError::new(
                        pos,
                        SyntaxErrorKind::Arity { name, expected: arity, got: args.len() },
                    ));
                }
                Ok(Term::Apply(name, args))
            }
            Some(SymbolKind::Relation(_)) => Err(SyntaxError::new(pos, SyntaxErrorKind::RelationAsTerm(name))),
            None => {
                if *self.peek() == Tok::LParen {
                    return Err(SyntaxError::new(pos, SyntaxErrorKind::UnknownSymbol(name)));
                }
                if self.params.contains(&name.as_str()) {
                    Ok(Term::Param(name))
                } else {
                    Ok(Term::Var(name))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph() -> Signature {
        Signature::new().with_relation("E", 2).unwrap()
    }

    #[test]
    fn distinctness_shape_parses() {
        let phi = parse_formula_with_params("(x != a1) & (x != a2)", &graph(), &["a1", "a2"]).unwrap();
        assert_eq!(phi, distinctness_formula(&["a1", "a2"]).unwrap());
        let fs = phi.free_symbols();
        assert_eq!(fs.vars, BTreeSet::from(["x".to_string()]));
        assert_eq!(fs.params.len(), 2);
    }

    #[test]
    fn definability_schema_parses() {
        let sig = Signature::new().with_relation("P", 1).unwrap();
        let phi = parse_formula("forall x (x = b <-> P(x))", &sig).unwrap();
        match &phi {
            Formula::Quant(Quantifier::Forall, v, body) => {
                assert_eq!(v, "x");
                assert!(matches!(body.as_ref(), Formula::Iff(..)));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(phi.free_symbols().vars, BTreeSet::from(["b".to_string()]));
    }

    #[test]
    fn arity_mismatch_reports_position() {
        let err = parse_formula("E(x, y, z)", &graph()).unwrap_err();
        assert_eq!(err.pos, 0);
        assert!(matches!(err.kind, SyntaxErrorKind::Arity { expected: 2, got: 3, .. }));
        let err = parse_formula("x = y & F(x)", &graph()).unwrap_err();
        assert_eq!(err.pos, 8);
        assert!(matches!(err.kind, SyntaxErrorKind::UnknownSymbol(_)));
    }

    #[test]
    fn malformed_input() {
        assert!(parse_formula("E(x,", &graph()).is_err());
        assert!(parse_formula("x = ", &graph()).is_err());
        assert!(parse_formula("forall (x = x)", &graph()).is_err());
        assert!(parse_formula("x # y", &graph()).is_err());
        assert!(parse_formula("x < y", &graph()).is_err());
    }

    #[test]
    fn quantifier_cannot_capture_parameter() {
        let err = parse_formula_with_params("exists a (x = a)", &graph(), &["a"]).unwrap_err();
        assert!(matches!(err.kind, SyntaxErrorKind::CapturedParameter(_)));
    }

    #[test]
    fn renders_canonically() {
        let phi = distinctness_formula(&["a1"]).unwrap();
        assert_eq!(phi.render(), "x != a1");
        let phi = distinctness_formula(&["a1", "a2"]).unwrap();
        assert_eq!(phi.render(), "(x != a1 & x != a2)");
        let g = graph();
        let phi = parse_formula("Qmost x exists y E(x,y)", &g).unwrap();
        assert_eq!(phi.render(), "Qmost x (exists y (E(x, y)))");
        let phi = parse_formula("(forall x E(x,y)) & E(y,y)", &g).unwrap();
        assert_eq!(phi.render(), "((forall x (E(x, y))) & E(y, y))");
        assert_eq!(parse_formula(&phi.render(), &g).unwrap(), phi);
    }

    #[test]
    fn free_variables_examples() {
        let g = graph();
        let phi = parse_formula("forall x E(x,y)", &g).unwrap();
        assert_eq!(phi.free_symbols().vars, BTreeSet::from(["y".to_string()]));
        let phi = parse_formula("forall x exists y E(x,y)", &g).unwrap();
        assert!(phi.free_symbols().vars.is_empty());
    }

    #[test]
    fn distinctness_errors() {
        assert!(matches!(distinctness_formula(&[]).unwrap_err().kind, SyntaxErrorKind::EmptyParameterList));
        assert!(distinctness_formula(&["a", "a"]).is_err());
    }

    #[test]
    fn order_sugar() {
        let sig = Signature::order();
        let phi = parse_formula_with_params("exists y (a < y & y < x)", &sig, &["a"]).unwrap();
        assert_eq!(phi.render(), "exists y (a < y & y < x)");
        assert_eq!(phi.size(), 4);
    }

    #[test]
    fn size_counts_function_applications() {
        let sig = Signature::new().with_function("f", 1).unwrap().with_constant("c").unwrap();
        let phi = parse_formula("f(f(x)) = c", &sig).unwrap();
        assert_eq!(phi.size(), 3);
    }

    #[test]
    fn signature_rejects_duplicates() {
        let err = Signature::new().with_relation("E", 2).unwrap().with_constant("E").unwrap_err();
        assert_eq!(err, SignatureError::Duplicate("E".into()));
    }
}
