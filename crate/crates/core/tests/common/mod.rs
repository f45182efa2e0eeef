//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use rand::Rng;
use typicality::cantor::EPStream;
use typicality::model::{Element, FiniteStructure};
use typicality::syntax::{Formula, Quantifier, Term};

pub type Env = HashMap<String, Element>;

fn term(s: &FiniteStructure, t: &Term, env: &Env) -> Element {
    match t {
        Term::Var(v) | Term::Param(v) => env[v],
        Term::Const(c) => s.constants()[c],
        Term::Apply(f, args) => {
            let table = &s.functions()[f];
            let mut index = 0;
            for a in args {
                index = index * s.size() + term(s, a, env);
            }
            table.values[index]
        }
    }
}

/// Direct truth-table semantics.
pub fn truth(s: &FiniteStructure, phi: &Formula, env: &mut Env) -> bool {
    match phi {
        Formula::Rel(r, args) => {
            let tuple: Vec<Element> = args.iter().map(|a| term(s, a, env)).collect();
            s.relations()[r].tuples.contains(&tuple)
        }
        Formula::Eq(a, b) => term(s, a, env) == term(s, b, env),
        Formula::Not(f) => !truth(s, f, env),
        Formula::And(a, b) => truth(s, a, env) & truth(s, b, env),
        Formula::Or(a, b) => truth(s, a, env) | truth(s, b, env),
        Formula::Implies(a, b) => !truth(s, a, env) | truth(s, b, env),
        Formula::Iff(a, b) => truth(s, a, env) == truth(s, b, env),
        Formula::Quant(q, v, body) => {
            let saved = env.get(v).copied();
            let mut count = 0;
            for e in 0..s.size() {
                env.insert(v.clone(), e);
                count += truth(s, body, env) as usize;
            }
            match saved {
                Some(e) => env.insert(v.clone(), e),
                None => env.remove(v),
            };
            match q {
                Quantifier::Exists => count > 0,
                Quantifier::Forall => count == s.size(),
                Quantifier::Most => 2 * count > s.size(),
                Quantifier::Inf => true,
            }
        }
    }
}

pub fn oracle_extension(s: &FiniteStructure, phi: &Formula, var: &str, env: &Env) -> Vec<Element> {
    let mut env = env.clone();
    (0..s.size())
        .filter(|&a| {
            env.insert(var.to_string(), a);
            truth(s, phi, &mut env)
        })
        .collect()
}

/// Every formula of AST size `<= max` built from the given atoms, all four
/// binary connectives, negation and all quantifiers over `vars`.
pub fn all_formulas(atoms: &[Formula], vars: &[&str], max: usize) -> Vec<Vec<Formula>> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new(), atoms.to_vec()];
    let quants = [Quantifier::Exists, Quantifier::Forall, Quantifier::Most, Quantifier::Inf];
    for size in 2..=max {
        let mut out = Vec::new();
        for f in &by_size[size - 1] {
            out.push(Formula::not(f.clone()));
            for q in quants {
                for v in vars {
                    out.push(Formula::quant(q, v, f.clone()));
                }
            }
        }
        for left in 1..size - 1 {
            let right = size - 1 - left;
            for a in &by_size[left] {
                for b in &by_size[right] {
                    out.push(Formula::and(a.clone(), b.clone()));
                    out.push(Formula::or(a.clone(), b.clone()));
                    out.push(Formula::implies(a.clone(), b.clone()));
                    out.push(Formula::iff(a.clone(), b.clone()));
                }
            }
        }
        by_size.push(out);
    }
    by_size
}

/// A random formula of exactly the given size.
pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[Formula], vars: &[&str], size: usize) -> Formula {
    if size == 1 {
        return atoms[rng.gen_range(0..atoms.len())].clone();
    }
    if size == 2 || rng.gen_bool(0.4) {
        let body = random_formula(rng, atoms, vars, size - 1);
        return match rng.gen_range(0..5) {
            0 => Formula::not(body),
            q => {
                let q = [Quantifier::Exists, Quantifier::Forall, Quantifier::Most, Quantifier::Inf][q - 1];
                Formula::quant(q, vars[rng.gen_range(0..vars.len())], body)
            }
        };
    }
    let left = rng.gen_range(1..size - 1);
    let a = random_formula(rng, atoms, vars, left);
    let b = random_formula(rng, atoms, vars, size - 1 - left);
    match rng.gen_range(0..4) {
        0 => Formula::and(a, b),
        1 => Formula::or(a, b),
        2 => Formula::implies(a, b),
        _ => Formula::iff(a, b),
    }
}

/// Relation and equality atoms over the given variables.
pub fn atoms_for(s: &FiniteStructure, vars: &[&str]) -> Vec<Formula> {
    let mut out = Vec::new();
    for (name, table) in s.relations() {
        for args in typicality::model::tuples(vars.len(), table.arity) {
            out.push(Formula::rel(name, args.iter().map(|&i| Term::var(vars[i])).collect()));
        }
    }
    for a in vars {
        for b in vars {
            out.push(Formula::eq(Term::var(a), Term::var(b)));
        }
    }
    out
}

// ---------------------------------------------------------------- rationals

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(n.into(), d.into())
}

/// Candidate witnesses for a new element over the given points: the points,
/// one point strictly inside each gap, and one beyond each end.
pub fn order_candidates(points: &[Q]) -> Vec<Q> {
    let set: BTreeSet<Q> = points.iter().cloned().collect();
    let sorted: Vec<Q> = set.into_iter().collect();
    if sorted.is_empty() {
        return vec![q(0, 1)];
    }
    let mut out = sorted.clone();
    out.push(&sorted[0] - q(1, 1));
    out.push(sorted.last().unwrap() + q(1, 1));
    for w in sorted.windows(2) {
        out.push((&w[0] + &w[1]) / q(2, 1));
    }
    out
}

fn rat_term(t: &Term, env: &HashMap<String, Q>) -> Q {
    match t {
        Term::Var(v) | Term::Param(v) => env[v].clone(),
        other => panic!("not an order term: {other:?}"),
    }
}

/// Exact truth over (Q, <).
pub fn rational_truth(phi: &Formula, env: &mut HashMap<String, Q>) -> bool {
    match phi {
        Formula::Rel(_, args) => rat_term(&args[0], env) < rat_term(&args[1], env),
        Formula::Eq(a, b) => rat_term(a, env) == rat_term(b, env),
        Formula::Not(f) => !rational_truth(f, env),
        Formula::And(a, b) => rational_truth(a, env) & rational_truth(b, env),
        Formula::Or(a, b) => rational_truth(a, env) | rational_truth(b, env),
        Formula::Implies(a, b) => !rational_truth(a, env) | rational_truth(b, env),
        Formula::Iff(a, b) => rational_truth(a, env) == rational_truth(b, env),
        Formula::Quant(quant, v, body) => {
            let saved = env.remove(v);
            let points: Vec<Q> = env.values().cloned().collect();
            let candidates = order_candidates(&points);
            let point_set: BTreeSet<Q> = points.into_iter().collect();
            let mut results = Vec::new();
            for c in candidates {
                let is_point = point_set.contains(&c);
                env.insert(v.clone(), c);
                results.push((is_point, rational_truth(body, env)));
            }
            env.remove(v);
            if let Some(e) = saved {
                env.insert(v.clone(), e);
            }
            match quant {
                Quantifier::Exists => results.iter().any(|r| r.1),
                Quantifier::Forall => results.iter().all(|r| r.1),
                // Cofinite: every non-point representative must satisfy it.
                Quantifier::Most | Quantifier::Inf => results.iter().filter(|r| !r.0).all(|r| r.1),
            }
        }
    }
}

/// `k` distinct random rationals in increasing order.
pub fn random_embedding<R: Rng>(rng: &mut R, k: usize) -> Vec<Q> {
    let mut set = BTreeSet::new();
    while set.len() < k {
        set.insert(q(rng.gen_range(-50..50), rng.gen_range(1..8)));
    }
    set.into_iter().collect()
}

// ------------------------------------------------------------------ streams

pub fn random_stream<R: Rng>(rng: &mut R, max_pre: usize, max_per: usize) -> EPStream {
    let pre: Vec<bool> = (0..rng.gen_range(0..=max_pre)).map(|_| rng.gen()).collect();
    let per: Vec<bool> = (0..rng.gen_range(1..=max_per)).map(|_| rng.gen()).collect();
    EPStream::new(pre, per).unwrap()
}

pub fn random_family<R: Rng>(rng: &mut R) -> Vec<BTreeSet<u64>> {
    (0..rng.gen_range(0..8)).map(|_| (0..rng.gen_range(0..8)).map(|_| rng.gen_range(0..200)).collect()).collect()
}
