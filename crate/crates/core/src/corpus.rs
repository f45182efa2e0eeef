//! Small named structures and a formula fixture shipped with the crate.

use crate::model::{load_structure, FiniteStructure};
use crate::syntax::{parse_formula_with_params, Formula, Signature};

const STRUCTURES: [(&str, &str); 6] = [
    ("p3", include_str!("../corpus/p3.struct")),
    ("c4", include_str!("../corpus/c4.struct")),
    ("chain3", include_str!("../corpus/chain3.struct")),
    ("k22", include_str!("../corpus/k22.struct")),
    ("empty2", include_str!("../corpus/empty2.struct")),
    ("six", include_str!("../corpus/six.struct")),
];

pub const FORMULAS: &str = include_str!("../corpus/formulas.txt");

pub fn names() -> impl Iterator<Item = &'static str> {
    STRUCTURES.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    STRUCTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn structure(name: &str) -> Option<FiniteStructure> {
    source(name).map(|t| load_structure(t).expect("corpus structure loads"))
}

/// All corpus structures in a fixed order.
pub fn structures() -> Vec<(&'static str, FiniteStructure)> {
    names().map(|n| (n, structure(n).unwrap())).collect()
}

/// Fixture lines that parse over `sig` with the given parameter names and
/// have no free variable other than `x`.
pub fn formulas(sig: &Signature, params: &[&str]) -> Vec<Formula> {
    formula_lines()
        .filter_map(|line| parse_formula_with_params(line, sig, params).ok())
        .filter(|phi| phi.free_symbols().vars.iter().all(|v| v == "x"))
        .collect()
}

pub fn formula_lines() -> impl Iterator<Item = &'static str> {
    FORMULAS.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_load() {
        let sizes: Vec<usize> = structures().iter().map(|(_, s)| s.size()).collect();
        assert_eq!(sizes, vec![3, 4, 3, 4, 2, 6]);
        assert!(structure("nope").is_none());
    }

    #[test]
    fn fixture_filters_by_signature() {
        let p3 = structure("p3").unwrap();
        let graph = formulas(p3.signature(), &[]);
        assert!(graph.iter().any(|f| f.render() == "exists y (E(x, y))"));
        assert!(graph.iter().all(|f| f.free_symbols().params.is_empty()));
        let order = formulas(&Signature::order(), &["a1", "a2", "a3", "a4"]);
        assert!(order.len() >= 20);
    }
}
