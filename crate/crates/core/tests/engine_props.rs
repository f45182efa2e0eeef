mod common;

use std::collections::BTreeSet;

use typicality::corpus;
use typicality::engine::*;
use typicality::model::{extension, tuples, Element, FiniteStructure, Valuation};
use typicality::symmetry::orbit_partition;
use typicality::syntax::{parse_formula, Formula};

/// The shipped configuration without parameters; with parameters the pool
/// shrinks to `x, y`, since three variables exceed the node cap at budget 9.
fn config(params: &[Element]) -> EnumerationConfig {
    if params.is_empty() {
        EnumerationConfig::default()
    } else {
        EnumerationConfig { variables: 2, ..EnumerationConfig::default() }
    }
}

fn definable_sets(s: &FiniteStructure, params: &[Element]) -> BTreeSet<Vec<Element>> {
    enumerate_definable_sets(s, params, config(params)).unwrap()
}

/// Unions of stabilizer orbits, computed from the orbit partition.
fn orbit_unions(s: &FiniteStructure, params: &[Element]) -> BTreeSet<Vec<Element>> {
    let blocks = orbit_partition(s, params).unwrap().blocks;
    (0u32..1 << blocks.len())
        .map(|pick| {
            let mut set: Vec<Element> =
                blocks.iter().enumerate().filter(|(i, _)| pick >> i & 1 == 1).flat_map(|(_, b)| b.clone()).collect();
            set.sort_unstable();
            set
        })
        .collect()
}

#[test]
fn enumeration_examples() {
    let p3 = corpus::structure("p3").unwrap();
    let expected: BTreeSet<Vec<Element>> = [vec![], vec![1], vec![0, 2], vec![0, 1, 2]].into_iter().collect();
    assert_eq!(definable_sets(&p3, &[]), expected);
    // Rigid: every subset is invariant and is reached.
    let chain = corpus::structure("chain3").unwrap();
    assert_eq!(definable_sets(&chain, &[]), orbit_unions(&chain, &[]));
    assert_eq!(definable_sets(&chain, &[]).len(), 8);
    let c4 = corpus::structure("c4").unwrap();
    assert_eq!(definable_sets(&c4, &[]), [vec![], vec![0, 1, 2, 3]].into_iter().collect());
}

#[test]
fn enumerated_sets_are_orbit_unions() {
    for (name, s) in corpus::structures() {
        let params: Vec<Vec<Element>> = (0..=1).flat_map(|k| tuples(s.size(), k)).collect();
        for p in params {
            let unions = orbit_unions(&s, &p);
            for set in definable_sets(&s, &p) {
                assert!(unions.contains(&set), "{name} {p:?} {set:?}");
            }
        }
    }
}

#[test]
fn orbit_typical_set_matches_enumeration() {
    for (name, s) in corpus::structures().into_iter().filter(|(_, s)| s.size() <= 4) {
        for k in 0..=1 {
            for p in tuples(s.size(), k) {
                let by_orbits = typical_set(&s, &p).unwrap();
                let by_enum = typical_set_by_enumeration(&s, &p, config(&p)).unwrap();
                assert_eq!(by_orbits, by_enum, "{name} {p:?}");
            }
        }
    }
}

#[test]
fn element_criterion() {
    for (_, s) in corpus::structures() {
        for k in 0..=2 {
            for p in tuples(s.size(), k) {
                let orbits = orbit_partition(&s, &p).unwrap();
                for a in s.universe() {
                    let v = classify_element(&s, a, &p).unwrap();
                    let x = orbits.orbit_of(a);
                    assert_eq!(v.certificate.orbit, x);
                    assert_eq!(!v.typical, x.len() < s.size() - x.len());
                    assert_eq!(v.typical, v.certificate.certifies_typical());
                }
            }
        }
    }
}

#[test]
fn downward_monotonicity() {
    for (_, s) in corpus::structures() {
        for k in 0..=2 {
            for b in tuples(s.size(), k) {
                for c in s.universe() {
                    let mut cb = vec![c];
                    cb.extend(&b);
                    for a in s.universe() {
                        if is_typical(&s, a, &cb).unwrap() {
                            assert!(is_typical(&s, a, &b).unwrap());
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn majority_quantifier_identity_on_fixture() {
    for (_, s) in corpus::structures() {
        for phi in corpus::formulas(s.signature(), &[]) {
            let v = Valuation::new();
            let c = classify_property(&s, &phi, &v, FilterMode::Majority).unwrap();
            assert_eq!(c.typical, majority_quantifier_holds(&s, &phi, &v).unwrap(), "{phi}");
            assert_eq!(c.typical, 2 * c.extension.len() > s.size());
        }
    }
}

fn typical_fixture_properties(s: &FiniteStructure) -> Vec<Formula> {
    let v = Valuation::new();
    corpus::formulas(s.signature(), &[])
        .into_iter()
        .filter(|phi| classify_property(s, phi, &v, FilterMode::Majority).unwrap().typical)
        .collect()
}

#[test]
fn conjunction_closure_where_orbits_are_large() {
    for (name, s) in corpus::structures() {
        let orbits = orbit_partition(&s, &[]).unwrap();
        if orbits.blocks.iter().any(|b| 2 * b.len() < s.size()) {
            continue;
        }
        let props = typical_fixture_properties(&s);
        for a in &props {
            for b in &props {
                let both = Formula::and(a.clone(), b.clone());
                let c = classify_property(&s, &both, &Valuation::new(), FilterMode::Majority).unwrap();
                assert!(c.typical, "{name}: {both}");
            }
        }
    }
}

#[test]
fn conjunction_closure_fails_on_three_orbits() {
    let six = corpus::structure("six").unwrap();
    let sig = six.signature();
    let not_p = parse_formula("!P(x)", sig).unwrap();
    let not_q = parse_formula("!Q(x)", sig).unwrap();
    let v = Valuation::new();
    assert!(classify_property(&six, &not_p, &v, FilterMode::Majority).unwrap().typical);
    assert!(classify_property(&six, &not_q, &v, FilterMode::Majority).unwrap().typical);
    let both = classify_property(&six, &Formula::and(not_p, not_q), &v, FilterMode::Majority).unwrap();
    assert!(!both.typical);
    assert_eq!(both.extension, vec![4, 5]);
    assert_eq!(extension(&six, &parse_formula("P(x) | Q(x)", sig).unwrap(), "x", &v).unwrap(), vec![0, 1, 2, 3]);
}

#[test]
fn witness_search_finds_minorities() {
    let cfg = EnumerationConfig::with_budget(11);
    for (name, s) in corpus::structures().into_iter().filter(|(_, s)| s.size() <= 4) {
        for a in s.universe() {
            let typical = is_typical(&s, a, &[]).unwrap();
            let w = find_witness(&s, a, &[], cfg).unwrap();
            assert_eq!(w.is_none(), typical, "{name} {a}");
            if let Some(w) = w {
                let ext = extension(&s, &w.ast, "x", &Valuation::new()).unwrap();
                assert_eq!(ext, w.extension);
                assert!(ext.contains(&a) && 2 * ext.len() < s.size());
                assert!(w.ast.size() <= 11);
            }
        }
    }
}
