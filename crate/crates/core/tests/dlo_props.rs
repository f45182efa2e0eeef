mod common;

use std::collections::HashMap;

use common::{order_candidates, q, random_embedding, rational_truth, Q};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use typicality::corpus;
use typicality::dlo::*;
use typicality::engine::{EnumerationConfig, FilterMode};
use typicality::syntax::{Formula, Signature};

/// Cell of `x` given the sorted parameter values.
fn cell_of(x: &Q, params: &[Q]) -> usize {
    match params.iter().position(|p| p == x) {
        Some(i) => 2 * i + 1,
        None => 2 * params.iter().filter(|p| *p < x).count(),
    }
}

fn env(cfg: &ParamConfig, params: &[Q], x: &Q) -> HashMap<String, Q> {
    let mut e: HashMap<String, Q> = cfg.names().iter().cloned().zip(params.iter().cloned()).collect();
    e.insert("x".into(), x.clone());
    e
}

/// Compares the eliminated form with exact evaluation of the original formula.
fn check_against_rationals(phi: &Formula, cfg: &ParamConfig, samples: usize, seed: u64) -> usize {
    let qf = eliminate_quantifiers(phi, cfg).unwrap();
    let back = qf.to_formula();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for _ in 0..samples {
        let params = random_embedding(&mut rng, cfg.len());
        let mut xs = order_candidates(&params);
        xs.push(q(rand::Rng::gen_range(&mut rng, -60..60), 7));
        for x in xs {
            let direct = rational_truth(phi, &mut env(cfg, &params, &x));
            assert_eq!(rational_truth(&back, &mut env(cfg, &params, &x)), direct, "{phi} vs {qf}");
            assert_eq!(qf.holds_in_cell(cell_of(&x, &params)), direct, "{phi} vs {qf}");
            checked += 1;
        }
    }
    checked
}

#[test]
fn elimination_agrees_with_rational_evaluation_on_fixture() {
    let cfg = ParamConfig::standard(4);
    let formulas = corpus::formulas(&Signature::order(), &["a1", "a2", "a3", "a4"]);
    assert!(formulas.len() >= 20);
    for (i, phi) in formulas.iter().enumerate() {
        check_against_rationals(phi, &cfg, 100, i as u64);
    }
}

#[test]
fn elimination_on_small_integer_orders() {
    // Every placement of k <= 3 parameters and x into 0..8.
    let formulas = corpus::formulas(&Signature::order(), &["a1", "a2", "a3"]);
    for k in 0..=3usize {
        let cfg = ParamConfig::standard(k);
        let usable: Vec<&Formula> =
            formulas.iter().filter(|f| f.free_symbols().params.iter().all(|p| cfg.index(p).is_some())).collect();
        for combo in typicality::model::tuples(8, k) {
            if combo.windows(2).any(|w| w[0] >= w[1]) {
                continue;
            }
            let params: Vec<Q> = combo.iter().map(|&v| q(v as i64, 1)).collect();
            for x in 0..8 {
                let x = q(x, 1);
                for phi in &usable {
                    let qf = eliminate_quantifiers(phi, &cfg).unwrap();
                    let direct = rational_truth(phi, &mut env(&cfg, &params, &x));
                    assert_eq!(qf.holds_in_cell(cell_of(&x, &params)), direct, "{phi}");
                }
            }
        }
    }
}

#[test]
fn generalized_quantifiers_agree_with_rationals() {
    let cfg = ParamConfig::standard(2);
    for text in [
        "Qmost y (y != a1)",
        "Qmost y (x < y)",
        "Qinf y (y < x | a2 < y)",
        "Qmost y exists z (y < z & z < a1)",
        "forall y (Qinf z (y < z))",
        "Qmost y (y != x & y != a2)",
    ] {
        let phi = cfg.parse_formula(text).unwrap();
        check_against_rationals(&phi, &cfg, 30, 1);
    }
}

#[test]
fn majority_equals_frechet() {
    for k in 0..=4 {
        let cfg = ParamConfig::standard(k);
        for (set, phi) in enumerate_dlo_properties(&cfg, dlo_enumeration_config(9)).unwrap() {
            let c = classify_property_dlo(&phi, &cfg).unwrap();
            assert_eq!(c.extension, set);
            assert_eq!(c.verdict(FilterMode::Majority), c.verdict(FilterMode::Frechet), "{phi}");
        }
    }
}

#[test]
fn typical_points_avoid_every_typical_complement() {
    for k in 0..=4 {
        let cfg = ParamConfig::standard(k);
        let typical = typical_elements_dlo(&cfg).unwrap();
        assert_eq!(typical, SemiLinearSet::without_params(&cfg));
        let props = enumerate_dlo_properties(&cfg, dlo_enumeration_config(9)).unwrap();
        for cell in 0..cfg.cells() {
            let avoids = props
                .iter()
                .filter(|(set, _)| {
                    classify_extension(
                        set.clone(),
                        eliminate_quantifiers(
                            &Formula::eq(typicality::syntax::Term::var("x"), typicality::syntax::Term::var("x")),
                            &cfg,
                        )
                        .unwrap(),
                    )
                    .typical
                })
                .all(|(set, _)| set.contains_cell(cell));
            assert_eq!(avoids, typical.contains_cell(cell), "k={k} cell={cell}");
        }
    }
}

#[test]
fn finite_extensions_are_parameter_points() {
    for k in 0..=4 {
        let cfg = ParamConfig::standard(k);
        for (set, _) in enumerate_dlo_properties(&cfg, dlo_enumeration_config(9)).unwrap() {
            if set.is_finite() {
                assert!(set.cells().iter().all(|c| c % 2 == 1));
            }
        }
    }
}

#[test]
fn larger_pool_adds_nothing() {
    for k in 0..=2 {
        let cfg = ParamConfig::standard(k);
        let one: Vec<SemiLinearSet> =
            enumerate_dlo_properties(&cfg, dlo_enumeration_config(9)).unwrap().into_iter().map(|p| p.0).collect();
        let two = enumerate_dlo_properties(&cfg, EnumerationConfig { budget: 9, variables: 2, ..Default::default() })
            .unwrap();
        assert_eq!(one, two.iter().map(|p| p.0.clone()).collect::<Vec<_>>());
        assert_eq!(one.len(), 1 << cfg.cells());
        for (set, phi) in two {
            assert_eq!(classify_property_dlo(&phi, &cfg).unwrap().extension, set, "{phi}");
        }
    }
}

#[test]
fn dichotomy_examples() {
    let cfg = ParamConfig::default();
    let d = dichotomy(&cfg.parse_formula("forall y (x < y | x = y | y < x)").unwrap()).unwrap();
    assert_eq!(d.typical, Side::Formula);
    for phi in corpus::formulas(&Signature::order(), &[]) {
        let d = dichotomy(&phi).unwrap();
        assert_ne!(d.formula.typical, d.negation.typical);
        let other = if d.formula.typical { &d.negation } else { &d.formula };
        assert!(other.extension.cells().is_empty(), "{phi}");
    }
}
