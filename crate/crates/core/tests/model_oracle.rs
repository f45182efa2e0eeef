mod common;

use common::{all_formulas, atoms_for, oracle_extension, random_formula, truth, Env};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use typicality::corpus;
use typicality::model::{evaluate, extension, tuples, FiniteStructure, Valuation};
use typicality::syntax::{parse_formula, Formula, Quantifier};

const VARS: [&str; 2] = ["x", "y"];

fn small_corpus() -> Vec<(&'static str, FiniteStructure)> {
    corpus::structures().into_iter().filter(|(_, s)| s.size() <= 4).collect()
}

fn agree_everywhere(s: &FiniteStructure, phi: &Formula) {
    for vals in tuples(s.size(), VARS.len()) {
        let v: Valuation = VARS.iter().copied().zip(vals.iter().copied()).collect();
        let mut env: Env = VARS.iter().map(|n| n.to_string()).zip(vals).collect();
        assert_eq!(evaluate(s, phi, &v).unwrap(), truth(s, phi, &mut env), "{phi}");
    }
}

#[test]
fn evaluate_matches_truth_tables_exhaustively() {
    for (_, s) in small_corpus() {
        let atoms = atoms_for(&s, &VARS);
        for stratum in all_formulas(&atoms, &VARS, 5) {
            for phi in &stratum {
                agree_everywhere(&s, phi);
            }
        }
    }
}

#[test]
fn evaluate_matches_truth_tables_on_larger_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (_, s) in small_corpus() {
        let atoms = atoms_for(&s, &VARS);
        for size in 6..=7 {
            for _ in 0..3000 {
                let phi = random_formula(&mut rng, &atoms, &VARS, size);
                agree_everywhere(&s, &phi);
            }
        }
    }
}

#[test]
fn extension_examples() {
    let p3 = corpus::structure("p3").unwrap();
    let sig = p3.signature();
    let ext = |text: &str| extension(&p3, &parse_formula(text, sig).unwrap(), "x", &Valuation::new()).unwrap();
    assert_eq!(ext("exists y E(x,y)"), vec![0, 1, 2]);
    assert!(ext("E(x,x)").is_empty());
    let env: Env = Env::new();
    let phi = parse_formula("exists y E(x,y)", sig).unwrap();
    assert_eq!(oracle_extension(&p3, &phi, "x", &env), vec![0, 1, 2]);
    let v = Valuation::new().with("x", 1);
    assert!(evaluate(&p3, &phi, &v).unwrap());
    let most = parse_formula("Qmost x exists y E(x,y)", sig).unwrap();
    assert!(evaluate(&p3, &most, &Valuation::new()).unwrap());
    let inf = parse_formula("Qinf x (x != x)", sig).unwrap();
    assert!(evaluate(&p3, &inf, &Valuation::new()).unwrap());

    let c4 = corpus::structure("c4").unwrap();
    let neq = typicality::syntax::parse_formula_with_params("x != p", c4.signature(), &["p"]).unwrap();
    assert_eq!(extension(&c4, &neq, "x", &Valuation::new().with("p", 0)).unwrap(), vec![1, 2, 3]);
}

#[test]
fn negation_complements_and_quantifier_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (_, s) in corpus::structures() {
        let atoms = atoms_for(&s, &VARS);
        for _ in 0..400 {
            let size = 1 + (rand::Rng::gen_range(&mut rng, 0..6));
            let phi = random_formula(&mut rng, &atoms, &VARS, size);
            for y in 0..s.size() {
                let v = Valuation::new().with("y", y);
                let ext = extension(&s, &phi, "x", &v).unwrap();
                let neg = extension(&s, &Formula::not(phi.clone()), "x", &v).unwrap();
                let mut all = ext.clone();
                all.extend(&neg);
                all.sort_unstable();
                assert_eq!(all, (0..s.size()).collect::<Vec<_>>());
                assert!(ext.iter().all(|e| !neg.contains(e)));
                let most = Formula::quant(Quantifier::Most, "x", phi.clone());
                assert_eq!(evaluate(&s, &most, &v).unwrap(), 2 * ext.len() > s.size(), "{phi}");
                let inf = Formula::quant(Quantifier::Inf, "x", phi.clone());
                assert!(evaluate(&s, &inf, &v).unwrap());
            }
        }
    }
}
