use criterion::{criterion_group, criterion_main, Criterion};
use typicality::axioms::{search_counterexample, Axiom, Bounds};
use typicality::corpus;
use typicality::engine::{enumerate_definable_sets, EnumerationConfig};
use typicality::family::StructureFamilySpec;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![
        ("single".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        (format!("pool-{}", default.current_num_threads()), default),
    ]
}

fn t5_search(c: &mut Criterion) {
    let family: StructureFamilySpec = "graph@1..5".parse().unwrap();
    let mut group = c.benchmark_group("t5_search_graphs_1_5");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(&name, |b| {
            b.iter(|| pool.install(|| search_counterexample(Axiom::T5, &family, Bounds::default()).unwrap()))
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let s = corpus::structure("chain3").unwrap();
    let mut group = c.benchmark_group("enumerate_chain3");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(&name, |b| {
            b.iter(|| pool.install(|| enumerate_definable_sets(&s, &[], EnumerationConfig::default()).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, t5_search, enumeration);
criterion_main!(benches);
