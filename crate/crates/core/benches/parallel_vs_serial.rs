//! Criterion comparison of the rayon-backed and sequential execution paths
//! on the two data-parallel hot spots: forest fitting and permutation
//! importance. Run with `cargo bench -p neuroflip`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use neuroflip::dataio::{generate_synthetic, stratified_split, SyntheticSpec};
use neuroflip::exec::Parallelism;
use neuroflip::explain::permutation_importance;
use neuroflip::learners::{fit_forest, ForestConfig};

fn bench_fit_forest(c: &mut Criterion) {
    let data = generate_synthetic(
        &SyntheticSpec::well_separated(150, 1.0, Some("Pz".into())),
        42,
    )
    .unwrap();
    let cfg = ForestConfig {
        n_trees: 50,
        ..ForestConfig::default()
    };
    let mut group = c.benchmark_group("fit_forest");
    for (name, par) in [
        ("sequential", Parallelism::Sequential),
        ("rayon", Parallelism::Rayon),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| {
            b.iter(|| fit_forest(&data, &cfg, 7, par).unwrap());
        });
    }
    group.finish();
}

fn bench_permutation_importance(c: &mut Criterion) {
    let data = generate_synthetic(
        &SyntheticSpec::well_separated(150, 1.0, Some("Pz".into())),
        42,
    )
    .unwrap();
    let split = stratified_split(&data, 0.8, 1).unwrap();
    let cfg = ForestConfig {
        n_trees: 50,
        ..ForestConfig::default()
    };
    let forest = fit_forest(&split.train, &cfg, 7, Parallelism::default()).unwrap();
    let mut group = c.benchmark_group("permutation_importance");
    for (name, par) in [
        ("sequential", Parallelism::Sequential),
        ("rayon", Parallelism::Rayon),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| {
            b.iter(|| permutation_importance(&forest, &split.test, 5, 3, par).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fit_forest, bench_permutation_importance);
criterion_main!(benches);
