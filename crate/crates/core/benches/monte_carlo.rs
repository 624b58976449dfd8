use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tree_census::counting::TreeKind;
use tree_census::experiments::{run_orbit_experiment, run_pattern_experiment, ExperimentConfig, PatternSpec};

fn orbit_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("orbit_experiment_free_n200_x64");
    group.sample_size(10);
    for (label, workers) in [("sequential", 1), ("parallel", 0)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &workers, |b, &w| {
            let cfg = ExperimentConfig::new(TreeKind::Free, 200, 64, 11).with_workers(w);
            b.iter(|| run_orbit_experiment(&cfg).unwrap());
        });
    }
    group.finish();
}

fn pattern_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("star3_experiment_rooted_n400_x256");
    group.sample_size(10);
    for (label, workers) in [("sequential", 1), ("parallel", 0)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &workers, |b, &w| {
            let cfg = ExperimentConfig::new(TreeKind::Rooted, 400, 256, 11)
                .with_pattern(PatternSpec::Star(3))
                .with_workers(w);
            b.iter(|| run_pattern_experiment(&cfg).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, orbit_sampling, pattern_sampling);
criterion_main!(benches);
