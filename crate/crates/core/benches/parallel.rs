use std::hint::black_box;

use cplifs::lab::{continuity_sweep, LabSettings, PerturbMode, PerturbationSpec};
use cplifs::markov::{DiagramCaps, MarkovModel};
use cplifs::pressure::CylinderLengths;
use cplifs::{systems, Budget, Exec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn cylinder_sums(c: &mut Criterion) {
    let f = systems::negative_slopes().unwrap();
    let mut group = c.benchmark_group("direct_pressure");
    for n in [14, 16] {
        for (name, exec) in STRATEGIES {
            let budget = Budget::default().with_exec(exec);
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| CylinderLengths::compute(&f, n, &budget).unwrap().pressure(black_box(0.6)))
            });
        }
    }
    group.finish();
}

fn diagram_growth(c: &mut Criterion) {
    let f = systems::lebesgue_positive().unwrap();
    let mut group = c.benchmark_group("diagram_growth");
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| MarkovModel::build_with(&f, &[], DiagramCaps::levels(black_box(12)), exec).unwrap().radius(0.8).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let f = systems::kinked_separated().unwrap();
    let spec = PerturbationSpec::new(0.0, PerturbMode::translations(), 1, 8);
    let mut group = c.benchmark_group("continuity_sweep");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        let settings = LabSettings { budget: Budget::default().with_exec(exec), ..Default::default() };
        group.bench_function(name, |b| b.iter(|| continuity_sweep(&f, black_box(&[1e-3, 1e-5]), &spec, &settings).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, cylinder_sums, diagram_growth, sweep);
criterion_main!(benches);
