use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use pursuit_bench::reference_inputs;
use pursuit_core::backward::{boomp_run, BackwardConfig};
use pursuit_core::dictgen::{build_mexhat_dictionary, MexHatSpec};
use pursuit_core::forward::{oomp_run, ForwardConfig, Scoring};

fn dictionary(c: &mut Criterion) {
    let spec = MexHatSpec::reference();
    c.bench_function("mexhat_dictionary_665", |b| {
        b.iter(|| build_mexhat_dictionary(black_box(&spec)).unwrap())
    });
}

fn forward(c: &mut Criterion) {
    let (dict, f) = reference_inputs();
    let mut g = c.benchmark_group("forward_60");
    g.sample_size(20);
    g.bench_function("incremental", |b| {
        let cfg = ForwardConfig::with_max_atoms(60);
        b.iter(|| oomp_run(black_box(&f), &dict, &cfg).unwrap())
    });
    g.bench_function("from_scratch", |b| {
        let cfg = ForwardConfig {
            scoring: Scoring::FromScratch,
            ..ForwardConfig::with_max_atoms(60)
        };
        b.iter(|| oomp_run(black_box(&f), &dict, &cfg).unwrap())
    });
    g.finish();
}

fn backward(c: &mut Criterion) {
    let (dict, f) = reference_inputs();
    let start = oomp_run(&f, &dict, &ForwardConfig::with_max_atoms(60))
        .unwrap()
        .decomposition;
    let cfg = BackwardConfig::to_count(34);
    c.bench_function("backward_60_to_34", |b| {
        b.iter_batched(
            || start.clone(),
            |s| boomp_run(s, &f, &cfg).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, dictionary, forward, backward);
criterion_main!(benches);
