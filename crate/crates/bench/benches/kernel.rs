use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use spectrwm::{RngStream, Variant};
use spectrwm_bench::{burgers, heat, langevin, start};

const STEPS: u64 = 1000;

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("jump-steps");
    group.throughput(Throughput::Elements(STEPS));
    let cases = [
        ("heat-fast-16", heat(16, Variant::Fast, 0.05)),
        ("heat-academic-16", heat(16, Variant::Academic, 0.05)),
        ("heat-fast-128", heat(128, Variant::Fast, 0.05)),
        ("burgers-central-32", burgers(32, 0.1)),
        ("langevin-db-20", langevin(20)),
    ];
    for (name, kernel) in &cases {
        let mut rng = RngStream::new(7, 0);
        group.bench_function(*name, |b| {
            b.iter_batched_ref(
                || start(kernel),
                |state| {
                    for _ in 0..STEPS {
                        kernel.step(state, &mut rng).unwrap();
                    }
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, steps);
criterion_main!(benches);
