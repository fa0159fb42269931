use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use ns_lab_bench::{bumped_simplex, shifted_simplex};
use ns_lab_core::gaussian::bvn_lower;
use ns_lab_core::ou::line_difference;
use ns_lab_core::stability::{compare_localized, stability_mc, stability_quadrature, DEFAULT_ORDER};
use ns_lab_core::voting::{discrete_stability, words};
use ns_lab_core::{BiasedMeasure, CorrelatedGaussianModel, CorrelatedPairLaw, Partition, RngStream, VotingFunction};

fn gaussian(c: &mut Criterion) {
    c.bench_function("bvn_lower/1000", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..1000 {
                let h = -3.0 + 6.0 * i as f64 / 1000.0;
                acc += bvn_lower(black_box(h), 0.4, black_box(0.7));
            }
            acc
        })
    });

    let p = shifted_simplex(0.5);
    let model = CorrelatedGaussianModel::new(2, 0.5).unwrap();
    let mut g = c.benchmark_group("stability");
    g.sample_size(10);
    g.bench_function("mc/1e5", |b| {
        b.iter(|| stability_mc(&p, &model, 100_000, RngStream::new(1, 0)).unwrap())
    });
    g.bench_function("quadrature", |b| b.iter(|| stability_quadrature(&p, &model, DEFAULT_ORDER).unwrap()));
    let lr = p.line_restriction(0, 1).unwrap();
    g.bench_function("line_difference", |b| b.iter(|| line_difference(&p, &lr, 0.5, black_box(2.0)).unwrap()));
    let (base, bumped) = bumped_simplex(0.5, 0.04);
    let (base, bumped) = (Partition::from(base), Partition::from(bumped));
    g.bench_function("localized/1e5", |b| {
        b.iter(|| compare_localized(&base, &bumped, &model, 100_000, RngStream::new(2, 0)).unwrap())
    });
    g.finish();
}

fn discrete(c: &mut Criterion) {
    let law = CorrelatedPairLaw::new(BiasedMeasure::new(10_000, 1.0, 0.0).unwrap(), 0.5).unwrap();
    let mut g = c.benchmark_group("discrete");
    g.sample_size(10);
    g.bench_function("plurality_stability/1e4", |b| {
        b.iter(|| discrete_stability(&VotingFunction::Plurality, &law, 10_000, RngStream::new(3, 0)).unwrap())
    });
    g.bench_function("plurality_word/1e4", |b| {
        b.iter_batched(
            || (0..10_000).map(|i| (i % 3 + 1) as u8).collect::<Vec<u8>>(),
            |w| words::plurality(&w).unwrap(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, gaussian, discrete);
criterion_main!(benches);
