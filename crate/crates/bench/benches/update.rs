use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sigauto_bench::{random_walk, warm_pipeline};
use sigauto_core::{forecast, PluginParams, StatVariant};
use std::hint::black_box;
use std::time::{Duration, Instant};

/// Observations pushed before the pipeline is reset to its warm state, so the
/// measured size stays within `[n, n + WINDOW)`.
const WINDOW: usize = 4096;

fn update(c: &mut Criterion) {
    let mut group = c.benchmark_group("update");
    for (name, params) in [
        ("count", PluginParams::default()),
        (
            "discounted",
            PluginParams {
                delta: 0.9,
                stat_variant: StatVariant::DiscountedSum,
                ..Default::default()
            },
        ),
    ] {
        for n in [2_000, 20_000, 200_000] {
            let signal = random_walk(n + WINDOW, 1, 3);
            let warm = warm_pipeline(&params, &signal, n);
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                let mut p = warm.clone();
                let mut next = n;
                b.iter_custom(|iters| {
                    let mut total = Duration::ZERO;
                    for _ in 0..iters {
                        if next == signal.len() {
                            p = warm.clone();
                            next = n;
                        }
                        let start = Instant::now();
                        p.push(black_box(signal.get(next))).unwrap();
                        total += start.elapsed();
                        next += 1;
                    }
                    total
                })
            });
        }
    }
    group.finish();
}

fn forecast_horizon(c: &mut Criterion) {
    let signal = random_walk(20_000, 1, 5);
    let p = warm_pipeline(&PluginParams::default(), &signal, signal.len());
    let hmm = p.hmm().unwrap();
    let mut group = c.benchmark_group("forecast");
    for h in [1, 8, 64] {
        group.bench_with_input(BenchmarkId::from_parameter(h), &h, |b, &h| {
            b.iter(|| forecast(black_box(hmm), h))
        });
    }
    group.finish();
}

criterion_group!(benches, update, forecast_horizon);
criterion_main!(benches);
