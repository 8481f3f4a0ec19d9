use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpls::ensembles::{randsvd, RandsvdSpec, RngStream};
use lpls::harness::sweep::{run_sweep, SweepConfig};
use lpls::par::Parallelism;
use lpls::pipeline::{cholesky_lp, gram_lp, weight_lp};
use lpls::PrecisionContext;

fn sweep_point(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_32x32_b10");
    group.sample_size(10);
    let modes = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Auto)];
    for (name, parallelism) in modes {
        let cfg = SweepConfig {
            cond_min: 10.0,
            cond_max: 10.0,
            cond_points: 1,
            trials: 64,
            seed: 1,
            parallelism,
            ..SweepConfig::default()
        };
        group.bench_function(BenchmarkId::new(name, cfg.trials), |b| {
            b.iter(|| run_sweep(&cfg).unwrap())
        });
    }
    group.finish();
}

fn kernels(c: &mut Criterion) {
    let ctx = PrecisionContext::new(10).unwrap();
    let mut group = c.benchmark_group("kernels_b10");
    for n in [16usize, 32, 64] {
        let h = randsvd(&RandsvdSpec::new(n, n, 10.0, 3), &mut RngStream::new(3, 0))
            .unwrap()
            .quantize(&ctx)
            .unwrap();
        let a = gram_lp(&h, &ctx).unwrap();
        let l = cholesky_lp(&a, &ctx).unwrap();
        group.bench_with_input(BenchmarkId::new("gram", n), &h, |b, h| b.iter(|| gram_lp(h, &ctx).unwrap()));
        group.bench_with_input(BenchmarkId::new("cholesky", n), &a, |b, a| {
            b.iter(|| cholesky_lp(a, &ctx).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("weight", n), &l, |b, l| {
            b.iter(|| weight_lp(l, &h, &ctx).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep_point, kernels);
criterion_main!(benches);
