use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use coopetition_core::{
    collab, oracle, period1, price_game, EquilibriumCache, MarketParams, PreferenceDistribution,
    QualityProfile, SolverSettings,
};

fn tradeoff_qualities() -> QualityProfile {
    QualityProfile {
        period1_incumbent: 0.72,
        local: (0.72, 0.73),
        federated: (0.75, 0.75),
    }
}

fn bench_price_equilibrium(c: &mut Criterion) {
    let params = MarketParams::unit();
    let dist = PreferenceDistribution::uniform();
    let settings = SolverSettings::default();
    c.bench_function("price_equilibrium_symmetric", |b| {
        b.iter(|| {
            price_game::price_equilibrium(
                &params,
                &dist,
                black_box((0.75, 0.75)),
                black_box(0.2),
                &settings,
                None,
            )
            .unwrap()
        })
    });
}

fn bench_collaboration(c: &mut Criterion) {
    let params = MarketParams::unit();
    let dist = PreferenceDistribution::uniform();
    let settings = SolverSettings::default();
    let qualities = tradeoff_qualities();
    c.bench_function("collaboration_equilibrium", |b| {
        b.iter(|| {
            collab::collaboration_equilibrium(
                &params,
                &dist,
                black_box(&qualities),
                black_box(0.1),
                &settings,
                &mut EquilibriumCache::default(),
            )
            .unwrap()
        })
    });
}

fn bench_period1_optimize(c: &mut Criterion) {
    let params = MarketParams::unit();
    let dist = PreferenceDistribution::uniform();
    let settings = SolverSettings::default();
    let qualities = tradeoff_qualities();
    c.bench_function("period1_optimize", |b| {
        b.iter(|| period1::optimize(&params, &dist, black_box(&qualities), &settings).unwrap())
    });
}

fn bench_oracle(c: &mut Criterion) {
    let params = MarketParams::unit();
    let dist = PreferenceDistribution::uniform();
    c.bench_function("verify_no_deviation_2000", |b| {
        b.iter(|| {
            oracle::verify_no_deviation(
                &params,
                &dist,
                black_box((0.75, 0.75)),
                0.0,
                black_box((0.375, 0.375)),
                2000,
                1e-4,
            )
        })
    });
    let mut grid = c.benchmark_group("grid_oracle");
    grid.sample_size(10);
    grid.bench_function("grid_price_equilibrium_500", |b| {
        b.iter(|| {
            oracle::grid_price_equilibrium(&params, &dist, black_box((0.75, 0.75)), 0.0, 500)
                .unwrap()
        })
    });
    grid.bench_function("grid_period1_optimum_500", |b| {
        b.iter(|| {
            oracle::grid_period1_optimum(&params, &dist, black_box(&tradeoff_qualities()), 500)
                .unwrap()
        })
    });
    grid.finish();
}

criterion_group!(
    benches,
    bench_price_equilibrium,
    bench_collaboration,
    bench_period1_optimize,
    bench_oracle
);
criterion_main!(benches);
