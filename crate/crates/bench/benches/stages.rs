use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hybridcast::arima::{self, ArimaSpec, FitOptions};
use hybridcast::neuralnet::{self, TrainConfig};
use hybridcast::regression::{self, Direction, SelectionCriterion};
use hybridcast::{sim, IndicatorParams, IndicatorSet};
use hybridcast_bench::{features, market, SEED};

fn arima_stage(c: &mut Criterion) {
    let y = sim::arima(&[0.5, -0.3], &[0.4, 0.2], 1, 0.0, 1.0, 1000, 100.0, SEED);
    let spec = ArimaSpec::new(2, 1, 2).unwrap();
    let opts = FitOptions::default();
    c.bench_function("arima_fit_212_n1000", |b| {
        b.iter(|| arima::fit(black_box(&y), spec, &opts).unwrap())
    });
    let mut g = c.benchmark_group("arima_select");
    g.sample_size(10);
    g.bench_function("sic_3x3_n1000", |b| {
        b.iter(|| arima::select_order(black_box(&y), 1, 3, 3, arima::Criterion::Sic, &opts).unwrap())
    });
    g.finish();
}

fn indicator_stage(c: &mut Criterion) {
    let m = market();
    let params = IndicatorParams::default();
    c.bench_function("indicators_gold", |b| {
        b.iter(|| IndicatorSet::compute(black_box(&m.gold), &params).unwrap())
    });
}

fn regression_stage(c: &mut Criterion) {
    let f = features(&market());
    for dir in [Direction::Forward, Direction::Backward] {
        c.bench_function(&format!("stepwise_{dir:?}").to_lowercase(), |b| {
            b.iter(|| regression::stepwise(black_box(&f), dir, SelectionCriterion::Bic).unwrap())
        });
    }
}

fn nn_stage(c: &mut Criterion) {
    let f = features(&market()).select(&["x1", "x4", "x9"]).unwrap();
    let cfg = TrainConfig {
        epochs: 100,
        seed: SEED,
        ..TrainConfig::default()
    };
    let mut g = c.benchmark_group("nn");
    g.sample_size(10);
    g.bench_function("train_h6_100_epochs", |b| {
        b.iter(|| neuralnet::train(black_box(&f), 6, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, arima_stage, indicator_stage, regression_stage, nn_stage);
criterion_main!(benches);
