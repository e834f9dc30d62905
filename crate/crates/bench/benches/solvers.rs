use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array1;

use robust_dro::data::{contaminate, generate_synthetic, Adversary, ContaminationSpec, SyntheticSpec};
use robust_dro::losses::{LossFamily, LossKind};
use robust_dro::robust_mean::{inexact_hybrid_gradient_oracle, robust_mean_estimation};
use robust_dro::solver::{pdhg_solve, pipeline, PdhgConfig};

fn corrupted(d: usize, n: usize, eps: f64, seed: u64) -> robust_dro::Dataset {
    let mut w = vec![0.0; d];
    w[1] = 1.0;
    let spec = SyntheticSpec::gaussian_classification(d, n, w, 0.1);
    let clean = generate_synthetic(&spec, seed).unwrap();
    contaminate(&clean, &ContaminationSpec::new(eps, Adversary::far_cluster()), seed + 1).unwrap()
}

fn robust_mean(c: &mut Criterion) {
    let mut group = c.benchmark_group("robust_mean_estimation");
    group.sample_size(10);
    for &(d, n) in &[(9usize, 2_000usize), (33, 20_000)] {
        let data = corrupted(d, n, 0.1, 1);
        group.bench_with_input(BenchmarkId::from_parameter(format!("k{}_n{n}", d - 1)), &data, |b, data| {
            b.iter(|| robust_mean_estimation(black_box(data.covariates.view()), 0.1).unwrap())
        });
    }
    group.finish();
}

fn gradient_oracle(c: &mut Criterion) {
    let data = corrupted(21, 10_000, 0.1, 2).prepend_ones();
    let beta = Array1::from_shape_fn(data.n(), |i| if i % 2 == 0 { 0.5 } else { -0.5 });
    c.bench_function("hybrid_gradient_oracle/d21_n10000", |b| {
        b.iter(|| inexact_hybrid_gradient_oracle(black_box(beta.view()), data.covariates.view(), 0.1, 1.0).unwrap())
    });
}

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solvers");
    group.sample_size(10);
    let loss = LossFamily::new(LossKind::Hinge);
    let data = corrupted(21, 10_000, 0.1, 3);
    let cfg = PdhgConfig { epsilon: 0.1, rho: 0.1, gamma_dist: Some(2.0), ..PdhgConfig::default() };
    let reg = cfg.regularizer().unwrap();
    let design = data.prepend_ones();
    group.bench_function("pdhg_fixed_gamma/d21_n10000", |b| {
        b.iter(|| pdhg_solve(black_box(&design), &loss, &reg, &cfg).unwrap())
    });
    let tuned = PdhgConfig { gamma_dist: None, ..cfg.clone() };
    group.bench_function("pipeline_tuned/d21_n10000", |b| b.iter(|| pipeline(black_box(&data), &loss, &reg, &tuned).unwrap()));
    group.finish();
}

criterion_group!(benches, robust_mean, gradient_oracle, solvers);
criterion_main!(benches);
