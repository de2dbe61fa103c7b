use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use lu_equiv_core::equiv2::check_lu_2qubit;
use lu_equiv_core::equiv3::check_lu_3qubit;
use lu_equiv_core::lu_action::random_orthogonal;
use lu_equiv_core::qudit_state::{extract, random_density, reconstruct};
use lu_equiv_core::specht::{enumerate_words, specht_check};
use lu_equiv_core::{generate_pair, Battery, CheckConfig, PairMode, RealMatrix, Rep2, Rep3};

fn tensors(c: &mut Criterion) {
    let mut g = c.benchmark_group("tensors");
    for dims in [vec![2, 2], vec![3, 3], vec![2, 2, 2], vec![3, 3, 3]] {
        let rho = random_density(&dims, 1).unwrap();
        let rep = extract(&rho);
        let name = format!("{dims:?}");
        g.bench_with_input(BenchmarkId::new("extract", &name), &rho, |b, r| b.iter(|| extract(black_box(r))));
        g.bench_with_input(BenchmarkId::new("reconstruct", &name), &rep, |b, t| {
            b.iter(|| reconstruct(black_box(t)).unwrap())
        });
    }
    g.finish();
}

fn words(c: &mut Criterion) {
    let mut g = c.benchmark_group("words");
    for (k, len) in [(2, 10), (3, 7), (6, 4)] {
        g.bench_function(BenchmarkId::new("enumerate", format!("k{k}-L{len}")), |b| {
            b.iter(|| enumerate_words(black_box(k), black_box(len)))
        });
    }
    let a = RealMatrix::from_fn(4, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
    let o = random_orthogonal(4, false, 3).unwrap();
    let b = o.transpose() * &a * &o;
    for horizon in [6, 10] {
        let cfg = CheckConfig::with_horizon(horizon);
        g.bench_function(BenchmarkId::new("specht-4x4", horizon), |bn| {
            bn.iter(|| specht_check(black_box(&a), black_box(&b), &cfg).unwrap())
        });
    }
    g.finish();
}

fn pipelines(c: &mut Criterion) {
    let mut g = c.benchmark_group("pipelines");
    let pair = generate_pair(&[2, 2], PairMode::Lu, 1).unwrap();
    let (a, b) = (Rep2::from_state(&pair.a).unwrap(), Rep2::from_state(&pair.b).unwrap());
    let cfg = CheckConfig::with_horizon(6);
    g.bench_function("check2-lu-h6", |bn| bn.iter(|| check_lu_2qubit(black_box(&a), black_box(&b), &cfg).unwrap()));

    let pair = generate_pair(&[2, 2, 2], PairMode::Lu, 1).unwrap();
    let (a, b) = (Rep3::from_state(&pair.a).unwrap(), Rep3::from_state(&pair.b).unwrap());
    for horizon in [3, 4] {
        let cfg = CheckConfig::with_horizon(horizon);
        g.bench_function(BenchmarkId::new("check3-lu", horizon), |bn| {
            bn.iter(|| check_lu_3qubit(black_box(&a), black_box(&b), Battery::V1, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, tensors, words, pipelines);
criterion_main!(benches);
