use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use petersson::characters::{Mod8Sign, QuadraticCharacter};
use petersson::chebyshev::ChebTable;
use petersson::expsums::{gab_bruteforce, kloosterman, kloosterman_row};
use petersson::factor;
use petersson::spectral::{bessel_j, delta_geometric};

fn kloosterman_sums(c: &mut Criterion) {
    let mut group = c.benchmark_group("kloosterman");
    for modulus in [101u64, 1009, 10007] {
        group.bench_with_input(BenchmarkId::new("direct", modulus), &modulus, |b, &m| b.iter(|| kloosterman(black_box(3), 5, m)));
        group.bench_with_input(BenchmarkId::new("row", modulus), &modulus, |b, &m| b.iter(|| kloosterman_row(black_box(5), m)));
    }
    group.finish();
}

fn bessel(c: &mut Criterion) {
    let xs: Vec<f64> = (1..=200).map(|k| 0.37 * k as f64).collect();
    c.bench_function("bessel_j1_sweep", |b| b.iter(|| xs.iter().map(|&x| bessel_j(1, black_box(x))).sum::<f64>()));
    c.bench_function("bessel_j17_sweep", |b| b.iter(|| xs.iter().map(|&x| bessel_j(17, black_box(x))).sum::<f64>()));
}

fn petersson_sum(c: &mut Criterion) {
    let level = factor(11).unwrap();
    let mut group = c.benchmark_group("delta_geometric");
    group.sample_size(10);
    for c_max in [1_000u64, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(c_max), &c_max, |b, &c_max| {
            b.iter(|| delta_geometric(&level, 2, black_box(2), 3, c_max).unwrap())
        });
    }
    group.finish();
}

fn triple_sum(c: &mut Criterion) {
    let chi = QuadraticCharacter::new(5, Mod8Sign::Even).unwrap();
    c.bench_function("gab_bruteforce_c45_q5", |b| b.iter(|| gab_bruteforce(black_box([2, -3, 5]), 2, 3, 45, &chi).unwrap()));
}

fn chebyshev(c: &mut Criterion) {
    c.bench_function("cheb_table_60", |b| b.iter(|| ChebTable::new(black_box(60)).unwrap()));
}

criterion_group!(benches, kloosterman_sums, bessel, petersson_sum, triple_sum, chebyshev);
criterion_main!(benches);
