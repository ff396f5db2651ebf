//! Rank-one spectral update vs dense re-decomposition, and the two
//! basis-multiply modes. The crossover measured here backs the
//! `STRUCTURED_CROSSOVER_DIM` constant in the library.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use robustcov::rank_one::{
    multiply_update_basis, rank_one_update, MultiplyMode, RankOneConfig, SecularOutputs,
};
use robustcov_bench::{low_rank_decomposition, random_decomposition, random_direction, rng};

fn bench_update_vs_dense(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank_one_update");
    group.sample_size(20);
    let cfg = RankOneConfig::default();
    for &dim in &[32usize, 64, 128] {
        let mut r = rng(dim as u64);
        let dec = random_decomposition(dim, &mut r);
        let b = random_direction(dim, &mut r);
        group.bench_with_input(BenchmarkId::new("spectral_update", dim), &dim, |ben, _| {
            ben.iter(|| rank_one_update(black_box(&dec), 0.7, black_box(&b), &cfg).unwrap());
        });
        let dense = {
            let base = dec.reconstruct();
            robustcov::matrix::SymmetricMatrix::from_fn(dim, |i, j| {
                base.get(i, j) + 0.7 * b[i] * b[j]
            })
        };
        group.bench_with_input(BenchmarkId::new("dense_eigendecompose", dim), &dim, |ben, _| {
            ben.iter(|| black_box(&dense).eigendecompose().unwrap());
        });
        // the estimator's usual case: a mostly-zero spectrum deflates, so the
        // update touches only a thin active block
        let lr = low_rank_decomposition(dim, 6, &mut r);
        group.bench_with_input(BenchmarkId::new("spectral_update_rank6", dim), &dim, |ben, _| {
            ben.iter(|| rank_one_update(black_box(&lr), 0.7, black_box(&b), &cfg).unwrap());
        });
    }
    group.finish();
}

fn bench_multiply_modes(c: &mut Criterion) {
    let mut group = c.benchmark_group("update_basis_multiply");
    group.sample_size(20);
    let cfg = RankOneConfig::default();
    for &dim in &[32usize, 64, 128] {
        let mut r = rng(1000 + dim as u64);
        let dec = random_decomposition(dim, &mut r);
        let b = random_direction(dim, &mut r);
        let updated = rank_one_update(&dec, 1.3, &b, &cfg).unwrap();
        let outputs = SecularOutputs {
            eigvals: dec.eigvals().to_vec(),
            zetas: {
                let z = dec.eigvecs().tr_matvec(&b);
                let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                z.iter().map(|v| v / n).collect()
            },
            lambda_tilde: updated.eigvals().to_vec(),
        };
        let q = dec.eigvecs().clone();
        for (name, mode) in [
            ("naive", MultiplyMode::Naive),
            ("structured", MultiplyMode::Structured),
        ] {
            group.bench_with_input(BenchmarkId::new(name, dim), &dim, |ben, _| {
                ben.iter(|| {
                    multiply_update_basis(black_box(&q), black_box(&outputs), mode).unwrap()
                });
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_update_vs_dense, bench_multiply_modes);
criterion_main!(benches);
