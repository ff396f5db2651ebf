use robustcov::rank_one::{multiply_update_basis, rank_one_update, MultiplyMode, RankOneConfig, SecularOutputs};
use robustcov_bench::{random_decomposition, random_direction, rng};
use std::time::Instant;

fn main() {
    let cfg = RankOneConfig::default();
    for &dim in &[32usize, 64, 128, 200] {
        let mut r = rng(dim as u64);
        let dec = random_decomposition(dim, &mut r);
        let b = random_direction(dim, &mut r);
        let updated = rank_one_update(&dec, 1.3, &b, &cfg).unwrap();
        let z = dec.eigvecs().tr_matvec(&b);
        let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let outputs = SecularOutputs {
            eigvals: dec.eigvals().to_vec(),
            zetas: z.iter().map(|v| v / n).collect(),
            lambda_tilde: updated.eigvals().to_vec(),
        };
        let q = dec.eigvecs().clone();
        let reps = (2_000_000_000 / (dim * dim * dim)).clamp(3, 400);
        for (name, mode) in [("naive", MultiplyMode::Naive), ("structured", MultiplyMode::Structured)] {
            let t0 = Instant::now();
            for _ in 0..reps {
                let out = multiply_update_basis(&q, &outputs, mode).unwrap();
                std::hint::black_box(out);
            }
            println!(
                "d={dim:<4} {name:<10} {:>9.3} us/call",
                t0.elapsed().as_secs_f64() * 1e6 / reps as f64
            );
        }
    }
}
