//! Input builders shared by the micro-benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robustcov::contamination::{sample_gaussian, spiked_covariance, GroundTruth};
use robustcov::eigen::SpectralDecomposition;
use robustcov::matrix::SymmetricMatrix;
use robustcov::sample::{pairwise_transform, PairwiseSample};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symmetric(dim: usize, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
    SymmetricMatrix::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_decomposition(dim: usize, rng: &mut ChaCha8Rng) -> SpectralDecomposition {
    random_symmetric(dim, rng)
        .eigendecompose()
        .expect("decomposition of a random dense matrix")
}

/// A decomposition whose spectrum is mostly an exact zero plateau, matching
/// the low-rank iterates the estimator maintains.
pub fn low_rank_decomposition(
    dim: usize,
    rank: usize,
    rng: &mut ChaCha8Rng,
) -> SpectralDecomposition {
    let dec = random_decomposition(dim, rng);
    let vals: Vec<f64> = dec.eigvals().to_vec();
    let cut = vals[dim - rank - 1];
    dec.map_eigvals(|v| if v > cut { v + 1.0 } else { 0.0 })
}

pub fn random_direction(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn spiked_pairs(d: usize, n: usize, seed: u64) -> PairwiseSample {
    let truth = GroundTruth::centered(spiked_covariance(d)).unwrap();
    pairwise_transform(sample_gaussian(&truth, n, seed).unwrap()).unwrap()
}
