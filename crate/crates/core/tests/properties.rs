//! Property tests for the structural invariants.

use proptest::prelude::*;

use robustcov::huber::{huber, huber_prime, soft_threshold_spectral};
use robustcov::matrix::SymmetricMatrix;
use robustcov::sample::{pairwise_transform, sample_covariance, RawSample};

fn symmetric_matrix(dim: usize) -> impl Strategy<Value = SymmetricMatrix> {
    prop::collection::vec(-10.0..10.0f64, dim * (dim + 1) / 2).prop_map(move |upper| {
        let mut it = upper.into_iter();
        let mut m = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = it.next().unwrap();
                m[i * dim + j] = v;
                m[j * dim + i] = v;
            }
        }
        SymmetricMatrix::new(dim, m).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_ordering_holds(a in symmetric_matrix(5)) {
        let op = a.operator_norm();
        let fro = a.frobenius_norm();
        let nuc = a.nuclear_norm();
        prop_assert!(op <= fro * (1.0 + 1e-12) + 1e-12);
        prop_assert!(fro <= nuc * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn soft_threshold_is_nonexpansive(
        a in symmetric_matrix(4),
        b in symmetric_matrix(4),
        tau in 0.05..3.0f64,
    ) {
        let ga = soft_threshold_spectral(&a, tau).unwrap();
        let gb = soft_threshold_spectral(&b, tau).unwrap();
        let lhs = ga.sub(&gb).unwrap().frobenius_norm();
        let rhs = a.sub(&b).unwrap().frobenius_norm();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn scalar_huber_shape(u in -50.0..50.0f64, lambda in 0.01..10.0f64) {
        // loss sits between the quadratic cap and zero, derivative bounded
        prop_assert!(huber(u, lambda) >= 0.0);
        prop_assert!(huber(u, lambda) <= 0.5 * u * u + 1e-12);
        prop_assert!(huber_prime(u, lambda).abs() <= lambda);
        // derivative of the integral: consistent slope sign
        prop_assert_eq!(huber_prime(u, lambda).signum() * u.signum() >= 0.0, true);
    }

    #[test]
    fn pairwise_average_is_the_sample_covariance(
        flat in prop::collection::vec(-5.0..5.0f64, 4 * 3),
    ) {
        let raw = RawSample::new(4, 3, flat).unwrap();
        let cov = sample_covariance(&raw).unwrap();
        let pairs = pairwise_transform(raw).unwrap();
        let mut acc = SymmetricMatrix::zeros(3);
        for (i, j) in pairs.ordered_pairs() {
            let y = pairs.pair(i, j);
            acc = acc.add(&SymmetricMatrix::rank_one(&y)).unwrap();
        }
        let u_stat = acc.scale(1.0 / pairs.pair_count() as f64);
        let diff = u_stat.sub(&cov).unwrap().frobenius_norm();
        prop_assert!(diff <= 1e-11 * cov.frobenius_norm().max(1.0));
    }

    #[test]
    fn effective_rank_scale_invariant(a in symmetric_matrix(4), c in 0.01..100.0f64) {
        prop_assume!(a.frobenius_norm() > 1e-6);
        let r1 = a.effective_rank().unwrap();
        let r2 = a.scale(c).effective_rank().unwrap();
        prop_assert!((r1 - r2).abs() <= 1e-12 * r1.abs().max(1.0));
    }
}
