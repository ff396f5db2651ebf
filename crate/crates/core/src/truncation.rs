//! Norm truncation of the pairwise sample: splits every pair into a bounded
//! part and an outlier part by the indicator of `||pair|| <= R`.

use crate::error::{Error, Result};
use crate::sample::PairwiseSample;

/// Outcome of splitting a pairwise sample at radius `R`. Pairs whose norm
/// exceeds `R` form the outlier set; the rest are kept. For any pair, the
/// bounded part and the outlier part have disjoint support, and their sum
/// reproduces the pair exactly.
#[derive(Debug, Clone)]
pub struct TruncationResult {
    r: f64,
    outlier_pairs: Vec<(usize, usize)>,
    kept_count: usize,
    epsilon: f64,
}

/// Split `pairs` at truncation level `r > 0`.
pub fn truncate_decompose(pairs: &PairwiseSample, r: f64) -> Result<TruncationResult> {
    if !(r > 0.0) {
        return Err(Error::domain("truncation level must be positive"));
    }
    let r_sq = r * r;
    let mut outliers = Vec::new();
    for (i, j) in pairs.ordered_pairs() {
        if pairs.pair_norm_sq(i, j) > r_sq {
            outliers.push((i, j));
        }
    }
    let total = pairs.pair_count();
    let kept = total - outliers.len();
    let epsilon = outliers.len() as f64 / total as f64;
    Ok(TruncationResult {
        r,
        outlier_pairs: outliers,
        kept_count: kept,
        epsilon,
    })
}

impl TruncationResult {
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Observed outlier fraction `|J| / (n (n-1))`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kept_count(&self) -> usize {
        self.kept_count
    }

    /// Ordered outlier pairs, sorted by flat pair index.
    pub fn outlier_pairs(&self) -> &[(usize, usize)] {
        &self.outlier_pairs
    }

    pub fn is_outlier(&self, i: usize, j: usize) -> bool {
        self.outlier_pairs.binary_search(&(i, j)).is_ok()
    }

    pub fn kept_pairs<'a>(
        &'a self,
        pairs: &'a PairwiseSample,
    ) -> impl Iterator<Item = (usize, usize)> + 'a {
        pairs.ordered_pairs().filter(|&(i, j)| !self.is_outlier(i, j))
    }

    /// Bounded component: the pair itself when kept, zero when an outlier.
    pub fn bounded_part(&self, pairs: &PairwiseSample, i: usize, j: usize) -> Vec<f64> {
        if self.is_outlier(i, j) {
            vec![0.0; pairs.dim()]
        } else {
            pairs.pair(i, j)
        }
    }

    /// Outlier component: the pair itself when an outlier, zero otherwise.
    pub fn outlier_part(&self, pairs: &PairwiseSample, i: usize, j: usize) -> Vec<f64> {
        if self.is_outlier(i, j) {
            pairs.pair(i, j)
        } else {
            vec![0.0; pairs.dim()]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{pairwise_transform, RawSample};

    fn pairs_from(points: &[Vec<f64>]) -> PairwiseSample {
        pairwise_transform(RawSample::from_points(points).unwrap()).unwrap()
    }

    #[test]
    fn r_above_max_keeps_everything() {
        let pairs = pairs_from(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.5]]);
        let t = truncate_decompose(&pairs, 1e6).unwrap();
        assert_eq!(t.epsilon(), 0.0);
        assert_eq!(t.kept_count(), pairs.pair_count());
        assert!(t.outlier_pairs().is_empty());
    }

    #[test]
    fn r_below_min_drops_everything() {
        let pairs = pairs_from(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.5]]);
        let t = truncate_decompose(&pairs, 1e-9).unwrap();
        assert_eq!(t.epsilon(), 1.0);
        assert_eq!(t.kept_count(), 0);
    }

    #[test]
    fn hand_built_mixed_case() {
        // Y0 and Y1 are close; Y2 is far from both. Pair norms: (0,1) ~ 0.79,
        // (0,2) ~ 14.1, (1,2) ~ 13.4, so r = 5 separates the groups.
        let pairs = pairs_from(&[vec![10.0, 0.0], vec![9.0, 0.5], vec![-10.0, 0.0]]);
        let t = truncate_decompose(&pairs, 5.0).unwrap();
        assert_eq!(t.outlier_pairs().len(), 4);
        assert!((t.epsilon() - 4.0 / 6.0).abs() < 1e-15);
        assert!(t.is_outlier(0, 2) && t.is_outlier(2, 0));
        assert!(!t.is_outlier(0, 1) && !t.is_outlier(1, 0));
    }

    #[test]
    fn exactly_one_point_pair_excluded() {
        // three collinear points; only the extremes are far apart
        let pairs = pairs_from(&[vec![0.0], vec![1.0], vec![10.0]]);
        // pair norms: |0-1|/sqrt2 = .707, |0-10|/sqrt2 = 7.07, |1-10|/sqrt2 = 6.36
        let t = truncate_decompose(&pairs, 6.5).unwrap();
        assert_eq!(t.outlier_pairs(), &[(0, 2), (2, 0)]);
        assert!((t.epsilon() - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn split_reassembles_exactly_with_disjoint_support() {
        let pairs = pairs_from(&[vec![0.0, 0.0], vec![3.0, 4.0], vec![0.5, -0.25]]);
        let t = truncate_decompose(&pairs, 2.0).unwrap();
        for (i, j) in pairs.ordered_pairs() {
            let z = t.bounded_part(&pairs, i, j);
            let v = t.outlier_part(&pairs, i, j);
            let y = pairs.pair(i, j);
            for k in 0..2 {
                assert_eq!(z[k] + v[k], y[k]);
                assert_eq!(z[k] * v[k], 0.0);
            }
            let norm = pairs.pair_norm_sq(i, j).sqrt();
            if t.is_outlier(i, j) {
                assert!(norm > t.r());
            } else {
                assert!(norm <= t.r());
            }
        }
    }

    #[test]
    fn nonpositive_radius_rejected() {
        let pairs = pairs_from(&[vec![0.0], vec![1.0]]);
        assert!(truncate_decompose(&pairs, 0.0).is_err());
        assert!(truncate_decompose(&pairs, -1.0).is_err());
    }
}
