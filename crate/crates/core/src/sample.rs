//! Raw samples, the ordered pairwise-difference view, and the sample
//! covariance baseline.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::{parse_row, SymmetricMatrix};

/// `n` observed points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    n: usize,
    d: usize,
    points: Vec<f64>,
}

impl RawSample {
    pub fn new(n: usize, d: usize, points: Vec<f64>) -> Result<Self> {
        if points.len() != n * d {
            return Err(Error::DimensionMismatch {
                left: points.len(),
                right: n * d,
            });
        }
        if d == 0 || n == 0 {
            return Err(Error::domain("sample must have positive n and d"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("sample contains non-finite entries"));
        }
        Ok(RawSample { n, d, points })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        let d = points.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(n * d);
        for p in points {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    left: p.len(),
                    right: d,
                });
            }
            flat.extend_from_slice(p);
        }
        RawSample::new(n, d, flat)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub(crate) fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for i in 0..self.n {
            for (acc, &v) in m.iter_mut().zip(self.point(i)) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }

    /// Plain-text form: first line is the point count, then one point per
    /// row. Values round-trip exactly.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{}", self.n)?;
        for i in 0..self.n {
            let line = self
                .point(i)
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty input".into(),
        })??;
        let n: usize = first.trim().parse().map_err(|_| Error::Parse {
            line: 1,
            message: format!("expected point count, got {first:?}"),
        })?;
        let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines.next().ok_or_else(|| Error::Parse {
                line: i + 2,
                message: "missing point row".into(),
            })??;
            let row = parse_row(&line, i + 2)?;
            if let Some(prev) = points.first() {
                if row.len() != prev.len() {
                    return Err(Error::Parse {
                        line: i + 2,
                        message: format!("expected {} entries, got {}", prev.len(), row.len()),
                    });
                }
            }
            points.push(row);
        }
        RawSample::from_points(&points)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W, with_header: bool) -> Result<()> {
        if with_header {
            let header = (0..self.d)
                .map(|j| format!("x{j}"))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "{header}")?;
        }
        for i in 0..self.n {
            let line = self
                .point(i)
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: &mut R, has_header: bool) -> Result<Self> {
        let mut points: Vec<Vec<f64>> = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            if idx == 0 && has_header {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let row: Result<Vec<f64>> = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line: idx + 1,
                        message: format!("invalid number {tok:?}"),
                    })
                })
                .collect();
            points.push(row?);
        }
        RawSample::from_points(&points)
    }
}

/// The collection of ordered pairwise differences `(Y_i - Y_j) / sqrt(2)`,
/// `i != j`. Pairs are computed on demand by default; `materialized`
/// precomputes all of them.
#[derive(Debug, Clone)]
pub struct PairwiseSample {
    raw: RawSample,
    cached: Option<Vec<f64>>,
}

/// Ordered pairwise-difference view of a sample. Requires `n >= 2`.
pub fn pairwise_transform(raw: RawSample) -> Result<PairwiseSample> {
    PairwiseSample::new(raw)
}

impl PairwiseSample {
    pub fn new(raw: RawSample) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: raw.len(),
            });
        }
        Ok(PairwiseSample { raw, cached: None })
    }

    /// Same view with every pair precomputed.
    pub fn materialized(raw: RawSample) -> Result<Self> {
        let mut p = PairwiseSample::new(raw)?;
        let count = p.pair_count();
        let d = p.dim();
        let mut cache = vec![0.0; count * d];
        for idx in 0..count {
            let (i, j) = p.pair_indices(idx);
            let (a, b) = (p.raw.point(i), p.raw.point(j));
            let dst = &mut cache[idx * d..(idx + 1) * d];
            fill_pair(a, b, dst);
        }
        p.cached = Some(cache);
        Ok(p)
    }

    pub fn raw(&self) -> &RawSample {
        &self.raw
    }

    pub fn n(&self) -> usize {
        self.raw.len()
    }

    pub fn dim(&self) -> usize {
        self.raw.dim()
    }

    /// `n (n - 1)` ordered pairs.
    pub fn pair_count(&self) -> usize {
        self.n() * (self.n() - 1)
    }

    /// Flat index of the ordered pair `(i, j)`, `i != j`.
    pub fn index_of(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j);
        i * (self.n() - 1) + if j < i { j } else { j - 1 }
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn pair_indices(&self, idx: usize) -> (usize, usize) {
        let per = self.n() - 1;
        let i = idx / per;
        let r = idx % per;
        let j = if r < i { r } else { r + 1 };
        (i, j)
    }

    /// Write `(Y_i - Y_j)/sqrt(2)` into `buf`.
    pub fn pair_into(&self, i: usize, j: usize, buf: &mut [f64]) {
        if let Some(cache) = &self.cached {
            let d = self.dim();
            let idx = self.index_of(i, j);
            buf.copy_from_slice(&cache[idx * d..(idx + 1) * d]);
            return;
        }
        fill_pair(self.raw.point(i), self.raw.point(j), buf);
    }

    pub fn pair(&self, i: usize, j: usize) -> Vec<f64> {
        let mut buf = vec![0.0; self.dim()];
        self.pair_into(i, j, &mut buf);
        buf
    }

    pub fn pair_norm_sq(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.raw.point(i), self.raw.point(j));
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let t = x - y;
                t * t
            })
            .sum::<f64>()
            * 0.5
    }

    pub fn ordered_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
    }
}

#[inline]
fn fill_pair(a: &[f64], b: &[f64], dst: &mut [f64]) {
    const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;
    for ((d, &x), &y) in dst.iter_mut().zip(a).zip(b) {
        *d = (x - y) * INV_SQRT2;
    }
}

/// Unbiased sample covariance `(1/(n-1)) sum (Y_j - mean)(Y_j - mean)^T`.
pub fn sample_covariance(raw: &RawSample) -> Result<SymmetricMatrix> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let d = raw.dim();
    let mean = raw.mean();
    let mut acc = SymmetricMatrix::zeros(d);
    let mut centered = vec![0.0; d];
    for i in 0..n {
        for (c, (&p, &m)) in centered.iter_mut().zip(raw.point(i).iter().zip(&mean)) {
            *c = p - m;
        }
        acc.add_scaled_rank_one(1.0, &centered);
    }
    acc.mirror_upper();
    Ok(acc.scale(1.0 / (n as f64 - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sample(n: usize, d: usize, seed: u64) -> RawSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        RawSample::new(n, d, pts).unwrap()
    }

    #[test]
    fn antisymmetry_and_zero_sum() {
        let raw = random_sample(5, 3, 1);
        let pairs = pairwise_transform(raw).unwrap();
        let p12 = pairs.pair(1, 2);
        let p21 = pairs.pair(2, 1);
        for (a, b) in p12.iter().zip(&p21) {
            assert_eq!(*a, -*b);
        }
        let mut total = vec![0.0; 3];
        for (i, j) in pairs.ordered_pairs() {
            for (t, v) in total.iter_mut().zip(pairs.pair(i, j)) {
                *t += v;
            }
        }
        for t in total {
            assert!(t.abs() < 1e-12);
        }
    }

    #[test]
    fn two_points() {
        let raw = RawSample::from_points(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let pairs = pairwise_transform(raw.clone()).unwrap();
        assert_eq!(pairs.pair_count(), 2);
        let p = pairs.pair(0, 1);
        assert!((p[0] - 2.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        // hand-computed covariance [[2,0],[0,0]]
        let cov = sample_covariance(&raw).unwrap();
        assert!((cov.get(0, 0) - 2.0).abs() < 1e-15);
        assert_eq!(cov.get(0, 1), 0.0);
        assert_eq!(cov.get(1, 1), 0.0);
    }

    #[test]
    fn identical_points_give_zero_covariance() {
        let raw = RawSample::from_points(&vec![vec![3.0, -1.0]; 4]).unwrap();
        assert_eq!(sample_covariance(&raw).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn pairwise_average_equals_sample_covariance() {
        for seed in 0..100 {
            let raw = random_sample(7, 4, seed);
            let pairs = pairwise_transform(raw.clone()).unwrap();
            let mut acc = SymmetricMatrix::zeros(4);
            for (i, j) in pairs.ordered_pairs() {
                acc.add_scaled_rank_one(1.0, &pairs.pair(i, j));
            }
            acc.mirror_upper();
            let u_stat = acc.scale(1.0 / pairs.pair_count() as f64);
            let cov = sample_covariance(&raw).unwrap();
            let diff = u_stat.sub(&cov).unwrap().frobenius_norm();
            assert!(diff <= 1e-12 * cov.frobenius_norm().max(1.0), "diff {diff:.3e}");
        }
    }

    #[test]
    fn index_round_trip() {
        let raw = random_sample(6, 2, 3);
        let pairs = pairwise_transform(raw).unwrap();
        for idx in 0..pairs.pair_count() {
            let (i, j) = pairs.pair_indices(idx);
            assert_ne!(i, j);
            assert_eq!(pairs.index_of(i, j), idx);
        }
    }

    #[test]
    fn materialized_matches_lazy() {
        let raw = random_sample(5, 3, 9);
        let lazy = PairwiseSample::new(raw.clone()).unwrap();
        let mat = PairwiseSample::materialized(raw).unwrap();
        for (i, j) in lazy.ordered_pairs() {
            assert_eq!(lazy.pair(i, j), mat.pair(i, j));
        }
    }

    #[test]
    fn text_and_csv_round_trip() {
        let raw = random_sample(4, 3, 5);
        let mut buf = Vec::new();
        raw.write_text(&mut buf).unwrap();
        assert_eq!(RawSample::read_text(&mut buf.as_slice()).unwrap(), raw);

        let mut csv = Vec::new();
        raw.write_csv(&mut csv, true).unwrap();
        assert_eq!(RawSample::read_csv(&mut csv.as_slice(), true).unwrap(), raw);
        let mut csv2 = Vec::new();
        raw.write_csv(&mut csv2, false).unwrap();
        assert_eq!(
            RawSample::read_csv(&mut csv2.as_slice(), false).unwrap(),
            raw
        );
    }

    #[test]
    fn too_few_points_rejected() {
        let raw = RawSample::from_points(&[vec![1.0]]).unwrap();
        assert!(pairwise_transform(raw.clone()).is_err());
        assert!(sample_covariance(&raw).is_err());
    }
}
