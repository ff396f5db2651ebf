//! Spectral decompositions of symmetric matrices.
//!
//! The solver is a Householder reduction to tridiagonal form followed by the
//! implicit-shift QL iteration. It is fully deterministic: identical input
//! bits give identical output bits on a given platform.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SymmetricMatrix};

/// Orthogonality tolerance scale for a decomposition: `||Q^T Q - I||_F` must
/// stay below `ORTHO_TOL_PER_DIM * d`.
pub const ORTHO_TOL_PER_DIM: f64 = 1e-10;

/// Eigenvector matrix and ascending eigenvalues of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigvecs: Matrix,
    eigvals: Vec<f64>,
}

impl SpectralDecomposition {
    /// Assemble from parts. The caller guarantees `eigvecs` is orthogonal with
    /// columns matching `eigvals`; ascending order is enforced here.
    pub fn new(eigvecs: Matrix, eigvals: Vec<f64>) -> Self {
        assert_eq!(eigvecs.rows(), eigvecs.cols());
        assert_eq!(eigvecs.rows(), eigvals.len());
        debug_assert!(eigvals.windows(2).all(|w| w[0] <= w[1]));
        SpectralDecomposition { eigvecs, eigvals }
    }

    pub fn identity_basis(eigvals: Vec<f64>) -> Self {
        let n = eigvals.len();
        debug_assert!(eigvals.windows(2).all(|w| w[0] <= w[1]));
        SpectralDecomposition {
            eigvecs: Matrix::identity(n),
            eigvals,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn eigvecs(&self) -> &Matrix {
        &self.eigvecs
    }

    pub fn eigvec_column(&self, j: usize) -> Vec<f64> {
        self.eigvecs.column(j)
    }

    pub fn min_eigval(&self) -> f64 {
        self.eigvals[0]
    }

    pub fn max_eigval(&self) -> f64 {
        self.eigvals[self.eigvals.len() - 1]
    }

    /// `Q diag(eigvals) Q^T`. Columns with a zero eigenvalue are skipped, so
    /// low-rank reconstructions cost `O(d^2 r)`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        self.compose(|x| x)
    }

    /// `Q f(diag) Q^T`: the matrix function in this eigenbasis.
    pub fn compose(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let n = self.dim();
        let live: Vec<(usize, f64)> = self
            .eigvals
            .iter()
            .map(|&v| f(v))
            .enumerate()
            .filter(|(_, fv)| *fv != 0.0)
            .collect();
        if live.is_empty() {
            return SymmetricMatrix::zeros(n);
        }
        let r = live.len();
        let mut scaled = Matrix::zeros(n, r);
        let mut basis = Matrix::zeros(n, r);
        for (c, &(j, fv)) in live.iter().enumerate() {
            for i in 0..n {
                let q = self.eigvecs[(i, j)];
                basis[(i, c)] = q;
                scaled[(i, c)] = fv * q;
            }
        }
        let prod = scaled.mul_transpose(&basis);
        SymmetricMatrix::from_fn(n, |i, j| 0.5 * (prod[(i, j)] + prod[(j, i)]))
    }

    /// Apply `f` to the eigenvalues, keeping the eigenbasis; columns are
    /// re-sorted so the result is ascending again.
    pub fn map_eigvals(&self, f: impl Fn(f64) -> f64) -> SpectralDecomposition {
        let mapped: Vec<f64> = self.eigvals.iter().map(|&v| f(v)).collect();
        let mut order: Vec<usize> = (0..mapped.len()).collect();
        order.sort_by(|&a, &b| mapped[a].total_cmp(&mapped[b]));
        if order.windows(2).all(|w| w[0] < w[1]) && order.first() == Some(&0) {
            // already ascending
            if order.iter().enumerate().all(|(i, &o)| i == o) {
                return SpectralDecomposition {
                    eigvecs: self.eigvecs.clone(),
                    eigvals: mapped,
                };
            }
        }
        let n = self.dim();
        let mut vecs = Matrix::zeros(n, n);
        let mut vals = Vec::with_capacity(n);
        for (c, &src) in order.iter().enumerate() {
            vals.push(mapped[src]);
            for i in 0..n {
                vecs[(i, c)] = self.eigvecs[(i, src)];
            }
        }
        SpectralDecomposition {
            eigvecs: vecs,
            eigvals: vals,
        }
    }

    /// `||Q^T Q - I||_F`.
    pub fn orthogonality_residual(&self) -> f64 {
        self.eigvecs.orthogonality_residual()
    }

    /// `||Q diag Q^T - a||_F`.
    pub fn reconstruction_residual(&self, a: &SymmetricMatrix) -> f64 {
        self.reconstruct()
            .sub(a)
            .map(|diff| diff.frobenius_norm())
            .unwrap_or(f64::INFINITY)
    }
}

impl SymmetricMatrix {
    /// Full spectral decomposition, eigenvalues ascending.
    pub fn eigendecompose(&self) -> Result<SpectralDecomposition> {
        let n = self.dim();
        let mut a = self.to_matrix();
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        reduce_to_tridiagonal(&mut a, &mut d, &mut e, true);
        tridiagonal_ql(&mut d, &mut e, Some(&mut a))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
        let mut vecs = Matrix::zeros(n, n);
        let mut vals = Vec::with_capacity(n);
        for (c, &src) in order.iter().enumerate() {
            vals.push(d[src]);
            for i in 0..n {
                vecs[(i, c)] = a[(i, src)];
            }
        }
        Ok(SpectralDecomposition {
            eigvecs: vecs,
            eigvals: vals,
        })
    }

    /// Eigenvalues only (ascending); skips eigenvector accumulation.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut a = self.to_matrix();
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        reduce_to_tridiagonal(&mut a, &mut d, &mut e, false);
        tridiagonal_ql(&mut d, &mut e, None)?;
        d.sort_by(|x, y| x.total_cmp(y));
        Ok(d)
    }

    /// Largest singular value; for a symmetric matrix this is the largest
    /// absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        let vals = self
            .eigenvalues()
            .expect("eigenvalue iteration failed to converge");
        vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sum of absolute eigenvalues.
    pub fn nuclear_norm(&self) -> f64 {
        let vals = self
            .eigenvalues()
            .expect("eigenvalue iteration failed to converge");
        vals.iter().map(|v| v.abs()).sum()
    }

    /// `tr(A) / ||A||`. Errors on the zero matrix.
    pub fn effective_rank(&self) -> Result<f64> {
        let op = self.operator_norm();
        if op == 0.0 {
            return Err(Error::domain(
                "effective rank is undefined for the zero matrix",
            ));
        }
        Ok(self.trace() / op)
    }

    /// `U f(Lambda) U^T` via the spectral decomposition.
    pub fn matrix_function(&self, f: impl Fn(f64) -> f64) -> Result<SymmetricMatrix> {
        Ok(self.eigendecompose()?.compose(f))
    }
}

/// Householder reduction of `a` to tridiagonal form (diagonal in `d`,
/// off-diagonal in `e[1..]`). With `with_vectors`, `a` is overwritten by the
/// accumulated orthogonal transformation.
fn reduce_to_tridiagonal(a: &mut Matrix, d: &mut [f64], e: &mut [f64], with_vectors: bool) {
    let n = a.rows();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let f = a[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    if with_vectors {
                        a[(j, i)] = a[(i, j)] / h;
                    }
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += a[(j, k)] * a[(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g_acc += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * a[(i, j)];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let upd = f * e[k] + g * a[(i, k)];
                        a[(j, k)] -= upd;
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    if with_vectors {
        for i in 0..n {
            if d[i] != 0.0 {
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..i {
                        g += a[(i, k)] * a[(k, j)];
                    }
                    for k in 0..i {
                        let upd = g * a[(k, i)];
                        a[(k, j)] -= upd;
                    }
                }
            }
            d[i] = a[(i, i)];
            a[(i, i)] = 1.0;
            for j in 0..i {
                a[(j, i)] = 0.0;
                a[(i, j)] = 0.0;
            }
        }
    } else {
        for i in 0..n {
            d[i] = a[(i, i)];
        }
    }
}

/// Implicit-shift QL iteration on a tridiagonal matrix. `z`, when present,
/// accumulates the rotations (it should enter holding the reduction basis).
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::EigenNoConvergence {
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + sign_of(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let rows = z.rows();
                    for k in 0..rows {
                        f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[inline]
fn sign_of(magnitude: f64, sign_source: f64) -> f64 {
    if sign_source >= 0.0 {
        magnitude.abs()
    } else {
        -magnitude.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_symmetric(dim: usize, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Power iteration on A^2; independent route to the operator norm. Runs
    /// until the Rayleigh quotient stabilizes.
    fn power_iteration_opnorm(a: &SymmetricMatrix, max_iters: usize) -> f64 {
        let n = a.dim();
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 0.1).collect();
        let mut lambda_sq = 0.0;
        for _ in 0..max_iters {
            let w = a.matvec(&a.matvec(&v));
            let norm = crate::matrix::norm2(&w);
            if norm == 0.0 {
                return 0.0;
            }
            let next = crate::matrix::dot(&v, &w) / crate::matrix::dot(&v, &v);
            let done = (next - lambda_sq).abs() <= 1e-14 * next.abs();
            lambda_sq = next;
            v = w.iter().map(|x| x / norm).collect();
            if done {
                break;
            }
        }
        lambda_sq.max(0.0).sqrt()
    }

    #[test]
    fn diag_two_one() {
        let m = SymmetricMatrix::diagonal(&[2.0, 1.0]);
        let dec = m.eigendecompose().unwrap();
        assert!((dec.eigvals()[0] - 1.0).abs() < 1e-14);
        assert!((dec.eigvals()[1] - 2.0).abs() < 1e-14);
        // eigenvectors are signed permutations of identity columns
        for j in 0..2 {
            let col = dec.eigvec_column(j);
            let big: Vec<f64> = col.iter().map(|v| v.abs()).collect();
            assert!((big.iter().cloned().fold(0.0, f64::max) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_decomposition() {
        let inv = 1.0 / 2.0_f64.sqrt();
        let y = [inv, inv];
        let m = SymmetricMatrix::rank_one(&y);
        let dec = m.eigendecompose().unwrap();
        assert!(dec.eigvals()[0].abs() < 1e-14);
        assert!((dec.eigvals()[1] - 1.0).abs() < 1e-14);
        let top = dec.eigvec_column(1);
        let overlap = crate::matrix::dot(&top, &y).abs();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_residual_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let a = random_symmetric(6, &mut rng);
            let dec = a.eigendecompose().unwrap();
            let rel = dec.reconstruction_residual(&a) / a.frobenius_norm();
            assert!(rel <= 1e-9, "relative residual {rel:.3e}");
            assert!(dec.orthogonality_residual() <= ORTHO_TOL_PER_DIM * 6.0);
        }
    }

    #[test]
    fn operator_norm_cases() {
        assert_eq!(SymmetricMatrix::identity(3).operator_norm(), 1.0);
        // spiked diagonal used by the synthetic experiments
        let mut diag = vec![0.1; 200];
        diag[0] = 10.0;
        diag[1] = 1.0;
        let m = SymmetricMatrix::diagonal(&diag);
        assert!((m.operator_norm() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let a = random_symmetric(5, &mut rng);
            let oracle = power_iteration_opnorm(&a, 2_000_000);
            assert!(
                (a.operator_norm() - oracle).abs() < 1e-8,
                "{} vs {}",
                a.operator_norm(),
                oracle
            );
        }
    }

    #[test]
    fn nuclear_norm_cases() {
        assert_eq!(
            SymmetricMatrix::diagonal(&[1.0, -2.0, 0.0]).nuclear_norm(),
            3.0
        );
        assert!((SymmetricMatrix::identity(7).nuclear_norm() - 7.0).abs() < 1e-12);
        let y = [1.5, -2.0, 0.5];
        let want: f64 = y.iter().map(|v| v * v).sum();
        let got = SymmetricMatrix::rank_one(&y).nuclear_norm();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn frobenius_two_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_symmetric(6, &mut rng);
        let entrywise = a.frobenius_norm();
        let from_eigvals: f64 = a
            .eigenvalues()
            .unwrap()
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        assert!((entrywise - from_eigvals).abs() <= 1e-10 * entrywise.max(1.0));
    }

    #[test]
    fn matrix_function_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_symmetric(5, &mut rng);
        let same = a.matrix_function(|x| x).unwrap();
        assert!(same.sub(&a).unwrap().frobenius_norm() <= 1e-10 * a.frobenius_norm());

        let sq = SymmetricMatrix::diagonal(&[1.0, 2.0, 3.0])
            .matrix_function(|x| x * x)
            .unwrap();
        assert!(sq.sub(&SymmetricMatrix::diagonal(&[1.0, 4.0, 9.0]))
            .unwrap()
            .frobenius_norm()
            < 1e-12);

        // f(A) commutes with A
        let f_a = a.matrix_function(f64::exp).unwrap();
        let left = f_a.to_matrix().mul(&a.to_matrix());
        let right = a.to_matrix().mul(&f_a.to_matrix());
        let mut diff = 0.0;
        for (x, y) in left.as_slice().iter().zip(right.as_slice()) {
            diff += (x - y) * (x - y);
        }
        assert!(diff.sqrt() <= 1e-9);
    }

    #[test]
    fn function_composition_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_symmetric(5, &mut rng);
        let f = |x: f64| x * x;
        let g = |x: f64| x + 0.5;
        let composed = a.matrix_function(|x| f(g(x))).unwrap();
        let chained = a
            .matrix_function(g)
            .unwrap()
            .matrix_function(f)
            .unwrap();
        let rel = composed.sub(&chained).unwrap().frobenius_norm()
            / composed.frobenius_norm().max(1.0);
        assert!(rel <= 1e-8);
    }

    #[test]
    fn effective_rank_cases() {
        let d = 8;
        assert!((SymmetricMatrix::identity(d).effective_rank().unwrap() - d as f64).abs() < 1e-12);
        let mut diag = vec![1.0 / d as f64; d];
        diag[0] = 1.0;
        let m = SymmetricMatrix::diagonal(&diag);
        let want = 2.0 - 1.0 / d as f64;
        assert!((m.effective_rank().unwrap() - want).abs() < 1e-12);
        assert!(SymmetricMatrix::zeros(3).effective_rank().is_err());

        // scale invariance
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_symmetric(6, &mut rng);
        let r1 = a.effective_rank().unwrap();
        let r2 = a.scale(37.5).effective_rank().unwrap();
        assert!((r1 - r2).abs() <= 1e-12 * r1.abs().max(1.0));
    }

    #[test]
    fn effective_rank_bounds_for_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let b = random_symmetric(5, &mut rng);
            let psd = SymmetricMatrix::from_fn(5, |i, j| {
                crate::matrix::dot(
                    &b.as_slice()[i * 5..(i + 1) * 5],
                    &b.as_slice()[j * 5..(j + 1) * 5],
                )
            });
            let rk = psd.effective_rank().unwrap();
            assert!(rk >= 1.0 - 1e-12 && rk <= 5.0 + 1e-12);
        }
    }

    #[test]
    fn norm_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let a = random_symmetric(6, &mut rng);
            let op = a.operator_norm();
            let fro = a.frobenius_norm();
            let nuc = a.nuclear_norm();
            assert!(op <= fro * (1.0 + 1e-12) && fro <= nuc * (1.0 + 1e-12));
        }
    }

    #[test]
    fn eigendecompose_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_symmetric(10, &mut rng);
        let d1 = a.eigendecompose().unwrap();
        let d2 = a.eigendecompose().unwrap();
        assert_eq!(d1.eigvals(), d2.eigvals());
        assert_eq!(d1.eigvecs().as_slice(), d2.eigvecs().as_slice());
    }

    #[test]
    fn map_eigvals_resorts() {
        let m = SymmetricMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let dec = m.eigendecompose().unwrap();
        let neg = dec.map_eigvals(|x| -x);
        assert_eq!(neg.eigvals(), &[-3.0, -2.0, -1.0]);
        let rec = neg.reconstruct();
        assert!(rec.sub(&m.scale(-1.0)).unwrap().frobenius_norm() < 1e-12);
    }
}
