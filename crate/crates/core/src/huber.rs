//! Scalar and matrix Huber loss, its derivative, and the nuclear-norm
//! proximal operator (eigenvalue soft-thresholding).
//!
//! All matrix variants act through the spectral functional calculus. Each one
//! comes in two forms: one taking a dense symmetric matrix (which performs a
//! decomposition) and one taking a precomputed [`SpectralDecomposition`], so
//! callers that already hold the iterate in spectral form pay nothing extra.

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

/// Threshold parameter of the Huber loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberParams {
    lambda: f64,
}

impl HuberParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::domain(format!(
                "Huber threshold must be positive, got {lambda}"
            )));
        }
        Ok(HuberParams { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Huber loss: `u^2/2` inside `[-lambda, lambda]`, linear outside.
#[inline]
pub fn huber(u: f64, lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    if u.abs() <= lambda {
        0.5 * u * u
    } else {
        lambda * u.abs() - 0.5 * lambda * lambda
    }
}

/// Derivative of the Huber loss: `u` clipped to `[-lambda, lambda]`.
#[inline]
pub fn huber_prime(u: f64, lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    u.clamp(-lambda, lambda)
}

/// Scalar soft-threshold `sign(u) (|u| - tau)_+`.
#[inline]
pub fn soft_threshold(u: f64, tau: f64) -> f64 {
    debug_assert!(tau > 0.0);
    u.signum() * (u.abs() - tau).max(0.0)
}

/// `tr rho_lambda(A)`: the Huber loss summed over the eigenvalues of `A`.
pub fn matrix_huber_trace(a: &SymmetricMatrix, lambda: f64) -> Result<f64> {
    Ok(a.eigenvalues()?
        .iter()
        .map(|&v| huber(v, lambda))
        .sum())
}

pub fn matrix_huber_trace_decomp(dec: &SpectralDecomposition, lambda: f64) -> f64 {
    dec.eigvals().iter().map(|&v| huber(v, lambda)).sum()
}

/// `rho'_lambda(A)`: eigenvalues clipped to `[-lambda, lambda]` in the
/// eigenbasis of `A`. Operator norm of the result never exceeds `lambda`.
pub fn matrix_huber_grad(a: &SymmetricMatrix, lambda: f64) -> Result<SymmetricMatrix> {
    Ok(a.eigendecompose()?.compose(|v| huber_prime(v, lambda)))
}

pub fn matrix_huber_grad_decomp(dec: &SpectralDecomposition, lambda: f64) -> SymmetricMatrix {
    dec.compose(|v| huber_prime(v, lambda))
}

/// Proximal operator of `tau * ||.||_1` over symmetric matrices: shrinks each
/// eigenvalue toward zero by `tau`. Minimizes `1/2 ||S - T||_F^2 + tau ||S||_1`.
pub fn soft_threshold_spectral(t: &SymmetricMatrix, tau: f64) -> Result<SymmetricMatrix> {
    Ok(t.eigendecompose()?.compose(|v| soft_threshold(v, tau)))
}

/// Same prox in spectral form. Soft-thresholding is monotone, so the
/// eigenbasis and ordering carry over unchanged.
pub fn soft_threshold_decomp(dec: &SpectralDecomposition, tau: f64) -> SpectralDecomposition {
    let vals: Vec<f64> = dec
        .eigvals()
        .iter()
        .map(|&v| soft_threshold(v, tau))
        .collect();
    SpectralDecomposition::new(dec.eigvecs().clone(), vals)
}
