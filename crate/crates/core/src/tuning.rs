//! Closed-form tuning heuristics for the penalty levels and the truncation
//! radius. All of them take plug-in estimates of the unknown covariance
//! scale (`||Sigma||`, its effective rank) and a user constant `c`;
//! logarithms are natural.

use crate::error::{Error, Result};

/// A heuristic value together with whether its validity precondition held.
#[derive(Debug, Clone, Copy)]
pub struct LambdaEstimate {
    pub value: f64,
    /// False when the sample size is too small for the formula's regime;
    /// the value is still returned.
    pub precondition_ok: bool,
}

/// Nuclear-norm penalty level: `c * ||Sigma|| * sqrt((rk + t) / n)`.
/// The formula presumes `n >= rk + t`.
pub fn lambda1_heuristic(
    sigma_norm_est: f64,
    rk_est: f64,
    n: f64,
    t: f64,
    c: f64,
) -> LambdaEstimate {
    LambdaEstimate {
        value: c * sigma_norm_est * ((rk_est + t) / n).sqrt(),
        precondition_ok: n >= rk_est + t,
    }
}

/// Outlier penalty level: `c * ||Sigma|| * (rk + ln n + t) / n`.
pub fn lambda2_heuristic(
    sigma_norm_est: f64,
    rk_est: f64,
    n: f64,
    t: f64,
    c: f64,
) -> LambdaEstimate {
    LambdaEstimate {
        value: c * sigma_norm_est * (rk_est + n.ln() + t) / n,
        precondition_ok: n >= rk_est + t,
    }
}

/// Truncation radius `(tr * ||Sigma|| * n / (ln rk + ln n))^(1/4)` with
/// `rk = tr / ||Sigma||`.
pub fn truncation_level(trace_est: f64, opnorm_est: f64, n: f64) -> Result<f64> {
    if !(trace_est > 0.0) || !(opnorm_est > 0.0) || n < 2.0 {
        return Err(Error::domain(
            "truncation level needs positive trace/norm estimates and n >= 2",
        ));
    }
    let rk = trace_est / opnorm_est;
    let denom = rk.ln() + n.ln();
    if denom <= 0.0 {
        return Err(Error::domain(format!(
            "ln(rk) + ln(n) = {denom} is not positive; truncation level undefined"
        )));
    }
    Ok((trace_est * opnorm_est * n / denom).powf(0.25))
}

/// High-probability ceiling for the observed outlier fraction:
/// `cK * rk * (ln rk + ln n) / n`. Purely a reporting diagnostic.
pub fn epsilon_bound_diagnostic(rk_est: f64, n: f64, ck: f64) -> f64 {
    ck * rk_est * (rk_est.ln() + n.ln()) / n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda1_values() {
        let e = lambda1_heuristic(1.0, 4.0, 100.0, 0.0, 1.0);
        assert!((e.value - 0.2).abs() < 1e-15);
        assert!(e.precondition_ok);

        let e = lambda1_heuristic(10.0, 1.11, 100.0, 1.0, 1.0);
        assert!((e.value - 1.452583904633395).abs() < 1e-12);

        // doubling n divides by sqrt(2)
        let a = lambda1_heuristic(3.0, 2.0, 50.0, 1.0, 1.0).value;
        let b = lambda1_heuristic(3.0, 2.0, 100.0, 1.0, 1.0).value;
        assert!((a / b - 2.0_f64.sqrt()).abs() < 1e-12);

        // violated precondition warns but still evaluates
        let e = lambda1_heuristic(1.0, 50.0, 10.0, 0.0, 1.0);
        assert!(!e.precondition_ok);
        assert!(e.value.is_finite());
    }

    #[test]
    fn lambda2_values() {
        let e = lambda2_heuristic(1.0, 1.0, std::f64::consts::E, 0.0, 1.0);
        assert!((e.value - 0.7357588823428847).abs() < 1e-12);

        let e = lambda2_heuristic(10.0, 2.0, 100.0, 1.0, 1.0);
        assert!((e.value - 0.7605170185988093).abs() < 1e-12);

        // linear in the norm estimate
        let a = lambda2_heuristic(1.0, 2.0, 100.0, 1.0, 1.0).value;
        let b = lambda2_heuristic(7.0, 2.0, 100.0, 1.0, 1.0).value;
        assert!((b / a - 7.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_level_values() {
        let r = truncation_level(4.0, 1.0, 100.0).unwrap();
        assert!((r - 2.8584575653790454).abs() < 1e-12);

        // the spiked covariance of the synthetic experiments at d = 200
        let r = truncation_level(30.8, 10.0, 100.0).unwrap();
        assert!((r - 8.562431949591357).abs() < 1e-12);

        // grows like n^(1/4) up to the slow log factor
        let r1 = truncation_level(4.0, 1.0, 100.0).unwrap();
        let r16 = truncation_level(4.0, 1.0, 1600.0).unwrap();
        let pure = 16.0_f64.powf(0.25);
        assert!(r16 / r1 < pure && r16 / r1 > 0.8 * pure);

        // rk < 1/n regime is a domain error
        assert!(truncation_level(0.001, 1.0, 2.0).is_err());
    }

    #[test]
    fn epsilon_bound_values() {
        let b = epsilon_bound_diagnostic(1.0, std::f64::consts::E, 1.0);
        assert!((b - 0.36787944117144233).abs() < 1e-12);

        let b = epsilon_bound_diagnostic(3.08, 100.0, 2.0);
        assert!((b - 0.3529741466311722).abs() < 1e-12);

        // monotone decreasing in n for fixed rk
        let mut prev = f64::INFINITY;
        for n in 3..50 {
            let v = epsilon_bound_diagnostic(2.0, n as f64, 1.0);
            assert!(v < prev);
            prev = v;
        }
    }
}
