//! The estimation driver: stochastic proximal gradient descent on the
//! penalized matrix Huber objective
//!
//! ```text
//! L(S) = (1/N) sum_{i != j} tr rho_thr(Ytilde_ij Ytilde_ij^T - S) + (lambda1/2) ||S||_1,
//! thr = sqrt(N) lambda2 / 2,  N = n (n - 1),
//! ```
//!
//! with a full-gradient warm start and iterates kept in spectral form so each
//! step reduces to rank-one eigensystem updates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::huber::{huber_prime, soft_threshold_decomp, soft_threshold_spectral};
use crate::matrix::SymmetricMatrix;
use crate::rank_one::{eigenvalues_outside_band, rank_one_update, RankOneConfig};
use crate::sample::PairwiseSample;

/// Step-size schedule; `Diminishing(a)` uses `a / t` at iteration `t >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    Diminishing(f64),
}

impl StepSchedule {
    pub fn at(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::Constant(a) => a,
            StepSchedule::Diminishing(a) => a / t as f64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub iterations: usize,
    pub batch_size: usize,
    pub step: StepSchedule,
    pub seed: u64,
    /// Initialize from one full-batch proximal step instead of zero.
    pub warm_start: bool,
    /// Keep the iterate in spectral form and use rank-one updates; otherwise
    /// every step re-decomposes dense matrices.
    pub spectral_path: bool,
    /// Scale the prox threshold with the step (`eta_t * lambda1 / 2`), the
    /// standard forward-backward coupling. With `false` the threshold stays
    /// at `lambda1 / 2` regardless of the step; under a diminishing schedule
    /// that variant's fixed point degenerates to the zero matrix, so it is
    /// only useful for comparison runs.
    pub scale_prox_with_step: bool,
    /// Record the objective every this many iterations (0 = off).
    pub trace_stride: usize,
    pub rank_one: RankOneConfig,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            lambda1: 1.0,
            lambda2: 1.0,
            iterations: 100,
            batch_size: 1,
            step: StepSchedule::Diminishing(1.0),
            seed: 0,
            warm_start: true,
            spectral_path: true,
            scale_prox_with_step: true,
            trace_stride: 0,
            rank_one: RankOneConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TracePoint {
    pub iteration: usize,
    pub loss: f64,
}

#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub points: Vec<TracePoint>,
}

/// Re-decompose the reconstructed iterate this often to cap the slow
/// orthogonality drift of long rank-one-update chains.
const REFRESH_STRIDE: usize = 200;

/// Compensated accumulator for the pairwise loss sums.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

fn huber_threshold(pairs: &PairwiseSample, lambda2: f64) -> f64 {
    (pairs.pair_count() as f64).sqrt() * lambda2 / 2.0
}

fn validate(pairs: &PairwiseSample, cfg: &EstimatorConfig) -> Result<()> {
    if !(cfg.lambda1 > 0.0) || !(cfg.lambda2 > 0.0) {
        return Err(Error::domain("penalty levels must be positive"));
    }
    if cfg.batch_size == 0 || cfg.batch_size > pairs.pair_count() {
        return Err(Error::BatchTooLarge {
            batch: cfg.batch_size,
            pairs: pairs.pair_count(),
        });
    }
    Ok(())
}

/// One full-batch proximal step from the zero matrix. Since
/// `rho'(y y^T) = [rho'(||y||^2) / ||y||^2] y y^T`, no decomposition is
/// needed for the gradient; only the prox decomposes once.
pub fn full_gradient_init(
    pairs: &PairwiseSample,
    lambda1: f64,
    lambda2: f64,
) -> Result<SymmetricMatrix> {
    if !(lambda1 > 0.0) || !(lambda2 > 0.0) {
        return Err(Error::domain("penalty levels must be positive"));
    }
    let d = pairs.dim();
    let n = pairs.n();
    let thr = huber_threshold(pairs, lambda2);
    let total = pairs.pair_count() as f64;
    let mut grad = SymmetricMatrix::zeros(d);
    let mut buf = vec![0.0; d];
    for i in 0..n {
        for j in (i + 1)..n {
            let q = pairs.pair_norm_sq(i, j);
            if q == 0.0 {
                continue;
            }
            let coeff = huber_prime(q, thr) / q;
            pairs.pair_into(i, j, &mut buf);
            // ordered pairs (i,j) and (j,i) contribute identically
            grad.add_scaled_rank_one(2.0 * coeff / total, &buf);
        }
    }
    grad.mirror_upper();
    soft_threshold_spectral(&grad, lambda1 / 2.0)
}

/// Objective value at a spectral-form iterate. The per-pair trace uses
/// `tr rho(M) = ||M||_F^2 / 2 - (1/2) sum_{|eig| > thr} (|eig| - thr)^2`, so
/// only eigenvalues escaping the band are ever solved for.
pub fn penalized_loss(
    pairs: &PairwiseSample,
    dec: &SpectralDecomposition,
    lambda1: f64,
    lambda2: f64,
    rank_cfg: &RankOneConfig,
) -> Result<f64> {
    let d = pairs.dim();
    let n = pairs.n();
    let thr = huber_threshold(pairs, lambda2);
    let vals = dec.eigvals();
    let nuclear: f64 = vals.iter().map(|v| v.abs()).sum();
    let neg_vals: Vec<f64> = vals.iter().rev().map(|v| -v).collect();
    let lam_max = vals[d - 1];
    let lam_min = vals[0];
    // escaped eigenvalues enter the objective through (|eig| - thr)^2, so
    // they are solved to the floating-point floor rather than the looser
    // default used inside the iteration
    let tight = RankOneConfig {
        secular_stop: 1e-15,
        ..rank_cfg.clone()
    };
    let s_dense = dec.reconstruct();
    let mut acc = KahanSum::default();
    let mut y = vec![0.0; d];
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.pair_into(i, j, &mut y);
            let q: f64 = y.iter().map(|v| v * v).sum();
            // ||y y^T - S||_F^2 entrywise
            let mut m_frob_sq = 0.0;
            for a in 0..d {
                let ya = y[a];
                let row = &s_dense.as_slice()[a * d..(a + 1) * d];
                for b in 0..d {
                    let e = ya * y[b] - row[b];
                    m_frob_sq += e * e;
                }
            }
            let mut pair_loss = 0.5 * m_frob_sq;
            let needs_band_check = (q - lam_min) > thr || lam_max > thr;
            if needs_band_check {
                let mut z = dec.eigvecs().tr_matvec(&y);
                z.reverse();
                let nz_sq: f64 = z.iter().map(|v| v * v).sum();
                let escaped = if nz_sq == 0.0 {
                    neg_vals
                        .iter()
                        .copied()
                        .filter(|v| v.abs() > thr)
                        .collect::<Vec<f64>>()
                } else {
                    let nz = nz_sq.sqrt();
                    z.iter_mut().for_each(|v| *v /= nz);
                    eigenvalues_outside_band(&neg_vals, &z, nz_sq, thr, &tight)?
                };
                for lam in escaped {
                    let excess = lam.abs() - thr;
                    pair_loss -= 0.5 * excess * excess;
                }
            }
            acc.add(2.0 * pair_loss);
        }
    }
    Ok(acc.value() / pairs.pair_count() as f64 + 0.5 * lambda1 * nuclear)
}

/// Dense-route objective for callers holding a plain matrix.
pub fn penalized_loss_dense(
    pairs: &PairwiseSample,
    s: &SymmetricMatrix,
    lambda1: f64,
    lambda2: f64,
    rank_cfg: &RankOneConfig,
) -> Result<f64> {
    penalized_loss(pairs, &s.eigendecompose()?, lambda1, lambda2, rank_cfg)
}

struct BatchSampler {
    pool: Vec<u32>,
    rng: ChaCha8Rng,
}

impl BatchSampler {
    fn new(count: usize, seed: u64) -> Self {
        BatchSampler {
            pool: (0..count as u32).collect(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Draw `b` distinct ordered-pair indices (fresh each call; pairs may
    /// repeat across calls).
    fn draw(&mut self, b: usize, out: &mut Vec<u32>) {
        let n = self.pool.len();
        out.clear();
        for i in 0..b {
            let j = self.rng.random_range(i..n);
            self.pool.swap(i, j);
            out.push(self.pool[i]);
        }
    }
}

/// Stochastic proximal gradient descent on the penalized Huber objective.
/// Returns the final iterate and the recorded objective trace.
pub fn spgd_estimate(
    pairs: &PairwiseSample,
    cfg: &EstimatorConfig,
) -> Result<(SymmetricMatrix, IterationTrace)> {
    validate(pairs, cfg)?;
    let s0 = if cfg.warm_start {
        full_gradient_init(pairs, cfg.lambda1, cfg.lambda2)?
    } else {
        SymmetricMatrix::zeros(pairs.dim())
    };
    if cfg.spectral_path {
        run_spectral(pairs, cfg, s0)
    } else {
        run_dense(pairs, cfg, s0)
    }
}

/// Deterministic full-batch variant: identical to [`spgd_estimate`] with the
/// batch set to all ordered pairs.
pub fn pgd_estimate(
    pairs: &PairwiseSample,
    cfg: &EstimatorConfig,
) -> Result<(SymmetricMatrix, IterationTrace)> {
    let full = EstimatorConfig {
        batch_size: pairs.pair_count(),
        ..cfg.clone()
    };
    spgd_estimate(pairs, &full)
}

fn prox_threshold(cfg: &EstimatorConfig, eta: f64) -> f64 {
    if cfg.scale_prox_with_step {
        eta * cfg.lambda1 / 2.0
    } else {
        cfg.lambda1 / 2.0
    }
}

/// The warm start is one full-batch step taken at schedule position 1, so
/// the stochastic iterations continue at position 2. Without it the first
/// diminishing step would be 1 and a single-pair draw would erase the
/// initializer.
fn schedule_position(cfg: &EstimatorConfig, t: usize) -> usize {
    if cfg.warm_start {
        t + 1
    } else {
        t
    }
}

fn run_dense(
    pairs: &PairwiseSample,
    cfg: &EstimatorConfig,
    s0: SymmetricMatrix,
) -> Result<(SymmetricMatrix, IterationTrace)> {
    let d = pairs.dim();
    let thr = huber_threshold(pairs, cfg.lambda2);
    let mut sampler = BatchSampler::new(pairs.pair_count(), cfg.seed);
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut trace = IterationTrace::default();
    let mut s = s0;
    record_trace(&mut trace, pairs, cfg, 0, || s.eigendecompose())?;
    let mut y = vec![0.0; d];
    for t in 1..=cfg.iterations {
        let eta = cfg.step.at(schedule_position(cfg, t));
        sampler.draw(cfg.batch_size, &mut batch);
        let mut grad_sum = SymmetricMatrix::zeros(d);
        for &idx in &batch {
            let (i, j) = pairs.pair_indices(idx as usize);
            pairs.pair_into(i, j, &mut y);
            let mut m = s.scale(-1.0);
            m.add_scaled_rank_one(1.0, &y);
            m.mirror_upper();
            let g = crate::huber::matrix_huber_grad(&m, thr)?;
            grad_sum = grad_sum.add(&g)?;
        }
        let step = grad_sum.scale(eta / cfg.batch_size as f64);
        let shifted = s.add(&step)?;
        s = soft_threshold_spectral(&shifted, prox_threshold(cfg, eta))?;
        if !s.frobenius_norm().is_finite() {
            return Err(Error::Diverged { iteration: t });
        }
        if cfg.trace_stride > 0 && t % cfg.trace_stride == 0 {
            record_trace(&mut trace, pairs, cfg, t, || s.eigendecompose())?;
        }
    }
    Ok((s, trace))
}

fn run_spectral(
    pairs: &PairwiseSample,
    cfg: &EstimatorConfig,
    s0: SymmetricMatrix,
) -> Result<(SymmetricMatrix, IterationTrace)> {
    let d = pairs.dim();
    let thr = huber_threshold(pairs, cfg.lambda2);
    let b = cfg.batch_size;
    let mut sampler = BatchSampler::new(pairs.pair_count(), cfg.seed);
    let mut batch = Vec::with_capacity(b);
    let mut trace = IterationTrace::default();
    let mut dec = s0.eigendecompose()?;
    record_trace(&mut trace, pairs, cfg, 0, || Ok(dec.clone()))?;

    struct ClipTerm {
        direction: Vec<f64>,
        excess: f64,
    }

    let mut y = vec![0.0; d];
    for t in 1..=cfg.iterations {
        let eta = cfg.step.at(schedule_position(cfg, t));
        sampler.draw(b, &mut batch);
        let lam_max = dec.max_eigval();
        let lam_min = dec.min_eigval();

        let mut clip_terms: Vec<ClipTerm> = Vec::new();
        // decomposition of the single gradient argument, reused for the
        // one-pair shortcut below
        let mut single_grad_dec: Option<SpectralDecomposition> = None;
        let mut neg_dec: Option<SpectralDecomposition> = None;
        for &idx in &batch {
            let (i, j) = pairs.pair_indices(idx as usize);
            pairs.pair_into(i, j, &mut y);
            let q: f64 = y.iter().map(|v| v * v).sum();
            // Weyl bounds: all eigenvalues of y y^T - S stay inside
            // [-lam_max, q - lam_min]; inside the band the Huber derivative
            // is the identity and no decomposition is needed.
            let may_clip = lam_max > thr || q - lam_min > thr;
            if !may_clip {
                continue;
            }
            let neg = neg_dec.get_or_insert_with(|| dec.map_eigvals(|x| -x));
            let m_dec = rank_one_update(neg, 1.0, &y, &cfg.rank_one)?;
            if b == 1 {
                // the one-pair shortcut below consumes the decomposition
                // whole; no need to pull out clipped directions
                single_grad_dec = Some(m_dec);
                continue;
            }
            for (c, &lam) in m_dec.eigvals().iter().enumerate() {
                let excess = lam - lam.clamp(-thr, thr);
                if excess != 0.0 {
                    clip_terms.push(ClipTerm {
                        direction: m_dec.eigvec_column(c),
                        excess,
                    });
                }
            }
        }

        let shifted = if let Some(m_dec) = single_grad_dec {
            // T = y y^T + Qm (eta rho'(L) - L) Qm^T, one update from the
            // gradient basis regardless of how many eigenvalues clipped
            let (i, j) = pairs.pair_indices(batch[0] as usize);
            pairs.pair_into(i, j, &mut y);
            let bent = m_dec.map_eigvals(|u| eta * huber_prime(u, thr) - u);
            rank_one_update(&bent, 1.0, &y, &cfg.rank_one)?
        } else {
            // T = (1 - eta) S + (eta/b) sum y y^T - (eta/b) sum clip terms
            let mut acc = dec.map_eigvals(|x| (1.0 - eta) * x);
            for &idx in &batch {
                let (i, j) = pairs.pair_indices(idx as usize);
                pairs.pair_into(i, j, &mut y);
                acc = rank_one_update(&acc, eta / b as f64, &y, &cfg.rank_one)?;
            }
            for term in &clip_terms {
                acc = rank_one_update(
                    &acc,
                    -eta * term.excess / b as f64,
                    &term.direction,
                    &cfg.rank_one,
                )?;
            }
            acc
        };

        dec = soft_threshold_decomp(&shifted, prox_threshold(cfg, eta));
        if dec.eigvals().iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { iteration: t });
        }
        if t % REFRESH_STRIDE == 0 {
            dec = dec.reconstruct().eigendecompose()?;
        }
        if cfg.trace_stride > 0 && t % cfg.trace_stride == 0 {
            record_trace(&mut trace, pairs, cfg, t, || Ok(dec.clone()))?;
        }
    }
    Ok((dec.reconstruct(), trace))
}

fn record_trace(
    trace: &mut IterationTrace,
    pairs: &PairwiseSample,
    cfg: &EstimatorConfig,
    iteration: usize,
    dec: impl FnOnce() -> Result<SpectralDecomposition>,
) -> Result<()> {
    if cfg.trace_stride == 0 {
        return Ok(());
    }
    let dec = dec()?;
    let loss = penalized_loss(pairs, &dec, cfg.lambda1, cfg.lambda2, &cfg.rank_one)?;
    trace.points.push(TracePoint { iteration, loss });
    Ok(())
}
