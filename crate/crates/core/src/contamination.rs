//! Synthetic data generation: Gaussian and heavy-tailed samplers plus the
//! four adversarial outlier models used by the benchmark experiments.
//!
//! All generators are pure functions of their inputs and a 64-bit seed. The
//! stream generator is ChaCha8, a counter-based generator whose output is
//! identical across platforms, so seeds are portable.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, Matrix, SymmetricMatrix};
use crate::sample::{sample_covariance, RawSample};

/// Mean and covariance of the clean distribution.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    mu: Vec<f64>,
    sigma: SymmetricMatrix,
}

impl GroundTruth {
    /// Validates that `sigma` is numerically positive semidefinite
    /// (eigenvalues above `-1e-12 * ||sigma||`).
    pub fn new(mu: Vec<f64>, sigma: SymmetricMatrix) -> Result<Self> {
        if mu.len() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                left: mu.len(),
                right: sigma.dim(),
            });
        }
        let min = sigma.eigenvalues()?[0];
        if min < -1e-12 * sigma.operator_norm() {
            return Err(Error::NotPsd { min_eigval: min });
        }
        Ok(GroundTruth { mu, sigma })
    }

    pub fn centered(sigma: SymmetricMatrix) -> Result<Self> {
        let d = sigma.dim();
        GroundTruth::new(vec![0.0; d], sigma)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &SymmetricMatrix {
        &self.sigma
    }
}

/// The spiked diagonal covariance `diag(10, 1, 0.1, ..., 0.1)` used by the
/// synthetic experiments.
pub fn spiked_covariance(d: usize) -> SymmetricMatrix {
    let mut diag = vec![0.1; d];
    if !diag.is_empty() {
        diag[0] = 10.0;
    }
    if diag.len() > 1 {
        diag[1] = 1.0;
    }
    SymmetricMatrix::diagonal(&diag)
}

/// Which outlier model corrupts the selected indices.
#[derive(Debug, Clone)]
pub enum OutlierModel {
    /// Add a fixed vector to each selected point.
    Constant { shift: Vec<f64> },
    /// Add an independent Gaussian draw to each selected point.
    SphericalGaussian {
        mean: Vec<f64>,
        cov: SymmetricMatrix,
    },
    /// Add `beta * Z_j`, erasing (`beta = -1`) or amplifying the point.
    Amplify { beta: f64 },
    /// Add a vector orthogonal (or parallel) to the span of the first
    /// `components` principal components of the clean data.
    Directional {
        components: usize,
        mode: DirectionalMode,
        magnitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionalMode {
    Orthogonal,
    Parallel,
}

/// Default directional outlier magnitude, matched to the scale of the
/// constant model (`||(100, ..., 100)|| = 100 sqrt(d)`).
pub fn directional_magnitude(d: usize) -> f64 {
    100.0 * (d as f64).sqrt()
}

#[derive(Debug, Clone)]
pub struct ContaminationSpec {
    pub model: OutlierModel,
    pub num_outliers: usize,
    pub seed: u64,
}

fn chacha(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Column factor `L` with `L L^T = sigma`, via the spectral square root;
/// tolerates tiny negative eigenvalues by clamping at zero.
fn covariance_factor(sigma: &SymmetricMatrix) -> Result<Matrix> {
    let dec = sigma.eigendecompose()?;
    let min = dec.min_eigval();
    if min < -1e-12 * sigma.operator_norm() {
        return Err(Error::NotPsd { min_eigval: min });
    }
    factor_from(&dec)
}

fn factor_from(dec: &SpectralDecomposition) -> Result<Matrix> {
    let n = dec.dim();
    let mut l = dec.eigvecs().clone();
    for j in 0..n {
        let s = dec.eigvals()[j].max(0.0).sqrt();
        for i in 0..n {
            l[(i, j)] *= s;
        }
    }
    Ok(l)
}

fn gaussian_points(
    mu: &[f64],
    factor: &Matrix,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let d = mu.len();
    let mut out = Vec::with_capacity(n * d);
    let mut g = vec![0.0; d];
    for _ in 0..n {
        for gi in g.iter_mut() {
            *gi = StandardNormal.sample(rng);
        }
        let x = factor.matvec(&g);
        out.extend(x.iter().zip(mu).map(|(v, m)| v + m));
    }
    out
}

/// `n` i.i.d. Gaussian draws from the ground truth; deterministic per seed.
pub fn sample_gaussian(truth: &GroundTruth, n: usize, seed: u64) -> Result<RawSample> {
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let factor = covariance_factor(truth.sigma())?;
    let mut rng = chacha(seed);
    let pts = gaussian_points(truth.mu(), &factor, n, &mut rng);
    RawSample::new(n, truth.dim(), pts)
}

/// `n` i.i.d. multivariate-t draws with `dof` degrees of freedom, rescaled so
/// the covariance equals the ground-truth covariance exactly. Requires
/// `dof > 4` so fourth moments exist.
pub fn sample_heavy_tailed(truth: &GroundTruth, n: usize, dof: f64, seed: u64) -> Result<RawSample> {
    if !(dof > 4.0) {
        return Err(Error::domain(format!(
            "heavy-tailed sampler needs dof > 4, got {dof}"
        )));
    }
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    // Cov of t_nu with scale S is S * nu/(nu-2); shrink the factor to match.
    let scale = ((dof - 2.0) / dof).sqrt();
    let factor = covariance_factor(truth.sigma())?;
    let mut rng = chacha(seed);
    let d = truth.dim();
    let chi = ChiSquared::new(dof).expect("dof > 4");
    let mut pts = Vec::with_capacity(n * d);
    let mut g = vec![0.0; d];
    for _ in 0..n {
        for gi in g.iter_mut() {
            *gi = StandardNormal.sample(rng_mut(&mut rng));
        }
        let w: f64 = chi.sample(&mut rng);
        let mult = scale * (dof / w).sqrt();
        let x = factor.matvec(&g);
        pts.extend(
            x.iter()
                .zip(truth.mu())
                .map(|(v, m)| v * mult + m),
        );
    }
    RawSample::new(n, d, pts)
}

#[inline]
fn rng_mut(rng: &mut ChaCha8Rng) -> &mut ChaCha8Rng {
    rng
}

/// Replace `num_outliers` uniformly chosen points `Z_j` by `Z_j + V_j` per
/// the model. Returns the contaminated sample and the chosen indices
/// (ascending). Deterministic per spec seed.
pub fn apply_contamination(
    clean: &RawSample,
    spec: &ContaminationSpec,
) -> Result<(RawSample, Vec<usize>)> {
    let n = clean.len();
    if spec.num_outliers > n {
        return Err(Error::domain(format!(
            "cannot corrupt {} of {} points",
            spec.num_outliers, n
        )));
    }
    let mut rng = chacha(spec.seed);
    let chosen = sample_without_replacement(n, spec.num_outliers, &mut rng);
    let mut out = clean.clone();
    match &spec.model {
        OutlierModel::Constant { shift } => {
            if shift.len() != clean.dim() {
                return Err(Error::DimensionMismatch {
                    left: shift.len(),
                    right: clean.dim(),
                });
            }
            for &j in &chosen {
                for (x, &v) in out.point_mut(j).iter_mut().zip(shift) {
                    *x += v;
                }
            }
        }
        OutlierModel::SphericalGaussian { mean, cov } => {
            if mean.len() != clean.dim() || cov.dim() != clean.dim() {
                return Err(Error::DimensionMismatch {
                    left: mean.len(),
                    right: clean.dim(),
                });
            }
            let factor = covariance_factor(cov)?;
            for &j in &chosen {
                let noise = gaussian_points(mean, &factor, 1, &mut rng);
                for (x, v) in out.point_mut(j).iter_mut().zip(noise) {
                    *x += v;
                }
            }
        }
        OutlierModel::Amplify { beta } => {
            for &j in &chosen {
                let z: Vec<f64> = clean.point(j).to_vec();
                for (x, v) in out.point_mut(j).iter_mut().zip(z) {
                    *x += beta * v;
                }
            }
        }
        OutlierModel::Directional {
            components,
            mode,
            magnitude,
        } => {
            let dirs = principal_directions(clean, *components)?;
            for &j in &chosen {
                let v = directional_vector(&dirs, clean.dim(), *mode, *magnitude, &mut rng)?;
                for (x, v) in out.point_mut(j).iter_mut().zip(v) {
                    *x += v;
                }
            }
        }
    }
    Ok((out, chosen))
}

/// Uniformly chosen distinct indices in ascending order (partial
/// Fisher-Yates).
fn sample_without_replacement(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let mut chosen: Vec<usize> = idx[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Top principal directions of the clean data (eigenvectors of its sample
/// covariance, largest eigenvalues first).
fn principal_directions(clean: &RawSample, m: usize) -> Result<Vec<Vec<f64>>> {
    if m == 0 || m > clean.dim() {
        return Err(Error::domain(format!(
            "directional model needs 1..=d principal components, got {m}"
        )));
    }
    let cov = sample_covariance(clean)?;
    let dec = cov.eigendecompose()?;
    let d = clean.dim();
    Ok((0..m).map(|k| dec.eigvec_column(d - 1 - k)).collect())
}

fn directional_vector(
    dirs: &[Vec<f64>],
    d: usize,
    mode: DirectionalMode,
    magnitude: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    match mode {
        DirectionalMode::Orthogonal => {
            // draw, project out the span, retry in the measure-zero event of
            // a vanishing residual
            for _ in 0..16 {
                let mut g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                for u in dirs {
                    let c = dot(&g, u);
                    for (gi, &ui) in g.iter_mut().zip(u) {
                        *gi -= c * ui;
                    }
                }
                let norm = norm2(&g);
                if norm > 1e-12 {
                    return Ok(g.iter().map(|v| v * magnitude / norm).collect());
                }
            }
            Err(Error::domain(
                "could not draw a direction orthogonal to the principal subspace",
            ))
        }
        DirectionalMode::Parallel => {
            let mut v = vec![0.0; d];
            for u in dirs {
                let c: f64 = StandardNormal.sample(rng);
                for (vi, &ui) in v.iter_mut().zip(u) {
                    *vi += c * ui;
                }
            }
            let norm = norm2(&v);
            if norm <= 1e-12 {
                return Err(Error::domain("degenerate parallel direction"));
            }
            Ok(v.iter().map(|x| x * magnitude / norm).collect())
        }
    }
}

/// Write the sample as CSV next to a `.meta` sidecar recording the model,
/// its parameters, the seed and the corrupted indices.
pub fn write_dataset_with_metadata(
    path: impl AsRef<std::path::Path>,
    sample: &RawSample,
    spec: &ContaminationSpec,
    outliers: &[usize],
) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    sample.write_csv(&mut f, true)?;
    let meta_path = path.with_extension(format!(
        "{}meta",
        path.extension()
            .map(|e| format!("{}.", e.to_string_lossy()))
            .unwrap_or_default()
    ));
    let mut m = std::io::BufWriter::new(std::fs::File::create(meta_path)?);
    use std::io::Write;
    writeln!(m, "n = {}", sample.len())?;
    writeln!(m, "d = {}", sample.dim())?;
    writeln!(m, "model = {}", model_name(&spec.model))?;
    match &spec.model {
        OutlierModel::Constant { shift } => {
            writeln!(m, "shift_first = {}", shift.first().copied().unwrap_or(0.0))?
        }
        OutlierModel::SphericalGaussian { cov, .. } => {
            writeln!(m, "cov_opnorm = {}", cov.operator_norm())?
        }
        OutlierModel::Amplify { beta } => writeln!(m, "beta = {beta}")?,
        OutlierModel::Directional {
            components,
            mode,
            magnitude,
        } => {
            writeln!(m, "components = {components}")?;
            writeln!(
                m,
                "mode = {}",
                match mode {
                    DirectionalMode::Orthogonal => "orthogonal",
                    DirectionalMode::Parallel => "parallel",
                }
            )?;
            writeln!(m, "magnitude = {magnitude}")?;
        }
    }
    writeln!(m, "num_outliers = {}", spec.num_outliers)?;
    writeln!(m, "seed = {}", spec.seed)?;
    writeln!(
        m,
        "outlier_indices = {}",
        outliers
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )?;
    Ok(())
}

pub fn model_name(model: &OutlierModel) -> &'static str {
    match model {
        OutlierModel::Constant { .. } => "constant",
        OutlierModel::SphericalGaussian { .. } => "spherical",
        OutlierModel::Amplify { .. } => "amplify",
        OutlierModel::Directional { .. } => "directional",
    }
}

/// Derive an unrelated stream from a master seed, for per-repetition
/// substreams.
pub fn substream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Convenience: next derived 64-bit seed from a substream.
pub fn derived_seed(rng: &mut ChaCha8Rng) -> u64 {
    rng.next_u64()
}
