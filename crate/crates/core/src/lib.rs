//! Robust estimation of low-rank covariance matrices from contaminated or
//! heavy-tailed samples.
//!
//! The estimator minimizes a nuclear-norm-penalized matrix Huber loss over all
//! ordered pairwise differences of the observations, via stochastic proximal
//! gradient descent. Iterates are kept in spectral form and updated with a
//! secular-equation rank-one eigensystem update, so each step avoids a full
//! re-decomposition. A benchmark harness reproduces the adversarial
//! contamination and heavy-tailed experiments end to end.

pub mod error;
pub mod matrix;
pub mod eigen;
pub mod contamination;
pub mod estimator;
pub mod experiment;
pub mod huber;
pub mod rank_one;
pub mod sample;
pub mod secular;
pub mod truncation;
pub mod tuning;

pub use contamination::{ContaminationSpec, GroundTruth, OutlierModel};
pub use eigen::SpectralDecomposition;
pub use error::{Error, Result};
pub use estimator::{pgd_estimate, spgd_estimate, EstimatorConfig, IterationTrace, StepSchedule};
pub use experiment::{run_experiment, ExperimentConfig, RepetitionRecord, SummaryStats};
pub use matrix::{frobenius_inner, Matrix, SymmetricMatrix};
pub use rank_one::{rank_one_update, RankOneConfig};
pub use sample::{pairwise_transform, sample_covariance, PairwiseSample, RawSample};
