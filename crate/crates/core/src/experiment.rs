//! Experiment harness: run repeated generate-contaminate-estimate cycles,
//! compare against the sample covariance, and report relative errors.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::contamination::{
    apply_contamination, derived_seed, sample_gaussian, substream_rng, ContaminationSpec,
    GroundTruth,
};
use crate::error::{Error, Result};
use crate::estimator::{spgd_estimate, EstimatorConfig};
use crate::matrix::SymmetricMatrix;
use crate::sample::{pairwise_transform, sample_covariance};

/// Which norm the error numerator uses; the denominator is always the
/// operator norm of the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrNorm {
    Frobenius,
    Operator,
}

/// `||S - Sigma||_norm / ||Sigma||_op`.
pub fn rel_err(s: &SymmetricMatrix, truth_sigma: &SymmetricMatrix, norm: ErrNorm) -> Result<f64> {
    let diff = s.sub(truth_sigma)?;
    let denom = truth_sigma.operator_norm();
    if denom == 0.0 {
        return Err(Error::domain("relative error needs a nonzero truth"));
    }
    let num = match norm {
        ErrNorm::Frobenius => diff.frobenius_norm(),
        ErrNorm::Operator => diff.operator_norm(),
    };
    Ok(num / denom)
}

/// Which metric columns appear in the printed summary; the CSV schema always
/// carries all of them.
#[derive(Debug, Clone, Copy)]
pub struct MetricSelection {
    pub frobenius: bool,
    pub operator: bool,
}

impl Default for MetricSelection {
    fn default() -> Self {
        MetricSelection {
            frobenius: true,
            operator: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub truth: GroundTruth,
    pub sample_size: usize,
    pub contamination: ContaminationSpec,
    pub estimator: EstimatorConfig,
    pub repetitions: usize,
    pub master_seed: u64,
    pub metrics: MetricSelection,
}

#[derive(Debug, Clone, Copy)]
pub struct RepetitionRecord {
    pub rep_index: usize,
    pub relerr_frob_estimator: f64,
    pub relerr_op_estimator: f64,
    pub relerr_frob_sample_cov: f64,
    pub relerr_op_sample_cov: f64,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RepetitionFailure {
    pub rep_index: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
pub struct MetricSummary {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub std: f64,
}

#[derive(Debug, Clone)]
pub struct SummaryStats {
    pub relerr_frob_estimator: MetricSummary,
    pub relerr_op_estimator: MetricSummary,
    pub relerr_frob_sample_cov: MetricSummary,
    pub relerr_op_sample_cov: MetricSummary,
    pub wall_time_seconds: MetricSummary,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<RepetitionRecord>,
    pub failures: Vec<RepetitionFailure>,
    pub summary: SummaryStats,
}

/// Mean/max/min/std of one column. Values are sorted before accumulation, so
/// the result is invariant under record permutations; std uses the `n - 1`
/// divisor.
fn summarize_column(values: &[f64]) -> MetricSummary {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let sum: f64 = sorted.iter().sum();
    let mean = sum / n;
    let max = sorted[sorted.len() - 1];
    let min = sorted[0];
    let std = if sorted.len() > 1 {
        let ss: f64 = sorted.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MetricSummary {
        mean,
        max,
        min,
        std,
    }
}

/// Column-wise summary statistics over the records.
pub fn summarize(records: &[RepetitionRecord]) -> Result<SummaryStats> {
    if records.is_empty() {
        return Err(Error::domain("cannot summarize zero records"));
    }
    let col = |f: fn(&RepetitionRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    Ok(SummaryStats {
        relerr_frob_estimator: summarize_column(&col(|r| r.relerr_frob_estimator)),
        relerr_op_estimator: summarize_column(&col(|r| r.relerr_op_estimator)),
        relerr_frob_sample_cov: summarize_column(&col(|r| r.relerr_frob_sample_cov)),
        relerr_op_sample_cov: summarize_column(&col(|r| r.relerr_op_sample_cov)),
        wall_time_seconds: summarize_column(&col(|r| r.wall_time_seconds)),
    })
}

/// Run one repetition with seeds derived from `(master_seed, rep)`, so any
/// subset of repetitions can be reproduced independently.
pub fn run_single_repetition(cfg: &ExperimentConfig, rep: usize) -> Result<RepetitionRecord> {
    let start = Instant::now();
    let mut stream = substream_rng(cfg.master_seed, rep as u64);
    let gen_seed = derived_seed(&mut stream);
    let contam_seed = derived_seed(&mut stream);
    let est_seed = derived_seed(&mut stream);

    let clean = sample_gaussian(&cfg.truth, cfg.sample_size, gen_seed)?;
    let spec = ContaminationSpec {
        seed: contam_seed,
        ..cfg.contamination.clone()
    };
    let (data, _outliers) = apply_contamination(&clean, &spec)?;
    let scov = sample_covariance(&data)?;
    let pairs = pairwise_transform(data)?;
    let est_cfg = EstimatorConfig {
        seed: est_seed,
        ..cfg.estimator.clone()
    };
    let (s_hat, _) = spgd_estimate(&pairs, &est_cfg)?;

    let sigma = cfg.truth.sigma();
    Ok(RepetitionRecord {
        rep_index: rep,
        relerr_frob_estimator: rel_err(&s_hat, sigma, ErrNorm::Frobenius)?,
        relerr_op_estimator: rel_err(&s_hat, sigma, ErrNorm::Operator)?,
        relerr_frob_sample_cov: rel_err(&scov, sigma, ErrNorm::Frobenius)?,
        relerr_op_sample_cov: rel_err(&scov, sigma, ErrNorm::Operator)?,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Worker-pool size: `ROBUSTCOV_THREADS` when set and nonzero, otherwise the
/// library default (0 also means auto).
fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = std::env::var("ROBUSTCOV_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::domain(format!("could not build worker pool: {e}")))
}

/// Run all repetitions. Individual failures (e.g. divergence) are recorded
/// and skipped; they do not abort the batch. Records come back sorted by
/// repetition index regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    if cfg.repetitions == 0 {
        return Err(Error::domain("need at least one repetition"));
    }
    let pool = thread_pool()?;
    let results: Vec<(usize, Result<RepetitionRecord>)> = pool.install(|| {
        (0..cfg.repetitions)
            .into_par_iter()
            .map(|rep| (rep, run_single_repetition(cfg, rep)))
            .collect()
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (rep, res) in results {
        match res {
            Ok(r) => records.push(r),
            Err(e) => failures.push(RepetitionFailure {
                rep_index: rep,
                message: e.to_string(),
            }),
        }
    }
    records.sort_by_key(|r| r.rep_index);
    failures.sort_by_key(|f| f.rep_index);
    if records.is_empty() {
        return Err(Error::domain(format!(
            "all {} repetitions failed; first: {}",
            cfg.repetitions, failures[0].message
        )));
    }
    let summary = summarize(&records)?;
    Ok(ExperimentOutcome {
        records,
        failures,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Comma,
    Tab,
}

impl Delimiter {
    fn as_char(self) -> char {
        match self {
            Delimiter::Comma => ',',
            Delimiter::Tab => '\t',
        }
    }
}

pub const RECORD_HEADER: [&str; 6] = [
    "rep",
    "relerr_frob_est",
    "relerr_op_est",
    "relerr_frob_scov",
    "relerr_op_scov",
    "seconds",
];

/// Emit the per-repetition table. The error columns are bit-reproducible for
/// a fixed master seed; the seconds column is wall time and is not.
pub fn write_records<W: Write>(
    w: &mut W,
    records: &[RepetitionRecord],
    delim: Delimiter,
) -> Result<()> {
    let d = delim.as_char();
    writeln!(w, "{}", RECORD_HEADER.join(&d.to_string()))?;
    for r in records {
        writeln!(
            w,
            "{}{d}{}{d}{}{d}{}{d}{}{d}{}",
            r.rep_index,
            r.relerr_frob_estimator,
            r.relerr_op_estimator,
            r.relerr_frob_sample_cov,
            r.relerr_op_sample_cov,
            r.wall_time_seconds
        )?;
    }
    Ok(())
}

pub fn format_summary(summary: &SummaryStats, metrics: MetricSelection) -> String {
    let mut out = String::new();
    let mut push = |name: &str, m: &MetricSummary| {
        out.push_str(&format!(
            "{name}: mean {:.4}  max {:.4}  min {:.4}  std {:.4}\n",
            m.mean, m.max, m.min, m.std
        ));
    };
    if metrics.frobenius {
        push("relerr_frob_est ", &summary.relerr_frob_estimator);
        push("relerr_frob_scov", &summary.relerr_frob_sample_cov);
    }
    if metrics.operator {
        push("relerr_op_est   ", &summary.relerr_op_estimator);
        push("relerr_op_scov  ", &summary.relerr_op_sample_cov);
    }
    push("seconds         ", &summary.wall_time_seconds);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contamination::{spiked_covariance, OutlierModel};
    use crate::estimator::StepSchedule;

    fn tiny_config(reps: usize, outliers: usize, seed: u64) -> ExperimentConfig {
        let d = 6;
        ExperimentConfig {
            truth: GroundTruth::centered(spiked_covariance(d)).unwrap(),
            sample_size: 12,
            contamination: ContaminationSpec {
                model: OutlierModel::Constant {
                    shift: vec![100.0; d],
                },
                num_outliers: outliers,
                seed: 0,
            },
            estimator: EstimatorConfig {
                lambda1: 3.0,
                lambda2: 1.0,
                iterations: 60,
                batch_size: 1,
                step: StepSchedule::Diminishing(1.0),
                ..EstimatorConfig::default()
            },
            repetitions: reps,
            master_seed: seed,
            metrics: MetricSelection::default(),
        }
    }

    #[test]
    fn rel_err_basics() {
        let sigma = spiked_covariance(200);
        assert_eq!(rel_err(&sigma, &sigma, ErrNorm::Frobenius).unwrap(), 0.0);
        let zero = SymmetricMatrix::zeros(200);
        let op = rel_err(&zero, &sigma, ErrNorm::Operator).unwrap();
        assert!((op - 1.0).abs() < 1e-12);
        let frob = rel_err(&zero, &sigma, ErrNorm::Frobenius).unwrap();
        assert!((frob - 1.014790618797789).abs() < 1e-12);
        assert!(rel_err(&zero, &SymmetricMatrix::zeros(200), ErrNorm::Frobenius).is_err());
    }

    #[test]
    fn summarize_basics() {
        let rec = |v: f64| RepetitionRecord {
            rep_index: 0,
            relerr_frob_estimator: v,
            relerr_op_estimator: v,
            relerr_frob_sample_cov: v,
            relerr_op_sample_cov: v,
            wall_time_seconds: 0.0,
        };
        let one = summarize(&[rec(1.5)]).unwrap();
        assert_eq!(one.relerr_frob_estimator.mean, 1.5);
        assert_eq!(one.relerr_frob_estimator.max, 1.5);
        assert_eq!(one.relerr_frob_estimator.min, 1.5);
        assert_eq!(one.relerr_frob_estimator.std, 0.0);

        let two = summarize(&[rec(0.0), rec(2.0)]).unwrap();
        assert_eq!(two.relerr_frob_estimator.mean, 1.0);
        assert!((two.relerr_frob_estimator.std - 2.0_f64.sqrt()).abs() < 1e-15);

        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn summarize_matches_welford_and_permutation_invariant() {
        let mut rng_state = 12345u64;
        let mut next = || {
            // xorshift, test-local
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        let records: Vec<RepetitionRecord> = (0..200)
            .map(|i| RepetitionRecord {
                rep_index: i,
                relerr_frob_estimator: next(),
                relerr_op_estimator: next(),
                relerr_frob_sample_cov: next(),
                relerr_op_sample_cov: next(),
                wall_time_seconds: next(),
            })
            .collect();
        let s = summarize(&records).unwrap();
        // Welford second route
        let vals: Vec<f64> = records.iter().map(|r| r.relerr_frob_estimator).collect();
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (i, &v) in vals.iter().enumerate() {
            let delta = v - mean;
            mean += delta / (i as f64 + 1.0);
            m2 += delta * (v - mean);
        }
        let std = (m2 / (vals.len() as f64 - 1.0)).sqrt();
        assert!((s.relerr_frob_estimator.mean - mean).abs() < 1e-12);
        assert!((s.relerr_frob_estimator.std - std).abs() < 1e-12);

        let mut shuffled = records.clone();
        shuffled.reverse();
        shuffled.swap(3, 77);
        let s2 = summarize(&shuffled).unwrap();
        assert_eq!(s.relerr_frob_estimator.mean, s2.relerr_frob_estimator.mean);
        assert_eq!(s.relerr_frob_estimator.std, s2.relerr_frob_estimator.std);
    }

    #[test]
    fn clean_single_repetition_sanity() {
        // Penalties neutralized: lambda1 tiny so the prox barely shrinks,
        // lambda2 large so the Huber threshold exceeds every pair term and
        // the objective reduces to least squares. The minimizer is then the
        // pairwise sample covariance, so the estimator must track the sample
        // covariance closely.
        let mut cfg = tiny_config(1, 0, 99);
        cfg.estimator.lambda1 = 1e-3;
        cfg.estimator.lambda2 = 100.0;
        cfg.estimator.iterations = 200;
        cfg.estimator.batch_size = 16;
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert!(
            r.relerr_frob_estimator <= r.relerr_frob_sample_cov + 0.1,
            "estimator {} vs sample covariance {}",
            r.relerr_frob_estimator,
            r.relerr_frob_sample_cov
        );
    }

    #[test]
    fn experiment_is_reproducible_and_order_deterministic() {
        let cfg = tiny_config(6, 2, 7);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.rep_index, y.rep_index);
            assert_eq!(x.relerr_frob_estimator, y.relerr_frob_estimator);
            assert_eq!(x.relerr_op_sample_cov, y.relerr_op_sample_cov);
        }
        // single repetitions reproduce the batch entries
        let solo = run_single_repetition(&cfg, 3).unwrap();
        assert_eq!(
            solo.relerr_frob_estimator,
            a.records[3].relerr_frob_estimator
        );
    }

    #[test]
    fn constant_contamination_separates_sample_covariance_error() {
        // at the full experiment scale, 3 shifted points push the sample
        // covariance error above 50 while clean data stays below 3
        let d = 200;
        let truth = GroundTruth::centered(spiked_covariance(d)).unwrap();
        for seed in 0..20u64 {
            let clean =
                crate::contamination::sample_gaussian(&truth, 100, 31_000 + seed).unwrap();
            let clean_err = rel_err(
                &crate::sample::sample_covariance(&clean).unwrap(),
                truth.sigma(),
                ErrNorm::Frobenius,
            )
            .unwrap();
            assert!(clean_err < 3.0, "clean relerr {clean_err}");
            let spec = ContaminationSpec {
                model: OutlierModel::Constant {
                    shift: vec![10.0; d],
                },
                num_outliers: 3,
                seed: 77 + seed,
            };
            let (dirty, _) = crate::contamination::apply_contamination(&clean, &spec).unwrap();
            let dirty_err = rel_err(
                &crate::sample::sample_covariance(&dirty).unwrap(),
                truth.sigma(),
                ErrNorm::Frobenius,
            )
            .unwrap();
            assert!(dirty_err > 50.0, "contaminated relerr {dirty_err}");
        }
    }

    #[test]
    fn records_csv_schema() {
        let cfg = tiny_config(2, 1, 5);
        let out = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &out.records, Delimiter::Comma).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "rep,relerr_frob_est,relerr_op_est,relerr_frob_scov,relerr_op_scov,seconds"
        );
        assert_eq!(lines.count(), 2);
        let mut tsv = Vec::new();
        write_records(&mut tsv, &out.records, Delimiter::Tab).unwrap();
        assert!(String::from_utf8(tsv).unwrap().contains('\t'));
    }
}
