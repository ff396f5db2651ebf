//! Command line for robust covariance estimation: run single estimates,
//! reproduce the contamination benchmarks, generate corrupted datasets, and
//! self-test the rank-one eigensystem update.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robustcov::contamination::{
    apply_contamination, directional_magnitude, sample_gaussian, spiked_covariance,
    write_dataset_with_metadata, ContaminationSpec, DirectionalMode, GroundTruth, OutlierModel,
};
use robustcov::eigen::SpectralDecomposition;
use robustcov::estimator::{spgd_estimate, EstimatorConfig, StepSchedule};
use robustcov::experiment::{format_summary, run_experiment, write_records, Delimiter};
use robustcov::matrix::SymmetricMatrix;
use robustcov::rank_one::{rank_one_update, RankOneConfig};
use robustcov::sample::{pairwise_transform, RawSample};

use config::{apply_config_text, preset, ExperimentSpec, PRESET_NAMES};

#[derive(Parser)]
#[command(
    name = "robustcov",
    about = "Robust covariance estimation from contaminated samples",
    version
)]
struct Cli {
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Experiment config file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted, where applicable).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format for benchmark records.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Suppress the summary printout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a covariance matrix from one dataset.
    Estimate(EstimateArgs),
    /// Run a repeated contamination experiment and emit per-repetition records.
    Bench(BenchArgs),
    /// Generate a contaminated synthetic dataset (CSV plus .meta sidecar).
    Gen(GenArgs),
    /// Randomized self-test of the rank-one spectral update.
    #[command(name = "rank1-check")]
    Rank1Check(Rank1Args),
}

#[derive(Args)]
struct EstimateArgs {
    /// Input dataset: plain text (count line + one point per row) by default.
    #[arg(long)]
    input: PathBuf,
    /// Read the input as CSV instead of plain text.
    #[arg(long)]
    csv: bool,
    /// The CSV input carries a header row.
    #[arg(long)]
    has_header: bool,
    #[arg(long, default_value_t = 1.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda2: f64,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 1)]
    batch_size: usize,
    /// Use dense re-decompositions instead of rank-one spectral updates.
    #[arg(long)]
    dense: bool,
    /// Skip the full-gradient warm start.
    #[arg(long)]
    no_warm_start: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Built-in scenario: constant, spherical, erasure, directional,
    /// constant-small.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Repetition count override.
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "constant")]
    model: String,
    /// Points to corrupt.
    #[arg(long, short = 'J', default_value_t = 3)]
    num_outliers: usize,
    #[arg(long, default_value_t = 200)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Per-coordinate shift of the constant model.
    #[arg(long, default_value_t = 10.0)]
    shift: f64,
    /// Per-coordinate variance of the spherical model.
    #[arg(long, default_value_t = 100.0)]
    variance: f64,
    /// Amplification factor of the amplify model (-1 erases points).
    #[arg(long, default_value_t = -50.0, allow_hyphen_values = true)]
    beta: f64,
    /// Principal components spanning the directional subspace.
    #[arg(long, default_value_t = 1)]
    components: usize,
    #[arg(long, default_value = "orthogonal")]
    mode: String,
    /// Directional outlier magnitude (default 100 sqrt(d)).
    #[arg(long)]
    magnitude: Option<f64>,
}

#[derive(Args)]
struct Rank1Args {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 12)]
    max_dim: usize,
}

enum CliError {
    Config(String),
    Numeric(String),
}

impl From<robustcov::Error> for CliError {
    fn from(e: robustcov::Error) -> Self {
        use robustcov::Error::*;
        match e {
            EigenNoConvergence { .. }
            | SecularNoConvergence { .. }
            | SecularInconsistent { .. }
            | PoleCollision { .. }
            | Diverged { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit code for usage errors is 2; this tool reserves
            // 2 for numeric failures and reports usage problems as 1
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Estimate(args) => cmd_estimate(&cli, args),
        Command::Bench(args) => cmd_bench(&cli, args),
        Command::Gen(args) => cmd_gen(&cli, args),
        Command::Rank1Check(args) => cmd_rank1_check(&cli, args),
    }
}

fn cmd_estimate(cli: &Cli, args: &EstimateArgs) -> Result<(), CliError> {
    let file = std::fs::File::open(&args.input).map_err(|e| {
        CliError::Config(format!("cannot open {}: {e}", args.input.display()))
    })?;
    let mut reader = std::io::BufReader::new(file);
    let raw = if args.csv {
        RawSample::read_csv(&mut reader, args.has_header)?
    } else {
        RawSample::read_text(&mut reader)?
    };
    let pairs = pairwise_transform(raw)?;
    let cfg = EstimatorConfig {
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        iterations: args.iterations,
        batch_size: args.batch_size,
        step: StepSchedule::Diminishing(1.0),
        seed: cli.seed.unwrap_or(0),
        warm_start: !args.no_warm_start,
        spectral_path: !args.dense,
        ..EstimatorConfig::default()
    };
    let (s_hat, _) = spgd_estimate(&pairs, &cfg)?;
    match &cli.out {
        Some(path) => s_hat.save_text(path)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            s_hat.write_text(&mut stdout)?;
        }
    }
    Ok(())
}

fn resolve_spec(cli: &Cli, args: &BenchArgs) -> Result<ExperimentSpec, CliError> {
    let mut spec = match &args.preset {
        Some(name) => preset(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset {name:?}; available: {}",
                PRESET_NAMES.join(", ")
            ))
        })?,
        None => ExperimentSpec::default(),
    };
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        apply_config_text(&mut spec, &text).map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(reps) = args.reps {
        spec.repetitions = reps;
    }
    if let Some(seed) = cli.seed {
        spec.master_seed = seed;
    }
    Ok(spec)
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<(), CliError> {
    let spec = resolve_spec(cli, args)?;
    let cfg = spec
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let outcome = run_experiment(&cfg)?;
    let delim = match cli.format {
        Format::Csv => Delimiter::Comma,
        Format::Tsv => Delimiter::Tab,
    };
    match &cli.out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_records(&mut f, &outcome.records, delim)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            write_records(&mut stdout, &outcome.records, delim)?;
        }
    }
    if !cli.quiet {
        eprint!("{}", format_summary(&outcome.summary, cfg.metrics));
        if !outcome.failures.is_empty() {
            eprintln!(
                "{} repetition(s) failed; first: rep {} ({})",
                outcome.failures.len(),
                outcome.failures[0].rep_index,
                outcome.failures[0].message
            );
        }
    }
    Ok(())
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<(), CliError> {
    let out = cli
        .out
        .as_ref()
        .ok_or_else(|| CliError::Config("gen requires --out <path>".into()))?;
    let model = match args.model.as_str() {
        "constant" => OutlierModel::Constant {
            shift: vec![args.shift; args.dim],
        },
        "spherical" => OutlierModel::SphericalGaussian {
            mean: vec![0.0; args.dim],
            cov: SymmetricMatrix::identity(args.dim).scale(args.variance),
        },
        "amplify" => OutlierModel::Amplify { beta: args.beta },
        "directional" => OutlierModel::Directional {
            components: args.components,
            mode: match args.mode.as_str() {
                "orthogonal" => DirectionalMode::Orthogonal,
                "parallel" => DirectionalMode::Parallel,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown directional mode {other:?}"
                    )))
                }
            },
            magnitude: args.magnitude.unwrap_or_else(|| directional_magnitude(args.dim)),
        },
        other => return Err(CliError::Config(format!("unknown model {other:?}"))),
    };
    let seed = cli.seed.unwrap_or(0);
    let truth = GroundTruth::centered(spiked_covariance(args.dim))?;
    let clean = sample_gaussian(&truth, args.n, seed)?;
    let spec = ContaminationSpec {
        model,
        num_outliers: args.num_outliers,
        seed: seed.wrapping_add(1),
    };
    let (dirty, chosen) = apply_contamination(&clean, &spec)?;
    write_dataset_with_metadata(out, &dirty, &spec, &chosen)?;
    if !cli.quiet {
        eprintln!(
            "wrote {} points (dim {}, {} corrupted) to {}",
            dirty.len(),
            dirty.dim(),
            chosen.len(),
            out.display()
        );
    }
    Ok(())
}

fn cmd_rank1_check(cli: &Cli, args: &Rank1Args) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(42);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = RankOneConfig::default();
    let mut worst_eig: f64 = 0.0;
    let mut worst_resid: f64 = 0.0;
    for _ in 0..args.trials {
        let dim = rng.random_range(2..=args.max_dim.max(2));
        let base = SymmetricMatrix::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let dec = base.eigendecompose()?;
        let b: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rho: f64 = rng.random_range(-5.0..5.0);
        let updated = rank_one_update(&dec, rho, &b, &cfg)?;
        let target = dense_update(&dec, rho, &b);
        let oracle = target.eigendecompose()?;
        let spread = (oracle.max_eigval() - oracle.min_eigval()).max(1.0);
        for (a, e) in updated.eigvals().iter().zip(oracle.eigvals()) {
            worst_eig = worst_eig.max((a - e).abs() / spread);
        }
        let scale = target.frobenius_norm().max(1.0);
        worst_resid = worst_resid.max(updated.reconstruction_residual(&target) / scale);
    }
    let pass = worst_eig <= 1e-8 && worst_resid <= 1e-8;
    if !cli.quiet {
        let mut stdout = std::io::stdout().lock();
        writeln!(
            stdout,
            "rank1-check: {} trials, worst eigenvalue error {worst_eig:.3e}, \
             worst reconstruction {worst_resid:.3e} -> {}",
            args.trials,
            if pass { "PASS" } else { "FAIL" }
        )?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Numeric(format!(
            "rank-one update exceeded tolerance (eig {worst_eig:.3e}, resid {worst_resid:.3e})"
        )))
    }
}

fn dense_update(dec: &SpectralDecomposition, rho: f64, b: &[f64]) -> SymmetricMatrix {
    let n = dec.dim();
    let base = dec.reconstruct();
    SymmetricMatrix::from_fn(n, |i, j| base.get(i, j) + rho * b[i] * b[j])
}
