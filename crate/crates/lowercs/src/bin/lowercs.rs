//! Command-line front end: exposes index-set enumeration, weights, the K
//! and Θ calculators, sample-count bounds, empirical RIP sweeps, the two
//! recovery solvers and the convergence-experiment harness.
//!
//! Exit codes: 0 success, 2 usage error, 3 numeric/size error, 4 a cell of
//! the experiment failed more than 20% of its trials. `LOWERCS_THREADS`
//! caps internal parallelism; absent means single-threaded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lowercs::analysis::{
    empirical_rip, sample_bound_lower, sample_bound_standard, ComplexityQuery, RipMode,
};
use lowercs::error::Error;
use lowercs::experiment::{parse_weight_mode, run_convergence, ExperimentConfig};
use lowercs::multiindex::{hyperbolic_cross, IndexSet, MultiIndex};
use lowercs::orthopoly::{k_of_s, theta, weight, BasisKind};
use lowercs::sensing::{build_system_from_coefficients, draw_samples, CoefficientVector};
use lowercs::solvers::{lower_iht, weighted_bpdn, BPDNConfig, IhtOptions, ThresholdMode};

#[derive(Parser)]
#[command(name = "lowercs", version, about = "Compressed sensing on lower sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed of every random draw in the subcommand.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the primary output to this path instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (csv is the only machine-readable one).
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Legendre,
    Chebyshev,
}

impl From<KindArg> for BasisKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Legendre => BasisKind::Legendre,
            KindArg::Chebyshev => BasisKind::Chebyshev,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the hyperbolic cross H_s in the line-oriented text format.
    Enumerate {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Print the sup-norm weight of one index, or of a whole cross.
    Weights {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Comma-separated degrees of a single index, e.g. 1,0,2.
        #[arg(long)]
        index: Option<String>,
        /// With --s/--d, dump a CSV of every weight in H_s.
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact K(s) by enumeration over lower sets.
    KOfS {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample-count bounds of the standard and lower RIP guarantees.
    Bounds {
        /// standard (driver Θ²s) or lower (driver K(s)).
        #[arg(long)]
        mode: String,
        /// The K(s) driver of the lower bound.
        #[arg(long, short = 'K')]
        k: Option<f64>,
        /// The Θ²s driver of the standard bound.
        #[arg(long)]
        theta_sq_s: Option<f64>,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, short = 'N')]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical RIP constant of a freshly sampled system.
    Rip {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Universe H_s carries the columns.
        #[arg(long)]
        s: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        /// Sparsity of the examined supports.
        #[arg(long)]
        sparsity: usize,
        /// standard | lower | k_constrained.
        #[arg(long, default_value = "lower")]
        mode: String,
        #[command(flatten)]
        common: Common,
    },
    /// Weighted ℓ1 recovery of a synthetic lower-sparse truth.
    Recover {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        /// Sparsity of the synthetic truth.
        #[arg(long)]
        sparsity: usize,
        #[arg(long, default_value = "sup_norm")]
        weights: String,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Lower iterative hard thresholding on the same synthetic problem.
    Iht {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        sparsity: usize,
        /// exact | greedy | auto.
        #[arg(long, default_value = "auto")]
        mode: String,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Convergence study from a flat JSON config file.
    Experiment {
        /// Path of the config document.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

/// `LOWERCS_THREADS` caps the rayon pool; absent means single-threaded.
fn configure_threads() {
    let threads = std::env::var("LOWERCS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(1)
        .max(1);
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
}

fn emit(common: &Common, text: &str) -> Result<(), Error> {
    if !matches!(common.format.as_str(), "csv" | "text") {
        return Err(Error::Usage(format!(
            "unknown output format '{}' (expected csv or text)",
            common.format
        )));
    }
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_index(text: &str) -> Result<MultiIndex, Error> {
    let degrees: Vec<u32> = text
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u32>()
                .map_err(|_| Error::Usage(format!("bad degree '{tok}'")))
        })
        .collect::<Result<_, _>>()?;
    MultiIndex::new(degrees)
}

fn parse_rip_mode(text: &str) -> Result<RipMode, Error> {
    match text {
        "standard" => Ok(RipMode::Standard),
        "lower" => Ok(RipMode::LowerCardinality),
        "k_constrained" => Ok(RipMode::KConstrained),
        other => Err(Error::Usage(format!("unknown rip mode '{other}'"))),
    }
}

/// Deterministic synthetic truth: a greedy random lower support of the
/// requested sparsity with unit-norm coefficients.
fn synthetic_truth(
    universe: &IndexSet,
    sparsity: usize,
    seed: u64,
) -> Result<CoefficientVector, Error> {
    use lowercs::multiindex::admissible_extensions;
    let d = universe.dim();
    let mut support = IndexSet::new(d, vec![MultiIndex::zero(d)?])?;
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    while support.len() < sparsity.min(universe.len()) {
        let ext = admissible_extensions(&support)?;
        let inside: Vec<&MultiIndex> = ext.iter().filter(|nu| universe.contains(nu)).collect();
        if inside.is_empty() {
            break;
        }
        let pick = (next() as usize) % inside.len();
        support = support.union(&IndexSet::new(d, vec![inside[pick].clone()])?)?;
    }
    let mut values = vec![0.0; universe.len()];
    let mut norm_sq = 0.0;
    for nu in &support {
        let v = (next() as f64 / u64::MAX as f64) * 2.0 - 1.0;
        let v = if v.abs() < 0.1 { 0.5 } else { v };
        values[universe.position(nu).unwrap()] = v;
        norm_sq += v * v;
    }
    let norm = norm_sq.sqrt();
    for v in &mut values {
        *v /= norm;
    }
    CoefficientVector::new(universe.clone(), values)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Enumerate { s, d, common } => {
            let set = hyperbolic_cross(s, d)?;
            emit(&common, &set.to_text())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Weights {
            kind,
            index,
            s,
            d,
            common,
        } => {
            let kind: BasisKind = kind.into();
            match (index, s, d) {
                (Some(text), _, _) => {
                    let nu = parse_index(&text)?;
                    emit(&common, &format!("{}\n", weight(kind, &nu)))?;
                }
                (None, Some(s), Some(d)) => {
                    let set = hyperbolic_cross(s, d)?;
                    let mut out = String::from("index,weight\n");
                    for nu in &set {
                        let degs: Vec<String> =
                            nu.degrees().iter().map(|a| a.to_string()).collect();
                        out.push_str(&format!("{},{}\n", degs.join(" "), weight(kind, nu)));
                    }
                    emit(&common, &out)?;
                }
                _ => {
                    return Err(Error::Usage(
                        "weights needs either --index or both --s and --d".into(),
                    ))
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::KOfS {
            kind,
            s,
            d,
            budget,
            common,
        } => {
            let kind: BasisKind = kind.into();
            let k = k_of_s(kind, s, d, budget)?;
            let th = theta(kind, &hyperbolic_cross(s, d)?)?;
            emit(
                &common,
                &format!("kind,s,d,k_of_s,theta\n{},{s},{d},{k},{th}\n", kind.label()),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds {
            mode,
            k,
            theta_sq_s,
            delta,
            gamma,
            n,
            common,
        } => {
            let driver = match (mode.as_str(), k, theta_sq_s) {
                ("lower", Some(k), _) => k,
                ("standard", _, Some(t)) => t,
                ("lower", None, _) => return Err(Error::Usage("lower mode needs --K".into())),
                ("standard", _, None) => {
                    return Err(Error::Usage("standard mode needs --theta-sq-s".into()))
                }
                (other, _, _) => {
                    return Err(Error::Usage(format!("unknown bounds mode '{other}'")))
                }
            };
            let query = ComplexityQuery {
                theta_sq_s_or_ks: driver,
                delta,
                gamma,
                n,
            };
            let bound = match mode.as_str() {
                "lower" => sample_bound_lower(&query)?,
                _ => sample_bound_standard(&query)?,
            };
            emit(
                &common,
                &format!("mode,driver,delta,gamma,N,bound\n{mode},{driver},{delta},{gamma},{n},{bound}\n"),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Rip {
            kind,
            s,
            d,
            m,
            sparsity,
            mode,
            common,
        } => {
            let kind: BasisKind = kind.into();
            let universe = hyperbolic_cross(s, d)?;
            let samples = draw_samples(kind, d, m, common.seed)?;
            let system = lowercs::sensing::build_system(kind, &universe, &samples, |_| 0.0, 0.0)?;
            let est = empirical_rip(&system, sparsity, parse_rip_mode(&mode)?, None)?;
            emit(
                &common,
                &format!(
                    "kind,s,d,m,sparsity,mode,delta_hat,supports\n{},{s},{d},{m},{sparsity},{},{},{}\n",
                    kind.label(),
                    est.mode.label(),
                    est.delta_hat,
                    est.supports_examined
                ),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Recover {
            kind,
            s,
            d,
            m,
            sparsity,
            weights,
            eta,
            common,
        } => {
            let kind: BasisKind = kind.into();
            let universe = hyperbolic_cross(s, d)?;
            let truth = synthetic_truth(&universe, sparsity, common.seed)?;
            let samples = draw_samples(kind, d, m, common.seed)?;
            let system = build_system_from_coefficients(kind, &samples, &truth, eta)?;
            let mode = parse_weight_mode(&weights)?;
            let weight_vec = mode.resolve(kind, &universe)?;
            let report = weighted_bpdn(&system, &weight_vec, &BPDNConfig::default())?;
            let err = report
                .coefficients
                .values()
                .iter()
                .zip(truth.values())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let header =
                "seed,m,N,s,weight_mode,residual,objective,error_vs_truth,iterations,wall_time_s\n";
            let row = report.to_csv_row(
                Some(common.seed),
                Some(sparsity),
                &mode.label(),
                system.rows(),
                system.cols(),
                Some(err),
            );
            emit(&common, &format!("{header}{row}\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Iht {
            kind,
            s,
            d,
            m,
            sparsity,
            mode,
            max_iter,
            tol,
            common,
        } => {
            let kind: BasisKind = kind.into();
            let universe = hyperbolic_cross(s, d)?;
            let truth = synthetic_truth(&universe, sparsity, common.seed)?;
            let samples = draw_samples(kind, d, m, common.seed)?;
            let system = build_system_from_coefficients(kind, &samples, &truth, 0.0)?;
            let threshold_mode = match mode.as_str() {
                "exact" => ThresholdMode::Exact,
                "greedy" => ThresholdMode::Greedy,
                "auto" => ThresholdMode::Auto,
                other => return Err(Error::Usage(format!("unknown mode '{other}'"))),
            };
            let result = lower_iht(
                &system,
                sparsity,
                &IhtOptions {
                    mode: threshold_mode,
                    max_iterations: max_iter,
                    tolerance: tol,
                    ..IhtOptions::default()
                },
            )?;
            let err = result
                .report
                .coefficients
                .values()
                .iter()
                .zip(truth.values())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let header =
                "seed,m,N,s,weight_mode,residual,objective,error_vs_truth,iterations,wall_time_s\n";
            let row = result.report.to_csv_row(
                Some(common.seed),
                Some(sparsity),
                "iht",
                system.rows(),
                system.cols(),
                Some(err),
            );
            emit(&common, &format!("{header}{row}\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment { config, common } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Usage(format!("cannot read {}: {e}", config.display())))?;
            let mut parsed = ExperimentConfig::from_json(&text)?;
            if common.seed != 0 {
                parsed.seed = common.seed;
            }
            let table = run_convergence(&parsed)?;
            emit(&common, &table.to_csv())?;
            if table.flagged {
                eprintln!("warning: some cells failed more than 20% of their trials");
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
