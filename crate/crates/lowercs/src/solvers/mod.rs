//! Recovery algorithms: weighted ℓ1 basis-pursuit denoising and iterative
//! hard thresholding constrained to lower supports.
//!
//! The weighted problem min Σ ω_ν|z_ν| s.t. ‖g̃ − Az‖₂ ≤ η/√m is reduced to
//! unit-weight denoising by column rescaling: solve on A·diag(1/ω) and
//! divide the solution componentwise by ω, so both paths share one core
//! solver. Lower IHT iterates c ← H^ℓ_s(c + Aᵀ(g̃ − Ac)) from c⁰ = 0, where
//! the hard lower thresholding operator H^ℓ_s keeps the best lower support
//! of cardinality s, either exactly (enumeration) or greedily.

mod admm;
mod spg;

pub use spg::project_l1_ball;

use std::time::Instant;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::multiindex::{
    admissible_extensions, is_lower, IndexSet, LowerSetEnumerator, MultiIndex,
};
use crate::orthopoly::{BasisKind, WeightVector};
use crate::sensing::{CoefficientVector, SensingSystem};

/// Which ℓ1 weights a solve uses.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightMode {
    /// Unweighted ℓ1.
    Unit,
    /// The sup-norm weights ω_ν = ‖Ψ_ν‖_∞.
    SupNorm,
    /// Componentwise powers ω_ν^p of the sup-norm weights.
    SupNormPow(u32),
    /// A caller-supplied weight vector (entries ≥ 1).
    Custom(Vec<f64>),
}

impl WeightMode {
    pub fn label(&self) -> String {
        match self {
            WeightMode::Unit => "unit".into(),
            WeightMode::SupNorm => "sup_norm".into(),
            WeightMode::SupNormPow(p) => format!("sup_norm^{p}"),
            WeightMode::Custom(_) => "custom".into(),
        }
    }

    pub fn resolve(&self, kind: BasisKind, set: &IndexSet) -> Result<WeightVector> {
        match self {
            WeightMode::Unit => Ok(WeightVector::unit(set)),
            WeightMode::SupNorm => Ok(WeightVector::sup_norm(kind, set)),
            WeightMode::SupNormPow(p) => Ok(WeightVector::sup_norm_pow(kind, set, *p)),
            WeightMode::Custom(values) => WeightVector::custom(set, values.clone()),
        }
    }
}

/// Core algorithm behind the basis-pursuit solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BpdnAlgorithm {
    /// Pareto-curve root finding with spectral projected gradient inner
    /// solves; mirrors the behavior of the reference experiments.
    #[default]
    ParetoSpg,
    /// ADMM with an SVD-based residual-ball projection; slower but robust
    /// on ill-conditioned systems.
    Admm,
}

/// Tuning of the basis-pursuit solves.
#[derive(Debug, Clone)]
pub struct BPDNConfig {
    /// Residual-gap stopping tolerance.
    pub tolerance: f64,
    /// Cap on inner iterations across the whole solve.
    pub max_iterations: usize,
    /// Which weights to use when the caller asks the config to build them.
    pub weight_mode: WeightMode,
    pub algorithm: BpdnAlgorithm,
}

impl Default for BPDNConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 10_000,
            weight_mode: WeightMode::SupNorm,
            algorithm: BpdnAlgorithm::ParetoSpg,
        }
    }
}

impl BPDNConfig {
    fn validate(&self) -> Result<()> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Domain("max_iterations must be positive".into()));
        }
        if let WeightMode::Custom(values) = &self.weight_mode {
            if values.iter().any(|&w| !w.is_finite() || w < 1.0) {
                return Err(Error::Domain("custom weights must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Solver output: recovered coefficients plus the bookkeeping needed to
/// audit the run.
#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub coefficients: CoefficientVector,
    pub residual_norm: f64,
    /// Weighted ℓ1 value Σ ω_ν|c_ν| of the recovered vector.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub support: IndexSet,
    pub wall_time_s: f64,
}

impl RecoveryReport {
    /// CSV row `seed,m,N,s,weight_mode,residual,objective,error_vs_truth,iterations,wall_time_s`;
    /// optional fields print as empty cells.
    pub fn to_csv_row(
        &self,
        seed: Option<u64>,
        s: Option<usize>,
        weight_mode: &str,
        m: usize,
        n: usize,
        error_vs_truth: Option<f64>,
    ) -> String {
        let opt_u64 = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_usize = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_f64 = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{:e},{:e},{},{},{:.6}",
            opt_u64(seed),
            m,
            n,
            opt_usize(s),
            weight_mode,
            self.residual_norm,
            self.objective,
            opt_f64(error_vs_truth),
            self.iterations,
            self.wall_time_s
        )
    }
}

/// Solves min Σ ω_ν|z_ν| subject to ‖g̃ − Az‖₂ ≤ η/√m.
pub fn weighted_bpdn(
    system: &SensingSystem,
    weights: &WeightVector,
    config: &BPDNConfig,
) -> Result<RecoveryReport> {
    config.validate()?;
    if weights.index_set() != system.index_set() {
        return Err(Error::Shape(
            "weights are not keyed to the system index set".into(),
        ));
    }
    let started = Instant::now();
    let sigma = system.sigma();

    // rescale columns so the weighted problem becomes unit-weight
    let mut scaled = system.matrix().clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col /= weights.value(j);
    }

    let solution = match config.algorithm {
        BpdnAlgorithm::ParetoSpg => spg::pareto_bpdn(
            &scaled,
            system.observations(),
            sigma,
            config.tolerance,
            config.max_iterations,
        )?,
        BpdnAlgorithm::Admm => admm::admm_bpdn(
            &scaled,
            system.observations(),
            sigma,
            config.tolerance,
            config.max_iterations,
        )?,
    };

    let values: Vec<f64> = solution
        .u
        .iter()
        .enumerate()
        .map(|(j, &u)| u / weights.value(j))
        .collect();
    let coefficients = CoefficientVector::new(system.index_set().clone(), values)?;
    let objective = coefficients
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| weights.value(j) * v.abs())
        .sum();
    let residual_norm = system.residual_norm(&coefficients);
    let support = coefficients.support()?;

    Ok(RecoveryReport {
        coefficients,
        residual_norm,
        objective,
        iterations: solution.iterations,
        converged: solution.converged,
        support,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// How the hard lower thresholding operator picks its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    /// Enumerate every lower support of the target cardinality.
    Exact,
    /// Grow from the root, adding the admissible extension with the
    /// largest magnitude.
    Greedy,
    /// Exact for s ≤ 8 on universes of dimension ≤ 4, greedy otherwise.
    #[default]
    Auto,
}

impl ThresholdMode {
    fn concrete(self, s: usize, d: usize) -> ThresholdMode {
        match self {
            ThresholdMode::Auto => {
                if s <= 8 && d <= 4 {
                    ThresholdMode::Exact
                } else {
                    ThresholdMode::Greedy
                }
            }
            other => other,
        }
    }
}

/// Lower closure of the support of `z` inside its universe.
fn support_closure(z: &CoefficientVector) -> Result<IndexSet> {
    let d = z.index_set().dim();
    let mut members: Vec<MultiIndex> = Vec::new();
    let mut stack: Vec<MultiIndex> = z
        .index_set()
        .iter()
        .zip(z.values())
        .filter(|(_, &v)| v != 0.0)
        .map(|(nu, _)| nu.clone())
        .collect();
    let mut seen: std::collections::HashSet<MultiIndex> = stack.iter().cloned().collect();
    while let Some(nu) = stack.pop() {
        for k in 0..d {
            if let Some(pred) = nu.minus_unit(k) {
                if seen.insert(pred.clone()) {
                    stack.push(pred);
                }
            }
        }
        members.push(nu);
    }
    IndexSet::new(d, members)
}

/// Hard lower thresholding H^ℓ_s: the restriction of `z` to the lower
/// support of cardinality min(s, #universe) that retains the most squared
/// magnitude. Ties are broken by canonical set order.
pub fn lower_hard_threshold(
    z: &CoefficientVector,
    s: usize,
    mode: ThresholdMode,
) -> Result<CoefficientVector> {
    if s == 0 {
        return Err(Error::Domain("thresholding needs s >= 1".into()));
    }
    let universe = z.index_set();
    if !is_lower(universe) {
        return Err(Error::Precondition(
            "lower thresholding needs a lower universe".into(),
        ));
    }
    let target = s.min(universe.len());
    let closure = support_closure(z)?;
    if closure.len() <= target {
        return Ok(z.clone());
    }
    match mode.concrete(s, universe.dim()) {
        ThresholdMode::Exact => {
            let mut best: Option<(f64, IndexSet)> = None;
            for lam in LowerSetEnumerator::new(universe, target)? {
                let lam = lam?;
                let retained: f64 = lam
                    .iter()
                    .map(|nu| z.value_at(nu).unwrap_or(0.0).powi(2))
                    .sum();
                // strict improvement keeps the first (canonical) maximizer
                if best.as_ref().is_none_or(|(b, _)| retained > *b) {
                    best = Some((retained, lam));
                }
            }
            let (_, support) = best.expect("enumeration yields at least one set");
            Ok(z.restricted_to(&support))
        }
        ThresholdMode::Greedy => {
            let d = universe.dim();
            let mut support = IndexSet::new(d, vec![MultiIndex::zero(d)?])?;
            while support.len() < target {
                let ext = admissible_extensions(&support)?;
                let in_universe: Vec<&MultiIndex> =
                    ext.iter().filter(|nu| universe.contains(nu)).collect();
                if in_universe.is_empty() {
                    break;
                }
                // canonical order of ext breaks magnitude ties
                let chosen = in_universe
                    .into_iter()
                    .max_by(|a, b| {
                        let va = z.value_at(a).unwrap_or(0.0).abs();
                        let vb = z.value_at(b).unwrap_or(0.0).abs();
                        va.partial_cmp(&vb).unwrap().then_with(|| b.grlex_cmp(a))
                    })
                    .expect("nonempty");
                support = support.union(&IndexSet::new(d, vec![chosen.clone()])?)?;
            }
            Ok(z.restricted_to(&support))
        }
        ThresholdMode::Auto => unreachable!("concrete() resolves Auto"),
    }
}

/// Standard hard thresholding: keep the s largest-magnitude entries, ties
/// by canonical order.
pub fn standard_hard_threshold(z: &CoefficientVector, s: usize) -> CoefficientVector {
    let mut ranked: Vec<(usize, f64)> = z
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| (j, v.abs()))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let keep: std::collections::HashSet<usize> =
        ranked.into_iter().take(s).map(|(j, _)| j).collect();
    let values = z
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| if keep.contains(&j) { v } else { 0.0 })
        .collect();
    CoefficientVector::new(z.index_set().clone(), values).expect("same keying")
}

/// Options of the lower iterative hard thresholding run.
#[derive(Debug, Clone)]
pub struct IhtOptions {
    pub mode: ThresholdMode,
    pub max_iterations: usize,
    /// Stop when ‖c^{n+1} − c^n‖₂ falls below this.
    pub tolerance: f64,
    /// Gradient damping μ; Algorithm steps use μ = 1 unless configured.
    pub step: f64,
    /// Record every iterate (for trace inspection) in addition to the
    /// residual trace.
    pub record_iterates: bool,
}

impl Default for IhtOptions {
    fn default() -> Self {
        Self {
            mode: ThresholdMode::Auto,
            max_iterations: 500,
            tolerance: 1e-10,
            step: 1.0,
            record_iterates: false,
        }
    }
}

/// Lower IHT output: the recovery report plus per-iteration traces.
#[derive(Debug, Clone)]
pub struct IhtReport {
    pub report: RecoveryReport,
    /// ‖g̃ − A c^n‖₂ after every iteration.
    pub residual_trace: Vec<f64>,
    pub iterates: Option<Vec<CoefficientVector>>,
}

/// Iterates c^{n+1} = H^ℓ_s(c^n + μ Aᵀ(g̃ − A c^n)) from c⁰ = 0.
pub fn lower_iht(system: &SensingSystem, s: usize, opts: &IhtOptions) -> Result<IhtReport> {
    if s == 0 {
        return Err(Error::Domain("lower IHT needs s >= 1".into()));
    }
    if !opts.step.is_finite() || opts.step <= 0.0 || opts.step > 1.0 {
        return Err(Error::Domain("step must lie in (0, 1]".into()));
    }
    let started = Instant::now();
    let a = system.matrix();
    let b = system.observations();
    let set = system.index_set().clone();

    let mut c = DVector::<f64>::zeros(set.len());
    let mut residual = b.clone();
    let mut residual_trace = Vec::new();
    let mut iterates = opts.record_iterates.then(Vec::new);
    let mut min_residual = residual.norm();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iterations {
        iterations += 1;
        let v = &c + opts.step * a.tr_mul(&residual);
        let v_coeffs = CoefficientVector::new(set.clone(), v.iter().copied().collect())?;
        let thresholded = lower_hard_threshold(&v_coeffs, s, opts.mode)?;
        let c_next = DVector::from_column_slice(thresholded.values());
        residual = b - a * &c_next;
        let res_norm = residual.norm();
        residual_trace.push(res_norm);
        if let Some(tr) = iterates.as_mut() {
            tr.push(thresholded.clone());
        }
        let diff = (&c_next - &c).norm();
        c = c_next;
        if diff <= opts.tolerance {
            converged = true;
            break;
        }
        if res_norm > 10.0 * min_residual && iterations > 3 {
            converged = false;
            break;
        }
        min_residual = min_residual.min(res_norm);
    }

    let coefficients = CoefficientVector::new(set, c.iter().copied().collect())?;
    let support = coefficients.support()?;
    let objective = coefficients.values().iter().map(|v| v.abs()).sum();
    let residual_norm = system.residual_norm(&coefficients);
    Ok(IhtReport {
        report: RecoveryReport {
            coefficients,
            residual_norm,
            objective,
            iterations,
            converged,
            support,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
        residual_trace,
        iterates,
    })
}
