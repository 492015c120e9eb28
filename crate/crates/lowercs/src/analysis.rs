//! Diagnostic quantities: sample-complexity calculators, empirical
//! restricted-isometry constants, best lower s-term approximations, the
//! smoothness parameter λ and the tail inequality checker.
//!
//! The sample-count bounds evaluate the sufficient conditions verbatim,
//! with Θ²s driving the standard RIP and K(s) the lower RIP. They carry
//! explicit constants (2⁶e, 2⁵, 40) that produce astronomically large m at
//! desk scale, so they are calculator outputs and plot overlays, never
//! runtime gates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multiindex::{
    admissible_extensions, is_lower, IndexSet, LowerSetEnumerator, MultiIndex,
};
use crate::orthopoly::{k_of_s, weight, BasisKind, WeightVector};
use crate::sensing::{CoefficientVector, SensingSystem};

/// Inputs of the sufficient-sample-count bounds.
#[derive(Debug, Clone, Copy)]
pub struct ComplexityQuery {
    /// Θ²s for the standard bound, K(s) for the lower bound.
    pub theta_sq_s_or_ks: f64,
    /// Isometry target δ ∈ (0, 1/13).
    pub delta: f64,
    /// Failure probability γ ∈ (0, 1).
    pub gamma: f64,
    /// Truncation size N.
    pub n: usize,
}

impl ComplexityQuery {
    fn validate(&self) -> Result<()> {
        if !self.theta_sq_s_or_ks.is_finite() || self.theta_sq_s_or_ks <= 0.0 {
            return Err(Error::Domain("the K/Θ²s driver must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0 / 13.0) {
            return Err(Error::Domain(format!(
                "delta must lie in (0, 1/13), got {}",
                self.delta
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Domain(format!(
                "gamma must lie in (0,1), got {}",
                self.gamma
            )));
        }
        if self.n == 0 {
            return Err(Error::Domain("N must be positive".into()));
        }
        Ok(())
    }
}

/// Sufficient sample count for the standard RIP:
/// m ≥ 2⁶e (T/δ²) log(T/δ²) max{ (2⁵/δ⁴) log(40 (T/δ²) log(T/δ²)) log(4N),
/// (1/δ) log(log(T/δ²)/(γδ)) } with T = Θ²s.
pub fn sample_bound_standard(q: &ComplexityQuery) -> Result<f64> {
    q.validate()?;
    let t = q.theta_sq_s_or_ks / (q.delta * q.delta);
    let log_t = t.ln();
    let first = 32.0 / q.delta.powi(4) * (40.0 * t * log_t).ln() * (4.0 * q.n as f64).ln();
    let second = (1.0 / q.delta) * (log_t / (q.gamma * q.delta)).ln();
    Ok(64.0 * std::f64::consts::E * t * log_t * first.max(second))
}

/// The lower-RIP variant: identical formula shape with K(s) in the driver.
pub fn sample_bound_lower(q: &ComplexityQuery) -> Result<f64> {
    sample_bound_standard(q)
}

/// Which family of supports an empirical RIP sweep examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RipMode {
    /// All supports of cardinality ≤ s.
    Standard,
    /// Lower supports of cardinality ≤ s.
    LowerCardinality,
    /// Supports with K(support) ≤ K(s), any cardinality.
    KConstrained,
}

impl RipMode {
    pub fn label(&self) -> &'static str {
        match self {
            RipMode::Standard => "standard",
            RipMode::LowerCardinality => "lower",
            RipMode::KConstrained => "k_constrained",
        }
    }
}

/// Result of an exact extremal-eigenvalue sweep.
#[derive(Debug, Clone, Copy)]
pub struct RIPEstimate {
    pub delta_hat: f64,
    pub mode: RipMode,
    pub supports_examined: usize,
}

fn delta_of_support(system: &SensingSystem, support: &[usize]) -> f64 {
    let sub = system.matrix().select_columns(support.iter());
    let svd = sub.svd(false, false);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let smin = if support.len() > system.rows() {
        0.0
    } else {
        smin
    };
    (smax * smax - 1.0).abs().max((1.0 - smin * smin).abs())
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// All index combinations of size k from 0..n, lexicographic.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return;
    }
    loop {
        f(&idx);
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact empirical RIP constant over the enumerated support family.
pub fn empirical_rip(
    system: &SensingSystem,
    s: usize,
    mode: RipMode,
    budget: Option<usize>,
) -> Result<RIPEstimate> {
    if s == 0 {
        return Err(Error::Domain("empirical RIP needs s >= 1".into()));
    }
    let budget = budget.unwrap_or(crate::multiindex::DEFAULT_ENUMERATION_BUDGET);
    let n = system.cols();
    let mut supports: Vec<Vec<usize>> = Vec::new();

    match mode {
        RipMode::Standard => {
            let mut total = 0usize;
            for c in 1..=s.min(n) {
                let add =
                    binomial(n, c).ok_or_else(|| Error::Size("support count overflows".into()))?;
                total = total
                    .checked_add(add)
                    .ok_or_else(|| Error::Size("support count overflows".into()))?;
            }
            if total > budget {
                return Err(Error::Size(format!(
                    "standard RIP sweep needs {total} supports, budget is {budget}"
                )));
            }
            for c in 1..=s.min(n) {
                for_each_combination(n, c, |comb| supports.push(comb.to_vec()));
            }
        }
        RipMode::LowerCardinality => {
            let universe = system.index_set();
            if !is_lower(universe) {
                return Err(Error::Precondition(
                    "lower RIP sweep needs a lower index set".into(),
                ));
            }
            for c in 1..=s.min(n) {
                for lam in LowerSetEnumerator::new(universe, c)?.with_budget(budget) {
                    let lam = lam?;
                    let positions: Vec<usize> = lam
                        .iter()
                        .map(|nu| universe.position(nu).expect("subset of universe"))
                        .collect();
                    supports.push(positions);
                }
            }
        }
        RipMode::KConstrained => {
            let d = system.index_set().dim();
            let k_budget = k_of_s(system.kind(), s, d, Some(budget))?;
            let w_sq: Vec<f64> = system
                .index_set()
                .iter()
                .map(|nu| weight(system.kind(), nu).powi(2))
                .collect();
            let mut current: Vec<usize> = Vec::new();
            branch_k_supports(&w_sq, k_budget, 0, 0.0, &mut current, &mut supports, budget)?;
        }
    }

    if supports.is_empty() {
        return Err(Error::Size("no supports to examine".into()));
    }
    let supports_examined = supports.len();
    let delta_hat = supports
        .par_iter()
        .map(|sup| delta_of_support(system, sup))
        .reduce(|| 0.0, f64::max);
    Ok(RIPEstimate {
        delta_hat,
        mode,
        supports_examined,
    })
}

fn branch_k_supports(
    w_sq: &[f64],
    k_budget: f64,
    next: usize,
    acc: f64,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    budget: usize,
) -> Result<()> {
    if !current.is_empty() {
        if out.len() >= budget {
            return Err(Error::Size(format!(
                "K-constrained sweep exceeded the budget of {budget} supports"
            )));
        }
        out.push(current.clone());
    }
    for j in next..w_sq.len() {
        // every weight is >= 1, so the running sum prunes early
        if acc + w_sq[j] <= k_budget + 1e-12 {
            current.push(j);
            branch_k_supports(w_sq, k_budget, j + 1, acc + w_sq[j], current, out, budget)?;
            current.pop();
        }
    }
    Ok(())
}

/// Norm used by the best lower s-term search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxNorm {
    Ell2,
    WeightedEll1,
}

/// Best lower s-term result: the optimal support, the approximation error
/// in the requested norm, and whether the greedy fallback was used.
#[derive(Debug, Clone)]
pub struct BestLowerTerm {
    pub support: IndexSet,
    pub error: f64,
    pub greedy_fallback: bool,
}

/// Finds Λ* minimizing ‖c − c_Λ‖ over lower Λ of cardinality ≤ s inside
/// the universe of `c`, exactly via enumeration; the out-of-universe tail
/// is not included. Falls back to the greedy support when the enumeration
/// budget is exceeded.
pub fn best_lower_s_term(
    c: &CoefficientVector,
    s: usize,
    norm: ApproxNorm,
    weights: &WeightVector,
    budget: Option<usize>,
) -> Result<BestLowerTerm> {
    if s == 0 {
        return Err(Error::Domain("best lower s-term needs s >= 1".into()));
    }
    let universe = c.index_set();
    if !is_lower(universe) {
        return Err(Error::Precondition("universe must be lower".into()));
    }
    if weights.index_set() != universe {
        return Err(Error::Shape("weights are not keyed to the universe".into()));
    }
    let mass = |nu: &MultiIndex| -> f64 {
        let v = c.value_at(nu).unwrap_or(0.0);
        match norm {
            ApproxNorm::Ell2 => v * v,
            ApproxNorm::WeightedEll1 => weights.value_at(nu).unwrap_or(1.0) * v.abs(),
        }
    };
    let total: f64 = universe.iter().map(&mass).sum();
    let target = s.min(universe.len());

    let exact = || -> Result<IndexSet> {
        let mut best: Option<(f64, IndexSet)> = None;
        for lam in LowerSetEnumerator::new(universe, target)?
            .with_budget(budget.unwrap_or(crate::multiindex::DEFAULT_ENUMERATION_BUDGET))
        {
            let lam = lam?;
            let retained: f64 = lam.iter().map(&mass).sum();
            if best.as_ref().is_none_or(|(b, _)| retained > *b) {
                best = Some((retained, lam));
            }
        }
        Ok(best.expect("enumeration yields at least one set").1)
    };

    let (support, greedy_fallback) = match exact() {
        Ok(sup) => (sup, false),
        Err(Error::Size(_)) => {
            let d = universe.dim();
            let mut sup = IndexSet::new(d, vec![MultiIndex::zero(d)?])?;
            while sup.len() < target {
                let ext = admissible_extensions(&sup)?;
                let cands: Vec<&MultiIndex> =
                    ext.iter().filter(|nu| universe.contains(nu)).collect();
                if cands.is_empty() {
                    break;
                }
                let chosen = cands
                    .into_iter()
                    .max_by(|a, b| {
                        mass(a)
                            .partial_cmp(&mass(b))
                            .unwrap()
                            .then_with(|| b.grlex_cmp(a))
                    })
                    .expect("nonempty");
                sup = sup.union(&IndexSet::new(d, vec![chosen.clone()])?)?;
            }
            (sup, true)
        }
        Err(e) => return Err(e),
    };

    let retained: f64 = support.iter().map(&mass).sum();
    let error = match norm {
        ApproxNorm::Ell2 => (total - retained).max(0.0).sqrt(),
        ApproxNorm::WeightedEll1 => (total - retained).max(0.0),
    };
    Ok(BestLowerTerm {
        support,
        error,
        greedy_fallback,
    })
}

/// The smoothness parameter λ = max(0, tail_ratio_max / r − 1), where r is
/// the largest attainable min_{ν∈J̃} |c_ν|/ω_ν over J̃ ⊆ H_s with
/// K(J̃) ≥ 2K(s). The maximizing J̃ is the greedy prefix of the members
/// sorted by ratio descending, accumulated until Σω² ≥ 2K(s).
pub fn lambda_parameter(
    c_inside: &CoefficientVector,
    tail_ratio_max: f64,
    kind: BasisKind,
    s: usize,
    budget: Option<usize>,
) -> Result<f64> {
    if tail_ratio_max < 0.0 {
        return Err(Error::Domain("tail ratio must be nonnegative".into()));
    }
    if tail_ratio_max == 0.0 {
        return Ok(0.0);
    }
    let d = c_inside.index_set().dim();
    let two_ks = 2.0 * k_of_s(kind, s, d, budget)?;
    let mut ratios: Vec<(f64, f64)> = c_inside
        .index_set()
        .iter()
        .zip(c_inside.values())
        .map(|(nu, &v)| {
            let w = weight(kind, nu);
            (v.abs() / w, w * w)
        })
        .collect();
    ratios.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite ratios"));
    let mut acc = 0.0;
    let mut r = None;
    for (ratio, w_sq) in ratios {
        acc += w_sq;
        if acc >= two_ks {
            r = Some(ratio);
            break;
        }
    }
    let r = r.ok_or_else(|| {
        Error::Domain(format!(
            "the index set cannot reach K(J̃) ≥ 2K(s) = {two_ks}"
        ))
    })?;
    if r == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((tail_ratio_max / r - 1.0).max(0.0))
}

/// Outcome of the tail inequality
/// ‖c_{J^c}‖₂ ≤ ‖c_{J^c}‖_{ω,1}/√K(s) + √K(s)·max |c_ν|/ω_ν.
#[derive(Debug, Clone, Copy)]
pub struct TailCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs.
    pub slack: f64,
}

/// Evaluates both sides of the tail inequality on the explicit complement
/// coefficients. Intended for property tests, never as a runtime guard.
pub fn tail_inequality_check(
    c: &CoefficientVector,
    complement_set: &IndexSet,
    kind: BasisKind,
    s: usize,
    budget: Option<usize>,
) -> Result<TailCheck> {
    let ks = k_of_s(kind, s, complement_set.dim(), budget)?;
    let mut l2_sq = 0.0;
    let mut w1 = 0.0;
    let mut max_ratio: f64 = 0.0;
    for nu in complement_set {
        let v = c
            .value_at(nu)
            .ok_or_else(|| Error::Precondition(format!("complement index {nu} missing from c")))?;
        let w = weight(kind, nu);
        l2_sq += v * v;
        w1 += w * v.abs();
        max_ratio = max_ratio.max(v.abs() / w);
    }
    let lhs = l2_sq.sqrt();
    let rhs = w1 / ks.sqrt() + ks.sqrt() * max_ratio;
    Ok(TailCheck {
        holds: lhs <= rhs + 1e-12 * rhs.max(1.0),
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}
