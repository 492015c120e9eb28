//! Orthonormal tensor Legendre and Chebyshev bases.
//!
//! Legendre polynomials are orthonormal with respect to the uniform
//! probability measure Π_k dy_k/2 on [-1,1]^d, Chebyshev with respect to
//! the product arcsine measure Π_k dy_k/(π√(1-y_k²)). Both families attain
//! their supremum at (1,…,1), so the sup-norm weights have closed forms
//!
//! * ω_L(ν) = Π_k √(2ν_k+1),
//! * ω_T(ν) = 2^{‖ν‖₀/2}  (squared weight 2^{‖ν‖₀}),
//!
//! and K(Λ) = ‖Σ_{ν∈Λ}|Ψ_ν|²‖_∞ reduces to Σ_{ν∈Λ} ω_ν².

use crate::error::{Error, Result};
use crate::multiindex::{enumerate_lower_sets, hyperbolic_cross, IndexSet, MultiIndex};

/// Degrees above this cap are rejected; the experiments here never exceed ~32.
pub const MAX_DEGREE: u32 = 512;

/// The two supported orthonormal polynomial families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// Orthonormal Legendre, uniform probability measure on [-1,1].
    Legendre,
    /// Orthonormal Chebyshev (first kind), arcsine measure on [-1,1].
    Chebyshev,
}

impl BasisKind {
    pub fn label(&self) -> &'static str {
        match self {
            BasisKind::Legendre => "legendre",
            BasisKind::Chebyshev => "chebyshev",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legendre" | "l" => Ok(BasisKind::Legendre),
            "chebyshev" | "t" | "c" => Ok(BasisKind::Chebyshev),
            other => Err(Error::Usage(format!("unknown basis kind '{other}'"))),
        }
    }
}

/// Evaluates the degree-`n` orthonormal univariate polynomial at `y`.
///
/// Legendre runs the classical three-term recurrence on P_n and rescales
/// by √(2n+1); Chebyshev returns 1 for n = 0 and √2·cos(n·arccos y) above.
pub fn eval_1d(kind: BasisKind, degree: u32, y: f64) -> Result<f64> {
    check_point(y)?;
    check_degree(degree)?;
    Ok(eval_1d_unchecked(kind, degree, y))
}

fn check_point(y: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!(
            "evaluation point {y} outside [-1,1]"
        )));
    }
    Ok(())
}

fn check_degree(degree: u32) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::Domain(format!(
            "degree {degree} exceeds the supported cap {MAX_DEGREE}"
        )));
    }
    Ok(())
}

fn eval_1d_unchecked(kind: BasisKind, degree: u32, y: f64) -> f64 {
    match kind {
        BasisKind::Legendre => legendre_classical(degree, y) * ((2 * degree + 1) as f64).sqrt(),
        BasisKind::Chebyshev => {
            if degree == 0 {
                1.0
            } else {
                std::f64::consts::SQRT_2 * (degree as f64 * y.acos()).cos()
            }
        }
    }
}

/// Classical (unnormalized) Legendre P_n via the three-term recurrence.
fn legendre_classical(n: u32, y: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => y,
        _ => {
            let mut p_prev = 1.0;
            let mut p_curr = y;
            for k in 1..n {
                let kf = k as f64;
                let p_next = ((2.0 * kf + 1.0) * y * p_curr - kf * p_prev) / (kf + 1.0);
                p_prev = p_curr;
                p_curr = p_next;
            }
            p_curr
        }
    }
}

/// Fills `out[n] = Ψ_n(y)` for n = 0..=max_degree in one recurrence sweep.
pub(crate) fn eval_all_1d(kind: BasisKind, max_degree: u32, y: f64, out: &mut Vec<f64>) {
    out.clear();
    match kind {
        BasisKind::Legendre => {
            out.push(1.0);
            if max_degree >= 1 {
                out.push(y);
            }
            for k in 1..max_degree {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * y * out[k as usize] - kf * out[(k - 1) as usize])
                    / (kf + 1.0);
                out.push(next);
            }
            for (n, v) in out.iter_mut().enumerate() {
                *v *= ((2 * n + 1) as f64).sqrt();
            }
        }
        BasisKind::Chebyshev => {
            let theta = y.acos();
            out.push(1.0);
            for n in 1..=max_degree {
                out.push(std::f64::consts::SQRT_2 * (n as f64 * theta).cos());
            }
        }
    }
}

/// Tensor-product evaluation Ψ_ν(y) = Π_k Ψ_{ν_k}(y_k).
pub fn eval_tensor(kind: BasisKind, nu: &MultiIndex, y: &[f64]) -> Result<f64> {
    if nu.dim() != y.len() {
        return Err(Error::Shape(format!(
            "index dimension {} does not match point dimension {}",
            nu.dim(),
            y.len()
        )));
    }
    let mut prod = 1.0;
    for (k, &yk) in y.iter().enumerate() {
        prod *= eval_1d(kind, nu.degree(k), yk)?;
    }
    Ok(prod)
}

/// Sup-norm weight ω_ν = ‖Ψ_ν‖_∞.
pub fn weight(kind: BasisKind, nu: &MultiIndex) -> f64 {
    match kind {
        BasisKind::Legendre => nu
            .degrees()
            .iter()
            .map(|&a| ((2 * a + 1) as f64).sqrt())
            .product(),
        BasisKind::Chebyshev => 2f64.powi(nu.support_size() as i32).sqrt(),
    }
}

/// Squared sup-norm weight ω_ν², exact in integer arithmetic.
pub fn weight_sq_int(kind: BasisKind, nu: &MultiIndex) -> u128 {
    match kind {
        BasisKind::Legendre => nu.degrees().iter().map(|&a| (2 * a + 1) as u128).product(),
        BasisKind::Chebyshev => 1u128 << nu.support_size(),
    }
}

/// Positive weights keyed to an index set; the weight at the zero index is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    index_set: IndexSet,
    values: Vec<f64>,
}

impl WeightVector {
    /// Sup-norm weights ω_ν for every member of the set.
    pub fn sup_norm(kind: BasisKind, set: &IndexSet) -> Self {
        let values = set.iter().map(|nu| weight(kind, nu)).collect();
        Self {
            index_set: set.clone(),
            values,
        }
    }

    /// Componentwise power ω_ν^p of the sup-norm weights.
    pub fn sup_norm_pow(kind: BasisKind, set: &IndexSet, p: u32) -> Self {
        let values = set
            .iter()
            .map(|nu| weight(kind, nu).powi(p as i32))
            .collect();
        Self {
            index_set: set.clone(),
            values,
        }
    }

    /// Unit weights (unweighted ℓ1).
    pub fn unit(set: &IndexSet) -> Self {
        Self {
            index_set: set.clone(),
            values: vec![1.0; set.len()],
        }
    }

    /// Custom weights; every value must be ≥ 1.
    pub fn custom(set: &IndexSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != set.len() {
            return Err(Error::Shape(format!(
                "{} weights for a set of {} indices",
                values.len(),
                set.len()
            )));
        }
        if values.iter().any(|&w| !w.is_finite() || w < 1.0) {
            return Err(Error::Domain(
                "custom weights must be finite and >= 1".into(),
            ));
        }
        Ok(Self {
            index_set: set.clone(),
            values,
        })
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn value_at(&self, nu: &MultiIndex) -> Option<f64> {
        self.index_set.position(nu).map(|j| self.values[j])
    }
}

/// K(Λ) = Σ_{ν∈Λ} ω_ν², the sup norm of Σ_{ν∈Λ}|Ψ_ν|².
///
/// The closed form is valid for both supported bases because every Ψ_ν
/// attains its supremum at (1,…,1).
pub fn k_of_set(kind: BasisKind, set: &IndexSet) -> Result<f64> {
    Ok(k_of_set_int(kind, set)? as f64)
}

/// Integer-exact K(Λ); both K_T and K_L are integers.
pub fn k_of_set_int(kind: BasisKind, set: &IndexSet) -> Result<u128> {
    if set.is_empty() {
        return Err(Error::Domain("K of an empty set is undefined".into()));
    }
    Ok(set.iter().map(|nu| weight_sq_int(kind, nu)).sum())
}

/// K(s) = max of K(Λ) over lower subsets Λ ⊆ H_s with #Λ = s,
/// computed by exhaustive enumeration.
pub fn k_of_s(kind: BasisKind, s: usize, d: usize, budget: Option<usize>) -> Result<f64> {
    Ok(k_of_s_int(kind, s, d, budget)? as f64)
}

/// Integer-exact K(s).
pub fn k_of_s_int(kind: BasisKind, s: usize, d: usize, budget: Option<usize>) -> Result<u128> {
    if s == 0 {
        return Err(Error::Domain("K(s) needs s >= 1".into()));
    }
    let universe = hyperbolic_cross(s, d)?;
    let mut best = 0u128;
    for lam in enumerate_lower_sets(&universe, s.min(universe.len()), budget)? {
        best = best.max(k_of_set_int(kind, &lam)?);
    }
    Ok(best)
}

/// Closed-form upper bound on K(s): s^{log3/log2} for Chebyshev and s²
/// for Legendre. Sharp in high dimension; the usual fallback when the
/// exact enumeration behind [`k_of_s`] exceeds its budget.
pub fn k_of_s_upper_bound(kind: BasisKind, s: usize) -> f64 {
    let s = s as f64;
    match kind {
        BasisKind::Chebyshev => s.powf(3f64.ln() / 2f64.ln()),
        BasisKind::Legendre => s * s,
    }
}

/// Θ = max_{ν∈set} ω_ν, the uniform bound of the basis over the set.
pub fn theta(kind: BasisKind, set: &IndexSet) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::Domain("theta of an empty set is undefined".into()));
    }
    Ok(set
        .iter()
        .map(|nu| weight(kind, nu))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Integer-exact Θ².
pub fn theta_sq_int(kind: BasisKind, set: &IndexSet) -> Result<u128> {
    if set.is_empty() {
        return Err(Error::Domain("theta of an empty set is undefined".into()));
    }
    Ok(set
        .iter()
        .map(|nu| weight_sq_int(kind, nu))
        .max()
        .expect("nonempty"))
}

/// Exact comparison a ≤ b^{log 3 / log 2} for positive integers.
///
/// When b is a power of two the right side is the integer 3^e and the
/// comparison is done in integer arithmetic; otherwise the right side is
/// transcendental (Gelfond–Schneider), so the floating comparison has a
/// genuine margin and needs no tolerance.
pub fn le_pow_log2_3(a: u128, b: u128) -> bool {
    if b.is_power_of_two() {
        let e = b.trailing_zeros();
        return a <= 3u128.pow(e);
    }
    (a as f64).ln() * std::f64::consts::LN_2 <= (b as f64).ln() * 3f64.ln()
}
