//! Quadrature matched to the orthogonalization measures.
//!
//! Three rules back [`crate::sensing::reference_coefficients`]:
//!
//! * tensorized Gauss for low dimension (d ≤ 4),
//! * a Smolyak combination rule over a downward-closed set of 1-d levels
//!   for moderate dimension (4 < d ≤ 16),
//! * a shifted-Halton quasi-Monte Carlo fallback with a reported standard
//!   error for anything larger.
//!
//! The Smolyak level set is built from the target index set: an n-point
//! Gauss rule is exact through degree 2n−1, so the level vector needed for
//! the integrand Ψ_ν × (degree-μ part of g) is l_k = ⌈(ν_k+μ_k+1)/2⌉. The
//! rule covers every ν in the target set and every g-degree μ with
//! |μ|₁ ≤ slack, which suits smooth integrands whose coefficients decay
//! multiplicatively across coordinates.

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::multiindex::IndexSet;
use crate::orthopoly::BasisKind;

/// Nodes and weights of an n-point Gauss rule for the probability measure
/// of `kind` on [-1,1]: uniform dy/2 (Legendre) or arcsine dy/(π√(1-y²))
/// (Chebyshev). Weights sum to 1.
pub fn gauss_rule_1d(kind: BasisKind, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Domain("gauss rule needs at least one node".into()));
    }
    match kind {
        BasisKind::Legendre => gauss_legendre(n),
        BasisKind::Chebyshev => {
            let mut nodes = Vec::with_capacity(n);
            for i in (1..=n).rev() {
                nodes.push(((2 * i - 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos());
            }
            Ok((nodes, vec![1.0 / n as f64; n]))
        }
    }
}

/// Gauss–Legendre nodes by Newton iteration on P_n, weights normalized to
/// the uniform probability measure.
fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (_, d2) = legendre_pair(n, x);
                dp = d2;
                break;
            }
        }
        // classical weight 2/((1-x²)P'²), divided by 2 for the probability measure
        let w = 1.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_pair(n, 0.0);
        weights[n / 2] = 1.0 / (d * d);
    }
    Ok((nodes, weights))
}

/// (P_n(x), P_n'(x)) via the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// How reference expansions are integrated.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    /// How many admissible-extension rings beyond the target set are also
    /// integrated, to estimate the weighted-ℓ1 tail surrogate.
    pub tail_rings: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::Auto,
            tail_rings: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub enum QuadratureRule {
    /// Pick by dimension: tensor for d ≤ 4, Smolyak for d ≤ 16, QMC beyond.
    Auto,
    /// Full tensor Gauss with a fixed 1-d node count.
    Tensor { nodes_1d: usize },
    /// Smolyak combination rule; `slack` is the total extra polynomial
    /// degree reserved for the smooth factor of the integrand.
    Smolyak { slack: u32 },
    /// Shifted Halton sequences; the spread across shifts yields a
    /// standard error.
    QuasiMonteCarlo {
        points: usize,
        shifts: usize,
        seed: u64,
    },
}

impl QuadratureRule {
    /// Resolves `Auto` against a target index set.
    pub fn resolve(&self, target: &IndexSet) -> QuadratureRule {
        match self {
            QuadratureRule::Auto => {
                let d = target.dim();
                if d <= 4 {
                    QuadratureRule::Tensor {
                        nodes_1d: target.max_degree() as usize + 8,
                    }
                } else if d <= 16 {
                    QuadratureRule::Smolyak { slack: 10 }
                } else {
                    QuadratureRule::QuasiMonteCarlo {
                        points: 1 << 16,
                        shifts: 8,
                        seed: 0,
                    }
                }
            }
            other => other.clone(),
        }
    }
}

/// A concrete quadrature: weighted points plus an optional stochastic
/// error indicator (QMC only).
pub struct QuadratureNodes {
    /// (weight, point) pairs; weights may be negative for Smolyak.
    pub nodes: Vec<(f64, Vec<f64>)>,
    /// Number of independent replicates folded into the weights (QMC
    /// shifts); 1 for deterministic rules.
    pub replicates: usize,
}

/// Builds the nodes of `rule` for dimension `d`, aiming at exactness on the
/// degrees of `target`.
pub fn build_nodes(
    kind: BasisKind,
    target: &IndexSet,
    rule: &QuadratureRule,
) -> Result<QuadratureNodes> {
    let d = target.dim();
    match rule.resolve(target) {
        QuadratureRule::Auto => unreachable!("resolve never returns Auto"),
        QuadratureRule::Tensor { nodes_1d } => tensor_nodes(kind, d, nodes_1d),
        QuadratureRule::Smolyak { slack } => smolyak_nodes(kind, target, slack),
        QuadratureRule::QuasiMonteCarlo {
            points,
            shifts,
            seed,
        } => qmc_nodes(kind, d, points, shifts, seed),
    }
}

fn tensor_nodes(kind: BasisKind, d: usize, n_1d: usize) -> Result<QuadratureNodes> {
    let total = n_1d
        .checked_pow(d as u32)
        .filter(|&t| t <= 200_000_000)
        .ok_or_else(|| Error::Size(format!("tensor grid {n_1d}^{d} exceeds the size cap")))?;
    let (x, w) = gauss_rule_1d(kind, n_1d)?;
    let mut nodes = Vec::with_capacity(total);
    let mut counter = vec![0usize; d];
    loop {
        let mut weight = 1.0;
        let mut point = Vec::with_capacity(d);
        for &c in &counter {
            weight *= w[c];
            point.push(x[c]);
        }
        nodes.push((weight, point));
        let mut k = 0;
        loop {
            if k == d {
                return Ok(QuadratureNodes {
                    nodes,
                    replicates: 1,
                });
            }
            counter[k] += 1;
            if counter[k] < n_1d {
                break;
            }
            counter[k] = 0;
            k += 1;
        }
    }
}

/// Extra degree in coordinate k still needed for level l to handle Ψ_ν
/// times a monomial factor: an l-point Gauss rule is exact through 2l−1.
fn level_deficit(level: &[u32], nu_degrees: &[u32]) -> u64 {
    level
        .iter()
        .zip(nu_degrees)
        .map(|(&l, &a)| (2 * (l as u64 - 1)).saturating_sub(a as u64))
        .sum()
}

fn level_in_set(level: &[u32], target: &IndexSet, slack: u32) -> bool {
    target
        .iter()
        .any(|nu| level_deficit(level, nu.degrees()) <= slack as u64)
}

/// Enumerates the downward-closed level set
/// L = { l ≥ 1 : min_{ν∈target} Σ_k max(0, 2(l_k−1) − ν_k) ≤ slack }.
fn enumerate_levels(target: &IndexSet, slack: u32) -> Vec<Vec<u32>> {
    let d = target.dim();
    let mut levels = Vec::new();
    let mut current = vec![1u32; d];
    enumerate_levels_rec(target, slack, 0, &mut current, &mut levels);
    levels
}

fn enumerate_levels_rec(
    target: &IndexSet,
    slack: u32,
    k: usize,
    current: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if k == current.len() {
        out.push(current.clone());
        return;
    }
    let mut l = 1u32;
    loop {
        current[k] = l;
        // membership is monotone in each coordinate, so the first failure
        // with the remaining coordinates at their minimum ends the scan
        if !level_in_set(current, target, slack) {
            break;
        }
        enumerate_levels_rec(target, slack, k + 1, current, out);
        l += 1;
    }
    current[k] = 1;
}

fn smolyak_nodes(kind: BasisKind, target: &IndexSet, slack: u32) -> Result<QuadratureNodes> {
    let d = target.dim();
    let levels = enumerate_levels(target, slack);
    let level_lookup: std::collections::HashSet<Vec<u32>> = levels.iter().cloned().collect();

    // combination coefficients c_l = Σ_{e∈{0,1}^d, l+e∈L} (−1)^{|e|}
    let mut combos: Vec<(i64, &Vec<u32>)> = Vec::new();
    for level in &levels {
        let mut coeff = 0i64;
        for mask in 0u32..(1 << d) {
            let mut shifted = level.clone();
            for (k, s) in shifted.iter_mut().enumerate() {
                if mask & (1 << k) != 0 {
                    *s += 1;
                }
            }
            if level_lookup.contains(&shifted) {
                coeff += if mask.count_ones().is_multiple_of(2) {
                    1
                } else {
                    -1
                };
            }
        }
        if coeff != 0 {
            combos.push((coeff, level));
        }
    }

    let max_level = levels
        .iter()
        .flat_map(|l| l.iter().copied())
        .max()
        .unwrap_or(1) as usize;
    let mut rules_1d = Vec::with_capacity(max_level + 1);
    rules_1d.push((vec![], vec![])); // level 0 unused
    for n in 1..=max_level {
        rules_1d.push(gauss_rule_1d(kind, n)?);
    }

    let mut nodes = Vec::new();
    for (coeff, level) in combos {
        let mut counter = vec![0usize; d];
        loop {
            let mut weight = coeff as f64;
            let mut point = Vec::with_capacity(d);
            for (k, &c) in counter.iter().enumerate() {
                let (x, w) = &rules_1d[level[k] as usize];
                weight *= w[c];
                point.push(x[c]);
            }
            nodes.push((weight, point));
            if nodes.len() > 200_000_000 {
                return Err(Error::Size("smolyak grid exceeds the size cap".into()));
            }
            let mut k = 0;
            loop {
                if k == d {
                    break;
                }
                counter[k] += 1;
                if counter[k] < level[k] as usize {
                    break;
                }
                counter[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
    }
    Ok(QuadratureNodes {
        nodes,
        replicates: 1,
    })
}

/// Halton sequence in `d` dimensions with random shifts, mapped to the
/// measure of `kind`. Weights are 1/(points·shifts) so the replicates can
/// also be split for a standard error.
fn qmc_nodes(
    kind: BasisKind,
    d: usize,
    points: usize,
    shifts: usize,
    seed: u64,
) -> Result<QuadratureNodes> {
    if points == 0 || shifts == 0 {
        return Err(Error::Domain(
            "qmc needs points >= 1 and shifts >= 1".into(),
        ));
    }
    let bases = first_primes(d);
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    use rand_core::SeedableRng;
    let mut nodes = Vec::with_capacity(points * shifts);
    let w = 1.0 / (points as f64 * shifts as f64);
    for _ in 0..shifts {
        let shift: Vec<f64> = (0..d).map(|_| unit_f64(&mut rng)).collect();
        for i in 0..points {
            let mut point = Vec::with_capacity(d);
            for k in 0..d {
                let u = (halton(i as u64 + 1, bases[k]) + shift[k]).fract();
                point.push(match kind {
                    BasisKind::Legendre => 2.0 * u - 1.0,
                    BasisKind::Chebyshev => (std::f64::consts::PI * u).cos(),
                });
            }
            nodes.push((w, point));
        }
    }
    Ok(QuadratureNodes {
        nodes,
        replicates: shifts,
    })
}

pub(crate) fn unit_f64(rng: &mut impl RngCore) -> f64 {
    // 53 uniform bits in [0,1)
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut cand = 2u64;
    while primes.len() < n {
        if primes.iter().all(|&p| !cand.is_multiple_of(p)) {
            primes.push(cand);
        }
        cand += 1;
    }
    primes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::{hyperbolic_cross, MultiIndex};
    use crate::orthopoly::eval_tensor;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        // probability measure: ∫ y^k dy/2 = 1/(k+1) for even k, 0 for odd
        let (x, w) = gauss_rule_1d(BasisKind::Legendre, 6).unwrap();
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        for k in 0..=11u32 {
            let val: f64 = x
                .iter()
                .zip(&w)
                .map(|(&xi, &wi)| wi * xi.powi(k as i32))
                .sum();
            let exact = if k % 2 == 0 {
                1.0 / (k as f64 + 1.0)
            } else {
                0.0
            };
            assert_abs_diff_eq!(val, exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn gauss_chebyshev_integrates_moments() {
        // ∫ y² dρ = 1/2 and ∫ y⁴ dρ = 3/8 for the arcsine measure
        let (x, w) = gauss_rule_1d(BasisKind::Chebyshev, 8).unwrap();
        let m2: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi * xi).sum();
        let m4: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(4)).sum();
        assert_abs_diff_eq!(m2, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(m4, 0.375, epsilon = 1e-14);
    }

    #[test]
    fn tensor_rule_is_orthonormal_on_target() {
        let target = hyperbolic_cross(4, 2).unwrap();
        let nodes = build_nodes(
            BasisKind::Legendre,
            &target,
            &QuadratureRule::Tensor { nodes_1d: 12 },
        )
        .unwrap();
        for a in target.iter() {
            for b in target.iter() {
                let acc: f64 = nodes
                    .nodes
                    .iter()
                    .map(|(w, y)| {
                        w * eval_tensor(BasisKind::Legendre, a, y).unwrap()
                            * eval_tensor(BasisKind::Legendre, b, y).unwrap()
                    })
                    .sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(acc, expect, epsilon = 1e-12);
            }
        }
    }

    /// The Smolyak rule must integrate Ψ_ν·Ψ_μ exactly whenever the joint
    /// degree fits the slack reserved for the smooth factor.
    #[test]
    fn smolyak_rule_is_orthonormal_on_target() {
        for kind in [BasisKind::Legendre, BasisKind::Chebyshev] {
            let target = hyperbolic_cross(6, 5).unwrap();
            let nodes = build_nodes(kind, &target, &QuadratureRule::Smolyak { slack: 6 }).unwrap();
            for a in target.iter() {
                for b in target.iter() {
                    if b.total_degree() > 5 {
                        continue;
                    }
                    let acc: f64 = nodes
                        .nodes
                        .iter()
                        .map(|(w, y)| {
                            w * eval_tensor(kind, a, y).unwrap() * eval_tensor(kind, b, y).unwrap()
                        })
                        .sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(acc, expect, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn smolyak_weights_sum_to_one() {
        let target = hyperbolic_cross(8, 6).unwrap();
        let nodes = build_nodes(
            BasisKind::Legendre,
            &target,
            &QuadratureRule::Smolyak { slack: 8 },
        )
        .unwrap();
        let total: f64 = nodes.nodes.iter().map(|(w, _)| w).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn qmc_estimates_simple_moment() {
        let target = hyperbolic_cross(2, 3).unwrap();
        let nodes = build_nodes(
            BasisKind::Legendre,
            &target,
            &QuadratureRule::QuasiMonteCarlo {
                points: 4096,
                shifts: 4,
                seed: 7,
            },
        )
        .unwrap();
        // ∫ (y1² + y2²+ y3²) dρ = 3·(1/3) = 1 under the uniform measure
        let acc: f64 = nodes
            .nodes
            .iter()
            .map(|(w, y)| w * y.iter().map(|v| v * v).sum::<f64>())
            .sum();
        assert!((acc - 1.0).abs() < 0.01, "qmc moment {acc}");
    }

    #[test]
    fn level_set_is_downward_closed() {
        let target = hyperbolic_cross(5, 3).unwrap();
        let levels = enumerate_levels(&target, 4);
        let lookup: std::collections::HashSet<Vec<u32>> = levels.iter().cloned().collect();
        for level in &levels {
            for k in 0..level.len() {
                if level[k] > 1 {
                    let mut smaller = level.clone();
                    smaller[k] -= 1;
                    assert!(lookup.contains(&smaller));
                }
            }
        }
        let zero = MultiIndex::zero(3).unwrap();
        assert!(level_in_set(&[1, 1, 1], &target, 0));
        assert!(lookup.contains(&vec![1, 1, 1]));
        let _ = zero;
    }
}
