//! Spectral projected gradient machinery for basis-pursuit denoising.
//!
//! The denoising problem min ‖u‖₁ s.t. ‖b − Au‖₂ ≤ σ is solved by root
//! finding on the Pareto curve φ(τ) = ‖b − A u_τ‖₂, where u_τ solves the
//! ℓ1-ball-constrained least-squares problem LASSO(τ). Each subproblem is
//! solved by a spectral projected gradient iteration (Barzilai–Borwein
//! steps, nonmonotone line search, sort-and-shift projection onto the ℓ1
//! ball); the ball radius is updated by Newton steps on φ(τ) = σ, for
//! which φ'(τ) = −‖Aᵀr‖_∞/‖r‖₂.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const STEP_MIN: f64 = 1e-16;
const STEP_MAX: f64 = 1e5;
const LINE_SEARCH_MEMORY: usize = 10;
const SUFFICIENT_DECREASE: f64 = 1e-4;
const MAX_NEWTON_STEPS: usize = 64;
const MAX_BACKTRACKS: usize = 100;
const INNER_CAP: usize = 1000;

/// Euclidean projection onto { u : ‖u‖₁ ≤ tau } by the sort-and-shift rule.
pub fn project_l1_ball(u: &DVector<f64>, tau: f64) -> DVector<f64> {
    if tau <= 0.0 {
        return DVector::zeros(u.len());
    }
    let l1: f64 = u.iter().map(|v| v.abs()).sum();
    if l1 <= tau {
        return u.clone();
    }
    let mut mags: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - tau) / (k as f64 + 1.0);
        if t >= m {
            // previous breakpoint was the last active one
            theta = (cumsum - m - tau) / k as f64;
            return shrink(u, theta.max(0.0));
        }
        theta = t;
    }
    shrink(u, theta.max(0.0))
}

fn shrink(u: &DVector<f64>, theta: f64) -> DVector<f64> {
    u.map(|v| v.signum() * (v.abs() - theta).max(0.0))
}

/// Outcome of one LASSO(τ) subproblem solve.
struct LassoState {
    grad: DVector<f64>,
    f: f64,
    iterations: usize,
}

/// Runs spectral projected gradient on min ½‖b−Au‖² s.t. ‖u‖₁ ≤ τ,
/// warm-started from `u`. The duality gap bounds the objective error, and
/// f = ½φ² resolves the residual norm φ only to √gap; the stopping rule
/// therefore scales the gap target with φ·phi_tol so the *residual* is
/// certified to phi_tol.
fn spg_lasso(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    tau: f64,
    u: &mut DVector<f64>,
    phi_target: f64,
    phi_tol: f64,
    max_iters: usize,
) -> LassoState {
    *u = project_l1_ball(u, tau);
    let mut residual = b - a * &*u;
    let mut grad = -a.tr_mul(&residual);
    let mut f = 0.5 * residual.norm_squared();
    let mut history = vec![f];
    let mut alpha = initial_step(&grad);
    let mut iterations = 0;
    let mut gap = duality_gap(&residual, b, tau, &grad);

    while iterations < max_iters {
        let phi = (2.0 * f).sqrt();
        // feasibility reached: the outer root finder can stop here, and
        // τ never exceeded the optimal radius, so ‖u‖₁ stays optimal
        if phi <= phi_target {
            break;
        }
        if gap <= (0.1 * phi_tol * phi).max(1e-30) {
            break;
        }
        let f_ref = history.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = false;
        let mut alpha_try = alpha;
        for _ in 0..MAX_BACKTRACKS {
            let cand = project_l1_ball(&(&*u - alpha_try * &grad), tau);
            let delta = &cand - &*u;
            if delta.norm() < 1e-16 {
                // stationary at this radius
                break;
            }
            let dir_deriv = grad.dot(&delta);
            let cand_residual = b - a * &cand;
            let cand_f = 0.5 * cand_residual.norm_squared();
            if cand_f <= f_ref + SUFFICIENT_DECREASE * dir_deriv {
                let cand_grad = -a.tr_mul(&cand_residual);
                let grad_delta = &cand_grad - &grad;
                let ss = delta.norm_squared();
                let sy = delta.dot(&grad_delta);
                alpha = if sy > 0.0 {
                    (ss / sy).clamp(STEP_MIN, STEP_MAX)
                } else {
                    (alpha_try * 10.0).min(STEP_MAX)
                };
                *u = cand;
                residual = cand_residual;
                grad = cand_grad;
                f = cand_f;
                accepted = true;
                break;
            }
            alpha_try *= 0.5;
            if alpha_try < STEP_MIN {
                break;
            }
        }
        iterations += 1;
        history.push(f);
        if history.len() > LINE_SEARCH_MEMORY {
            history.remove(0);
        }
        gap = duality_gap(&residual, b, tau, &grad);
        if !accepted {
            break; // no further progress possible at this radius
        }
    }
    LassoState {
        grad,
        f,
        iterations,
    }
}

/// Duality gap of LASSO(τ): τ‖Aᵀr‖_∞ − uᵀAᵀr expressed via r and g = −Aᵀr.
fn duality_gap(residual: &DVector<f64>, b: &DVector<f64>, tau: f64, grad: &DVector<f64>) -> f64 {
    let atr_inf = grad.amax();
    let rnorm_sq = residual.norm_squared();
    let btr = b.dot(residual);
    (rnorm_sq - btr + tau * atr_inf).max(0.0)
}

fn initial_step(grad: &DVector<f64>) -> f64 {
    let g_inf = grad.amax();
    if g_inf > 0.0 {
        (1.0 / g_inf).clamp(STEP_MIN, STEP_MAX)
    } else {
        1.0
    }
}

/// Least-squares polish on the active support: moves from `u` toward the
/// support-restricted least-squares point until the residual target is
/// reached, staying inside the ℓ1 ball. When the unconstrained point lies
/// outside the ball (the constraint is active), the destination becomes
/// the least-squares point on the active face Σ sign(u_j)·x_j = τ. First-
/// order steps identify the support; this supplies the precision they
/// crawl toward.
fn support_polish(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    u: &DVector<f64>,
    tau: f64,
    target: f64,
) -> Option<DVector<f64>> {
    let support: Vec<usize> = u
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, _)| j)
        .collect();
    if support.is_empty() {
        return None;
    }
    // wide supports get the least-norm least-squares point
    let a_s = a.select_columns(support.iter());
    let x_ls = a_s.clone().svd(true, true).solve(b, 1e-13).ok()?;
    let mut dest = DVector::zeros(u.len());
    for (i, &j) in support.iter().enumerate() {
        dest[j] = x_ls[i];
    }
    let dest_l1: f64 = dest.iter().map(|v| v.abs()).sum();
    if dest_l1 > tau * (1.0 + 1e-10) + 1e-12 {
        // prefer the face-constrained point; projecting the unconstrained
        // one back onto the ball still helps when the face system degenerates
        dest = match face_least_squares(&a_s, b, u, &support, tau) {
            Some(face) => face,
            None => project_l1_ball(&dest, tau),
        };
    }

    // both endpoints lie in the ball, so the whole segment is feasible
    let delta = &dest - u;
    let r = b - a * u;
    let ad = a * &delta;
    let phi0_sq = r.norm_squared();
    let phi1_sq = (&r - &ad).norm_squared();
    // φ(t)² = ‖r‖² − 2t rᵀ(Aδ) + t²‖Aδ‖², convex in t
    let t = if phi1_sq.sqrt() >= target {
        1.0
    } else {
        let aa = ad.norm_squared();
        let bb = -2.0 * r.dot(&ad);
        let cc = phi0_sq - target * target;
        if aa <= 0.0 {
            return None;
        }
        let disc = bb * bb - 4.0 * aa * cc;
        if disc < 0.0 {
            return None;
        }
        // smaller root: first crossing of the target on the way down
        (-bb - disc.sqrt()) / (2.0 * aa)
    };
    if !(0.0..=1.0).contains(&t) {
        return None;
    }
    let cand = u + t * delta;
    let phi_cand = (b - a * &cand).norm();
    if phi_cand * phi_cand < phi0_sq {
        Some(cand)
    } else {
        None
    }
}

/// Least squares on the active face: min ‖b − A_S x‖² subject to
/// Σ sign(u_j)·x_j = τ, through the bordered normal equations. Returns the
/// embedded point only when it stays inside the ℓ1 ball (no sign flip
/// pushed it out).
fn face_least_squares(
    a_s: &DMatrix<f64>,
    b: &DVector<f64>,
    u: &DVector<f64>,
    support: &[usize],
    tau: f64,
) -> Option<DVector<f64>> {
    let k = support.len();
    let gram = a_s.tr_mul(a_s);
    let rhs_top = a_s.tr_mul(b);
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    kkt.view_mut((0, 0), (k, k)).copy_from(&gram);
    // tiny ridge keeps the bordered system solvable for wide supports
    let ridge = 1e-12 * (gram.trace() / k as f64).max(1e-300);
    for i in 0..k {
        kkt[(i, i)] += ridge;
    }
    for (i, &j) in support.iter().enumerate() {
        let sign = u[j].signum();
        kkt[(i, k)] = sign;
        kkt[(k, i)] = sign;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs.rows_mut(0, k).copy_from(&rhs_top);
    rhs[k] = tau;
    let sol = kkt.lu().solve(&rhs)?;
    let mut dest = DVector::zeros(u.len());
    for (i, &j) in support.iter().enumerate() {
        dest[j] = sol[i];
    }
    let l1: f64 = dest.iter().map(|v| v.abs()).sum();
    (l1 <= tau * (1.0 + 1e-10) + 1e-12).then_some(dest)
}

/// Result of the Pareto root finding.
pub struct BpdnSolution {
    pub u: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves min ‖u‖₁ s.t. ‖b − Au‖₂ ≤ sigma.
///
/// `tolerance` controls both the feasibility slack and the subproblem gap;
/// `max_iterations` caps the total number of SPG steps across all Newton
/// updates of the ball radius.
pub fn pareto_bpdn(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    sigma: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<BpdnSolution> {
    if sigma < 0.0 {
        return Err(Error::Domain(format!(
            "residual bound must be nonnegative, got {sigma}"
        )));
    }
    let n = a.ncols();
    let b_norm = b.norm();
    // the zero vector is optimal whenever it is feasible
    if b_norm <= sigma {
        return Ok(BpdnSolution {
            u: DVector::zeros(n),
            iterations: 0,
            converged: true,
        });
    }

    let feas_tol = (tolerance * b_norm.max(1.0)).clamp(1e-12, 2e-7);
    let mut u = DVector::zeros(n);
    let mut tau = 0.0;
    let mut total_iters = 0usize;
    let mut phi = b_norm;
    let mut dphi = -a.tr_mul(b).amax() / b_norm;

    for _ in 0..MAX_NEWTON_STEPS {
        if phi <= sigma + feas_tol {
            return Ok(BpdnSolution {
                u,
                iterations: total_iters,
                converged: true,
            });
        }
        if dphi >= -1e-15 {
            // the residual cannot be reduced further by growing the ball
            return Err(Error::Convergence(format!(
                "residual {phi:.3e} cannot reach the bound {sigma:.3e} (flat Pareto curve)"
            )));
        }
        let tau_next = tau + (sigma - phi) / dphi;
        // the Pareto curve is convex and decreasing, so Newton moves right
        tau = if tau_next > tau {
            tau_next
        } else {
            tau + feas_tol.max(1e-8 * (1.0 + tau))
        };

        let budget = max_iterations.saturating_sub(total_iters).min(INNER_CAP);
        if budget == 0 {
            break;
        }
        let state = spg_lasso(a, b, tau, &mut u, sigma + 0.5 * feas_tol, feas_tol, budget);
        total_iters += state.iterations.max(1);
        phi = (2.0 * state.f).sqrt();
        let mut grad_inf = state.grad.amax();
        if phi > sigma + 0.5 * feas_tol {
            if let Some(polished) = support_polish(a, b, &u, tau, sigma + 0.25 * feas_tol) {
                u = polished;
                let r = b - a * &u;
                phi = r.norm();
                grad_inf = a.tr_mul(&r).amax();
            }
        }
        dphi = if phi > 0.0 { -grad_inf / phi } else { -1.0 };
    }

    if phi <= sigma + feas_tol {
        Ok(BpdnSolution {
            u,
            iterations: total_iters,
            converged: true,
        })
    } else if phi <= sigma + 1e-6 * b_norm.max(1.0) {
        Ok(BpdnSolution {
            u,
            iterations: total_iters,
            converged: false,
        })
    } else {
        Err(Error::Convergence(format!(
            "basis pursuit did not reach the residual bound after {total_iters} iterations \
             (residual {phi:.3e}, bound {sigma:.3e})"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_core::{RngCore, SeedableRng};

    fn unit(rng: &mut impl RngCore) -> f64 {
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn gaussian(rng: &mut impl RngCore) -> f64 {
        // Box-Muller
        let u1 = unit(rng).max(1e-300);
        let u2 = unit(rng);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn projection_examples() {
        let u = DVector::from_vec(vec![3.0, -1.0]);
        let p = project_l1_ball(&u, 1.0);
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-12);

        let inside = DVector::from_vec(vec![0.25, -0.25]);
        assert_eq!(project_l1_ball(&inside, 1.0), inside);

        let p0 = project_l1_ball(&u, 0.0);
        assert_eq!(p0, DVector::zeros(2));
    }

    #[test]
    fn projection_satisfies_optimality() {
        // the projection is the closest point of the ball
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = 1 + (rng.next_u64() % 12) as usize;
            let u = DVector::from_fn(n, |_, _| 4.0 * unit(&mut rng) - 2.0);
            let tau = 0.1 + 2.0 * unit(&mut rng);
            let p = project_l1_ball(&u, tau);
            let l1: f64 = p.iter().map(|v| v.abs()).sum();
            assert!(l1 <= tau + 1e-10);
            // random feasible competitors are no closer
            for _ in 0..20 {
                let mut q = DVector::from_fn(n, |_, _| 2.0 * unit(&mut rng) - 1.0);
                let q_l1: f64 = q.iter().map(|v| v.abs()).sum();
                if q_l1 > tau {
                    q *= tau / q_l1;
                }
                assert!((&u - &p).norm() <= (&u - &q).norm() + 1e-9);
            }
        }
    }

    #[test]
    fn identity_system_with_zero_bound_returns_observation() {
        let a = DMatrix::identity(6, 6);
        let b = DVector::from_vec(vec![0.3, -0.1, 0.0, 0.7, -0.4, 0.2]);
        let sol = pareto_bpdn(&a, &b, 0.0, 1e-10, 10_000).unwrap();
        assert!(sol.converged);
        for i in 0..6 {
            assert_abs_diff_eq!(sol.u[i], b[i], epsilon = 1e-7);
        }
    }

    #[test]
    fn generous_bound_returns_zero() {
        let a = DMatrix::from_fn(4, 9, |i, j| ((i * 9 + j) as f64 * 0.37).sin());
        let b = DVector::from_vec(vec![0.1, 0.2, -0.1, 0.05]);
        let sol = pareto_bpdn(&a, &b, 2.0 * b.norm(), 1e-9, 1000).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.u, DVector::zeros(9));
    }

    #[test]
    fn recovers_sparse_signal_from_gaussian_measurements() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let (m, n) = (24, 48);
        let a = DMatrix::from_fn(m, n, |_, _| gaussian(&mut rng) / (m as f64).sqrt());
        let mut x = DVector::zeros(n);
        x[3] = 1.2;
        x[17] = -0.8;
        x[31] = 0.5;
        let b = &a * &x;
        let sol = pareto_bpdn(&a, &b, 0.0, 1e-10, 20_000).unwrap();
        assert!(sol.converged);
        assert!(
            (&sol.u - &x).norm() / x.norm() < 1e-6,
            "error {}",
            (&sol.u - &x).norm() / x.norm()
        );
    }
}
