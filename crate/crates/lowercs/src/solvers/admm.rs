//! ADMM fallback for basis-pursuit denoising on ill-conditioned systems.
//!
//! Splitting min ‖z‖₁ + I_C(u) subject to u = z with
//! C = { u : ‖Au − b‖₂ ≤ σ }. The u-update is a projection onto C solved
//! through one SVD of A and a secular-equation bisection on the Lagrange
//! multiplier; the z-update is soft thresholding.

use nalgebra::{DMatrix, DVector};

use super::spg::BpdnSolution;
use crate::error::{Error, Result};

pub fn admm_bpdn(
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
    if b.norm() <= sigma {
        return Ok(BpdnSolution {
            u: DVector::zeros(n),
            iterations: 0,
            converged: true,
        });
    }

    let svd = a.clone().svd(true, true);
    let u_fac = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let singular = &svd.singular_values;

    let rho = 1.0;
    let mut z = DVector::zeros(n);
    let mut w = DVector::zeros(n);
    let mut iterations = 0;
    let tol = tolerance.max(1e-12);

    for _ in 0..max_iterations {
        iterations += 1;
        let p = &z - &w;
        let x = project_residual_ball(u_fac, v_t, singular, b, &p, sigma);
        let z_prev = z.clone();
        z = soft_threshold(&(&x + &w), 1.0 / rho);
        w += &x - &z;

        let primal = (&x - &z).norm();
        let dual = rho * (&z - &z_prev).norm();
        if primal < tol * (1.0 + z.norm()) && dual < tol * (1.0 + w.norm()) {
            return Ok(BpdnSolution {
                u: z,
                iterations,
                converged: true,
            });
        }
    }
    // return the feasible iterate even when the dual residual is loose
    let x = project_residual_ball(u_fac, v_t, singular, b, &z, sigma);
    let feasible = (a * &x - b).norm() <= sigma + 1e-6 * b.norm().max(1.0);
    if feasible {
        Ok(BpdnSolution {
            u: x,
            iterations,
            converged: false,
        })
    } else {
        Err(Error::Convergence(format!(
            "ADMM did not reach the residual bound after {iterations} iterations"
        )))
    }
}

fn soft_threshold(v: &DVector<f64>, kappa: f64) -> DVector<f64> {
    v.map(|x| x.signum() * (x.abs() - kappa).max(0.0))
}

/// Projects p onto { u : ‖Au − b‖₂ ≤ σ } given the SVD A = U Σ Vᵀ.
///
/// With the Tikhonov form u(λ) = argmin ‖u − p‖² + λ‖Au − b‖², the residual
/// norm is monotone decreasing in λ and the right multiplier solves a
/// scalar secular equation handled by bisection.
fn project_residual_ball(
    u_fac: &DMatrix<f64>,
    v_t: &DMatrix<f64>,
    singular: &DVector<f64>,
    b: &DVector<f64>,
    p: &DVector<f64>,
    sigma: f64,
) -> DVector<f64> {
    let r = singular.len();
    // coordinates in the singular bases
    let bt = u_fac.tr_mul(b); // Uᵀb, length >= r
    let pt = v_t * p; // Vᵀp, length >= r

    let residual_at = |lambda: f64| -> f64 {
        // ‖Au(λ) − b‖² = Σ_i ((σ_i q_i − β_i)/(1+λσ_i²))² + ‖b − UUᵀb‖²
        let mut acc = 0.0;
        for i in 0..r {
            let s = singular[i];
            let num = s * pt[i] - bt[i];
            let den = 1.0 + lambda * s * s;
            acc += (num / den) * (num / den);
        }
        // component of b outside the range of A is unreachable
        let mut reach = b.clone();
        for i in 0..r {
            reach -= bt[i] * u_fac.column(i);
        }
        acc + reach.norm_squared()
    };

    if residual_at(0.0) <= sigma * sigma {
        return p.clone();
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while residual_at(hi) > sigma * sigma && hi < 1e18 {
        hi *= 4.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual_at(mid) > sigma * sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = hi;
    // u = p + Σ_i ((β_i − σ_i q_i) λσ_i/(1+λσ_i²)) v_i
    let mut out = p.clone();
    for i in 0..r {
        let s = singular[i];
        let coef = (bt[i] - s * pt[i]) * lambda * s / (1.0 + lambda * s * s);
        out += coef * v_t.row(i).transpose();
    }
    out
}
