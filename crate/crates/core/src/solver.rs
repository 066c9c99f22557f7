//! Damped least-squares solvers for the reconstruction system.
//!
//! Both methods minimize ||A dx - b_hat||^2 + lambda ||dx||^2 from a zero
//! start, matrix-free: only `apply` and `apply_transpose` of the operator
//! are used. `NormalEquationsCg` runs conjugate gradients on
//! (A^T A + lambda I) dx = A^T b_hat; `DampedLsqr` runs Golub-Kahan
//! bidiagonalization on the augmented system [A; sqrt(lambda) I], which is
//! algebraically the same problem with better conditioning behavior. Both
//! stop on the relative residual of the normal equations.

use crate::error::{Error, Result};
use crate::operator::SparseOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    NormalEquationsCg,
    DampedLsqr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Damping weight lambda (>= 0) on ||dx||^2.
    pub lambda: f64,
    /// Relative tolerance on the normal-equations residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub method: SolveMethod,
}

impl SolveConfig {
    /// Defaults sized for a system with `n_cols` unknowns: tolerance 1e-8,
    /// at most 10 * n_cols iterations.
    pub fn new(lambda: f64, method: SolveMethod, n_cols: usize) -> Self {
        Self {
            lambda,
            tolerance: 1e-8,
            max_iterations: 10 * n_cols.max(1),
            method,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be finite and > 0, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations_used: usize,
    /// ||A dx - b_hat|| before the first iteration and after each one.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += alpha * x
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn residual_norm(ax: &[f64], b_hat: &[f64]) -> f64 {
    ax.iter()
        .zip(b_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Minimizes ||A dx - b_hat||^2 + lambda ||dx||^2 starting from dx = 0.
/// Returns the last iterate together with its convergence report; hitting
/// the iteration cap is reported, not an error.
pub fn solve_damped(
    a: &SparseOperator,
    b_hat: &[f64],
    cfg: &SolveConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    if b_hat.len() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows(),
            got: b_hat.len(),
        });
    }
    match cfg.method {
        SolveMethod::NormalEquationsCg => cg_normal_equations(a, b_hat, cfg),
        SolveMethod::DampedLsqr => damped_lsqr(a, b_hat, cfg),
    }
}

fn cg_normal_equations(
    a: &SparseOperator,
    b_hat: &[f64],
    cfg: &SolveConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.n_cols();
    let mut history = vec![norm(b_hat)];
    let atb = a.apply_transpose(b_hat)?;
    let atb_norm = norm(&atb);
    if atb_norm == 0.0 {
        // b_hat has no component in range(A): dx = 0 is exact
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations_used: 0,
                residual_history: history,
                converged: true,
            },
        ));
    }
    let mut x = vec![0.0; n];
    let mut ax = vec![0.0; b_hat.len()];
    let mut r = atb; // normal-equations residual A^T b_hat - (A^T A + lambda I) x
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_iterations {
        let ap = a.apply(&p)?;
        let mut q = a.apply_transpose(&ap)?;
        axpy(cfg.lambda, &p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) || !pq.is_finite() {
            // p = 0 (already optimal) or numerical breakdown
            break;
        }
        let alpha = rs / pq;
        axpy(alpha, &p, &mut x);
        axpy(alpha, &ap, &mut ax);
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        iterations += 1;
        history.push(residual_norm(&ax, b_hat));
        let rs_next = dot(&r, &r);
        if rs_next.sqrt() <= cfg.tolerance * atb_norm {
            converged = true;
            break;
        }
        let beta = rs_next / rs;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rs = rs_next;
    }
    Ok((
        x,
        SolveReport {
            iterations_used: iterations,
            residual_history: history,
            converged,
        },
    ))
}

fn damped_lsqr(
    a: &SparseOperator,
    b_hat: &[f64],
    cfg: &SolveConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.n_cols();
    let damp = cfg.lambda.sqrt();
    let mut history = vec![norm(b_hat)];
    let mut x = vec![0.0; n];

    let mut u = b_hat.to_vec();
    let beta1 = norm(&u);
    let trivial = |history: Vec<f64>| SolveReport {
        iterations_used: 0,
        residual_history: history,
        converged: true,
    };
    if beta1 == 0.0 {
        return Ok((x, trivial(history)));
    }
    scale(&mut u, 1.0 / beta1);
    let mut v = a.apply_transpose(&u)?;
    let alpha1 = norm(&v);
    if alpha1 == 0.0 {
        // A^T b_hat = 0: dx = 0 is exact
        return Ok((x, trivial(history)));
    }
    scale(&mut v, 1.0 / alpha1);
    let atb_norm = alpha1 * beta1; // = ||A^T b_hat||

    let mut w = v.clone();
    let mut aw: Vec<f64> = Vec::new(); // A w, maintained by the same recurrence as w
    let mut ax = vec![0.0; b_hat.len()];
    let mut w_coef = 0.0; // theta_{k+1} / rho_k from the previous iteration
    let mut alpha = alpha1;
    let mut phibar = beta1;
    let mut rhobar = alpha1;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=cfg.max_iterations {
        // bidiagonalization: next left vector
        let av = a.apply(&v)?;
        if iter == 1 {
            aw = av.clone();
        } else {
            for (awi, avi) in aw.iter_mut().zip(&av) {
                *awi = avi - w_coef * *awi;
            }
        }
        for (ui, avi) in u.iter_mut().zip(&av) {
            *ui = avi - alpha * *ui;
        }
        let beta = norm(&u);
        let mut alpha_next = 0.0;
        if beta > 0.0 {
            scale(&mut u, 1.0 / beta);
            // next right vector
            let atu = a.apply_transpose(&u)?;
            for (vi, ti) in v.iter_mut().zip(&atu) {
                *vi = ti - beta * *vi;
            }
            alpha_next = norm(&v);
            if alpha_next > 0.0 {
                scale(&mut v, 1.0 / alpha_next);
            }
        }

        // fold the damping term into the bidiagonal system
        let rhobar1 = (rhobar * rhobar + damp * damp).sqrt();
        let phibar_damped = (rhobar / rhobar1) * phibar;

        // plane rotation eliminating the subdiagonal beta
        let rho = (rhobar1 * rhobar1 + beta * beta).sqrt();
        let c = rhobar1 / rho;
        let s = beta / rho;
        let theta = s * alpha_next;
        rhobar = -c * alpha_next;
        let phi = c * phibar_damped;
        phibar = s * phibar_damped;

        let step = phi / rho;
        axpy(step, &w, &mut x);
        axpy(step, &aw, &mut ax);
        iterations = iter;
        history.push(residual_norm(&ax, b_hat));

        // ||A^T r - lambda x|| estimate for the damped system; phibar
        // carries a sign in this formulation, so take magnitudes
        let normal_residual = (phibar * alpha_next * c).abs();
        if normal_residual <= cfg.tolerance * atb_norm {
            converged = true;
            break;
        }
        if beta == 0.0 || alpha_next == 0.0 {
            // Krylov space exhausted: iterate is the exact minimizer
            converged = true;
            break;
        }

        w_coef = theta / rho;
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi = vi - w_coef * *wi;
        }
        alpha = alpha_next;
    }

    Ok((
        x,
        SolveReport {
            iterations_used: iterations,
            residual_history: history,
            converged,
        },
    ))
}

fn scale(v: &mut [f64], s: f64) {
    for vi in v.iter_mut() {
        *vi *= s;
    }
}

/// Solves for the high-resolution image around a prior: with
/// b_hat = b - A x0 (entries on empty rows forced to zero, since those
/// observations see nothing of the image), finds
/// dx = argmin ||A dx - b_hat||^2 + lambda ||dx||^2 and returns x0 + dx.
pub fn reconstruct(
    a: &SparseOperator,
    b: &[f64],
    x0: &[f64],
    cfg: &SolveConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    if x0.len() != a.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: a.n_cols(),
            got: x0.len(),
        });
    }
    if b.len() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows(),
            got: b.len(),
        });
    }
    let ax0 = a.apply(x0)?;
    let coverage = a.row_coverage();
    let b_hat: Vec<f64> = b
        .iter()
        .zip(&ax0)
        .zip(&coverage)
        .map(|((bi, axi), cov)| if *cov { bi - axi } else { 0.0 })
        .collect();
    let (dx, report) = solve_damped(a, &b_hat, cfg)?;
    let x: Vec<f64> = x0.iter().zip(&dx).map(|(x0i, dxi)| x0i + dxi).collect();
    Ok((x, report))
}
