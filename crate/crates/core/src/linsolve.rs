//! Reference linear solvers for the assembled stencil systems.
//!
//! `cg` is the unpreconditioned conjugate gradient baseline used in the
//! solver comparisons; `dense_solve` is a Cholesky factorization of the
//! materialized matrix and only serves as a verification oracle.

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::stencil::FivePointStencil;

/// Outcome of a conjugate gradient solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CgReport {
    pub solution: ScalarField,
    pub iterations: usize,
    /// `‖z - T u‖₂` at exit.
    pub final_residual: f64,
    /// Stencil applications, including the initial residual.
    pub matvec_count: usize,
    pub converged: bool,
    /// Residual 2-norms, starting with the initial one.
    pub residual_history: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradient on `st u = z` from `u0`, stopping once
/// `‖z - T u‖ ≤ rel_tol · ‖z - T u0‖` or after `max_iters` iterations.
///
/// Reductions are plain left-to-right sums so residual histories are
/// reproducible.
pub fn cg(st: &FivePointStencil, z: &ScalarField, u0: &ScalarField, rel_tol: f64, max_iters: usize) -> Result<CgReport> {
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rel_tol",
            reason: format!("must be positive, got {rel_tol}"),
        });
    }
    let mut u = u0.clone();
    let mut r = st.residual(z, &u)?.into_vec();
    let mut matvecs = 1;
    let r0 = norm(&r);
    let mut history = vec![r0];
    let target = rel_tol * r0;
    if r0 == 0.0 {
        return Ok(CgReport {
            solution: u,
            iterations: 0,
            final_residual: 0.0,
            matvec_count: matvecs,
            converged: true,
            residual_history: history,
        });
    }

    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        let ap = st.apply(&u.with_data(p.clone()))?.into_vec();
        matvecs += 1;
        iterations += 1;
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::CgBreakdown {
                iteration: iterations,
                curvature,
            });
        }
        let alpha = rr / curvature;
        let x = u.as_mut_slice();
        for k in 0..x.len() {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_next = dot(&r, &r);
        let rn = rr_next.sqrt();
        history.push(rn);
        if rn <= target {
            converged = true;
            break;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for k in 0..p.len() {
            p[k] = r[k] + beta * p[k];
        }
    }
    Ok(CgReport {
        solution: u,
        iterations,
        final_residual: *history.last().unwrap(),
        matvec_count: matvecs,
        converged,
        residual_history: history,
    })
}

/// Direct solve of the materialized system by Cholesky factorization.
pub fn dense_solve(st: &FivePointStencil, z: &ScalarField) -> Result<ScalarField> {
    if z.shape() != st.shape() {
        return Err(Error::ShapeMismatch {
            left: st.shape(),
            right: z.shape(),
        });
    }
    let mat = st.to_dense()?;
    // Cholesky only reads the lower triangle; reject asymmetric input.
    if (&mat - mat.transpose()).amax() != 0.0 {
        return Err(Error::Singular);
    }
    let chol = mat.cholesky().ok_or(Error::Singular)?;
    let rhs = nalgebra::DVector::from_column_slice(z.as_slice());
    let x = chol.solve(&rhs);
    ScalarField::new(z.rows(), z.cols(), x.as_slice().to_vec()).map_err(|_| Error::Singular)
}
