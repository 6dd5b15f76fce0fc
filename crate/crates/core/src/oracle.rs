//! Dense reference constructions for verification on small grids.
//!
//! Everything here materializes `N × N` matrices (`N = rows · cols`) and is
//! only meant for grids of a few dozen pixels. The operators are built from
//! explicit difference matrices, independently of the stencil code.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Axis, ScalarField};
use crate::stencil::{Scheme, DENSE_LIMIT};

fn check_size(rows: usize, cols: usize) -> Result<usize> {
    let n = rows * cols;
    if n > DENSE_LIMIT {
        return Err(Error::GridTooLarge {
            cells: n,
            limit: DENSE_LIMIT,
        });
    }
    Ok(n)
}

/// Forward difference `∇⁺` along `axis` with a zero last row/column.
pub fn forward_diff_matrix(rows: usize, cols: usize, axis: Axis) -> DMatrix<f64> {
    let n = rows * cols;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            let next = match axis {
                Axis::X if i + 1 < rows => Some(k + cols),
                Axis::Y if j + 1 < cols => Some(k + 1),
                _ => None,
            };
            if let Some(q) = next {
                m[(k, q)] = 1.0;
                m[(k, k)] = -1.0;
            }
        }
    }
    m
}

/// Backward difference `∇̃⁻` along `axis` with a zero first row/column.
pub fn tilde_backward_diff_matrix(rows: usize, cols: usize, axis: Axis) -> DMatrix<f64> {
    let n = rows * cols;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            let prev = match axis {
                Axis::X if i > 0 => Some(k - cols),
                Axis::Y if j > 0 => Some(k - 1),
                _ => None,
            };
            if let Some(q) = prev {
                m[(k, k)] = 1.0;
                m[(k, q)] = -1.0;
            }
        }
    }
    m
}

fn diag(f: &ScalarField) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(f.as_slice()))
}

/// `γ + ∇*B∇` assembled from difference matrices: `∇⁺ᵀB∇⁺` for NFFD and
/// `½(∇⁺ᵀB∇⁺ + ∇̃⁻ᵀB∇̃⁻)` for SFFD.
pub fn dense_operator(
    scheme: Scheme,
    gamma: &ScalarField,
    d1: &ScalarField,
    d2: &ScalarField,
) -> Result<DMatrix<f64>> {
    gamma.ensure_same_shape(d1)?;
    gamma.ensure_same_shape(d2)?;
    let (rows, cols) = gamma.shape();
    check_size(rows, cols)?;
    let mut t = diag(gamma);
    for (axis, d) in [(Axis::X, d1), (Axis::Y, d2)] {
        let b = diag(d);
        let f = forward_diff_matrix(rows, cols, axis);
        match scheme {
            Scheme::Nffd => t += f.transpose() * &b * &f,
            Scheme::Sffd => {
                let g = tilde_backward_diff_matrix(rows, cols, axis);
                t += (f.transpose() * &b * &f + g.transpose() * &b * &g) * 0.5;
            }
        }
    }
    Ok(t)
}

/// Permutation listing red pixels (`i + j` even) first, then black, each in
/// row-major order.
pub fn red_black_order(rows: usize, cols: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rows * cols).filter(|k| (k / cols + k % cols).is_multiple_of(2)).collect();
    order.extend((0..rows * cols).filter(|k| (k / cols + k % cols) % 2 == 1));
    order
}

/// Preconditioner `M = (D + L) D⁻¹ (D + U)` of one symmetric red-black
/// Gauss-Seidel cycle on `t`, where `D`, `L`, `U` are the diagonal and
/// strict triangles of `t` in red-first ordering. Returned in natural
/// (row-major) ordering.
pub fn sgs_preconditioner(t: &DMatrix<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    let n = rows * cols;
    let order = red_black_order(rows, cols);
    let p = DMatrix::from_fn(n, n, |a, b| t[(order[a], order[b])]);
    let d = DMatrix::from_diagonal(&p.diagonal());
    let lower = DMatrix::from_fn(n, n, |a, b| if a > b { p[(a, b)] } else { 0.0 });
    let upper = DMatrix::from_fn(n, n, |a, b| if a < b { p[(a, b)] } else { 0.0 });
    let d_inv = DMatrix::from_diagonal(&p.diagonal().map(|x| 1.0 / x));
    let m = (&d + lower) * d_inv * (&d + upper);
    let mut out = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            out[(order[a], order[b])] = m[(a, b)];
        }
    }
    out
}

/// `u_prev + M⁻¹(rhs + η u_prev − (T + ηI) u_prev)` with `M` the SGS
/// preconditioner of `T + ηI`: one proximal step with a single cycle.
pub fn dense_prox_step(
    scheme: Scheme,
    gamma: &ScalarField,
    d1: &ScalarField,
    d2: &ScalarField,
    rhs: &ScalarField,
    u_prev: &ScalarField,
    eta: f64,
) -> Result<ScalarField> {
    let (rows, cols) = gamma.shape();
    let n = rows * cols;
    let t_bar = dense_operator(scheme, gamma, d1, d2)? + DMatrix::identity(n, n) * eta;
    let m = sgs_preconditioner(&t_bar, rows, cols);
    let u = DVector::from_column_slice(u_prev.as_slice());
    let z = DVector::from_column_slice(rhs.as_slice()) + &u * eta;
    let r = z - &t_bar * &u;
    let step = m.lu().solve(&r).ok_or(Error::Singular)?;
    ScalarField::new(rows, cols, (u + step).as_slice().to_vec())
}

/// Minimizes a one-dimensional function over `points` equally spaced
/// samples of `[lo, hi]`.
pub fn grid_argmin(lo: f64, hi: f64, points: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut best = (f64::INFINITY, lo);
    for k in 0..points {
        let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::FivePointStencil;

    #[test]
    fn matches_stencil_on_small_grid() {
        let gamma = ScalarField::from_fn(3, 4, |i, j| 1.0 + 0.1 * (i + j) as f64).unwrap();
        let d1 = ScalarField::from_fn(3, 4, |i, j| 0.3 + (i * j) as f64 * 0.2).unwrap();
        let d2 = ScalarField::from_fn(3, 4, |i, j| 0.7 + i as f64 * 0.1 - j as f64 * 0.05).unwrap();
        for scheme in [Scheme::Nffd, Scheme::Sffd] {
            let a = dense_operator(scheme, &gamma, &d1, &d2).unwrap();
            let b = FivePointStencil::assemble(scheme, &gamma, &d1, &d2).unwrap().to_dense().unwrap();
            assert!((a - b).amax() < 1e-14);
        }
    }

    #[test]
    fn red_black_order_is_a_permutation() {
        let mut o = red_black_order(3, 5);
        assert_eq!(&o[..8], &[0, 2, 4, 6, 8, 10, 12, 14]);
        o.sort();
        assert_eq!(o, (0..15).collect::<Vec<_>>());
    }
}
