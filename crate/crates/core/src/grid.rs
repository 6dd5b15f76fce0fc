//! Image grids and the discrete difference calculus.
//!
//! Pixels are addressed as `(i, j)` with `i` the row index (the `x` axis of
//! the difference operators) and `j` the column index (the `y` axis). Storage
//! is row-major and zero-based; the one-based pixel `(i, j)` of the usual
//! mathematical notation lives at index `(i - 1) * cols + (j - 1)`.
//!
//! The grid spacing is 1. Forward differences vanish on the last row/column,
//! and `backward_div` is minus the adjoint of `forward_grad`:
//! `<forward_grad(u), p> = -<u, backward_div(p)>`.

use crate::error::{Error, Result};

/// An `m x n` grid of finite `f64` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols)?;
        if data.len() != rows * cols {
            return Err(Error::DataLength {
                rows,
                cols,
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::constant(rows, cols, 0.0)
    }

    /// Builds a field from `f(i, j)` with zero-based indices.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_shape(rows, cols)?;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Same shape as `self`, every entry `value`.
    pub fn filled_like(&self, value: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: vec![value; self.data.len()],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn ensure_same_shape(&self, other: &ScalarField) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination. Shapes must agree.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + s * b)
    }

    pub fn dot(&self, other: &ScalarField) -> Result<f64> {
        self.ensure_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Builds a field of the same shape from raw values without validation.
    pub(crate) fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows < 2 || cols < 2 {
        return Err(Error::GridTooSmall { rows, cols });
    }
    Ok(())
}

/// A pair of scalar fields on the same grid: gradients, the Geman-Yang
/// auxiliary `l = (l1, l2)`, or anisotropic line processes `b = (b1, b2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        x.ensure_same_shape(&y)?;
        Ok(Self { x, y })
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self> {
        let c = ScalarField::constant(rows, cols, value)?;
        Ok(Self { x: c.clone(), y: c })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.x.shape()
    }

    pub fn dot(&self, other: &VectorField) -> Result<f64> {
        Ok(self.x.dot(&other.x)? + self.y.dot(&other.y)?)
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        Ok(Self {
            x: self.x.sub(&other.x)?,
            y: self.y.sub(&other.y)?,
        })
    }
}

/// Difference direction: `X` runs along the row index `i`, `Y` along the
/// column index `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Applies a 1-D kernel along every grid line parallel to `axis`.
///
/// The kernel sees the position `k` on the line, the line length, and an
/// accessor for the line's samples.
fn along_axis(u: &ScalarField, axis: Axis, kernel: impl Fn(usize, usize, &dyn Fn(usize) -> f64) -> f64) -> ScalarField {
    let (m, n) = u.shape();
    let data = u.as_slice();
    let mut out = vec![0.0; m * n];
    match axis {
        Axis::X => {
            for j in 0..n {
                let at = |k: usize| data[k * n + j];
                for i in 0..m {
                    out[i * n + j] = kernel(i, m, &at);
                }
            }
        }
        Axis::Y => {
            for i in 0..m {
                let row = &data[i * n..(i + 1) * n];
                let at = |k: usize| row[k];
                for j in 0..n {
                    out[i * n + j] = kernel(j, n, &at);
                }
            }
        }
    }
    u.with_data(out)
}

/// Forward difference, zero on the last line.
pub fn forward_diff(u: &ScalarField, axis: Axis) -> ScalarField {
    along_axis(u, axis, |k, len, at| if k + 1 < len { at(k + 1) - at(k) } else { 0.0 })
}

/// Backward difference with the boundary cases that make it minus the
/// adjoint of [`forward_diff`]: `p_1` on the first line, `-p_{m-1}` on the
/// last.
pub fn backward_diff(p: &ScalarField, axis: Axis) -> ScalarField {
    along_axis(p, axis, |k, len, at| {
        if k == 0 {
            at(0)
        } else if k + 1 == len {
            -at(k - 1)
        } else {
            at(k) - at(k - 1)
        }
    })
}

/// Backward difference that vanishes on the first line.
pub fn tilde_backward_diff(u: &ScalarField, axis: Axis) -> ScalarField {
    along_axis(u, axis, |k, _len, at| if k == 0 { 0.0 } else { at(k) - at(k - 1) })
}

/// Companion of [`tilde_backward_diff`]: `u_2` on the first line, `-u_m` on
/// the last, forward difference in between. Minus the adjoint of
/// `tilde_backward_diff`.
pub fn tilde_forward_diff(p: &ScalarField, axis: Axis) -> ScalarField {
    along_axis(p, axis, |k, len, at| {
        if k == 0 {
            at(1)
        } else if k + 1 == len {
            -at(k)
        } else {
            at(k + 1) - at(k)
        }
    })
}

/// `(∇ₓ⁺u, ∇ᵧ⁺u)`.
pub fn forward_grad(u: &ScalarField) -> VectorField {
    VectorField {
        x: forward_diff(u, Axis::X),
        y: forward_diff(u, Axis::Y),
    }
}

/// `∇ₓ⁻p.x + ∇ᵧ⁻p.y`.
pub fn backward_div(p: &VectorField) -> ScalarField {
    let dx = backward_diff(&p.x, Axis::X);
    let dy = backward_diff(&p.y, Axis::Y);
    let data = dx.as_slice().iter().zip(dy.as_slice()).map(|(a, b)| a + b).collect();
    dx.with_data(data)
}

/// `(∇̃ₓ⁻u, ∇̃ᵧ⁻u)`.
pub fn tilde_grad(u: &ScalarField) -> VectorField {
    VectorField {
        x: tilde_backward_diff(u, Axis::X),
        y: tilde_backward_diff(u, Axis::Y),
    }
}

/// `∇̃ₓ⁺p.x + ∇̃ᵧ⁺p.y`.
pub fn tilde_div(p: &VectorField) -> ScalarField {
    let dx = tilde_forward_diff(&p.x, Axis::X);
    let dy = tilde_forward_diff(&p.y, Axis::Y);
    let data = dx.as_slice().iter().zip(dy.as_slice()).map(|(a, b)| a + b).collect();
    dx.with_data(data)
}

/// Which part of the squared forward gradient to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradMode {
    /// `(∇ₓ⁺u)² + (∇ᵧ⁺u)²`
    Isotropic,
    /// `(∇ₓ⁺u)²`
    Component1,
    /// `(∇ᵧ⁺u)²`
    Component2,
}

pub fn grad_sq(u: &ScalarField, mode: GradMode) -> ScalarField {
    match mode {
        GradMode::Component1 => forward_diff(u, Axis::X).map(|v| v * v),
        GradMode::Component2 => forward_diff(u, Axis::Y).map(|v| v * v),
        GradMode::Isotropic => {
            let g = forward_grad(u);
            g.x.zip_map(&g.y, |a, b| a * a + b * b)
                .expect("gradient components share a shape")
        }
    }
}
