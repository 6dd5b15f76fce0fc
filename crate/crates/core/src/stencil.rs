//! Five-point stencils for `γu + ∇*B∇u = z` with homogeneous Neumann
//! boundaries, `B = Diag[d¹, d²]`.
//!
//! Both discretizations reduce to an edge-weighted graph Laplacian on the
//! pixel grid plus the reaction term `γ`. The weight on the edge between
//! `(i, j)` and `(i + 1, j)` is `d¹(i, j)` for [`Scheme::Nffd`] and
//! `½(d¹(i, j) + d¹(i + 1, j))` for [`Scheme::Sffd`]; the `y` edges use `d²`
//! the same way. Edges leaving the domain carry no weight, which gives the
//! nine boundary/corner stencils (and zero-flux rows) for free.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};

/// Largest grid (in cells) [`FivePointStencil::to_dense`] will materialize.
pub const DENSE_LIMIT: usize = 4096;

/// Finite-difference discretization of the divergence-form operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Scheme {
    /// Normal formula: `∇⁺` as gradient, its adjoint as divergence.
    #[default]
    Nffd,
    /// Symmetric formula: mean of the `∇⁺/∇⁻` and `∇̃⁻/∇̃⁺` discretizations.
    Sffd,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Nffd => "nffd",
            Scheme::Sffd => "sffd",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nffd" => Ok(Scheme::Nffd),
            "sffd" => Ok(Scheme::Sffd),
            other => Err(Error::InvalidParameter {
                name: "scheme",
                reason: format!("unknown scheme `{other}` (expected nffd or sffd)"),
            }),
        }
    }
}

/// Per-pixel stencil coefficients stored as five dense planes.
///
/// `north` multiplies `u(i-1, j)`, `south` `u(i+1, j)`, `west` `u(i, j-1)`
/// and `east` `u(i, j+1)`. Entries that would reference a pixel outside the
/// grid are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FivePointStencil {
    rows: usize,
    cols: usize,
    center: Vec<f64>,
    north: Vec<f64>,
    south: Vec<f64>,
    east: Vec<f64>,
    west: Vec<f64>,
}

/// Edge-averaged coefficients `α¹(i, j) = ½(d¹(i, j) + d¹(i + 1, j))` and
/// `α²(i, j) = ½(d²(i, j) + d²(i, j + 1))`. Entries on the last row of `α¹`
/// and the last column of `α²` have no edge and are zero.
pub fn averaged_coefficients(d1: &ScalarField, d2: &ScalarField) -> Result<VectorField> {
    d1.ensure_same_shape(d2)?;
    let (m, n) = d1.shape();
    let a1 = ScalarField::from_fn(m, n, |i, j| {
        if i + 1 < m {
            0.5 * (d1.get(i, j) + d1.get(i + 1, j))
        } else {
            0.0
        }
    })?;
    let a2 = ScalarField::from_fn(m, n, |i, j| {
        if j + 1 < n {
            0.5 * (d2.get(i, j) + d2.get(i, j + 1))
        } else {
            0.0
        }
    })?;
    VectorField::new(a1, a2)
}

fn validate_inputs(gamma: &ScalarField, d1: &ScalarField, d2: &ScalarField) -> Result<()> {
    gamma.ensure_same_shape(d1)?;
    gamma.ensure_same_shape(d2)?;
    let n = gamma.cols();
    let bad = |name: &'static str, f: &ScalarField, ok: fn(f64) -> bool| -> Result<()> {
        match f.as_slice().iter().position(|&v| !ok(v)) {
            Some(k) => Err(Error::InvalidCoefficient {
                name,
                row: k / n,
                col: k % n,
                value: f.as_slice()[k],
            }),
            None => Ok(()),
        }
    };
    bad("gamma", gamma, |v| v > 0.0)?;
    bad("d1", d1, |v| v >= 0.0)?;
    bad("d2", d2, |v| v >= 0.0)?;
    Ok(())
}

impl FivePointStencil {
    /// Assembles the stencil for the given scheme.
    pub fn assemble(scheme: Scheme, gamma: &ScalarField, d1: &ScalarField, d2: &ScalarField) -> Result<Self> {
        validate_inputs(gamma, d1, d2)?;
        let (m, n) = gamma.shape();
        // w1[k]: weight of the edge (i, j)-(i+1, j); w2[k]: (i, j)-(i, j+1)
        let (w1, w2) = match scheme {
            Scheme::Nffd => (d1.as_slice().to_vec(), d2.as_slice().to_vec()),
            Scheme::Sffd => {
                let a = averaged_coefficients(d1, d2)?;
                (a.x.into_vec(), a.y.into_vec())
            }
        };

        let len = m * n;
        let mut st = Self {
            rows: m,
            cols: n,
            center: vec![0.0; len],
            north: vec![0.0; len],
            south: vec![0.0; len],
            east: vec![0.0; len],
            west: vec![0.0; len],
        };
        for i in 0..m {
            for j in 0..n {
                let k = i * n + j;
                let w_west = if j > 0 { w2[k - 1] } else { 0.0 };
                let w_east = if j + 1 < n { w2[k] } else { 0.0 };
                let w_north = if i > 0 { w1[k - n] } else { 0.0 };
                let w_south = if i + 1 < m { w1[k] } else { 0.0 };
                let sigma = w_west + w_east + w_north + w_south;
                st.center[k] = gamma.as_slice()[k] + sigma;
                st.west[k] = -w_west;
                st.east[k] = -w_east;
                st.north[k] = -w_north;
                st.south[k] = -w_south;
            }
        }
        Ok(st)
    }

    pub fn assemble_nffd(gamma: &ScalarField, d1: &ScalarField, d2: &ScalarField) -> Result<Self> {
        Self::assemble(Scheme::Nffd, gamma, d1, d2)
    }

    pub fn assemble_sffd(gamma: &ScalarField, d1: &ScalarField, d2: &ScalarField) -> Result<Self> {
        Self::assemble(Scheme::Sffd, gamma, d1, d2)
    }

    /// Assembly with a spatially constant reaction coefficient.
    pub fn with_constant_gamma(scheme: Scheme, gamma: f64, d1: &ScalarField, d2: &ScalarField) -> Result<Self> {
        Self::assemble(scheme, &d1.filled_like(gamma), d1, d2)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn north(&self) -> &[f64] {
        &self.north
    }

    pub fn south(&self) -> &[f64] {
        &self.south
    }

    pub fn east(&self) -> &[f64] {
        &self.east
    }

    pub fn west(&self) -> &[f64] {
        &self.west
    }

    /// Mutable south plane. Used by the verification suite for mutation
    /// checks; a stencil edited through this no longer needs to be symmetric.
    pub fn south_mut(&mut self) -> &mut [f64] {
        &mut self.south
    }

    /// Sum of the off-diagonal entries of pixel `k`'s row.
    #[inline]
    pub(crate) fn neighbor_sum(&self, u: &[f64], k: usize) -> f64 {
        let n = self.cols;
        let i = k / n;
        let j = k % n;
        let mut s = 0.0;
        if i > 0 {
            s += self.north[k] * u[k - n];
        }
        if i + 1 < self.rows {
            s += self.south[k] * u[k + n];
        }
        if j > 0 {
            s += self.west[k] * u[k - 1];
        }
        if j + 1 < n {
            s += self.east[k] * u[k + 1];
        }
        s
    }

    fn check(&self, u: &ScalarField) -> Result<()> {
        if u.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: u.shape(),
            });
        }
        Ok(())
    }

    /// Matrix-vector product with the assembled operator.
    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        self.check(u)?;
        let x = u.as_slice();
        let out = (0..x.len())
            .map(|k| self.center[k] * x[k] + self.neighbor_sum(x, k))
            .collect();
        Ok(u.with_data(out))
    }

    /// `z - T u`.
    pub fn residual(&self, z: &ScalarField, u: &ScalarField) -> Result<ScalarField> {
        self.check(z)?;
        let tu = self.apply(u)?;
        z.sub(&tu)
    }

    /// `½<T u, u> - <z, u>`.
    pub fn quadratic_energy(&self, z: &ScalarField, u: &ScalarField) -> Result<f64> {
        self.check(z)?;
        let tu = self.apply(u)?;
        Ok(0.5 * tu.dot(u)? - z.dot(u)?)
    }

    /// Dense row-major materialization: `M · vec(u) = vec(apply(u))`.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let cells = self.rows * self.cols;
        if cells > DENSE_LIMIT {
            return Err(Error::GridTooLarge {
                cells,
                limit: DENSE_LIMIT,
            });
        }
        let n = self.cols;
        let mut mat = DMatrix::zeros(cells, cells);
        for k in 0..cells {
            let i = k / n;
            let j = k % n;
            mat[(k, k)] = self.center[k];
            if i > 0 {
                mat[(k, k - n)] = self.north[k];
            }
            if i + 1 < self.rows {
                mat[(k, k + n)] = self.south[k];
            }
            if j > 0 {
                mat[(k, k - 1)] = self.west[k];
            }
            if j + 1 < n {
                mat[(k, k + 1)] = self.east[k];
            }
        }
        Ok(mat)
    }
}
