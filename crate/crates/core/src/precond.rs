//! Symmetric red-black Gauss-Seidel (SRBGS) sweeps and the proximal
//! u-update they realize.
//!
//! A pixel `(i, j)` is red when `i + j` is even (the parity is the same for
//! zero- and one-based indices). One SRBGS cycle updates all red pixels, then
//! all black pixels, then all red pixels again, each pixel solving its own
//! stencil row exactly against the current neighbor values. Red pixels only
//! touch black neighbors and vice versa, so the order inside a color does not
//! change the result.
//!
//! Running `n` cycles on the shifted system `(T + ηI) u = rhs + η u_prev`
//! from `u_prev` is one preconditioned iteration for `T u = rhs` whose
//! implicit proximal metric is bounded below by `ηI`.

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::stencil::{FivePointStencil, Scheme};

/// Default proximal shift `η`. The value is a choice; it only needs to keep
/// the proximal metric positive definite in `f64`.
pub const DEFAULT_ETA: f64 = 1e-5;

/// Upper bound accepted for `η`.
pub const ETA_MAX: f64 = 1e-2;

/// Stencil applications charged per SRBGS cycle: three half-sweeps, each
/// touching half of the pixels with a full stencil row.
pub const WORK_UNITS_PER_CYCLE: f64 = 1.5;

/// Inner iteration settings for one proximal step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub sweeps: usize,
    pub eta: f64,
    pub scheme: Scheme,
}

impl SweepSpec {
    pub fn new(sweeps: usize, eta: f64, scheme: Scheme) -> Result<Self> {
        let spec = Self { sweeps, eta, scheme };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::InvalidParameter {
                name: "sweeps",
                reason: "at least one SRBGS cycle is required".into(),
            });
        }
        if !(self.eta > 0.0 && self.eta <= ETA_MAX) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("must lie in (0, {ETA_MAX}], got {}", self.eta),
            });
        }
        Ok(())
    }

    pub fn work_units(&self) -> f64 {
        self.sweeps as f64 * WORK_UNITS_PER_CYCLE
    }
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            sweeps: 10,
            eta: DEFAULT_ETA,
            scheme: Scheme::Nffd,
        }
    }
}

/// Pixel visiting order inside one color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Traversal {
    #[default]
    RowMajor,
    Reversed,
}

fn half_sweep(st: &FivePointStencil, z: &[f64], u: &mut [f64], parity: usize, traversal: Traversal) {
    let (m, n) = st.shape();
    let center = st.center();
    let mut update = |i: usize, j: usize| {
        let k = i * n + j;
        u[k] = (z[k] - st.neighbor_sum(u, k)) / center[k];
    };
    match traversal {
        Traversal::RowMajor => {
            for i in 0..m {
                let mut j = (i + parity) % 2;
                while j < n {
                    update(i, j);
                    j += 2;
                }
            }
        }
        Traversal::Reversed => {
            for i in (0..m).rev() {
                let first = (i + parity) % 2;
                for j in (first..n).step_by(2).rev() {
                    update(i, j);
                }
            }
        }
    }
}

/// Runs `cycles` SRBGS cycles on `st u = z` starting from `u0`.
pub fn srbgs_with_stencil(
    st: &FivePointStencil,
    z: &ScalarField,
    u0: &ScalarField,
    cycles: usize,
    traversal: Traversal,
) -> Result<ScalarField> {
    if z.shape() != st.shape() || u0.shape() != st.shape() {
        return Err(Error::ShapeMismatch {
            left: st.shape(),
            right: if z.shape() != st.shape() { z.shape() } else { u0.shape() },
        });
    }
    let n = st.shape().1;
    if let Some(k) = st.center().iter().position(|&c| !(c > 0.0)) {
        return Err(Error::NonPositiveCenter {
            row: k / n,
            col: k % n,
            value: st.center()[k],
        });
    }
    let mut u = u0.clone();
    let zs = z.as_slice();
    for _ in 0..cycles {
        let x = u.as_mut_slice();
        half_sweep(st, zs, x, 0, traversal);
        half_sweep(st, zs, x, 1, traversal);
        half_sweep(st, zs, x, 0, traversal);
    }
    Ok(u)
}

/// `SRBGS(γ, d¹, d², z, u⁰, n)`: assembles the stencil and runs `n` cycles.
pub fn srbgs(
    gamma: &ScalarField,
    d1: &ScalarField,
    d2: &ScalarField,
    z: &ScalarField,
    u0: &ScalarField,
    n: usize,
    scheme: Scheme,
) -> Result<ScalarField> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "sweeps",
            reason: "at least one SRBGS cycle is required".into(),
        });
    }
    let st = FivePointStencil::assemble(scheme, gamma, d1, d2)?;
    srbgs_with_stencil(&st, z, u0, n, Traversal::RowMajor)
}

/// Proximal update `SRBGS(γ + η, d¹, d², rhs + η·u_prev, u_prev, n)`.
pub fn prox_step(
    gamma: &ScalarField,
    d1: &ScalarField,
    d2: &ScalarField,
    rhs: &ScalarField,
    u_prev: &ScalarField,
    spec: &SweepSpec,
) -> Result<ScalarField> {
    spec.validate()?;
    let shifted = gamma.map(|g| g + spec.eta);
    let rhs_bar = rhs.axpy(spec.eta, u_prev)?;
    srbgs(&shifted, d1, d2, &rhs_bar, u_prev, spec.sweeps, spec.scheme)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(m: usize, n: usize, seed: u64) -> ScalarField {
        let mut s = seed;
        ScalarField::from_fn(m, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
        .unwrap()
    }

    #[test]
    fn exact_solution_is_a_fixed_point() {
        let ones = ScalarField::constant(4, 5, 1.0).unwrap();
        let z = ScalarField::zeros(4, 5).unwrap();
        // with γ = 1 and zero diffusion each row is u = z exactly
        let u = srbgs(&ones, &z, &z, &ones, &ones, 3, Scheme::Nffd).unwrap();
        assert_eq!(u, ones);
    }

    #[test]
    fn traversal_order_within_color_is_irrelevant() {
        let gamma = field(5, 6, 1).map(|v| v + 0.5);
        let d1 = field(5, 6, 2);
        let d2 = field(5, 6, 3);
        let z = field(5, 6, 4);
        let u0 = field(5, 6, 5);
        for scheme in [Scheme::Nffd, Scheme::Sffd] {
            let st = FivePointStencil::assemble(scheme, &gamma, &d1, &d2).unwrap();
            let a = srbgs_with_stencil(&st, &z, &u0, 4, Traversal::RowMajor).unwrap();
            let b = srbgs_with_stencil(&st, &z, &u0, 4, Traversal::Reversed).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sweep_spec_validation() {
        assert!(SweepSpec::new(0, 1e-5, Scheme::Nffd).is_err());
        assert!(SweepSpec::new(1, 0.0, Scheme::Nffd).is_err());
        assert!(SweepSpec::new(1, 0.5, Scheme::Nffd).is_err());
        assert_eq!(SweepSpec::new(4, 1e-5, Scheme::Sffd).unwrap().work_units(), 6.0);
    }

    #[test]
    fn constant_prox_without_diffusion() {
        let c = ScalarField::constant(3, 3, 0.7).unwrap();
        let z = ScalarField::zeros(3, 3).unwrap();
        let g = ScalarField::constant(3, 3, 1.0).unwrap();
        let u = prox_step(&g, &z, &z, &c, &c, &SweepSpec::default()).unwrap();
        for v in u.as_slice() {
            assert!((v - 0.7).abs() < 1e-15);
        }
    }
}
