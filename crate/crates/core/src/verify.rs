//! Self-check suite comparing the production kernels against the dense
//! oracles on small random problems.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::grid::{backward_div, forward_grad, tilde_div, tilde_grad, ScalarField, VectorField};
use crate::linsolve::{cg, dense_solve};
use crate::models::{gm_pixel, gr_pixel, gy_h_conj, gy_shrink, hl_pixel};
use crate::oracle::{dense_operator, dense_prox_step, grid_argmin};
use crate::precond::{prox_step, SweepSpec};
use crate::stencil::{FivePointStencil, Scheme};

/// Deliberate defects for exercising the suite itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Negate every south coefficient of assembled stencils.
    SouthSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub sizes: Vec<(usize, usize)>,
    pub trials: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            sizes: vec![(3, 3), (4, 5), (5, 5)],
            trials: 10,
            seed: 2024,
            fault: None,
        }
    }
}

/// Uniform samples on `[0, 1)` from ChaCha20.
pub struct Sampler(ChaCha20Rng);

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn field(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> ScalarField {
        ScalarField::from_fn(rows, cols, |_, _| self.range(lo, hi)).expect("valid shape")
    }
}

fn assemble(scheme: Scheme, g: &ScalarField, d1: &ScalarField, d2: &ScalarField, fault: Option<Fault>) -> Result<FivePointStencil> {
    let mut st = FivePointStencil::assemble(scheme, g, d1, d2)?;
    if fault == Some(Fault::SouthSign) {
        st.south_mut().iter_mut().for_each(|v| *v = -*v);
    }
    Ok(st)
}

struct Tally {
    name: &'static str,
    worst: f64,
    tol: f64,
    failures: usize,
    cases: usize,
}

impl Tally {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            worst: 0.0,
            tol,
            failures: 0,
            cases: 0,
        }
    }

    fn record(&mut self, err: f64) {
        self.cases += 1;
        if !(err <= self.tol) {
            self.failures += 1;
        }
        if err > self.worst || err.is_nan() {
            self.worst = err;
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.to_string(),
            passed: self.failures == 0 && self.cases > 0,
            detail: format!(
                "{} cases, {} failures, worst {:.3e} (tol {:.0e})",
                self.cases, self.failures, self.worst, self.tol
            ),
        }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs every check and returns one result per check.
pub fn run_checks(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut rng = Sampler::new(cfg.seed);
    let mut symmetry = Tally::new("stencil-symmetry", 0.0);
    let mut operator = Tally::new("stencil-vs-dense-operator", 1e-12);
    let mut precond = Tally::new("preconditioner-identity", 1e-10);
    let mut schemes = Tally::new("scheme-equivalence", 0.0);
    let mut neumann = Tally::new("neumann-consistency", 1e-13);
    let mut adjoint = Tally::new("gradient-divergence-adjointness", 1e-12);
    let mut solver = Tally::new("cg-vs-dense-solve", 1e-8);

    for &(m, n) in &cfg.sizes {
        for _ in 0..cfg.trials {
            let gamma = rng.field(m, n, 0.5, 2.0);
            let d1 = rng.field(m, n, 0.0, 3.0);
            let d2 = rng.field(m, n, 0.0, 3.0);
            for scheme in [Scheme::Nffd, Scheme::Sffd] {
                let st = assemble(scheme, &gamma, &d1, &d2, cfg.fault)?;
                let dense = st.to_dense()?;
                symmetry.record((&dense - dense.transpose()).amax());
                operator.record((&dense - dense_operator(scheme, &gamma, &d1, &d2)?).amax());

                let rhs = rng.field(m, n, -1.0, 1.0);
                let u_prev = rng.field(m, n, -1.0, 1.0);
                let eta = rng.range(1e-6, 1e-2);
                let spec = SweepSpec::new(1, eta, scheme)?;
                let fast = prox_step(&gamma, &d1, &d2, &rhs, &u_prev, &spec)?;
                let slow = dense_prox_step(scheme, &gamma, &d1, &d2, &rhs, &u_prev, eta)?;
                precond.record(max_abs_diff(fast.as_slice(), slow.as_slice()));

                let c = rng.range(0.0, 2.0);
                let applied = st.apply(&gamma.filled_like(c))?;
                let expect = gamma.scale(c);
                neumann.record(max_abs_diff(applied.as_slice(), expect.as_slice()));

                let rep = cg(&st, &rhs, &u_prev, 1e-13, 10 * m * n);
                let direct = dense_solve(&st, &rhs);
                match (rep, direct) {
                    (Ok(r), Ok(x)) => solver.record(max_abs_diff(r.solution.as_slice(), x.as_slice())),
                    _ => solver.record(f64::INFINITY),
                }
            }

            let g0 = gamma.filled_like(rng.range(0.5, 2.0));
            let c1 = gamma.filled_like(rng.range(0.0, 3.0));
            let c2 = gamma.filled_like(rng.range(0.0, 3.0));
            let a = assemble(Scheme::Nffd, &g0, &c1, &c2, cfg.fault)?;
            let b = assemble(Scheme::Sffd, &g0, &c1, &c2, cfg.fault)?;
            schemes.record(if a == b { 0.0 } else { 1.0 });

            let u = rng.field(m, n, -1.0, 1.0);
            let p = VectorField {
                x: rng.field(m, n, -1.0, 1.0),
                y: rng.field(m, n, -1.0, 1.0),
            };
            let lhs = forward_grad(&u).dot(&p)?;
            let rhs = -u.dot(&backward_div(&p))?;
            adjoint.record((lhs - rhs).abs());
            let lhs = tilde_grad(&u).dot(&p)?;
            let rhs = -u.dot(&tilde_div(&p))?;
            adjoint.record((lhs - rhs).abs());
        }
    }

    let mut prox = Tally::new("aux-prox-optimality", 1e-3);
    let trials = 20 * cfg.trials.max(1);
    for _ in 0..trials {
        let mu = rng.range(0.1, 3.0);
        let lambda = rng.range(0.01, 1.0);
        let g = rng.range(0.0, 2.0) * lambda / mu;
        let b_prev = rng.range(0.0, 1.0);
        let w = lambda / 2.0;
        let best = grid_argmin(0.0, 1.0, 10_001, |b| {
            0.5 * mu * b * g + 0.5 * lambda * (1.0 - b) + 0.5 * w * (b - b_prev).powi(2)
        });
        prox.record((gr_pixel(b_prev, g, mu / lambda) - best).abs());

        let b_prev = rng.range(0.01, 1.0);
        let gg = rng.range(0.0, 3.0) * lambda;
        let w = mu / 2.0;
        let best = grid_argmin(0.0, 1.0, 10_001, |b| {
            0.5 * mu * (b * gg / lambda + b - 2.0 * b.sqrt() + 1.0) + 0.5 * w * (b - b_prev).powi(2)
        });
        prox.record((gm_pixel(b_prev, gg, lambda) - best).abs());
        let best = grid_argmin(1e-4, 1.0, 10_001, |b| {
            0.5 * mu * (b * gg / lambda + b - b.ln() - 1.0) + 0.5 * w * (b - b_prev).powi(2)
        });
        prox.record((hl_pixel(b_prev, gg, lambda) - best).abs());

        let a = rng.range(0.1, 2.0);
        let tau = rng.range(0.2, 3.0);
        let l_hat = rng.range(-4.0, 4.0);
        let best = grid_argmin(-5.0, 5.0, 10_001, |l| gy_h_conj(l.abs(), a) + (l - l_hat).powi(2) / (2.0 * tau));
        prox.record((gy_shrink(l_hat, a, tau) - best).abs());
    }

    Ok(vec![
        symmetry.finish(),
        operator.finish(),
        precond.finish(),
        schemes.finish(),
        neumann.finish(),
        adjoint.finish(),
        solver.finish(),
        prox.finish(),
    ])
}
