//! The outer alternating minimization loop.
//!
//! Each outer iteration performs a u-step (one proximal SRBGS step, or a CG
//! solve for the comparison variants) followed by the auxiliary step (a
//! closed-form proximal update, or the MS s-step linear solve), then records
//! the energy.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::linsolve::cg;
use crate::metrics::{psnr, step_norm};
use crate::models::{
    energy, s_step_coefficients_with_prox, u_step_coefficients, update_aux, update_aux_exact, Aux, ModelConfig,
    ModelKind, ModelState, MsGradientSource,
};
use crate::precond::{prox_step, srbgs};
use crate::stencil::FivePointStencil;

/// Default outer iteration cap.
pub const DEFAULT_MAX_OUTER_ITERS: usize = 300;

/// Default relative energy change below which the loop stops.
pub const DEFAULT_ENERGY_REL_TOL: f64 = 1e-8;

/// Relative slack allowed on energy increases, scaled by
/// `max(|L(u⁰, y⁰)|, ½‖u⁰‖²)` so that flat images with zero energy still
/// tolerate rounding.
pub const MONOTONE_SLACK: f64 = 1e-10;

/// How the linear subproblems are solved.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LinearSolver {
    /// `sweep.sweeps` SRBGS cycles on the `η`-shifted system.
    #[default]
    Srbgs,
    /// Conjugate gradient on the `η`-shifted system, from the previous iterate.
    CgProx { rel_tol: f64, max_iters: usize },
    /// Conjugate gradient on the unshifted system, with exact auxiliary
    /// minimization. Classical alternating minimization, kept for comparison.
    CgNoProx { rel_tol: f64, max_iters: usize },
}

impl LinearSolver {
    pub fn is_proximal(self) -> bool {
        !matches!(self, LinearSolver::CgNoProx { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub max_outer_iters: usize,
    pub energy_rel_tol: f64,
    /// Clean image for PSNR tracking.
    pub reference: Option<ScalarField>,
    /// Keep every iterate, including the initial state, in the trace.
    pub record_iterates: bool,
    pub solver: LinearSolver,
    /// Abort with [`Error::EnergyIncrease`] when the energy rises.
    pub check_monotone: bool,
}

impl RunConfig {
    pub fn new(model: ModelConfig) -> Self {
        Self {
            model,
            max_outer_iters: DEFAULT_MAX_OUTER_ITERS,
            energy_rel_tol: DEFAULT_ENERGY_REL_TOL,
            reference: None,
            record_iterates: false,
            solver: LinearSolver::Srbgs,
            check_monotone: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.energy_rel_tol >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "energy_rel_tol",
                reason: format!("must be nonnegative, got {}", self.energy_rel_tol),
            });
        }
        match self.solver {
            LinearSolver::CgProx { rel_tol, .. } | LinearSolver::CgNoProx { rel_tol, .. } if !(rel_tol > 0.0) => {
                Err(Error::InvalidParameter {
                    name: "rel_tol",
                    reason: format!("must be positive, got {rel_tol}"),
                })
            }
            _ => Ok(()),
        }
    }
}

/// Quantities recorded after outer iteration `outer_iter` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub outer_iter: usize,
    pub energy: f64,
    pub psnr: Option<f64>,
    /// `‖uᵏ − uᵏ⁻¹‖₂`.
    pub step_u: f64,
    /// `‖yᵏ − yᵏ⁻¹‖₂` over all auxiliary components.
    pub step_aux: f64,
    /// Cumulative stencil applications spent in linear solves.
    pub work_units: f64,
    /// Cumulative wall-clock time.
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    EnergyTolerance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub initial_energy: f64,
    pub initial_psnr: Option<f64>,
    pub records: Vec<IterationRecord>,
    /// Present only with `record_iterates`; starts with the initial state.
    pub iterates: Vec<ModelState>,
    pub stop: StopReason,
}

impl SolverTrace {
    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }

    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(self.initial_energy, |r| r.energy)
    }

    /// Cumulative work units at the first record whose energy is within
    /// `rel · |L_final|` of the final energy.
    pub fn work_to_reach(&self, rel: f64) -> Option<f64> {
        let target = self.final_energy();
        let band = rel * target.abs();
        self.records
            .iter()
            .find(|r| (r.energy - target).abs() <= band)
            .map(|r| r.work_units)
    }
}

struct StepOutput {
    field: ScalarField,
    work: f64,
}

fn solve_linear(
    solver: LinearSolver,
    cfg: &ModelConfig,
    gamma: &ScalarField,
    d1: &ScalarField,
    d2: &ScalarField,
    rhs: &ScalarField,
    start: &ScalarField,
    shift: f64,
) -> Result<StepOutput> {
    let sweep = &cfg.sweep;
    match solver {
        LinearSolver::Srbgs if shift > 0.0 => Ok(StepOutput {
            field: prox_step(gamma, d1, d2, rhs, start, sweep)?,
            work: sweep.work_units(),
        }),
        LinearSolver::Srbgs => Ok(StepOutput {
            field: srbgs(gamma, d1, d2, rhs, start, sweep.sweeps, sweep.scheme)?,
            work: sweep.work_units(),
        }),
        LinearSolver::CgProx { rel_tol, max_iters } | LinearSolver::CgNoProx { rel_tol, max_iters } => {
            let (g, z) = if shift > 0.0 {
                (gamma.map(|v| v + shift), rhs.axpy(shift, start)?)
            } else {
                (gamma.clone(), rhs.clone())
            };
            let st = FivePointStencil::assemble(sweep.scheme, &g, d1, d2)?;
            let rep = cg(&st, &z, start, rel_tol, max_iters)?;
            Ok(StepOutput {
                field: rep.solution,
                work: rep.matvec_count as f64,
            })
        }
    }
}

/// Runs the alternating minimization from `u0`, which is both the data and
/// the starting image.
pub fn run(cfg: &RunConfig, u0: &ScalarField) -> Result<(ModelState, SolverTrace)> {
    cfg.validate()?;
    let model = &cfg.model;
    if let Some(r) = &cfg.reference {
        r.ensure_same_shape(u0)?;
    }
    let clock = Instant::now();
    let proximal = cfg.solver.is_proximal();
    let eta = if proximal { model.sweep.eta } else { 0.0 };

    let mut state = ModelState::initial(model, u0);
    let initial_energy = energy(model, &state, u0)?;
    let measure = |u: &ScalarField| -> Result<Option<f64>> {
        cfg.reference.as_ref().map(|r| psnr(u, r).map(|p| p.decibels)).transpose()
    };
    let mut trace = SolverTrace {
        initial_energy,
        initial_psnr: measure(u0)?,
        records: Vec::new(),
        iterates: Vec::new(),
        stop: StopReason::MaxIterations,
    };
    if cfg.record_iterates {
        trace.iterates.push(state.clone());
    }
    let slack = MONOTONE_SLACK * initial_energy.abs().max(0.5 * u0.dot(u0)?);
    let mut previous = initial_energy;
    let mut work = 0.0;

    for k in 1..=cfg.max_outer_iters {
        let c = u_step_coefficients(model, &state, u0)?;
        let u_step = solve_linear(cfg.solver, model, &c.gamma, &c.d1, &c.d2, &c.rhs, &state.u, eta)?;
        work += u_step.work;
        let u_new = u_step.field;

        let aux_new = match model.model {
            ModelKind::Ms => {
                let s_prev = state.aux.as_scalar().expect("MS carries a scalar s");
                let gu = match model.ms_gradient {
                    MsGradientSource::Previous => &state.u,
                    MsGradientSource::Current => &u_new,
                };
                let prox = if proximal { model.gamma_prox } else { 0.0 };
                let s = s_step_coefficients_with_prox(model, gu, s_prev, prox)?;
                let s_step = solve_linear(cfg.solver, model, &s.gamma, &s.d1, &s.d2, &s.rhs, s_prev, 0.0)?;
                work += s_step.work;
                Aux::Scalar(s_step.field)
            }
            _ if proximal => update_aux(model, &state.aux, &u_new)?,
            _ => update_aux_exact(model, &state.aux, &u_new)?,
        };

        let next = ModelState { u: u_new, aux: aux_new };
        let current = energy(model, &next, u0)?;
        if cfg.check_monotone && !(current <= previous + slack) {
            return Err(Error::EnergyIncrease {
                iteration: k,
                previous,
                current,
                slack,
            });
        }
        trace.records.push(IterationRecord {
            outer_iter: k,
            energy: current,
            psnr: measure(&next.u)?,
            step_u: step_norm(&next.u, &state.u)?,
            step_aux: next.aux.dist_sq(&state.aux)?.sqrt(),
            work_units: work,
            seconds: clock.elapsed().as_secs_f64(),
        });
        if cfg.record_iterates {
            trace.iterates.push(next.clone());
        }
        state = next;
        let change = (previous - current).abs() / previous.abs().max(f64::MIN_POSITIVE);
        previous = current;
        if change < cfg.energy_rel_tol {
            trace.stop = StopReason::EnergyTolerance;
            break;
        }
    }
    Ok((state, trace))
}

/// `‖(uᵏ, yᵏ) − (u*, y*)‖` with the last iterate standing in for the limit.
pub fn distances_to_final(iterates: &[ModelState]) -> Result<Vec<f64>> {
    let Some(last) = iterates.last() else {
        return Ok(Vec::new());
    };
    iterates
        .iter()
        .map(|s| {
            let du = step_norm(&s.u, &last.u)?;
            Ok((du * du + s.aux.dist_sq(&last.aux)?).sqrt())
        })
        .collect()
}

/// Least-squares fit of `ln dₖ` against `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Number of points used.
    pub points: usize,
}

impl RateFit {
    /// Estimated contraction factor per iteration.
    pub fn factor(&self) -> f64 {
        self.slope.exp()
    }
}

/// Fits a line through `(k, ln dₖ)` over the last half of the sequence,
/// leaving out the final three points, where distances to a final-iterate
/// surrogate collapse. Non-positive entries are skipped.
pub fn fit_linear_rate(distances: &[f64]) -> Result<RateFit> {
    const MIN_POINTS: usize = 5;
    const DROP_LAST: usize = 3;
    let n = distances.len();
    if n < MIN_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_POINTS,
            got: n,
        });
    }
    let pts: Vec<(f64, f64)> = (n / 2..n.saturating_sub(DROP_LAST))
        .filter(|&k| distances[k] > 0.0 && distances[k].is_finite())
        .map(|k| (k as f64, distances[k].ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    // a perfectly flat sequence is fit exactly
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: pts.len(),
    })
}
