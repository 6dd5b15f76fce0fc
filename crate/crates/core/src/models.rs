//! Half-quadratic energies and their closed-form auxiliary updates.
//!
//! Five models are covered: Geman-Reynolds (GR), Geman-Yang (GY),
//! Geman-McClure (GM), Hebert-Leahy (HL) and the Ambrosio-Tortorelli
//! approximation of Mumford-Shah (MS). Integrals are plain sums over pixels
//! (unit cell area), and the data term is always `D(u) = ½‖u − u₀‖²`.
//!
//! The squared gradient `g` entering the energies depends on the
//! finite-difference scheme. Under NFFD it is `(∇⁺ᵢu)²`; under SFFD it is
//! `½((∇⁺ᵢu)² + (∇̃⁻ᵢu)²)`, which makes the assembled SFFD stencil the exact
//! Hessian of the energy in `u`. GY always uses `∇⁺` because its l-field
//! lives on forward differences; its constant-coefficient stencil is the
//! same under both schemes.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{backward_div, forward_diff, forward_grad, tilde_backward_diff, Axis, ScalarField, VectorField};
use crate::precond::SweepSpec;
use crate::stencil::Scheme;

/// Proximal weight for the MS s-step when none is given.
pub const DEFAULT_GAMMA_PROX: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Gr,
    Gy,
    Gm,
    Hl,
    Ms,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [ModelKind::Gr, ModelKind::Gy, ModelKind::Gm, ModelKind::Hl, ModelKind::Ms];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gr => "gr",
            ModelKind::Gy => "gy",
            ModelKind::Gm => "gm",
            ModelKind::Hl => "hl",
            ModelKind::Ms => "ms",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gr" => Ok(ModelKind::Gr),
            "gy" => Ok(ModelKind::Gy),
            "gm" => Ok(ModelKind::Gm),
            "hl" => Ok(ModelKind::Hl),
            "ms" => Ok(ModelKind::Ms),
            _ => Err(Error::InvalidParameter {
                name: "model",
                reason: format!("unknown model `{s}` (expected gr, gy, gm, hl or ms)"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Isotropy {
    Iso,
    #[default]
    Aniso,
}

impl Isotropy {
    pub fn name(self) -> &'static str {
        match self {
            Isotropy::Iso => "iso",
            Isotropy::Aniso => "aniso",
        }
    }
}

/// Which coefficient multiplies `|∇u|²` in the GR b-update.
///
/// `MuOverLambda` is the exact proximal minimizer of the GR energy and is
/// the default. `LambdaOverMu` reproduces the coefficient as it is commonly
/// printed and is kept for comparison only; it carries no descent guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GrCoefficient {
    #[default]
    MuOverLambda,
    LambdaOverMu,
}

/// Which u-iterate feeds `|∇u|²` in the MS s-step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MsGradientSource {
    /// The u-iterate from before the current outer iteration. This loses
    /// the descent property and is kept for comparison.
    Previous,
    /// The freshly computed u-iterate.
    #[default]
    Current,
}

/// Model selection and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub isotropy: Isotropy,
    pub mu: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub epsilon: f64,
    /// GY proximal weight; `None` means `κ = μ`.
    pub kappa: Option<f64>,
    pub gamma_prox: f64,
    pub sweep: SweepSpec,
    pub gr_coefficient: GrCoefficient,
    pub ms_gradient: MsGradientSource,
}

impl ModelConfig {
    fn base(model: ModelKind, isotropy: Isotropy) -> Self {
        Self {
            model,
            isotropy,
            mu: 1.0,
            lambda: 1.0,
            alpha: 1.0,
            epsilon: 1.0,
            kappa: None,
            gamma_prox: DEFAULT_GAMMA_PROX,
            sweep: SweepSpec::default(),
            gr_coefficient: GrCoefficient::default(),
            ms_gradient: MsGradientSource::default(),
        }
    }

    /// GR, GY, GM or HL with the given `μ` and `λ`.
    pub fn half_quadratic(model: ModelKind, isotropy: Isotropy, mu: f64, lambda: f64) -> Self {
        Self {
            mu,
            lambda,
            ..Self::base(model, isotropy)
        }
    }

    pub fn gr(isotropy: Isotropy, mu: f64, lambda: f64) -> Self {
        Self::half_quadratic(ModelKind::Gr, isotropy, mu, lambda)
    }

    pub fn gy(isotropy: Isotropy, mu: f64, lambda: f64) -> Self {
        Self::half_quadratic(ModelKind::Gy, isotropy, mu, lambda)
    }

    pub fn gm(isotropy: Isotropy, mu: f64, lambda: f64) -> Self {
        Self::half_quadratic(ModelKind::Gm, isotropy, mu, lambda)
    }

    pub fn hl(isotropy: Isotropy, mu: f64, lambda: f64) -> Self {
        Self::half_quadratic(ModelKind::Hl, isotropy, mu, lambda)
    }

    /// Ambrosio-Tortorelli with edge weight `α`, length weight `λ` and
    /// transition width `ε`.
    pub fn ms(alpha: f64, lambda: f64, epsilon: f64) -> Self {
        Self {
            alpha,
            lambda,
            epsilon,
            ..Self::base(ModelKind::Ms, Isotropy::Iso)
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.sweep.scheme = scheme;
        self
    }

    pub fn with_sweep(mut self, sweep: SweepSpec) -> Self {
        self.sweep = sweep;
        self
    }

    pub fn scheme(&self) -> Scheme {
        self.sweep.scheme
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(self.mu)
    }

    /// Weight of the auxiliary proximal metric `N = w·I`.
    pub fn aux_prox_weight(&self) -> f64 {
        match self.model {
            ModelKind::Gr => self.lambda / 2.0,
            ModelKind::Gm | ModelKind::Hl => self.mu / 2.0,
            ModelKind::Gy => self.kappa(),
            ModelKind::Ms => self.gamma_prox,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                })
            }
        }
        self.sweep.validate()?;
        positive("lambda", self.lambda)?;
        match self.model {
            ModelKind::Ms => {
                if self.isotropy != Isotropy::Iso {
                    return Err(Error::InvalidParameter {
                        name: "isotropy",
                        reason: "the MS model is isotropic only".into(),
                    });
                }
                positive("alpha", self.alpha)?;
                positive("epsilon", self.epsilon)?;
                positive("gamma_prox", self.gamma_prox)?;
            }
            _ => {
                positive("mu", self.mu)?;
                if self.model == ModelKind::Gy {
                    positive("kappa", self.kappa())?;
                }
            }
        }
        Ok(())
    }
}

/// Auxiliary variable: a scalar field (isotropic b, MS s) or a pair of
/// component fields (anisotropic b, GY l).
#[derive(Debug, Clone, PartialEq)]
pub enum Aux {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl Aux {
    pub fn components(&self) -> Vec<&ScalarField> {
        match self {
            Aux::Scalar(s) => vec![s],
            Aux::Vector(v) => vec![&v.x, &v.y],
        }
    }

    pub fn as_scalar(&self) -> Option<&ScalarField> {
        match self {
            Aux::Scalar(s) => Some(s),
            Aux::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&VectorField> {
        match self {
            Aux::Vector(v) => Some(v),
            Aux::Scalar(_) => None,
        }
    }

    pub fn min(&self) -> f64 {
        self.components().iter().map(|c| c.min()).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.components().iter().map(|c| c.max()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Squared Euclidean distance over all components.
    pub fn dist_sq(&self, other: &Aux) -> Result<f64> {
        match (self, other) {
            (Aux::Scalar(a), Aux::Scalar(b)) => dist_sq(a, b),
            (Aux::Vector(a), Aux::Vector(b)) => Ok(dist_sq(&a.x, &b.x)? + dist_sq(&a.y, &b.y)?),
            _ => Err(Error::InvalidParameter {
                name: "aux",
                reason: "cannot compare scalar and vector auxiliaries".into(),
            }),
        }
    }
}

fn dist_sq(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.ensure_same_shape(b)?;
    Ok(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Primal iterate plus auxiliary variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub u: ScalarField,
    pub aux: Aux,
}

impl ModelState {
    /// Default start: `u = u₀`, `b ≡ 1`, `l ≡ 0`, `s ≡ 1`.
    pub fn initial(cfg: &ModelConfig, u0: &ScalarField) -> Self {
        let one = u0.filled_like(1.0);
        let zero = u0.filled_like(0.0);
        let aux = match (cfg.model, cfg.isotropy) {
            (ModelKind::Ms, _) => Aux::Scalar(one),
            (ModelKind::Gy, _) => Aux::Vector(VectorField {
                x: zero.clone(),
                y: zero,
            }),
            (_, Isotropy::Iso) => Aux::Scalar(one),
            (_, Isotropy::Aniso) => Aux::Vector(VectorField { x: one.clone(), y: one }),
        };
        Self { u: u0.clone(), aux }
    }
}

/// Per-component squared gradients `(g₁, g₂)` under `scheme`.
pub fn component_grad_sq(u: &ScalarField, scheme: Scheme) -> VectorField {
    let comp = |axis| {
        let f = forward_diff(u, axis);
        match scheme {
            Scheme::Nffd => f.map(|v| v * v),
            Scheme::Sffd => {
                let t = tilde_backward_diff(u, axis);
                f.zip_map(&t, |a, b| 0.5 * (a * a + b * b)).expect("same shape")
            }
        }
    };
    VectorField {
        x: comp(Axis::X),
        y: comp(Axis::Y),
    }
}

/// `|∇u|²` for the isotropic models under `scheme`.
pub fn iso_grad_sq(u: &ScalarField, scheme: Scheme) -> ScalarField {
    let g = component_grad_sq(u, scheme);
    g.x.zip_map(&g.y, |a, b| a + b).expect("same shape")
}

fn data_term(u: &ScalarField, u0: &ScalarField) -> Result<f64> {
    Ok(0.5 * dist_sq(u, u0)?)
}

/// The GY dual term `H(l; a)`, evaluated at `r = |l|`.
pub fn gy_h(r: f64, a: f64) -> f64 {
    let sa = a.sqrt();
    if r <= sa {
        sa * r - 0.5 * r * r
    } else {
        0.5 * a
    }
}

/// Fenchel conjugate of `max(t²/2, a/2)`, evaluated at `r = |l|`.
pub fn gy_h_conj(r: f64, a: f64) -> f64 {
    let sa = a.sqrt();
    if r <= sa {
        sa * r - 0.5 * a
    } else {
        0.5 * r * r
    }
}

fn aux_matches(cfg: &ModelConfig, aux: &Aux) -> Result<()> {
    let want_vector = cfg.model == ModelKind::Gy || (cfg.model != ModelKind::Ms && cfg.isotropy == Isotropy::Aniso);
    let is_vector = matches!(aux, Aux::Vector(_));
    if want_vector != is_vector {
        return Err(Error::InvalidParameter {
            name: "aux",
            reason: format!(
                "{} {} expects a {} auxiliary",
                cfg.model,
                cfg.isotropy.name(),
                if want_vector { "vector" } else { "scalar" }
            ),
        });
    }
    Ok(())
}

/// Pairs each auxiliary component with the squared gradient it weights.
fn weighted_pairs<'a>(cfg: &ModelConfig, u: &ScalarField, aux: &'a Aux) -> Vec<(&'a ScalarField, ScalarField)> {
    match aux {
        Aux::Scalar(b) => vec![(b, iso_grad_sq(u, cfg.scheme()))],
        Aux::Vector(b) => {
            let g = component_grad_sq(u, cfg.scheme());
            vec![(&b.x, g.x), (&b.y, g.y)]
        }
    }
}

/// `L(u, aux)` for the configured model. Returns `+∞` when the auxiliary
/// leaves the model's domain.
pub fn energy(cfg: &ModelConfig, state: &ModelState, u0: &ScalarField) -> Result<f64> {
    aux_matches(cfg, &state.aux)?;
    let u = &state.u;
    let mut total = data_term(u, u0)?;
    let (mu, lambda) = (cfg.mu, cfg.lambda);
    match cfg.model {
        ModelKind::Gr => {
            for (b, g) in weighted_pairs(cfg, u, &state.aux) {
                for (&bk, &gk) in b.as_slice().iter().zip(g.as_slice()) {
                    if !(0.0..=1.0).contains(&bk) {
                        return Ok(f64::INFINITY);
                    }
                    total += 0.5 * mu * bk * gk + 0.5 * lambda * (1.0 - bk);
                }
            }
        }
        ModelKind::Gm => {
            for (b, g) in weighted_pairs(cfg, u, &state.aux) {
                for (&bk, &gk) in b.as_slice().iter().zip(g.as_slice()) {
                    if bk < 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    total += 0.5 * mu * (bk * gk / lambda + bk - 2.0 * bk.sqrt() + 1.0);
                }
            }
        }
        ModelKind::Hl => {
            for (b, g) in weighted_pairs(cfg, u, &state.aux) {
                for (&bk, &gk) in b.as_slice().iter().zip(g.as_slice()) {
                    if bk <= 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    total += 0.5 * mu * (bk * gk / lambda + bk - bk.ln() - 1.0);
                }
            }
        }
        ModelKind::Gy => {
            let l = state.aux.as_vector().expect("checked above");
            l.x.ensure_same_shape(u)?;
            let a = lambda / mu;
            let grad = forward_grad(u);
            let mut fit = 0.0;
            for k in 0..u.len() {
                let (dx, dy) = (grad.x.as_slice()[k] - l.x.as_slice()[k], grad.y.as_slice()[k] - l.y.as_slice()[k]);
                fit += dx * dx + dy * dy;
            }
            total += 0.5 * mu * fit;
            let (lx, ly) = (l.x.as_slice(), l.y.as_slice());
            let h: f64 = match cfg.isotropy {
                Isotropy::Iso => (0..u.len()).map(|k| gy_h(lx[k].hypot(ly[k]), a)).sum(),
                Isotropy::Aniso => (0..u.len()).map(|k| gy_h(lx[k].abs(), a) + gy_h(ly[k].abs(), a)).sum(),
            };
            total += mu * h;
        }
        ModelKind::Ms => {
            let s = state.aux.as_scalar().expect("checked above");
            s.ensure_same_shape(u)?;
            let g = iso_grad_sq(u, cfg.scheme());
            let edge: f64 = s.as_slice().iter().zip(g.as_slice()).map(|(sk, gk)| sk * sk * gk).sum();
            let gs = forward_grad(s);
            let len: f64 = gs.x.as_slice().iter().zip(gs.y.as_slice()).map(|(a, b)| a * a + b * b).sum();
            let pen: f64 = s.as_slice().iter().map(|sk| (sk - 1.0) * (sk - 1.0)).sum();
            total += cfg.alpha * edge + lambda * (cfg.epsilon * len + pen / (4.0 * cfg.epsilon));
        }
    }
    Ok(total)
}

/// Truncated quadratic objective `D(u) + (μ/2) Σ min(|∇u|², λ/μ)` with
/// forward differences.
pub fn truncated_objective(u: &ScalarField, u0: &ScalarField, mu: f64, lambda: f64, isotropy: Isotropy) -> Result<f64> {
    truncated_objective_with_scheme(u, u0, mu, lambda, isotropy, Scheme::Nffd)
}

/// As [`truncated_objective`] with the squared gradient of `scheme`.
pub fn truncated_objective_with_scheme(
    u: &ScalarField,
    u0: &ScalarField,
    mu: f64,
    lambda: f64,
    isotropy: Isotropy,
    scheme: Scheme,
) -> Result<f64> {
    let cap = lambda / mu;
    let reg: f64 = match isotropy {
        Isotropy::Iso => iso_grad_sq(u, scheme).as_slice().iter().map(|&g| g.min(cap)).sum(),
        Isotropy::Aniso => {
            let g = component_grad_sq(u, scheme);
            g.x.as_slice().iter().chain(g.y.as_slice()).map(|&g| g.min(cap)).sum()
        }
    };
    Ok(data_term(u, u0)? + 0.5 * mu * reg)
}

fn map_pairs(cfg: &ModelConfig, b_prev: &Aux, u: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Aux> {
    aux_matches(cfg, b_prev)?;
    let upd = |b: &ScalarField, g: &ScalarField| -> Result<ScalarField> { b.zip_map(g, &f) };
    Ok(match b_prev {
        Aux::Scalar(b) => Aux::Scalar(upd(b, &iso_grad_sq(u, cfg.scheme()))?),
        Aux::Vector(b) => {
            let g = component_grad_sq(u, cfg.scheme());
            Aux::Vector(VectorField {
                x: upd(&b.x, &g.x)?,
                y: upd(&b.y, &g.y)?,
            })
        }
    })
}

/// Pixelwise GR update `clamp(b + 1 − c·g, 0, 1)`, `c = μ/λ` by default.
pub fn gr_pixel(b_prev: f64, g: f64, c: f64) -> f64 {
    (b_prev + 1.0 - c * g).clamp(0.0, 1.0)
}

/// Real root of `x³ + p x − 1 = 0` for `p ≥ 0`, by Cardano's formula.
///
/// Written as `x = 1 / (u² + v² + p/3)` with `u = ∛(½ + √Δ)`, `v = −p/(3u)`,
/// which equals `u + v` but does not cancel when `p` is large.
pub fn gm_cubic_root(p: f64) -> f64 {
    let delta = 0.25 + p * p * p / 27.0;
    let u = (0.5 + delta.sqrt()).cbrt();
    let v = -p / (3.0 * u);
    1.0 / (u * u + v * v + p / 3.0)
}

/// Pixelwise GM update: `b = x²` with `x` the root for `p = g/λ + 1 − b`.
pub fn gm_pixel(b_prev: f64, g: f64, lambda: f64) -> f64 {
    let x = gm_cubic_root(g / lambda + 1.0 - b_prev);
    x * x
}

/// Positive root of `b² + a b − 1 = 0`, written as `2 / (a + √(a² + 4))`.
pub fn hl_quadratic_root(a: f64) -> f64 {
    2.0 / (a + (a * a + 4.0).sqrt())
}

/// Pixelwise HL update with `a = g/λ + 1 − b`.
pub fn hl_pixel(b_prev: f64, g: f64, lambda: f64) -> f64 {
    hl_quadratic_root(g / lambda + 1.0 - b_prev)
}

/// GR proximal b-update with `N = (λ/2) I`.
pub fn update_b_gr(cfg: &ModelConfig, b_prev: &Aux, u: &ScalarField) -> Result<Aux> {
    let c = match cfg.gr_coefficient {
        GrCoefficient::MuOverLambda => cfg.mu / cfg.lambda,
        GrCoefficient::LambdaOverMu => cfg.lambda / cfg.mu,
    };
    map_pairs(cfg, b_prev, u, |b, g| gr_pixel(b, g, c))
}

/// GM proximal b-update with `N = (μ/2) I`.
pub fn update_b_gm(cfg: &ModelConfig, b_prev: &Aux, u: &ScalarField) -> Result<Aux> {
    let lambda = cfg.lambda;
    map_pairs(cfg, b_prev, u, |b, g| gm_pixel(b, g, lambda))
}

/// HL proximal b-update with `N = (μ/2) I`.
pub fn update_b_hl(cfg: &ModelConfig, b_prev: &Aux, u: &ScalarField) -> Result<Aux> {
    let lambda = cfg.lambda;
    map_pairs(cfg, b_prev, u, |b, g| hl_pixel(b, g, lambda))
}

/// Shrinkage factor `l / l̂` of the GY prox map for `r = |l̂|`.
fn gy_factor(r: f64, sa: f64, tau: f64) -> f64 {
    if r <= tau * sa {
        0.0
    } else if r < (1.0 + tau) * sa {
        1.0 - sa * tau / r
    } else {
        1.0 / (1.0 + tau)
    }
}

/// One-dimensional GY prox map: minimizer of `h*(l) + (l − l̂)²/(2τ)`.
pub fn gy_shrink(l_hat: f64, a: f64, tau: f64) -> f64 {
    l_hat * gy_factor(l_hat.abs(), a.sqrt(), tau)
}

/// Two-dimensional GY prox map with the Euclidean norm.
pub fn gy_shrink_vec(l_hat: (f64, f64), a: f64, tau: f64) -> (f64, f64) {
    let f = gy_factor(l_hat.0.hypot(l_hat.1), a.sqrt(), tau);
    (l_hat.0 * f, l_hat.1 * f)
}

/// GY proximal l-update with `N = κ I`, using `l̂ = l + (μ/κ) ∇⁺u`.
pub fn update_l_gy(cfg: &ModelConfig, l_prev: &VectorField, u: &ScalarField) -> Result<VectorField> {
    l_prev.x.ensure_same_shape(u)?;
    let a = cfg.lambda / cfg.mu;
    let tau = cfg.mu / cfg.kappa();
    let grad = forward_grad(u);
    let n = u.len();
    let (mut x, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let hx = l_prev.x.as_slice()[k] + tau * grad.x.as_slice()[k];
        let hy = l_prev.y.as_slice()[k] + tau * grad.y.as_slice()[k];
        let (lx, ly) = match cfg.isotropy {
            Isotropy::Iso => gy_shrink_vec((hx, hy), a, tau),
            Isotropy::Aniso => (gy_shrink(hx, a, tau), gy_shrink(hy, a, tau)),
        };
        x.push(lx);
        y.push(ly);
    }
    Ok(VectorField {
        x: u.with_data(x),
        y: u.with_data(y),
    })
}

/// Proximal auxiliary step for GR, GY, GM and HL.
pub fn update_aux(cfg: &ModelConfig, aux_prev: &Aux, u: &ScalarField) -> Result<Aux> {
    match cfg.model {
        ModelKind::Gr => update_b_gr(cfg, aux_prev, u),
        ModelKind::Gm => update_b_gm(cfg, aux_prev, u),
        ModelKind::Hl => update_b_hl(cfg, aux_prev, u),
        ModelKind::Gy => {
            let l = aux_prev.as_vector().ok_or(Error::InvalidParameter {
                name: "aux",
                reason: "GY expects a vector auxiliary".into(),
            })?;
            Ok(Aux::Vector(update_l_gy(cfg, l, u)?))
        }
        ModelKind::Ms => Err(Error::InvalidParameter {
            name: "model",
            reason: "the MS s-step is a linear solve, not a closed-form update".into(),
        }),
    }
}

/// Exact minimizer of the energy in the auxiliary variable, without a
/// proximal term.
///
/// GR ties (`c·g = 1` exactly) keep the previous value.
pub fn update_aux_exact(cfg: &ModelConfig, aux_prev: &Aux, u: &ScalarField) -> Result<Aux> {
    let lambda = cfg.lambda;
    match cfg.model {
        ModelKind::Gr => {
            let c = cfg.mu / cfg.lambda;
            map_pairs(cfg, aux_prev, u, |b, g| match (c * g).partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => 1.0,
                Some(std::cmp::Ordering::Greater) => 0.0,
                _ => b,
            })
        }
        ModelKind::Gm => map_pairs(cfg, aux_prev, u, |_, g| 1.0 / ((1.0 + g / lambda) * (1.0 + g / lambda))),
        ModelKind::Hl => map_pairs(cfg, aux_prev, u, |_, g| 1.0 / (1.0 + g / lambda)),
        ModelKind::Gy => {
            aux_matches(cfg, aux_prev)?;
            let sa = (cfg.lambda / cfg.mu).sqrt();
            let grad = forward_grad(u);
            let keep = |t: f64| if t.abs() > sa { t } else { 0.0 };
            Ok(Aux::Vector(match cfg.isotropy {
                Isotropy::Aniso => VectorField {
                    x: grad.x.map(keep),
                    y: grad.y.map(keep),
                },
                Isotropy::Iso => {
                    let on = grad.x.zip_map(&grad.y, |a, b| if a.hypot(b) > sa { 1.0 } else { 0.0 })?;
                    VectorField {
                        x: grad.x.zip_map(&on, |a, m| a * m)?,
                        y: grad.y.zip_map(&on, |a, m| a * m)?,
                    }
                }
            }))
        }
        ModelKind::Ms => Err(Error::InvalidParameter {
            name: "model",
            reason: "the MS s-step is a linear solve, not a closed-form update".into(),
        }),
    }
}

/// Coefficients `(γ, d¹, d², z)` of the u-subproblem `γu + ∇*B∇u = z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCoefficients {
    pub gamma: ScalarField,
    pub d1: ScalarField,
    pub d2: ScalarField,
    pub rhs: ScalarField,
}

/// Euler-Lagrange coefficients of the energy in `u` with the auxiliary fixed.
pub fn u_step_coefficients(cfg: &ModelConfig, state: &ModelState, u0: &ScalarField) -> Result<LinearCoefficients> {
    aux_matches(cfg, &state.aux)?;
    u0.ensure_same_shape(&state.u)?;
    let gamma = u0.filled_like(1.0);
    let (d1, d2, rhs) = match cfg.model {
        ModelKind::Gy => {
            let l = state.aux.as_vector().expect("checked above");
            let c = u0.filled_like(cfg.mu);
            (c.clone(), c, u0.axpy(-cfg.mu, &backward_div(l))?)
        }
        ModelKind::Gr | ModelKind::Gm | ModelKind::Hl => {
            let w = if cfg.model == ModelKind::Gr { cfg.mu } else { cfg.mu / cfg.lambda };
            match &state.aux {
                Aux::Scalar(b) => (b.scale(w), b.scale(w), u0.clone()),
                Aux::Vector(b) => (b.x.scale(w), b.y.scale(w), u0.clone()),
            }
        }
        ModelKind::Ms => {
            let s = state.aux.as_scalar().expect("checked above");
            let d = s.map(|v| 2.0 * cfg.alpha * v * v);
            (d.clone(), d, u0.clone())
        }
    };
    Ok(LinearCoefficients { gamma, d1, d2, rhs })
}

/// Coefficients of the proximal MS s-subproblem
/// `(2α|∇u|² + λ/(2ε) + γ) s − 2λε Δs = λ/(2ε) + γ s_prev`.
pub fn s_step_coefficients(cfg: &ModelConfig, u: &ScalarField, s_prev: &ScalarField) -> Result<LinearCoefficients> {
    s_step_coefficients_with_prox(cfg, u, s_prev, cfg.gamma_prox)
}

/// As [`s_step_coefficients`] with an explicit proximal weight, which may be
/// zero for the unproximated subproblem.
pub fn s_step_coefficients_with_prox(
    cfg: &ModelConfig,
    u: &ScalarField,
    s_prev: &ScalarField,
    gamma_prox: f64,
) -> Result<LinearCoefficients> {
    if cfg.model != ModelKind::Ms {
        return Err(Error::InvalidParameter {
            name: "model",
            reason: "s-step coefficients exist only for MS".into(),
        });
    }
    u.ensure_same_shape(s_prev)?;
    let react = cfg.lambda / (2.0 * cfg.epsilon);
    let g = iso_grad_sq(u, cfg.scheme());
    let gamma = g.map(|gk| 2.0 * cfg.alpha * gk + react + gamma_prox);
    let diff = u.filled_like(2.0 * cfg.lambda * cfg.epsilon);
    let rhs = s_prev.map(|s| react + gamma_prox * s);
    Ok(LinearCoefficients {
        gamma,
        d1: diff.clone(),
        d2: diff,
        rhs,
    })
}
