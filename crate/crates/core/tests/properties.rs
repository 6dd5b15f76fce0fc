use halfquad::grid::{backward_div, forward_grad, tilde_div, tilde_grad, ScalarField, VectorField};
use halfquad::models::{
    energy, gm_pixel, gr_pixel, gy_h_conj, gy_shrink, gy_shrink_vec, hl_pixel, truncated_objective_with_scheme,
    update_aux, Aux, Isotropy, ModelConfig, ModelKind, ModelState,
};
use halfquad::precond::{prox_step, SweepSpec};
use halfquad::stencil::{FivePointStencil, Scheme};
use proptest::prelude::*;

fn field(rows: usize, cols: usize, lo: f64, hi: f64) -> impl Strategy<Value = ScalarField> {
    prop::collection::vec(lo..hi, rows * cols).prop_map(move |v| ScalarField::new(rows, cols, v).unwrap())
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (2usize..8, 2usize..8)
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Nffd), Just(Scheme::Sffd)]
}

/// `(γ, d₁, d₂)` on a random shape.
fn coefficients() -> impl Strategy<Value = (ScalarField, ScalarField, ScalarField)> {
    shape().prop_flat_map(|(m, n)| (field(m, n, 0.1, 2.0), field(m, n, 0.0, 3.0), field(m, n, 0.0, 3.0)))
}

fn pair(m: usize, n: usize) -> impl Strategy<Value = (ScalarField, VectorField)> {
    (field(m, n, -1.0, 1.0), field(m, n, -1.0, 1.0), field(m, n, -1.0, 1.0))
        .prop_map(|(u, x, y)| (u, VectorField { x, y }))
}

fn max_abs(a: &ScalarField, b: &ScalarField) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn gradient_and_divergence_are_negative_adjoints((u, p) in shape().prop_flat_map(|(m, n)| pair(m, n))) {
        let lhs = forward_grad(&u).dot(&p).unwrap();
        let rhs = -u.dot(&backward_div(&p)).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
        let lhs = tilde_grad(&u).dot(&p).unwrap();
        let rhs = -u.dot(&tilde_div(&p)).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn stencil_is_symmetric_and_linear(
        (g, d1, d2) in coefficients(),
        s in scheme(),
        a in -2.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let st = FivePointStencil::assemble(s, &g, &d1, &d2).unwrap();
        let t = st.to_dense().unwrap();
        prop_assert_eq!((&t - t.transpose()).amax(), 0.0);
        let (m, n) = g.shape();
        let u = ScalarField::from_fn(m, n, |i, j| ((seed >> ((i * n + j) % 60)) & 7) as f64 - 3.5).unwrap();
        let v = g.map(|x| x.sin());
        let lhs = st.apply(&u.axpy(a, &v).unwrap()).unwrap();
        let rhs = st.apply(&u).unwrap().axpy(a, &st.apply(&v).unwrap()).unwrap();
        prop_assert!(max_abs(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn constants_see_only_the_reaction_term((g, d1, d2) in coefficients(), s in scheme(), c in -3.0f64..3.0) {
        let st = FivePointStencil::assemble(s, &g, &d1, &d2).unwrap();
        let out = st.apply(&g.filled_like(c)).unwrap();
        prop_assert!(max_abs(&out, &g.scale(c)) < 1e-13);
    }

    #[test]
    fn prox_step_decreases_the_quadratic(
        (g, d1, d2) in coefficients(),
        s in scheme(),
        sweeps in 1usize..4,
        eta in 1e-6f64..1e-2,
    ) {
        let g = g.map(|x| x + 1.0);
        let (m, n) = g.shape();
        let z = ScalarField::from_fn(m, n, |i, j| (i as f64 - j as f64 * 0.3).cos()).unwrap();
        let u_prev = g.filled_like(0.25);
        let spec = SweepSpec::new(sweeps, eta, s).unwrap();
        let u = prox_step(&g, &d1, &d2, &z, &u_prev, &spec).unwrap();
        let st = FivePointStencil::assemble(s, &g, &d1, &d2).unwrap();
        let before = st.quadratic_energy(&z, &u_prev).unwrap();
        let after = st.quadratic_energy(&z, &u).unwrap();
        let moved = u.sub(&u_prev).unwrap();
        let moved = moved.dot(&moved).unwrap();
        // T ≥ I gives at least half a unit of descent per squared step length
        prop_assert!(after + 0.5 * moved <= before + 1e-12 * before.abs().max(1.0));
    }

    #[test]
    fn gr_update_stays_in_unit_interval_and_minimizes(
        b in 0.0f64..=1.0,
        g in 0.0f64..10.0,
        mu in 0.1f64..5.0,
        lambda in 0.01f64..1.0,
    ) {
        let out = gr_pixel(b, g, mu / lambda);
        prop_assert!((0.0..=1.0).contains(&out));
        let f = |x: f64| 0.5 * mu * x * g + 0.5 * lambda * (1.0 - x) + 0.25 * lambda * (x - b).powi(2);
        for x in [0.0, 1.0, (out - 1e-3).max(0.0), (out + 1e-3).min(1.0)] {
            prop_assert!(f(out) <= f(x) + 1e-14);
        }
    }

    #[test]
    fn gm_and_hl_updates_solve_their_optimality_equations(
        b in 1e-9f64..=1.0,
        g in 0.0f64..100.0,
        lambda in 1e-3f64..1.0,
    ) {
        let p = g / lambda + 1.0 - b;
        let x = gm_pixel(b, g, lambda).sqrt();
        prop_assert!((x * x * x + p * x - 1.0).abs() < 1e-12);
        prop_assert!(x > 0.0 && x <= 1.0);
        let y = hl_pixel(b, g, lambda);
        prop_assert!((y * y + p * y - 1.0).abs() < 1e-12);
        prop_assert!(y > 0.0 && y <= 1.0);
    }

    #[test]
    fn gy_shrink_minimizes_its_prox_objective(l_hat in -5.0f64..5.0, a in 0.01f64..2.0, tau in 0.05f64..4.0) {
        let f = |l: f64| gy_h_conj(l.abs(), a) + (l - l_hat).powi(2) / (2.0 * tau);
        let l = gy_shrink(l_hat, a, tau);
        for d in [-1e-3, 1e-3, -0.1, 0.1] {
            prop_assert!(f(l) <= f(l + d) + 1e-12);
        }
        prop_assert!(f(l) <= f(0.0) + 1e-12);
    }

    #[test]
    fn gy_vector_shrink_is_radial(x in -3.0f64..3.0, y in -3.0f64..3.0, a in 0.01f64..2.0, tau in 0.05f64..4.0) {
        let (lx, ly) = gy_shrink_vec((x, y), a, tau);
        let r = x.hypot(y);
        let scaled = gy_shrink(r, a, tau);
        prop_assert!((lx.hypot(ly) - scaled).abs() < 1e-12);
        prop_assert!(lx * y - ly * x == 0.0 || (lx * y - ly * x).abs() < 1e-12);
    }

    #[test]
    fn aux_step_never_raises_the_energy(
        (u0, u) in shape().prop_flat_map(|(m, n)| (field(m, n, 0.0, 1.0), field(m, n, 0.0, 1.0))),
        kind in prop_oneof![Just(ModelKind::Gr), Just(ModelKind::Gy), Just(ModelKind::Gm), Just(ModelKind::Hl)],
        iso in prop_oneof![Just(Isotropy::Iso), Just(Isotropy::Aniso)],
        s in scheme(),
        mu in 0.01f64..3.0,
        lambda in 0.001f64..0.5,
    ) {
        let cfg = ModelConfig::half_quadratic(kind, iso, mu, lambda).with_scheme(s);
        let start = ModelState { u: u.clone(), aux: ModelState::initial(&cfg, &u0).aux };
        let before = energy(&cfg, &start, &u0).unwrap();
        let aux = update_aux(&cfg, &start.aux, &u).unwrap();
        let after = energy(&cfg, &ModelState { u, aux }, &u0).unwrap();
        prop_assert!(after <= before + 1e-12 * before.abs().max(1.0));
    }

    #[test]
    fn truncated_objective_is_a_lower_bound(
        (u0, u, b) in shape().prop_flat_map(|(m, n)| (field(m, n, 0.0, 1.0), field(m, n, 0.0, 1.0), field(m, n, 0.0, 1.0))),
        iso in prop_oneof![Just(Isotropy::Iso), Just(Isotropy::Aniso)],
        s in scheme(),
        mu in 0.1f64..3.0,
        lambda in 0.001f64..0.5,
    ) {
        let cfg = ModelConfig::gr(iso, mu, lambda).with_scheme(s);
        let aux = match iso {
            Isotropy::Iso => Aux::Scalar(b.clone()),
            Isotropy::Aniso => Aux::Vector(VectorField { x: b.clone(), y: b.map(|v| 1.0 - v) }),
        };
        let l = energy(&cfg, &ModelState { u: u.clone(), aux }, &u0).unwrap();
        let t = truncated_objective_with_scheme(&u, &u0, mu, lambda, iso, s).unwrap();
        prop_assert!(t <= l + 1e-12 * l.abs());
    }
}
