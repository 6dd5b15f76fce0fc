use halfquad::driver::{fit_linear_rate, run, RunConfig};
use halfquad::grid::{forward_grad, ScalarField, VectorField};
use halfquad::imageio::NormalStream;
use halfquad::linsolve::dense_solve;
use halfquad::metrics::psnr;
use halfquad::models::{
    energy, gm_cubic_root, hl_quadratic_root, truncated_objective_with_scheme, Aux, Isotropy, ModelConfig, ModelKind,
    ModelState,
};
use halfquad::precond::srbgs;
use halfquad::stencil::{FivePointStencil, Scheme};
use halfquad::synth::Synthetic;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn corner() -> (ScalarField, ScalarField) {
    // a single bright pixel at (0, 1) over zero data
    let u = ScalarField::new(2, 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
    (u.filled_like(0.0), u)
}

fn ones_like(cfg: &ModelConfig, u: &ScalarField) -> Aux {
    match cfg.isotropy {
        Isotropy::Iso => Aux::Scalar(u.filled_like(1.0)),
        Isotropy::Aniso => Aux::Vector(VectorField::constant(u.rows(), u.cols(), 1.0).unwrap()),
    }
}

#[test]
fn hand_computed_energies_on_a_two_by_two_grid() {
    let (u0, u) = corner();
    for scheme in [Scheme::Nffd, Scheme::Sffd] {
        for iso in [Isotropy::Iso, Isotropy::Aniso] {
            let cfg = ModelConfig::gr(iso, 2.0, 0.5).with_scheme(scheme);
            let st = ModelState { u: u.clone(), aux: ones_like(&cfg, &u) };
            // data 1/2, gradient mass 2 under both schemes
            assert!((energy(&cfg, &st, &u0).unwrap() - 2.5).abs() < 1e-15);

            let cfg = ModelConfig::gm(iso, 2.0, 0.5).with_scheme(scheme);
            let st = ModelState { u: u.clone(), aux: ones_like(&cfg, &u) };
            assert!((energy(&cfg, &st, &u0).unwrap() - (0.5 + 2.0 / 0.5)).abs() < 1e-14);
            let cfg = ModelConfig::hl(iso, 2.0, 0.5).with_scheme(scheme);
            assert!((energy(&cfg, &st, &u0).unwrap() - (0.5 + 2.0 / 0.5)).abs() < 1e-14);
        }
    }
    let t = |iso, scheme| truncated_objective_with_scheme(&u, &u0, 2.0, 0.5, iso, scheme).unwrap();
    // forward differences: two unit entries, each capped at 1/4
    assert!((t(Isotropy::Aniso, Scheme::Nffd) - 1.0).abs() < 1e-15);
    // symmetrized: four entries of 1/2, each capped at 1/4
    assert!((t(Isotropy::Aniso, Scheme::Sffd) - 1.5).abs() < 1e-15);
    assert!((t(Isotropy::Iso, Scheme::Nffd) - 1.0).abs() < 1e-15);
}

#[test]
fn gy_at_zero_auxiliary_is_half_mu_gradient_mass() {
    let u0 = Synthetic::Shapes.render(9, 7).unwrap();
    let g = forward_grad(&u0);
    let mass = g.dot(&g).unwrap();
    for iso in [Isotropy::Iso, Isotropy::Aniso] {
        let cfg = ModelConfig::gy(iso, 1.7, 0.2);
        let st = ModelState::initial(&cfg, &u0);
        assert!((energy(&cfg, &st, &u0).unwrap() - 0.85 * mass).abs() < 1e-12);
    }
}

#[test]
fn ms_at_unit_edge_field_is_alpha_gradient_mass() {
    let u0 = Synthetic::Smooth.render(8, 8).unwrap();
    let g = forward_grad(&u0);
    let cfg = ModelConfig::ms(3.0, 0.1, 0.02);
    let st = ModelState::initial(&cfg, &u0);
    assert!((energy(&cfg, &st, &u0).unwrap() - 3.0 * g.dot(&g).unwrap()).abs() < 1e-12);
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn closed_form_roots_match_bisection() {
    for k in -40..=80 {
        let p = if k == -40 { 0.0 } else { 10f64.powf(k as f64 / 10.0) };
        let x = bisect(|x| x * x * x + p * x - 1.0, 0.0, 1.0);
        assert!((gm_cubic_root(p) - x).abs() <= 1e-14 * x.max(1e-300) + 1e-300, "p = {p}");
        let y = bisect(|y| y * y + p * y - 1.0, 0.0, 1.0);
        assert!((hl_quadratic_root(p) - y).abs() <= 1e-14 * y, "a = {p}");
    }
}

#[test]
fn normal_stream_matches_an_independent_box_muller() {
    let mut rng = ChaCha20Rng::seed_from_u64(42);
    let mut stream = NormalStream::new(42);
    for _ in 0..50 {
        let a = rng.next_u64();
        let b = rng.next_u64();
        let u1 = ((a >> 11) + 1) as f64 / 9007199254740992.0;
        let u2 = (b >> 11) as f64 / 9007199254740992.0;
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        // sin and cos may be fused into one libm call, which rounds differently
        let close = |x: f64, y: f64| (x - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0);
        assert!(close(stream.next_normal(), r * angle.cos()));
        assert!(close(stream.next_normal(), r * angle.sin()));
    }
}

#[test]
fn many_sweeps_reach_the_direct_solution() {
    let g = ScalarField::from_fn(5, 6, |i, j| 1.0 + 0.1 * ((i * j) % 3) as f64).unwrap();
    let d1 = ScalarField::from_fn(5, 6, |i, j| 0.5 + 0.2 * ((i + j) % 4) as f64).unwrap();
    let d2 = ScalarField::from_fn(5, 6, |i, _| 0.3 + 0.1 * i as f64).unwrap();
    let z = ScalarField::from_fn(5, 6, |i, j| (i as f64 * 0.7 - j as f64).sin()).unwrap();
    for scheme in [Scheme::Nffd, Scheme::Sffd] {
        let st = FivePointStencil::assemble(scheme, &g, &d1, &d2).unwrap();
        let exact = dense_solve(&st, &z).unwrap();
        let it = srbgs(&g, &d1, &d2, &z, &z.filled_like(0.0), 200, scheme).unwrap();
        let err = it.sub(&exact).unwrap().as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(err < 1e-12, "{scheme:?}: {err}");
    }
}

#[test]
fn geometric_sequences_fit_exactly() {
    let d: Vec<f64> = (0..40).map(|k| 3.0 * 0.9f64.powi(k)).collect();
    let fit = fit_linear_rate(&d).unwrap();
    assert!((fit.slope - 0.9f64.ln()).abs() < 1e-12);
    assert!((fit.factor() - 0.9).abs() < 1e-12);
    assert!(fit.r_squared > 1.0 - 1e-12);
    assert_eq!(fit.points, 17);
}

#[test]
fn psnr_of_a_uniform_offset() {
    let r = ScalarField::constant(4, 4, 0.5).unwrap();
    let u = r.map(|v| v + 0.1);
    assert!((psnr(&u, &r).unwrap().decibels - 20.0).abs() < 1e-12);
}

#[test]
fn ms_keeps_the_edge_field_at_one_on_flat_input() {
    let u0 = ScalarField::constant(16, 16, 0.4).unwrap();
    let mut rc = RunConfig::new(ModelConfig::ms(5000.0, 0.1, 0.02));
    rc.max_outer_iters = 20;
    let (st, _) = run(&rc, &u0).unwrap();
    let s = st.aux.as_scalar().unwrap();
    assert!(s.min() > 1.0 - 1e-14 && s.max() < 1.0 + 1e-14);
    assert!(st.u.sub(&u0).unwrap().as_slice().iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn models_leave_constant_images_alone() {
    let u0 = ScalarField::constant(6, 6, 0.3).unwrap();
    for kind in [ModelKind::Gr, ModelKind::Gy, ModelKind::Gm, ModelKind::Hl] {
        for iso in [Isotropy::Iso, Isotropy::Aniso] {
            let mut rc = RunConfig::new(ModelConfig::half_quadratic(kind, iso, 0.5, 0.1));
            rc.max_outer_iters = 5;
            let (st, trace) = run(&rc, &u0).unwrap();
            let err = st.u.sub(&u0).unwrap().as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(err < 1e-15, "{kind} {iso:?}");
            assert!(trace.final_energy().abs() < 1e-25);
        }
    }
}
