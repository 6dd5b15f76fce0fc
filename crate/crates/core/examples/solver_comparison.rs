//! SRBGS proximal steps against CG inner solves on the HL model, measured
//! in stencil applications.
//!
//! ```text
//! cargo run --release --example solver_comparison
//! ```

use std::error::Error;

use halfquad::prelude::*;

fn main() -> Result<(), Box<dyn Error>> {
    let clean = Synthetic::Shapes.render(64, 64)?;
    let u0 = add_gaussian_noise(&clean, NoiseSpec::new(0.1, 7)?);
    let model = presets::find("hl-aniso-sigma01").expect("known preset").config;

    let cg = |rel_tol| LinearSolver::CgProx { rel_tol, max_iters: 10_000 };
    let variants = [
        ("srbgs-10", LinearSolver::Srbgs),
        ("cg-prox-1e-3", cg(1e-3)),
        ("cg-prox-1e-6", cg(1e-6)),
        ("cg-noprox-1e-3", LinearSolver::CgNoProx { rel_tol: 1e-3, max_iters: 10_000 }),
    ];
    for scheme in [Scheme::Nffd, Scheme::Sffd] {
        println!("{}:", scheme.name());
        for (name, solver) in variants {
            let mut cfg = RunConfig::new(model.clone().with_scheme(scheme));
            cfg.solver = solver;
            cfg.reference = Some(clean.clone());
            // the unproximated variant carries no descent guarantee
            cfg.check_monotone = false;
            let (_, trace) = run(&cfg, &u0)?;
            let last = trace.records.last().expect("at least one iteration");
            println!(
                "  {name:<15} {:>3} iters  energy {:.8e}  psnr {:.2}  work {:>7}  to 0.1%: {:>7}",
                trace.records.len(),
                last.energy,
                last.psnr.unwrap_or(f64::NAN),
                last.work_units,
                trace.work_to_reach(1e-3).unwrap_or(f64::NAN),
            );
        }
    }
    Ok(())
}
