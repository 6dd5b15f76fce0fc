//! Linear convergence of anisotropic GY: fits `ln ‖xᵏ − x*‖` against `k`
//! with the last iterate standing in for the limit.
//!
//! ```text
//! cargo run --release --example convergence_rate [iterations]
//! ```

use std::error::Error;

use halfquad::driver::{distances_to_final, fit_linear_rate};
use halfquad::prelude::*;

fn main() -> Result<(), Box<dyn Error>> {
    let iters: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1000);
    let clean = Synthetic::Shapes.render(64, 64)?;
    let u0 = add_gaussian_noise(&clean, NoiseSpec::new(0.1, 7)?);

    let mut cfg = RunConfig::new(presets::find("gy-aniso-sigma01").expect("known preset").config);
    cfg.max_outer_iters = iters;
    cfg.energy_rel_tol = 0.0;
    cfg.record_iterates = true;
    let (_, trace) = run(&cfg, &u0)?;

    let d = distances_to_final(&trace.iterates)?;
    for k in (0..d.len()).step_by((d.len() / 10).max(1)) {
        println!("k = {k:>5}  distance {:.3e}", d[k]);
    }
    let fit = fit_linear_rate(&d)?;
    println!(
        "tail fit over {} points: factor {:.5} per iteration, r² {:.5}",
        fit.points,
        fit.factor(),
        fit.r_squared
    );
    Ok(())
}
