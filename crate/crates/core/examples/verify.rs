//! Runs the dense-oracle self-checks, then shows one of them by hand: a
//! single SRBGS cycle equals a preconditioned Richardson step.
//!
//! ```text
//! cargo run --release --example verify
//! ```

use std::error::Error;

use halfquad::oracle::dense_prox_step;
use halfquad::prelude::*;
use halfquad::verify::{run_checks, Sampler, VerifyConfig};

fn main() -> Result<(), Box<dyn Error>> {
    for r in run_checks(&VerifyConfig::default())? {
        println!("{} {:<32} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }

    let mut rng = Sampler::new(5);
    let (m, n) = (4, 5);
    let gamma = rng.field(m, n, 0.5, 2.0);
    let d1 = rng.field(m, n, 0.0, 3.0);
    let d2 = rng.field(m, n, 0.0, 3.0);
    let rhs = rng.field(m, n, -1.0, 1.0);
    let u_prev = rng.field(m, n, -1.0, 1.0);
    for scheme in [Scheme::Nffd, Scheme::Sffd] {
        let spec = SweepSpec::new(1, 1e-3, scheme)?;
        let fast = prox_step(&gamma, &d1, &d2, &rhs, &u_prev, &spec)?;
        let dense = dense_prox_step(scheme, &gamma, &d1, &d2, &rhs, &u_prev, 1e-3)?;
        let gap = fast.sub(&dense)?.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        println!("{}: sweep vs dense preconditioner, max difference {gap:.2e}", scheme.name());
    }
    Ok(())
}
