//! Mumford-Shah smoothing and edge detection on a noisy shapes image.
//!
//! Writes the smoothed image and the edge indicator `s`, which is near 0
//! on edges.
//!
//! ```text
//! cargo run --release --example segment [output-dir]
//! ```

use std::error::Error;
use std::path::PathBuf;

use halfquad::prelude::*;

fn main() -> Result<(), Box<dyn Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let (rows, cols) = (96, 96);
    let clean = Synthetic::Shapes.render(rows, cols)?;
    let u0 = add_gaussian_noise(&clean, NoiseSpec::new(0.05, 1)?);

    let mut model = presets::find("ms-man").expect("known preset").config;
    // the preset targets 512×512
    model.alpha = presets::rescaled_alpha(model.alpha, rows, cols);
    let mut cfg = RunConfig::new(model);
    cfg.max_outer_iters = 150;
    let (state, trace) = run(&cfg, &u0)?;
    let s = state.aux.as_scalar().expect("MS edge field");

    let edges = s.as_slice().iter().filter(|&&v| v < 0.5).count();
    println!("alpha {:.1}, {} iterations", cfg.model.alpha, trace.records.len());
    println!("energy {:.6e} -> {:.6e}", trace.initial_energy, trace.final_energy());
    println!("s in [{:.4}, {:.4}], {edges} of {} pixels below 0.5", s.min(), s.max(), s.len());

    write_image(dir.join("segment-input.png"), &u0)?;
    write_image(dir.join("segment-u.png"), &state.u)?;
    write_image(dir.join("segment-s.png"), s)?;
    println!("images in {}", dir.display());
    Ok(())
}
