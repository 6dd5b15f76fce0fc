//! Denoises a synthetic image with every anisotropic preset under both
//! difference schemes and writes the results next to the noisy input.
//!
//! ```text
//! cargo run --release --example denoise [output-dir]
//! ```

use std::error::Error;
use std::path::PathBuf;

use halfquad::prelude::*;

fn main() -> Result<(), Box<dyn Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let clean = Synthetic::Smooth.render(128, 128)?;
    let noisy = add_gaussian_noise(&clean, NoiseSpec::new(0.1, 11)?);
    write_image(dir.join("denoise-noisy.png"), &noisy)?;
    println!("noisy input: {:.2} dB", psnr(&noisy, &clean)?.decibels);

    for name in ["gr-aniso-sigma01", "gy-aniso-sigma01", "gm-aniso-sigma01", "hl-aniso-sigma01"] {
        let preset = presets::find(name).expect("known preset");
        for scheme in [Scheme::Nffd, Scheme::Sffd] {
            let mut cfg = RunConfig::new(preset.config.clone().with_scheme(scheme));
            cfg.reference = Some(clean.clone());
            let (state, trace) = run(&cfg, &noisy)?;
            let path = dir.join(format!("denoise-{name}-{}.png", scheme.name()));
            write_image(&path, &state.u)?;
            println!(
                "{name:<18} {:<4}  {:>3} iterations  energy {:.6e}  psnr {:.2} dB",
                scheme.name(),
                trace.records.len(),
                trace.final_energy(),
                trace.records.last().and_then(|r| r.psnr).unwrap_or(f64::NAN),
            );
        }
    }
    println!("images in {}", dir.display());
    Ok(())
}
