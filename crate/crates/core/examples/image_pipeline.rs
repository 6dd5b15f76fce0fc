//! Reads an image (or renders one), adds seeded noise, writes PGM and PNG
//! copies and reports PSNR. Noise with the same seed is reproducible.
//!
//! ```text
//! cargo run --example image_pipeline [input.pgm|input.png] [sigma] [seed]
//! ```

use std::error::Error;

use halfquad::imageio::{quantize, read_image};
use halfquad::prelude::*;

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let clean = match args.first() {
        Some(path) => read_image(path)?,
        None => quantize(&Synthetic::Shapes.render(128, 160)?),
    };
    let sigma: f64 = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(0.1);
    let seed: u64 = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(0);

    let noisy = add_gaussian_noise(&clean, NoiseSpec::new(sigma, seed)?);
    let again = add_gaussian_noise(&clean, NoiseSpec::new(sigma, seed)?);
    assert_eq!(noisy, again);

    let dir = std::env::temp_dir();
    for ext in ["pgm", "png"] {
        let path = dir.join(format!("pipeline-noisy.{ext}"));
        write_image(&path, &noisy)?;
        let back = read_image(&path)?;
        println!("{}: {}x{}, psnr vs clean {:.2} dB", path.display(), back.rows(), back.cols(), psnr(&back, &clean)?.decibels);
    }
    println!("unquantized psnr {:.2} dB", psnr(&noisy, &clean)?.decibels);
    Ok(())
}
