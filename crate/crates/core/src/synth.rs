//! Synthetic test images with intensities in `[0, 1]`.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Synthetic {
    /// Flat gray.
    Constant,
    /// Left half dark, right half bright.
    Step,
    /// A bright disk and a mid-gray square on a dark background.
    Shapes,
    /// Smooth ramps and a shaded disk with sharp boundaries.
    Smooth,
}

impl Synthetic {
    pub const ALL: [Synthetic; 4] = [Synthetic::Constant, Synthetic::Step, Synthetic::Shapes, Synthetic::Smooth];

    pub fn name(self) -> &'static str {
        match self {
            Synthetic::Constant => "constant",
            Synthetic::Step => "step",
            Synthetic::Shapes => "shapes",
            Synthetic::Smooth => "smooth",
        }
    }

    pub fn render(self, rows: usize, cols: usize) -> Result<ScalarField> {
        let (m, n) = (rows as f64, cols as f64);
        match self {
            Synthetic::Constant => ScalarField::constant(rows, cols, 0.5),
            Synthetic::Step => ScalarField::from_fn(rows, cols, |_, j| if 2 * j < cols { 0.2 } else { 0.8 }),
            Synthetic::Shapes => ScalarField::from_fn(rows, cols, |i, j| {
                let (y, x) = ((i as f64 + 0.5) / m, (j as f64 + 0.5) / n);
                if (x - 0.35).powi(2) + (y - 0.4).powi(2) < 0.22 * 0.22 {
                    0.8
                } else if (0.55..0.85).contains(&x) && (0.55..0.85).contains(&y) {
                    0.5
                } else {
                    0.15
                }
            }),
            Synthetic::Smooth => ScalarField::from_fn(rows, cols, |i, j| {
                let (y, x) = ((i as f64 + 0.5) / m, (j as f64 + 0.5) / n);
                let r2 = (x - 0.6).powi(2) + (y - 0.45).powi(2);
                if r2 < 0.25 * 0.25 {
                    0.9 - 1.2 * r2.sqrt()
                } else if x < 0.3 {
                    0.2 + 0.4 * y
                } else {
                    0.1 + 0.3 * x * (1.0 - 0.5 * y)
                }
            }),
        }
    }
}

impl FromStr for Synthetic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Synthetic::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "synthetic",
                reason: format!("unknown image `{s}` (expected constant, step, shapes or smooth)"),
            })
    }
}

/// Parses `synth:<name>:<size>` or `synth:<name>:<rows>x<cols>`.
pub fn parse_spec(spec: &str) -> Result<Option<ScalarField>> {
    let Some(rest) = spec.strip_prefix("synth:") else {
        return Ok(None);
    };
    let bad = || Error::InvalidParameter {
        name: "input",
        reason: format!("expected synth:<name>:<size>, got `{spec}`"),
    };
    let (name, size) = rest.split_once(':').ok_or_else(bad)?;
    let (rows, cols) = match size.split_once('x') {
        Some((r, c)) => (r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?),
        None => {
            let s: usize = size.parse().map_err(|_| bad())?;
            (s, s)
        }
    };
    name.parse::<Synthetic>()?.render(rows, cols).map(Some)
}
