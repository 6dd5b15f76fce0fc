//! Named parameter sets.
//!
//! The denoising presets assume intensities in `[0, 1]`; `sigma01` and
//! `sigma005` refer to the noise level they were chosen for (σ = 0.1 and
//! σ = 0.05). The MS presets were chosen for 512×512 images, and
//! [`rescaled_alpha`] adapts `α` to other sizes by the factor
//! `max(rows, cols) / 512`.
//!
//! With unnormalized pixel sums, whether a jump becomes an edge (s ≈ 0)
//! or is blurred depends on `α` alone, while the reach of the smoothing
//! relative to the image side grows like `√α / side`. Scaling `α` with the
//! square of the side keeps the reach but at 64 px blurs the edges of a
//! two-region step image away (s stays above 0.95); the linear factor keeps
//! sharp edges at 64 and 128 px.

use crate::models::{Isotropy, ModelConfig, ModelKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub config: ModelConfig,
    /// Noise level the parameters target, when they target one.
    pub sigma: Option<f64>,
}

/// Reference side length for the MS presets.
pub const MS_REFERENCE_SIZE: f64 = 512.0;

fn hq(name: &'static str, model: ModelKind, iso: Isotropy, mu: f64, lambda: f64, sigma: f64) -> Preset {
    Preset {
        name,
        config: ModelConfig::half_quadratic(model, iso, mu, lambda),
        sigma: Some(sigma),
    }
}

pub fn all() -> Vec<Preset> {
    use Isotropy::{Aniso, Iso};
    use ModelKind::{Gm, Gr, Gy, Hl};
    vec![
        hq("gm-aniso-sigma01", Gm, Aniso, 0.02, 0.05, 0.1),
        hq("gm-aniso-sigma005", Gm, Aniso, 0.007, 0.004, 0.05),
        hq("gr-aniso-sigma01", Gr, Aniso, 3.0, 0.01, 0.1),
        hq("gr-aniso-sigma005", Gr, Aniso, 1.5, 0.05, 0.05),
        hq("gy-aniso-sigma01", Gy, Aniso, 3.0, 0.01, 0.1),
        hq("gy-aniso-sigma005", Gy, Aniso, 1.5, 0.05, 0.05),
        hq("hl-aniso-sigma01", Hl, Aniso, 0.005, 0.001, 0.1),
        hq("hl-aniso-sigma005", Hl, Aniso, 0.002, 0.0005, 0.05),
        hq("gm-iso-sigma01", Gm, Iso, 0.02, 0.001, 0.1),
        hq("gr-iso-sigma005", Gr, Iso, 1.5, 0.05, 0.05),
        hq("hl-iso-sigma01", Hl, Iso, 0.005, 0.0005, 0.1),
        hq("gy-iso-sigma005", Gy, Iso, 1.5, 0.005, 0.05),
        hq("hl-aniso-bench", Hl, Aniso, 0.005, 0.05, 0.1),
        Preset {
            name: "ms-man",
            config: ModelConfig::ms(5000.0, 0.1, 0.02),
            sigma: None,
        },
        Preset {
            name: "ms-tulips",
            config: ModelConfig::ms(3000.0, 0.1, 0.02),
            sigma: None,
        },
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    all().into_iter().find(|p| p.name == name)
}

pub fn names() -> Vec<&'static str> {
    all().iter().map(|p| p.name).collect()
}

/// `α · max(rows, cols) / 512`.
pub fn rescaled_alpha(alpha: f64, rows: usize, cols: usize) -> f64 {
    alpha * rows.max(cols) as f64 / MS_REFERENCE_SIZE
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        let p = find("hl-aniso-sigma01").unwrap();
        assert_eq!((p.config.mu, p.config.lambda), (0.005, 0.001));
        assert!(find("nope").is_none());
        for p in all() {
            p.config.validate().unwrap();
        }
        assert_eq!(rescaled_alpha(5000.0, 64, 32), 625.0);
    }
}
