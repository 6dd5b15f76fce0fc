//! Image quality and step-size measures.

use crate::error::Result;
use crate::grid::ScalarField;

/// Peak signal-to-noise ratio in decibels; `+∞` for identical images.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PsnrValue {
    pub decibels: f64,
}

impl PsnrValue {
    pub fn is_infinite(self) -> bool {
        self.decibels.is_infinite()
    }
}

/// Mean squared difference.
pub fn mse(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let s: f64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(s / a.len() as f64)
}

pub fn l2_norm(a: &ScalarField) -> f64 {
    a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖a − b‖₂`.
pub fn step_norm(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.ensure_same_shape(b)?;
    Ok(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// PSNR with peak 1, measured on copies clamped to `[0, 1]`.
pub fn psnr(u: &ScalarField, reference: &ScalarField) -> Result<PsnrValue> {
    let clamp = |f: &ScalarField| f.map(|v| v.clamp(0.0, 1.0));
    let m = mse(&clamp(u), &clamp(reference))?;
    let decibels = if m == 0.0 { f64::INFINITY } else { -10.0 * m.log10() };
    Ok(PsnrValue { decibels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let a = ScalarField::constant(4, 4, 0.5).unwrap();
        assert!(psnr(&a, &a).unwrap().is_infinite());
        let b = a.map(|v| v + 0.1);
        assert!((psnr(&a, &b).unwrap().decibels - 20.0).abs() < 1e-9);
        let c = a.map(|v| v + 0.01);
        assert!((psnr(&a, &c).unwrap().decibels - 40.0).abs() < 1e-9);
        let zero = ScalarField::zeros(4, 4).unwrap();
        assert_eq!(mse(&zero, &a).unwrap(), 0.25);
        assert_eq!(l2_norm(&zero), 0.0);
        let imp = ScalarField::from_fn(3, 3, |i, j| if i == 1 && j == 2 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(l2_norm(&imp), 1.0);
    }
}
