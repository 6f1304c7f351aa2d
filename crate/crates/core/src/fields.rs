//! Free-space field of the Hertzian dipole source.
//!
//! Conventions used everywhere in this crate: time dependence `e^{+jωt}`,
//! outgoing waves `e^{-jkr}/r`. The polar (θ) component of the complete
//! dipole field (radiation, induction and quasi-static terms) is used as
//! the scalar field amplitude. The dipole moment is fixed to 1 A·m; only
//! field ratios are ever consumed downstream.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{DipoleSource, Vec3};

/// Speed of light in vacuum (m/s), exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wave impedance (Ω).
pub const ETA0: f64 = 376.730_313_668;

/// Complex scalar field sample (V/m).
pub type ComplexField = Complex64;

pub fn wavelength(frequency_hz: f64) -> Result<f64> {
    if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
        return Err(Error::InvalidFrequency(frequency_hz));
    }
    Ok(SPEED_OF_LIGHT / frequency_hz)
}

pub fn wavenumber(frequency_hz: f64) -> Result<f64> {
    Ok(2.0 * PI / wavelength(frequency_hz)?)
}

/// θ-component of the dipole field at `point`.
///
/// `E_θ = j η k sinθ / (4π r) · (1 + 1/(jkr) − 1/(kr)²) · e^{−jkr}`
pub fn free_space_field(source: &DipoleSource, point: Vec3, k: f64) -> Result<ComplexField> {
    let d = point - source.position;
    let r = d.norm();
    if r < 1e-12 {
        return Err(Error::SingularPoint);
    }
    let sin_theta = source.axis.cross(&d).norm() / r;
    let kr = k * r;
    let near = Complex64::new(1.0 - 1.0 / (kr * kr), -1.0 / kr);
    let (s, c) = kr.sin_cos();
    let prop = Complex64::new(c, -s);
    let amp = ETA0 * k * sin_theta / (4.0 * PI * r);
    Ok(Complex64::new(0.0, amp) * near * prop)
}
