//! Closed-form TMz scattering of a line source by a PEC circular cylinder.
//!
//! Cylinder of radius `a` centred at the origin, unit line source at `ρs`.
//! With `H_n = H_n^{(2)}` and `ψ = φ − φs`:
//!
//! ```text
//! E_inc = H_0(k|ρ − ρs|)
//! E_sca = −Σ_n [J_n(ka)/H_n(ka)] · H_n(kρs) · H_n(kρ) · e^{jnψ},   ρ ≥ a
//! ```
//!
//! Orders `±n` pair up into `2·c_n·cos(nψ)`.

use num_complex::Complex64;

use crate::mom2d::Vec2;

/// Truncation order used unless a caller asks otherwise.
pub const DEFAULT_TERMS: usize = 40;

pub fn hankel2(n: u32, x: f64) -> Complex64 {
    Complex64::new(puruspe::Jn(n, x), -puruspe::Yn(n, x))
}

#[derive(Debug, Clone)]
pub struct PecCylinderSeries {
    pub radius: f64,
    pub k: f64,
    pub source: Vec2,
    /// `c_n = J_n(ka)/H_n(ka) · H_n(kρs)` for n = 0..=terms.
    coeffs: Vec<Complex64>,
    source_angle: f64,
}

impl PecCylinderSeries {
    pub fn new(radius: f64, k: f64, source: Vec2, terms: usize) -> Self {
        let ka = k * radius;
        let rho_s = source.norm();
        let coeffs = (0..=terms as u32)
            .map(|n| puruspe::Jn(n, ka) / hankel2(n, ka) * hankel2(n, k * rho_s))
            .collect();
        Self {
            radius,
            k,
            source,
            coeffs,
            source_angle: source.y.atan2(source.x),
        }
    }

    pub fn incident(&self, point: Vec2) -> Complex64 {
        hankel2(0, self.k * (point - self.source).norm())
    }

    /// Scattered field at an exterior point (`|point| ≥ radius`).
    pub fn scattered(&self, point: Vec2) -> Complex64 {
        let rho = point.norm();
        let psi = point.y.atan2(point.x) - self.source_angle;
        let kr = self.k * rho;
        let mut sum = self.coeffs[0] * hankel2(0, kr);
        for (n, c) in self.coeffs.iter().enumerate().skip(1) {
            let term = c * hankel2(n as u32, kr) * (2.0 * (n as f64 * psi).cos());
            sum += term;
        }
        -sum
    }

    pub fn total(&self, point: Vec2) -> Complex64 {
        self.incident(point) + self.scattered(point)
    }

    /// Far-field pattern `P(φ)` with `E_sca ≈ √(2j/(πkρ)) e^{−jkρ} P(φ)`.
    pub fn far_pattern(&self, phi: f64) -> Complex64 {
        let psi = phi - self.source_angle;
        let mut sum = self.coeffs[0];
        let mut jn = Complex64::new(1.0, 0.0);
        for (n, c) in self.coeffs.iter().enumerate().skip(1) {
            jn *= Complex64::new(0.0, 1.0);
            sum += c * jn * (2.0 * (n as f64 * psi).cos());
        }
        -sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn boundary_condition_holds_on_the_cylinder() {
        let k = 2.0 * PI;
        let s = PecCylinderSeries::new(1.0, k, Vec2::new(-5.0, 0.0), DEFAULT_TERMS);
        for i in 0..36 {
            let phi = i as f64 * PI / 18.0;
            let p = Vec2::new(phi.cos(), phi.sin());
            let total = s.total(p);
            assert!(total.norm() < 1e-9 * s.incident(p).norm(), "{phi}: {total}");
        }
    }

    #[test]
    fn far_pattern_matches_large_radius_field() {
        let k = 2.0 * PI;
        let s = PecCylinderSeries::new(1.0, k, Vec2::new(0.0, 4.0), DEFAULT_TERMS);
        let rho = 4000.0;
        let kr = k * rho;
        let asym = (Complex64::new(0.0, 2.0) / (PI * kr)).sqrt() * Complex64::from_polar(1.0, -kr);
        for phi in [0.0, 0.7, 2.0, 4.5] {
            let p = Vec2::new(rho * f64::cos(phi), rho * f64::sin(phi));
            let near = s.scattered(p);
            let far = asym * s.far_pattern(phi);
            assert!((near - far).norm() < 1e-3 * far.norm(), "{phi}");
        }
    }

    #[test]
    fn hankel_large_argument_asymptote() {
        let x = 500.0;
        let h = hankel2(0, x);
        let asym = (2.0 / (PI * x)).sqrt() * Complex64::from_polar(1.0, -(x - PI / 4.0));
        assert!((h - asym).norm() < 1e-3 * asym.norm());
    }
}
