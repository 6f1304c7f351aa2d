//! Two-dimensional method of moments for TMz scattering by perfectly
//! conducting cylinders of arbitrary smooth cross-section.
//!
//! The contour is cut into straight segments carrying constant (pulse)
//! surface currents. The electric-field integral equation is enforced at
//! segment midpoints (point matching):
//!
//! ```text
//! Σ_n J_n ∫_{seg n} H_0^{(2)}(k|ρ_m − ρ'|) dl' = E_inc(ρ_m)
//! ```
//!
//! The line source is normalised so that `E_inc(ρ) = H_0^{(2)}(k|ρ − ρs|)`;
//! the common factor `−kη/4` of the physical fields cancels in every ratio.
//! Scattered field: `E_sca(ρ) = −Σ_n J_n ∫_{seg n} H_0^{(2)}(k|ρ − ρ'|) dl'`.

use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cylinder_series::hankel2;
use crate::diffraction::{blocked_field, QuadratureSpec};
use crate::error::{Error, Result};
use crate::fields::{free_space_field, ComplexField};
use crate::geometry::{BodyModel, Pose, Scene, Vec3};

pub type Vec2 = Vector2<f64>;

/// exp(Euler–Mascheroni): `H_0^{(2)}(x) ≈ 1 − j(2/π)·ln(γx/2)` for small x.
pub const GAMMA_EXP: f64 = 1.781_072_417_990_198;

/// Lower bound on segment count regardless of electrical size.
pub const MIN_SEGMENTS: usize = 12;

/// Allowed relative shortfall of the polygon perimeter.
pub const PERIMETER_TOLERANCE: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Circle {
        radius: f64,
    },
    /// Semi-axis `a` along x, `b` along y.
    Ellipse {
        a: f64,
        b: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Vec2,
    pub end: Vec2,
    pub midpoint: Vec2,
    pub length: f64,
    pub tangent: Vec2,
}

impl Segment {
    fn new(start: Vec2, end: Vec2) -> Self {
        let d = end - start;
        let length = d.norm();
        Self {
            start,
            end,
            midpoint: (start + end) / 2.0,
            length,
            tangent: d / length,
        }
    }

    fn distance_to(&self, p: Vec2) -> f64 {
        let t = ((p - self.start).dot(&self.tangent)).clamp(0.0, self.length);
        (p - (self.start + self.tangent * t)).norm()
    }
}

/// Closed polyline, counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub segments: Vec<Segment>,
}

impl Contour {
    fn from_vertices(vertices: &[Vec2]) -> Self {
        let n = vertices.len();
        let segments = (0..n)
            .map(|i| Segment::new(vertices[i], vertices[(i + 1) % n]))
            .collect();
        Self { segments }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    pub fn max_segment_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).fold(0.0, f64::max)
    }

    /// Rotated by `theta_deg` about the origin, then translated.
    pub fn transformed(&self, theta_deg: f64, offset: Vec2) -> Self {
        let (s, c) = theta_deg.to_radians().sin_cos();
        let rot = |p: Vec2| Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y) + offset;
        let vertices: Vec<Vec2> = self.segments.iter().map(|seg| rot(seg.start)).collect();
        Self::from_vertices(&vertices)
    }

    /// Even-odd ray cast.
    pub fn contains(&self, p: Vec2) -> bool {
        let mut inside = false;
        for seg in &self.segments {
            let (a, b) = (seg.start, seg.end);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Cuts `shape` into equal-arc-length chords, at least
/// `segments_per_wavelength` per wavelength.
pub fn discretize_contour(shape: Shape, segments_per_wavelength: usize, k: f64) -> Result<Contour> {
    if segments_per_wavelength < 10 {
        return Err(Error::TooCoarse(segments_per_wavelength));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::invalid("k", "wavenumber must be positive"));
    }
    let lambda = 2.0 * PI / k;
    let (a, b) = match shape {
        Shape::Circle { radius } => (radius, radius),
        Shape::Ellipse { a, b } => (a, b),
    };
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("shape", "semi-axes must be positive"));
    }
    let arc = EllipseArc::new(a, b);
    let n0 = ((arc.perimeter() / lambda * segments_per_wavelength as f64).ceil() as usize)
        .max(MIN_SEGMENTS);
    let vertices_for = |n: usize| -> Vec<Vec2> {
        match shape {
            Shape::Circle { radius } => (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    Vec2::new(radius * t.cos(), radius * t.sin())
                })
                .collect(),
            Shape::Ellipse { .. } => (0..n)
                .map(|i| {
                    let t = arc.parameter_at(
                        arc.perimeter() * i as f64 / n as f64,
                        2.0 * PI * i as f64 / n as f64,
                    );
                    Vec2::new(a * t.cos(), b * t.sin())
                })
                .collect(),
        }
    };
    // electrically small contours need extra chords to keep the polygon
    // perimeter within PERIMETER_TOLERANCE of the true one
    let mut n = n0;
    loop {
        let contour = Contour::from_vertices(&vertices_for(n));
        if contour.perimeter() >= arc.perimeter() * (1.0 - PERIMETER_TOLERANCE) {
            return Ok(contour);
        }
        n += (n / 8).max(1);
    }
}

/// Arc length along `(a cos t, b sin t)`.
struct EllipseArc {
    a: f64,
    b: f64,
    panel_starts: Vec<f64>,
}

const ARC_PANELS: usize = 256;

impl EllipseArc {
    fn new(a: f64, b: f64) -> Self {
        let mut arc = Self {
            a,
            b,
            panel_starts: Vec::with_capacity(ARC_PANELS + 1),
        };
        let w = 2.0 * PI / ARC_PANELS as f64;
        let mut acc = 0.0;
        arc.panel_starts.push(0.0);
        for p in 0..ARC_PANELS {
            acc += arc.integrate(p as f64 * w, (p + 1) as f64 * w);
            arc.panel_starts.push(acc);
        }
        arc
    }

    fn speed(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        (self.a * self.a * s * s + self.b * self.b * c * c).sqrt()
    }

    fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let (x, w) = GL8;
        let half = (hi - lo) / 2.0;
        let mid = (hi + lo) / 2.0;
        x.iter()
            .zip(w.iter())
            .map(|(xi, wi)| wi * self.speed(mid + half * xi))
            .sum::<f64>()
            * half
    }

    fn perimeter(&self) -> f64 {
        self.panel_starts[ARC_PANELS]
    }

    fn length_to(&self, t: f64) -> f64 {
        let w = 2.0 * PI / ARC_PANELS as f64;
        let p = ((t / w).floor() as usize).min(ARC_PANELS - 1);
        self.panel_starts[p] + self.integrate(p as f64 * w, t)
    }

    /// Newton solve of `length_to(t) = s`.
    fn parameter_at(&self, s: f64, guess: f64) -> f64 {
        let mut t = guess;
        for _ in 0..50 {
            let step = (self.length_to(t) - s) / self.speed(t);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        t
    }
}

/// 8-point Gauss–Legendre nodes and weights on [−1, 1].
const GL8: ([f64; 8], [f64; 8]) = (
    [
        -0.960_289_856_497_536_2,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_2,
    ],
    [
        0.101_228_536_290_376_26,
        0.222_381_034_453_374_47,
        0.313_706_645_877_887_3,
        0.362_683_783_378_362,
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_47,
        0.101_228_536_290_376_26,
    ],
);

/// 4-point Gauss–Legendre nodes and weights on [−1, 1].
const GL4: ([f64; 4], [f64; 4]) = (
    [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ],
    [
        0.347_854_845_137_453_85,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_85,
    ],
);

fn gl_segment<const N: usize>(
    rule: &([f64; N], [f64; N]),
    seg: &Segment,
    p: Vec2,
    k: f64,
) -> Complex64 {
    let half = seg.length / 2.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in rule.0.iter().zip(rule.1.iter()) {
        let q = seg.midpoint + seg.tangent * (half * x);
        acc += hankel2(0, k * (p - q).norm()) * *w;
    }
    acc * half
}

/// `∫_seg H_0^{(2)}(k|p − ρ'|) dl'` for `p` off the segment.
fn segment_integral(seg: &Segment, p: Vec2, k: f64) -> Complex64 {
    let d = (p - seg.midpoint).norm();
    if d < 2.0 * seg.length {
        // split in four for the near zone
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            let a = seg.start + seg.tangent * (seg.length * i as f64 / 4.0);
            let b = seg.start + seg.tangent * (seg.length * (i + 1) as f64 / 4.0);
            acc += gl_segment(&GL8, &Segment::new(a, b), p, k);
        }
        acc
    } else if d < 6.0 * seg.length {
        gl_segment(&GL8, seg, p, k)
    } else {
        gl_segment(&GL4, seg, p, k)
    }
}

/// `∫_{−Δ/2}^{Δ/2} H_0^{(2)}(k|t|) dt`.
///
/// Small-argument part done analytically,
/// `Δ·[1 − j(2/π)·ln(γkΔ/(4e))]` with `γ = 1.781072418`, plus Gauss–Legendre
/// quadrature of the smooth remainder `H_0^{(2)}(x) − 1 + j(2/π)ln(γx/2)`.
pub fn self_term(length: f64, k: f64) -> Complex64 {
    let analytic =
        Complex64::new(1.0, -(2.0 / PI) * (GAMMA_EXP * k * length / (4.0 * E)).ln()) * length;
    let half = length / 2.0;
    let (x, w) = GL8;
    let mut rem = Complex64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w.iter()) {
        let t = half * (xi + 1.0) / 2.0;
        let kt = k * t;
        let h = hankel2(0, kt) - Complex64::new(1.0, -(2.0 / PI) * (GAMMA_EXP * kt / 2.0).ln());
        rem += h * *wi;
    }
    // integral over [0, Δ/2] is (Δ/4)·Σ; doubled for the symmetric half
    analytic + rem * (half / 2.0) * 2.0
}

#[derive(Debug, Clone)]
pub struct ImpedanceSystem {
    pub matrix: DMatrix<Complex64>,
    pub excitation: DVector<Complex64>,
}

pub fn incident_field(source: Vec2, point: Vec2, k: f64) -> Complex64 {
    hankel2(0, k * (point - source).norm())
}

/// Assembles the point-matched EFIE. Rows are filled in parallel.
pub fn assemble(contour: &Contour, source: Vec2, k: f64) -> ImpedanceSystem {
    let n = contour.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let pm = contour.segments[m].midpoint;
            contour
                .segments
                .iter()
                .enumerate()
                .map(|(j, seg)| {
                    if j == m {
                        self_term(seg.length, k)
                    } else {
                        segment_integral(seg, pm, k)
                    }
                })
                .collect()
        })
        .collect();
    let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let excitation = DVector::from_iterator(
        n,
        contour
            .segments
            .iter()
            .map(|s| incident_field(source, s.midpoint, k)),
    );
    ImpedanceSystem { matrix, excitation }
}

/// Solved surface currents on a contour.
#[derive(Debug, Clone)]
pub struct MomSolution {
    pub contour: Contour,
    pub source: Vec2,
    pub k: f64,
    pub currents: Vec<Complex64>,
    /// `‖Z·J − v‖ / ‖v‖`
    pub residual: f64,
}

pub fn assemble_and_solve(contour: &Contour, source: Vec2, k: f64) -> Result<MomSolution> {
    if contour.contains(source) || contour.distance_to(source) < 1e-9 {
        return Err(Error::SourceInsideContour);
    }
    let system = assemble(contour, source, k);
    let lu = system.matrix.clone().lu();
    let diag = lu.u().diagonal();
    let max = diag.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let min = diag.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if ratio.is_nan() || ratio <= 1e-13 {
        return Err(Error::SingularMatrix(ratio));
    }
    let currents = lu
        .solve(&system.excitation)
        .ok_or(Error::SingularMatrix(ratio))?;
    let residual =
        (&system.matrix * &currents - &system.excitation).norm() / system.excitation.norm();
    Ok(MomSolution {
        contour: contour.clone(),
        source,
        k,
        currents: currents.iter().copied().collect(),
        residual,
    })
}

impl MomSolution {
    pub fn scattered(&self, point: Vec2) -> Complex64 {
        -self
            .contour
            .segments
            .iter()
            .zip(&self.currents)
            .map(|(seg, j)| j * segment_integral(seg, point, self.k))
            .sum::<Complex64>()
    }

    /// Far-field pattern `P(φ)` with `E_sca ≈ √(2j/(πkρ)) e^{−jkρ} P(φ)`.
    pub fn far_pattern(&self, phi: f64) -> Complex64 {
        let dir = Vec2::new(phi.cos(), phi.sin());
        let (x, w) = GL4;
        let mut acc = Complex64::new(0.0, 0.0);
        for (seg, j) in self.contour.segments.iter().zip(&self.currents) {
            let half = seg.length / 2.0;
            let mut s = Complex64::new(0.0, 0.0);
            for (xi, wi) in x.iter().zip(w.iter()) {
                let q = seg.midpoint + seg.tangent * (half * xi);
                s += Complex64::from_polar(*wi, self.k * dir.dot(&q));
            }
            acc += j * s * half;
        }
        -acc
    }
}

/// Incident plus scattered field at `point`.
pub fn total_field_2d(solution: &MomSolution, point: Vec2) -> Result<ComplexField> {
    let min_len = solution
        .contour
        .segments
        .iter()
        .map(|s| s.length)
        .fold(f64::INFINITY, f64::min);
    if solution.contour.distance_to(point) < 1e-9 * min_len.max(1e-300) {
        return Err(Error::PointOnContour);
    }
    Ok(incident_field(solution.source, point, solution.k) + solution.scattered(point))
}

/// Width of the peak region below the slice maximum.
pub const PEAK_REGION_DB: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowComparison {
    /// Distance between the peak-region centres, rounded to whole cells.
    pub peak_offset_cells: usize,
    /// Distance between the raw maxima (diagnostic).
    pub argmax_offset_cells: usize,
    pub mean_abs_diff_db: f64,
}

/// Centre (fractional cell) of the cells within [`PEAK_REGION_DB`] of the
/// maximum. Deep shadows behind smooth bodies have a bright axial spot and
/// twin maxima either side of it; the region centre sits between them.
pub fn peak_center(slice: &[f64]) -> f64 {
    let max = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (sum, n) = slice
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= max - PEAK_REGION_DB)
        .fold((0.0, 0usize), |(s, n), (i, _)| (s + i as f64, n + 1));
    sum / n as f64
}

/// Compares two transverse attenuation slices (dB) sampled on the same cells.
pub fn shadow_profile_compare(
    mom_slice: &[f64],
    diffraction_slice: &[f64],
) -> Result<ShadowComparison> {
    if mom_slice.len() != diffraction_slice.len() {
        return Err(Error::LengthMismatch(
            mom_slice.len(),
            diffraction_slice.len(),
        ));
    }
    if mom_slice.is_empty() {
        return Err(Error::EmptySamples);
    }
    if mom_slice
        .iter()
        .chain(diffraction_slice)
        .any(|v| !v.is_finite())
    {
        return Err(Error::invalid("slice", "non-finite attenuation"));
    }
    let argmax = |v: &[f64]| {
        v.iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &x)| {
                if x > best.1 {
                    (i, x)
                } else {
                    best
                }
            })
            .0
    };
    let mean_abs_diff_db = mom_slice
        .iter()
        .zip(diffraction_slice)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / mom_slice.len() as f64;
    Ok(ShadowComparison {
        peak_offset_cells: (peak_center(mom_slice) - peak_center(diffraction_slice))
            .abs()
            .round() as usize,
        argmax_offset_cells: argmax(mom_slice).abs_diff(argmax(diffraction_slice)),
        mean_abs_diff_db,
    })
}

/// Horizontal cross-section of the elliptical body at `pose`.
pub fn body_cross_section(
    body: &BodyModel,
    pose: Pose,
    segments_per_wavelength: usize,
    k: f64,
) -> Result<Contour> {
    let shape = Shape::Ellipse {
        a: body.thickness_ws2 / 2.0,
        b: body.width_ws1 / 2.0,
    };
    Ok(discretize_contour(shape, segments_per_wavelength, k)?
        .transformed(pose.theta, Vec2::new(pose.x, pose.y)))
}

/// Attenuation (dB) along the first-surface row at `z = 0` from both
/// models: (2D MoM with the body cross-section, 3D absorbing screen).
pub fn cross_model_slices(
    scene: &Scene,
    pose: Pose,
    quad: &QuadratureSpec,
    segments_per_wavelength: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = scene.wavenumber();
    let m = &scene.manifold;
    let x = m.surface_x(0);
    let contour = body_cross_section(&scene.body, pose, segments_per_wavelength, k)?;
    let src = Vec2::new(scene.source.position.x, scene.source.position.y);
    let sol = assemble_and_solve(&contour, src, k)?;
    let ys: Vec<f64> = (0..m.n_cols).map(|c| m.col_y(c)).collect();
    let mom = ys
        .par_iter()
        .map(|&y| {
            let p = Vec2::new(x, y);
            let e = total_field_2d(&sol, p)?;
            Ok(-20.0 * (e / incident_field(src, p, k)).norm().log10())
        })
        .collect::<Result<Vec<f64>>>()?;
    let diff = ys
        .iter()
        .map(|&y| {
            let p = Vec3::new(x, y, 0.0);
            let e = blocked_field(scene, pose, p, quad)?.field;
            let e0 = free_space_field(&scene.source, p, k)?;
            Ok(-20.0 * (e / e0).norm().log10())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((mom, diff))
}

/// RMS of `|a − b|` relative to the RMS of `|b|`.
pub fn relative_rms(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder_series::{PecCylinderSeries, DEFAULT_TERMS};

    const K: f64 = 2.0 * PI; // λ = 1

    /// Gauss–Kummer series for the ellipse perimeter.
    fn ellipse_perimeter(a: f64, b: f64) -> f64 {
        let h = ((a - b) / (a + b)).powi(2);
        let mut sum = 1.0;
        let mut coef = 1.0; // binom(1/2, n)
        let mut hn = 1.0;
        for n in 1..60 {
            coef *= (0.5 - (n as f64 - 1.0)) / n as f64;
            hn *= h;
            sum += coef * coef * hn;
        }
        PI * (a + b) * sum
    }

    #[test]
    fn circle_segment_count_and_perimeter() {
        let c = discretize_contour(Shape::Circle { radius: 1.0 }, 20, K).unwrap();
        assert_eq!(c.len(), 126);
        assert!((c.perimeter() / (2.0 * PI) - 1.0).abs() < 1e-3);
        assert!(c.max_segment_length() <= 0.1);
    }

    #[test]
    fn degenerate_ellipse_is_the_circle() {
        let c = discretize_contour(Shape::Circle { radius: 0.7 }, 20, K).unwrap();
        let e = discretize_contour(Shape::Ellipse { a: 0.7, b: 0.7 }, 20, K).unwrap();
        assert_eq!(c.len(), e.len());
        for (s, t) in c.segments.iter().zip(&e.segments) {
            assert!((s.start - t.start).norm() < 1e-12);
            assert!((s.end - t.end).norm() < 1e-12);
        }
    }

    #[test]
    fn ellipse_perimeter_within_tolerance() {
        for (a, b) in [(0.16, 0.26), (2.0, 0.5), (1.0, 1.3)] {
            let c = discretize_contour(Shape::Ellipse { a, b }, 20, K).unwrap();
            let exact = ellipse_perimeter(a, b);
            assert!((c.perimeter() / exact - 1.0).abs() < 1e-3, "{a} {b}");
            assert!(c.max_segment_length() <= 0.05 + 1e-12);
            // equal arcs give near-equal chords
            let min = c
                .segments
                .iter()
                .map(|s| s.length)
                .fold(f64::INFINITY, f64::min);
            assert!(min / c.max_segment_length() > 0.99);
        }
    }

    #[test]
    fn too_coarse() {
        assert!(matches!(
            discretize_contour(Shape::Circle { radius: 1.0 }, 2, K),
            Err(Error::TooCoarse(2))
        ));
    }

    #[test]
    fn self_term_matches_fine_quadrature() {
        // Independent check: split the segment into many tiny pieces, treat
        // the innermost pair with the leading log expansion.
        let len = 0.05;
        let n = 20_000;
        let h = len / 2.0 / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..n {
            acc += hankel2(0, K * (i as f64 + 0.5) * h) * h;
        }
        let t0 = h; // first cell [0, h] analytically with the log expansion
        acc += Complex64::new(
            t0,
            -(2.0 / PI) * t0 * ((GAMMA_EXP * K * t0 / 2.0).ln() - 1.0),
        );
        let reference = acc * 2.0;
        let s = self_term(len, K);
        assert!(
            (s - reference).norm() < 1e-6 * s.norm(),
            "{s} vs {reference}"
        );
    }

    #[test]
    fn residual_is_tiny() {
        let c = discretize_contour(Shape::Circle { radius: 1.0 }, 20, K).unwrap();
        let sol = assemble_and_solve(&c, Vec2::new(-5.0, 0.0), K).unwrap();
        assert!(sol.residual < 1e-10, "{}", sol.residual);
    }

    #[test]
    fn source_inside_is_rejected() {
        let c = discretize_contour(Shape::Circle { radius: 1.0 }, 20, K).unwrap();
        assert!(matches!(
            assemble_and_solve(&c, Vec2::new(0.2, 0.1), K),
            Err(Error::SourceInsideContour)
        ));
    }

    #[test]
    fn far_pattern_matches_series() {
        let c = discretize_contour(Shape::Circle { radius: 1.0 }, 20, K).unwrap();
        let src = Vec2::new(-5.0, 0.0);
        let sol = assemble_and_solve(&c, src, K).unwrap();
        let series = PecCylinderSeries::new(1.0, K, src, DEFAULT_TERMS);
        let phis: Vec<f64> = (0..360).map(|i| (i as f64).to_radians()).collect();
        let mom: Vec<Complex64> = phis.iter().map(|&p| sol.far_pattern(p)).collect();
        let exact: Vec<Complex64> = phis.iter().map(|&p| series.far_pattern(p)).collect();
        let err = relative_rms(&mom, &exact);
        assert!(err < 0.01, "far-field RMS error {err}");
    }

    fn far_error(spw: usize) -> f64 {
        let c = discretize_contour(Shape::Circle { radius: 1.0 }, spw, K).unwrap();
        let src = Vec2::new(-5.0, 0.0);
        let sol = assemble_and_solve(&c, src, K).unwrap();
        let series = PecCylinderSeries::new(1.0, K, src, DEFAULT_TERMS);
        let phis: Vec<f64> = (0..360).map(|i| (i as f64).to_radians()).collect();
        let mom: Vec<Complex64> = phis.iter().map(|&p| sol.far_pattern(p)).collect();
        let exact: Vec<Complex64> = phis.iter().map(|&p| series.far_pattern(p)).collect();
        relative_rms(&mom, &exact)
    }

    #[test]
    fn refinement_reduces_error() {
        let coarse = far_error(20);
        let fine = far_error(40);
        assert!(fine < coarse, "{fine} !< {coarse}");
    }

    #[test]
    fn exterior_points_match_series() {
        let c = discretize_contour(Shape::Circle { radius: 1.0 }, 20, K).unwrap();
        let src = Vec2::new(-5.0, 0.0);
        let sol = assemble_and_solve(&c, src, K).unwrap();
        let series = PecCylinderSeries::new(1.0, K, src, DEFAULT_TERMS);
        for p in [
            Vec2::new(3.0, 0.4),
            Vec2::new(-2.0, 2.5),
            Vec2::new(1.3, -1.1),
            Vec2::new(0.0, 7.0),
        ] {
            let mom = total_field_2d(&sol, p).unwrap();
            let exact = series.total(p);
            assert!(
                (mom - exact).norm() < 0.01 * series.incident(p).norm(),
                "{p:?}: {mom} vs {exact}"
            );
        }
    }

    #[test]
    fn interior_null_field() {
        let c = discretize_contour(Shape::Circle { radius: 1.0 }, 20, K).unwrap();
        let src = Vec2::new(-5.0, 0.0);
        let sol = assemble_and_solve(&c, src, K).unwrap();
        // deterministic scatter of 100 points inside 0.8·radius
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let r = 0.8 * ((i as f64 + 0.5) / 100.0).sqrt();
            let phi = i as f64 * 2.399_963;
            let p = Vec2::new(r * phi.cos(), r * phi.sin());
            let ratio = total_field_2d(&sol, p).unwrap().norm() / incident_field(src, p, K).norm();
            worst = worst.max(ratio);
        }
        assert!(worst < 0.01, "{worst}");
    }

    #[test]
    fn small_cylinder_scatters_weakly() {
        let radius = 0.01;
        let c = discretize_contour(Shape::Circle { radius }, 20, K).unwrap();
        let src = Vec2::new(-5.0, 0.0);
        let sol = assemble_and_solve(&c, src, K).unwrap();
        let series = PecCylinderSeries::new(radius, K, src, DEFAULT_TERMS);
        let pts: Vec<Vec2> = (0..360)
            .map(|i| {
                let p = (i as f64).to_radians();
                Vec2::new(5.0 * p.cos(), 5.0 * p.sin())
            })
            .filter(|p| (p - src).norm() > 0.5)
            .collect();
        let inc: Vec<Complex64> = pts.iter().map(|&p| incident_field(src, p, K)).collect();
        let mom: Vec<Complex64> = pts.iter().map(|&p| sol.scattered(p)).collect();
        let exact: Vec<Complex64> = pts.iter().map(|&p| series.scattered(p)).collect();
        let mag = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(mag(&exact) / mag(&inc) < 0.2);
        assert!(mag(&mom) / mag(&inc) < 0.2);
        assert!(relative_rms(&mom, &exact) < 0.05);
    }

    #[test]
    fn shadow_behind_cylinder_is_deeper_than_beside_it() {
        let c = discretize_contour(Shape::Circle { radius: 1.0 }, 20, K).unwrap();
        let src = Vec2::new(-5.0, 0.0);
        let sol = assemble_and_solve(&c, src, K).unwrap();
        let att = |p: Vec2| {
            -20.0
                * (total_field_2d(&sol, p).unwrap() / incident_field(src, p, K))
                    .norm()
                    .log10()
        };
        let behind = att(Vec2::new(4.0, 0.0));
        let beside = att(Vec2::new(0.0, 4.0));
        assert!(behind > beside, "{behind} vs {beside}");
    }

    #[test]
    fn point_on_contour_rejected() {
        let c = discretize_contour(Shape::Circle { radius: 1.0 }, 20, K).unwrap();
        let sol = assemble_and_solve(&c, Vec2::new(-5.0, 0.0), K).unwrap();
        let on = c.segments[3].midpoint;
        assert!(matches!(
            total_field_2d(&sol, on),
            Err(Error::PointOnContour)
        ));
    }

    #[test]
    fn shadow_compare_examples() {
        let a = [0.0, 1.0, 5.0, 1.0, 0.0];
        let same = shadow_profile_compare(&a, &a).unwrap();
        assert_eq!(same.peak_offset_cells, 0);
        assert_eq!(same.mean_abs_diff_db, 0.0);
        let b = [0.0, 0.0, 1.0, 5.0, 1.0];
        assert_eq!(shadow_profile_compare(&a, &b).unwrap().peak_offset_cells, 1);
        assert_eq!(
            shadow_profile_compare(&a, &b).unwrap().argmax_offset_cells,
            1
        );
        // twin maxima around a bright centre
        let twin = [0.0, 9.0, 4.0, 9.1, 0.0];
        let single = [0.0, 1.0, 9.0, 1.0, 0.0];
        let c = shadow_profile_compare(&twin, &single).unwrap();
        assert_eq!((c.peak_offset_cells, c.argmax_offset_cells), (0, 1));
        assert!(matches!(
            shadow_profile_compare(&a, &b[..4]),
            Err(Error::LengthMismatch(5, 4))
        ));
    }

    #[test]
    fn rotated_translated_contour() {
        let c = discretize_contour(Shape::Ellipse { a: 0.16, b: 0.26 }, 20, K).unwrap();
        let t = c.transformed(90.0, Vec2::new(2.0, 0.5));
        assert!(t.contains(Vec2::new(2.2, 0.5)));
        assert!(!t.contains(Vec2::new(2.0, 0.7)));
        assert!((t.perimeter() - c.perimeter()).abs() < 1e-12);
    }
}
