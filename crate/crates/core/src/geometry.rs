//! Scene description: source, receiver array manifold, body model and poses.
//!
//! Frame: origin at the source, `x` along the line of sight, `z` vertical.
//! The body centre and the source share the same height, so both sit at
//! `z = 0`.

use std::collections::BTreeMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::fields;

pub type Vec3 = Vector3<f64>;

/// Default carrier frequency (Hz).
pub const DEFAULT_FREQUENCY_HZ: f64 = 2.4868e9;
/// Default source to first-surface distance (m).
pub const DEFAULT_STANDOFF_M: f64 = 4.0;
pub const DEFAULT_SURFACES: usize = 50;
/// Vertical sample count. The 180-point axis is the vertical one so that each
/// surface encloses the 1.80 m body.
pub const DEFAULT_ROWS: usize = 180;
/// Horizontal sample count.
pub const DEFAULT_COLS: usize = 90;
pub const DEFAULT_SPACING_OVER_LAMBDA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSource {
    pub position: Vec3,
    /// Unit polarisation axis.
    pub axis: Vec3,
}

impl DipoleSource {
    pub fn new(position: Vec3, axis: Vec3) -> Result<Self> {
        let dev = (axis.norm() - 1.0).abs();
        if dev.is_nan() || dev > 1e-12 {
            return Err(Error::invalid("source.axis", "axis must be a unit vector"));
        }
        Ok(Self { position, axis })
    }

    pub fn vertical_at(position: Vec3) -> Self {
        Self {
            position,
            axis: Vec3::new(0.0, 0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyKind {
    EllipticalCylinder,
    /// Flat absorbing screen, used for validation only.
    RectangularScreen,
}

/// Tissue parameters. Carried as metadata so datasets are self-describing;
/// the absorbing-screen solver does not use them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyMaterial {
    pub rel_permittivity: f64,
    pub loss_tangent: f64,
    /// kg/m³
    pub mass_density: f64,
}

impl Default for BodyMaterial {
    fn default() -> Self {
        Self {
            rel_permittivity: 60.0,
            loss_tangent: 0.242,
            mass_density: 1040.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyModel {
    pub kind: BodyKind,
    pub height_hs: f64,
    /// Major transverse width (faces the line of sight at heading 0).
    pub width_ws1: f64,
    /// Minor transverse width (depth along the line of sight at heading 0).
    pub thickness_ws2: f64,
    pub material: BodyMaterial,
}

impl BodyModel {
    pub fn new(
        kind: BodyKind,
        height_hs: f64,
        width_ws1: f64,
        thickness_ws2: f64,
        material: BodyMaterial,
    ) -> Result<Self> {
        positive("body.height", height_hs)?;
        positive("body.width", width_ws1)?;
        positive("body.thickness", thickness_ws2)?;
        if thickness_ws2 > width_ws1 {
            return Err(Error::invalid(
                "body.thickness",
                "thickness must not exceed width",
            ));
        }
        positive("body.rel_permittivity", material.rel_permittivity)?;
        positive("body.loss_tangent", material.loss_tangent)?;
        positive("body.mass_density", material.mass_density)?;
        Ok(Self {
            kind,
            height_hs,
            width_ws1,
            thickness_ws2,
            material,
        })
    }

    /// 1.80 m × 0.52 m × 0.32 m muscle-tissue elliptical cylinder.
    pub fn standard() -> Self {
        Self {
            kind: BodyKind::EllipticalCylinder,
            height_hs: 1.80,
            width_ws1: 0.52,
            thickness_ws2: 0.32,
            material: BodyMaterial::default(),
        }
    }

    /// Largest horizontal extent of the silhouette over all headings.
    pub fn max_transverse_width(&self) -> f64 {
        self.width_ws1
    }
}

/// Regular 3D grid of receivers: `n_surfaces` planes along `x`, each a
/// `n_rows` (z) by `n_cols` (y) grid centred on the line of sight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayManifold {
    pub n_surfaces: usize,
    pub n_rows: usize,
    pub n_cols: usize,
    pub spacing: f64,
    pub first_surface_x: f64,
}

impl ArrayManifold {
    pub fn new(
        n_surfaces: usize,
        n_rows: usize,
        n_cols: usize,
        spacing: f64,
        first_surface_x: f64,
    ) -> Result<Self> {
        for (key, n) in [
            ("n_surfaces", n_surfaces),
            ("n_rows", n_rows),
            ("n_cols", n_cols),
        ] {
            if n == 0 {
                return Err(Error::invalid(key, "count must be at least 1"));
            }
        }
        positive("spacing", spacing)?;
        if !first_surface_x.is_finite() {
            return Err(Error::invalid("first_surface_x", "must be finite"));
        }
        Ok(Self {
            n_surfaces,
            n_rows,
            n_cols,
            spacing,
            first_surface_x,
        })
    }

    pub fn len(&self) -> usize {
        self.n_surfaces * self.n_rows * self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn surface_len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn surface_x(&self, s: usize) -> f64 {
        self.first_surface_x + s as f64 * self.spacing
    }

    pub fn row_z(&self, r: usize) -> f64 {
        centered(r, self.n_rows, self.spacing)
    }

    pub fn col_y(&self, c: usize) -> f64 {
        centered(c, self.n_cols, self.spacing)
    }

    pub fn point(&self, s: usize, r: usize, c: usize) -> Vec3 {
        Vec3::new(self.surface_x(s), self.col_y(c), self.row_z(r))
    }

    /// Flat index in (surface, row, col) order.
    pub fn flat_index(&self, s: usize, r: usize, c: usize) -> usize {
        (s * self.n_rows + r) * self.n_cols + c
    }

    /// Centred sub-window with the given counts. Keeping the parity of the
    /// parent counts makes the window points coincide with parent points.
    pub fn window(&self, n_surfaces: usize, n_rows: usize, n_cols: usize) -> Result<Self> {
        if n_surfaces > self.n_surfaces || n_rows > self.n_rows || n_cols > self.n_cols {
            return Err(Error::OutOfRange(format!(
                "window {n_surfaces}x{n_rows}x{n_cols} exceeds manifold {}x{}x{}",
                self.n_surfaces, self.n_rows, self.n_cols
            )));
        }
        Self::new(
            n_surfaces,
            n_rows,
            n_cols,
            self.spacing,
            self.first_surface_x,
        )
    }
}

fn centered(i: usize, n: usize, spacing: f64) -> f64 {
    (i as f64 - (n as f64 - 1.0) / 2.0) * spacing
}

/// Planar body state. Heading in degrees relative to the default orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }
}

/// Axis-aligned absorbing rectangle in the plane `x = plane_x`.
///
/// Degenerate (zero-area) rectangles are allowed; they block nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SilhouetteRect {
    pub y_min: f64,
    pub y_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub plane_x: f64,
}

impl SilhouetteRect {
    pub fn new(y_min: f64, y_max: f64, z_min: f64, z_max: f64, plane_x: f64) -> Result<Self> {
        let finite = [y_min, y_max, z_min, z_max, plane_x]
            .iter()
            .all(|v| v.is_finite());
        if !finite || y_min > y_max || z_min > z_max {
            return Err(Error::Geometry(format!(
                "bad silhouette y=[{y_min}, {y_max}] z=[{z_min}, {z_max}]"
            )));
        }
        Ok(Self {
            y_min,
            y_max,
            z_min,
            z_max,
            plane_x,
        })
    }

    pub fn width(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn height(&self) -> f64 {
        self.z_max - self.z_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub frequency_hz: f64,
    pub source: DipoleSource,
    pub body: BodyModel,
    pub manifold: ArrayManifold,
    pub standoff_d: f64,
}

impl Scene {
    pub fn wavelength(&self) -> f64 {
        fields::SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength()
    }

    /// Same scene with the manifold replaced by a centred window. The
    /// enclosure check is not applied: windows exist for partial runs.
    pub fn with_window(&self, n_surfaces: usize, n_rows: usize, n_cols: usize) -> Result<Self> {
        Ok(Self {
            manifold: self.manifold.window(n_surfaces, n_rows, n_cols)?,
            ..self.clone()
        })
    }

    pub fn silhouette(&self, pose: Pose) -> SilhouetteRect {
        silhouette(&self.body, pose)
    }
}

/// Ordered scenario keys accepted by [`build_scene`].
pub const SCENE_KEYS: &[&str] = &[
    "frequency_hz",
    "standoff_d",
    "n_surfaces",
    "n_rows",
    "n_cols",
    "spacing_over_lambda",
    "body.kind",
    "body.height",
    "body.width",
    "body.thickness",
    "body.rel_permittivity",
    "body.loss_tangent",
    "body.mass_density",
];

/// Builds and validates a scene from `key = value` pairs. Omitted keys take
/// the standard scenario values, except that a rectangular screen must give
/// its own `body.width` and `body.height`.
pub fn build_scene(config: &BTreeMap<String, String>) -> Result<Scene> {
    if let Some(unknown) = config.keys().find(|k| !SCENE_KEYS.contains(&k.as_str())) {
        return Err(Error::UnknownKey(unknown.clone()));
    }
    let frequency_hz = get_f64(config, "frequency_hz", DEFAULT_FREQUENCY_HZ)?;
    positive("frequency_hz", frequency_hz)?;
    let standoff_d = get_f64(config, "standoff_d", DEFAULT_STANDOFF_M)?;
    positive("standoff_d", standoff_d)?;
    let n_surfaces = get_count(config, "n_surfaces", DEFAULT_SURFACES)?;
    let n_rows = get_count(config, "n_rows", DEFAULT_ROWS)?;
    let n_cols = get_count(config, "n_cols", DEFAULT_COLS)?;
    let spacing_over_lambda = get_f64(config, "spacing_over_lambda", DEFAULT_SPACING_OVER_LAMBDA)?;
    positive("spacing_over_lambda", spacing_over_lambda)?;

    let kind = match config.get("body.kind").map(|s| s.as_str()) {
        None | Some("ellipse") | Some("elliptical_cylinder") => BodyKind::EllipticalCylinder,
        Some("rectangle") | Some("rectangular_screen") => BodyKind::RectangularScreen,
        Some(other) => {
            return Err(Error::invalid(
                "body.kind",
                format!("expected `ellipse` or `rectangle`, got `{other}`"),
            ))
        }
    };
    let std_body = BodyModel::standard();
    let (height, width) = match kind {
        BodyKind::EllipticalCylinder => (
            get_f64(config, "body.height", std_body.height_hs)?,
            get_f64(config, "body.width", std_body.width_ws1)?,
        ),
        BodyKind::RectangularScreen => (
            require_f64(config, "body.height")?,
            require_f64(config, "body.width")?,
        ),
    };
    let thickness = match kind {
        BodyKind::EllipticalCylinder => get_f64(config, "body.thickness", std_body.thickness_ws2)?,
        BodyKind::RectangularScreen => get_f64(config, "body.thickness", width)?,
    };
    let material = BodyMaterial {
        rel_permittivity: get_f64(config, "body.rel_permittivity", 60.0)?,
        loss_tangent: get_f64(config, "body.loss_tangent", 0.242)?,
        mass_density: get_f64(config, "body.mass_density", 1040.0)?,
    };
    let body = BodyModel::new(kind, height, width, thickness, material)?;

    let lambda = fields::wavelength(frequency_hz)?;
    let spacing = spacing_over_lambda * lambda;
    let manifold = ArrayManifold::new(n_surfaces, n_rows, n_cols, spacing, standoff_d)?;

    let extent_y = n_cols as f64 * spacing;
    if extent_y < body.max_transverse_width() {
        return Err(Error::ManifoldTooSmall {
            axis: "y",
            extent_m: extent_y,
            needed_m: body.max_transverse_width(),
        });
    }
    let extent_z = n_rows as f64 * spacing;
    if extent_z < body.height_hs {
        return Err(Error::ManifoldTooSmall {
            axis: "z",
            extent_m: extent_z,
            needed_m: body.height_hs,
        });
    }

    Ok(Scene {
        frequency_hz,
        source: DipoleSource::vertical_at(Vec3::zeros()),
        body,
        manifold,
        standoff_d,
    })
}

/// The standard scenario (all keys defaulted).
pub fn default_scene() -> Scene {
    build_scene(&BTreeMap::new()).expect("default scenario is valid")
}

fn lookup<'a>(config: &'a BTreeMap<String, String>, key: &str) -> Option<&'a str> {
    config.get(key).map(|s| s.trim())
}

fn parse_f64(key: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| Error::invalid(key, format!("not a number: `{raw}`")))?;
    if !v.is_finite() {
        return Err(Error::invalid(key, "must be finite"));
    }
    Ok(v)
}

fn get_f64(config: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    lookup(config, key).map_or(Ok(default), |raw| parse_f64(key, raw))
}

fn require_f64(config: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let raw = lookup(config, key).ok_or_else(|| Error::MissingKey(key.to_string()))?;
    parse_f64(key, raw)
}

fn get_count(config: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize> {
    let n = match lookup(config, key) {
        None => default,
        Some(raw) => raw
            .parse::<usize>()
            .map_err(|_| Error::invalid(key, format!("not a non-negative integer: `{raw}`")))?,
    };
    if n == 0 {
        return Err(Error::invalid(key, "count must be at least 1"));
    }
    Ok(n)
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(key, format!("must be positive, got {v}")))
    }
}

/// All manifold points in (surface, row, col) lexicographic order.
pub fn array_points(manifold: &ArrayManifold) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(manifold.len());
    for s in 0..manifold.n_surfaces {
        for r in 0..manifold.n_rows {
            for c in 0..manifold.n_cols {
                out.push(manifold.point(s, r, c));
            }
        }
    }
    out
}

/// Width of the elliptical cross-section projected on the transverse axis.
pub fn projected_width(body: &BodyModel, theta_deg: f64) -> Result<f64> {
    if body.kind != BodyKind::EllipticalCylinder {
        return Err(Error::WrongBodyKind);
    }
    Ok(ellipse_projected_width(body, theta_deg))
}

fn ellipse_projected_width(body: &BodyModel, theta_deg: f64) -> f64 {
    let a = body.width_ws1 / 2.0;
    let b = body.thickness_ws2 / 2.0;
    let (s, c) = theta_deg.to_radians().sin_cos();
    2.0 * (a * a * c * c + b * b * s * s).sqrt()
}

/// Projection of the body along `x` onto the vertical plane through its centre.
pub fn silhouette(body: &BodyModel, pose: Pose) -> SilhouetteRect {
    let width = match body.kind {
        BodyKind::EllipticalCylinder => ellipse_projected_width(body, pose.theta),
        BodyKind::RectangularScreen => body.width_ws1,
    };
    let half_h = body.height_hs / 2.0;
    SilhouetteRect {
        y_min: pose.y - width / 2.0,
        y_max: pose.y + width / 2.0,
        z_min: -half_h,
        z_max: half_h,
        plane_x: pose.x,
    }
}
