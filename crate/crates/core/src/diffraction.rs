//! Absorbing-screen forward solver.
//!
//! The blocked field at a receiver is the free-space field minus the
//! Kirchhoff contribution of the body silhouette:
//!
//! ```text
//! E = E0(P) − (j/λ) ∬_S E_inc(p) · e^{−jk r₂}/r₂ · (1 + cos χ)/2 dA
//! ```
//!
//! with `r₂` the silhouette-to-receiver distance and `χ` the angle between
//! that direction and the line of sight (`+x`).
//!
//! The silhouette is integrated with the midpoint rule. Cells of side `h`
//! are laid out symmetrically about the rectangle centre; the leftover strip
//! on each axis is split into two equal partial cells at the ends. The step
//! `h` always divides the receiver spacing, so for a whole surface the
//! offsets between quadrature nodes and receivers fall on a lattice and each
//! kernel value is computed once and reused by every receiver.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{free_space_field, ComplexField};
use crate::geometry::{array_points, DipoleSource, Pose, Scene, SilhouetteRect, Vec3};

/// Default relative tolerance of the Cauchy convergence test.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_REFINEMENTS: u32 = 4;

/// Above this many kernel evaluations a lattice table is not worth building
/// for the few receivers still refining; they are evaluated one by one.
const TABLE_COST_FACTOR: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Requested cell size (m). The size actually used is the largest
    /// divisor of the receiver spacing not exceeding it.
    pub initial_step: f64,
    /// Relative tolerance: successive halvings must change the field by
    /// less than `tolerance · |E0|`.
    pub tolerance: f64,
    pub max_refinements: u32,
}

impl QuadratureSpec {
    pub fn for_wavelength(lambda: f64) -> Self {
        Self {
            initial_step: lambda / 8.0,
            tolerance: DEFAULT_TOLERANCE,
            max_refinements: DEFAULT_MAX_REFINEMENTS,
        }
    }

    pub fn validate(&self, lambda: f64) -> Result<()> {
        if !(self.initial_step > 0.0 && self.initial_step <= lambda / 8.0 * (1.0 + 1e-12)) {
            return Err(Error::InvalidQuadrature(format!(
                "initial step {} must be in (0, λ/8 = {}]",
                self.initial_step,
                lambda / 8.0
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 0.1) {
            return Err(Error::InvalidQuadrature(format!(
                "tolerance {} must be in (0, 0.1)",
                self.tolerance
            )));
        }
        if self.max_refinements < 1 {
            return Err(Error::InvalidQuadrature(
                "at least one refinement is required".into(),
            ));
        }
        Ok(())
    }

    /// Cell size at refinement level 0 for a receiver lattice of `spacing`.
    pub fn base_step(&self, spacing: f64) -> f64 {
        let m = (spacing / self.initial_step * (1.0 - 1e-12))
            .ceil()
            .max(1.0);
        spacing / m
    }
}

/// Converged field with the refinement level at which the test passed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockedSample {
    pub field: ComplexField,
    pub level: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BodyState {
    FreeSpace,
    Body(Pose),
}

impl BodyState {
    pub fn label(&self) -> String {
        match self {
            BodyState::FreeSpace => "free".to_string(),
            BodyState::Body(p) => format!("x={} y={} theta={}", p.x, p.y, p.theta),
        }
    }
}

/// Complex field samples over the whole manifold for one body state.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    /// (n_surfaces, n_rows, n_cols)
    pub dims: (usize, usize, usize),
    /// (surface, row, col) order.
    pub samples: Vec<ComplexField>,
    pub state_id: String,
    /// Deepest refinement level any sample needed.
    pub max_level: u32,
}

impl FieldGrid {
    pub fn new(
        dims: (usize, usize, usize),
        samples: Vec<ComplexField>,
        state_id: String,
    ) -> Result<Self> {
        if samples.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::DimsMismatch(format!(
                "{} samples for dims {:?}",
                samples.len(),
                dims
            )));
        }
        Ok(Self {
            dims,
            samples,
            state_id,
            max_level: 0,
        })
    }

    pub fn surface(&self, s: usize) -> &[ComplexField] {
        let n = self.dims.1 * self.dims.2;
        &self.samples[s * n..(s + 1) * n]
    }
}

/// Blocked field at one receiver with the body at `pose`.
pub fn blocked_field(
    scene: &Scene,
    pose: Pose,
    point: Vec3,
    quad: &QuadratureSpec,
) -> Result<BlockedSample> {
    screen_field(scene, &scene.silhouette(pose), point, quad)
}

/// Blocked field at one receiver behind an arbitrary absorbing rectangle.
pub fn screen_field(
    scene: &Scene,
    rect: &SilhouetteRect,
    point: Vec3,
    quad: &QuadratureSpec,
) -> Result<BlockedSample> {
    let lambda = scene.wavelength();
    quad.validate(lambda)?;
    let e0 = free_space_field(&scene.source, point, scene.wavenumber())?;
    let solver = Solver::new(scene, rect, quad)?;
    solver.check_behind(point.x)?;
    let out = solver.solve_patch(
        point.x,
        ReceiverAxis::single(point.y),
        ReceiverAxis::single(point.z),
        &[e0],
    )?;
    Ok(out[0])
}

/// Field samples over the manifold for one body state.
pub fn field_grid(scene: &Scene, state: BodyState, quad: &QuadratureSpec) -> Result<FieldGrid> {
    let m = &scene.manifold;
    let k = scene.wavenumber();
    let points = array_points(m);
    let e0: Vec<ComplexField> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            free_space_field(&scene.source, *p, k).map_err(|e| Error::AtPoint {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let dims = (m.n_surfaces, m.n_rows, m.n_cols);
    let pose = match state {
        BodyState::FreeSpace => {
            return Ok(FieldGrid {
                dims,
                samples: e0,
                state_id: state.label(),
                max_level: 0,
            })
        }
        BodyState::Body(p) => p,
    };

    quad.validate(scene.wavelength())?;
    let rect = scene.silhouette(pose);
    let solver = Solver::new(scene, &rect, quad)?;
    let per_surface = m.surface_len();
    let mut samples = Vec::with_capacity(m.len());
    let mut max_level = 0;
    for s in 0..m.n_surfaces {
        let x = m.surface_x(s);
        let offset = s * per_surface;
        solver.check_behind(x).map_err(|e| Error::AtPoint {
            index: offset,
            source: Box::new(e),
        })?;
        let ys = ReceiverAxis {
            first: m.col_y(0),
            count: m.n_cols,
            spacing: m.spacing,
        };
        let zs = ReceiverAxis {
            first: m.row_z(0),
            count: m.n_rows,
            spacing: m.spacing,
        };
        let out = solver
            .solve_patch(x, ys, zs, &e0[offset..offset + per_surface])
            .map_err(|e| match e {
                Error::AtPoint { index, source } => Error::AtPoint {
                    index: offset + index,
                    source,
                },
                other => other,
            })?;
        for b in out {
            max_level = max_level.max(b.level);
            samples.push(b.field);
        }
    }
    Ok(FieldGrid {
        dims,
        samples,
        state_id: state.label(),
        max_level,
    })
}

/// Receivers along one transverse axis: `first + c·spacing`.
#[derive(Debug, Clone, Copy)]
struct ReceiverAxis {
    first: f64,
    count: usize,
    spacing: f64,
}

impl ReceiverAxis {
    fn single(at: f64) -> Self {
        Self {
            first: at,
            count: 1,
            spacing: 1.0,
        }
    }

    fn position(&self, c: usize) -> f64 {
        self.first + c as f64 * self.spacing
    }
}

/// A run of quadrature nodes `first + i·step`, all with cell width `width`.
#[derive(Debug, Clone, Copy)]
struct NodeRun {
    first: f64,
    count: usize,
    width: f64,
}

/// Symmetric midpoint partition of `[lo, hi]` with nominal step `h`.
fn partition(lo: f64, hi: f64, h: f64) -> Vec<NodeRun> {
    let w = hi - lo;
    if w <= 0.0 {
        return Vec::new();
    }
    let n_full = (w / h * (1.0 + 1e-12)).floor() as usize;
    let mut rem = w - n_full as f64 * h;
    if rem < 1e-9 * h {
        rem = 0.0;
    }
    let mut runs = Vec::with_capacity(3);
    if n_full > 0 {
        runs.push(NodeRun {
            first: lo + rem / 2.0 + h / 2.0,
            count: n_full,
            width: h,
        });
    }
    if rem > 0.0 {
        runs.push(NodeRun {
            first: lo + rem / 4.0,
            count: 1,
            width: rem / 2.0,
        });
        runs.push(NodeRun {
            first: hi - rem / 4.0,
            count: 1,
            width: rem / 2.0,
        });
    }
    runs
}

/// Distinct receiver-minus-node offsets along one axis for one node run.
///
/// With nodes reversed (`i' = count − 1 − i`) the offset for receiver `c`
/// and node `i'` is `values[c·stride + i']`.
struct Offsets {
    values: Vec<f64>,
    stride: usize,
    count: usize,
}

impl Offsets {
    fn new(run: &NodeRun, rx: &ReceiverAxis, h: f64, ratio: usize) -> Self {
        let off = rx.first - run.first;
        if run.count == 1 {
            let values = (0..rx.count)
                .map(|c| off + (c * ratio) as f64 * h)
                .collect();
            return Self {
                values,
                stride: 1,
                count: 1,
            };
        }
        let len = (rx.count - 1) * ratio + run.count;
        let shift = run.count as f64 - 1.0;
        let values = (0..len).map(|t| off + (t as f64 - shift) * h).collect();
        Self {
            values,
            stride: ratio,
            count: run.count,
        }
    }
}

/// Kernel table and node weights for one (y-run, z-run) pair.
struct PairTable<'w> {
    table: Vec<Complex64>,
    row_len: usize,
    weights: &'w [Complex64],
    ny: usize,
    nz: usize,
    stride_y: usize,
    stride_z: usize,
}

impl PairTable<'_> {
    #[inline]
    fn sum_for(&self, r: usize, c: usize) -> Complex64 {
        let base_y = c * self.stride_y;
        let base_z = r * self.stride_z;
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..self.ny {
            let t0 = (base_y + i) * self.row_len + base_z;
            let trow = &self.table[t0..t0 + self.nz];
            let wrow = &self.weights[i * self.nz..(i + 1) * self.nz];
            for (w, t) in wrow.iter().zip(trow) {
                re += w.re * t.re - w.im * t.im;
                im += w.re * t.im + w.im * t.re;
            }
        }
        Complex64::new(re, im)
    }
}

#[inline]
fn kernel(dx: f64, dy: f64, dz: f64, k: f64) -> Complex64 {
    let r = (dx * dx + dy * dy + dz * dz).sqrt();
    let (s, c) = (k * r).sin_cos();
    let amp = (1.0 + dx / r) / (2.0 * r);
    Complex64::new(c * amp, -s * amp)
}

struct Solver<'a> {
    source: &'a DipoleSource,
    rect: SilhouetteRect,
    k: f64,
    lambda: f64,
    base_step: f64,
    quad: QuadratureSpec,
}

impl<'a> Solver<'a> {
    fn new(scene: &'a Scene, rect: &SilhouetteRect, quad: &QuadratureSpec) -> Result<Self> {
        Ok(Self {
            source: &scene.source,
            rect: *rect,
            k: scene.wavenumber(),
            lambda: scene.wavelength(),
            base_step: quad.base_step(scene.manifold.spacing),
            quad: *quad,
        })
    }

    fn check_behind(&self, x: f64) -> Result<()> {
        if x > self.rect.plane_x {
            Ok(())
        } else {
            Err(Error::Geometry(format!(
                "receiver at x={x} is not behind the silhouette plane x={}",
                self.rect.plane_x
            )))
        }
    }

    fn is_empty(&self) -> bool {
        !(self.rect.width() > 0.0 && self.rect.height() > 0.0)
    }

    /// Converged fields for a rectangular patch of receivers at depth `x`,
    /// ordered row-major (z outer, y inner). `e0` holds the free-space field
    /// at each receiver in the same order.
    fn solve_patch(
        &self,
        x: f64,
        ys: ReceiverAxis,
        zs: ReceiverAxis,
        e0: &[ComplexField],
    ) -> Result<Vec<BlockedSample>> {
        let n = ys.count * zs.count;
        debug_assert_eq!(e0.len(), n);
        if self.is_empty() {
            return Ok(e0
                .iter()
                .map(|&field| BlockedSample { field, level: 0 })
                .collect());
        }
        let all: Vec<usize> = (0..n).collect();
        let mut prev = self.level_sums(x, ys, zs, 0, &all)?;
        let mut result: Vec<Option<BlockedSample>> = vec![None; n];
        let mut change = vec![f64::INFINITY; n];
        let mut active = all;
        let scale = Complex64::new(0.0, 1.0 / self.lambda);
        for level in 1..=self.quad.max_refinements {
            let sums = self.level_sums(x, ys, zs, level, &active)?;
            let mut still = Vec::new();
            for (slot, &i) in active.iter().enumerate() {
                let s = sums[slot];
                let delta = (s - prev[i]).norm() / self.lambda;
                change[i] = delta / e0[i].norm();
                if delta < self.quad.tolerance * e0[i].norm() {
                    result[i] = Some(BlockedSample {
                        field: e0[i] - scale * s,
                        level,
                    });
                } else {
                    prev[i] = s;
                    still.push(i);
                }
            }
            active = still;
            if active.is_empty() {
                break;
            }
        }
        if let Some(&i) = active.first() {
            return Err(Error::AtPoint {
                index: i,
                source: Box::new(Error::NoConvergence {
                    refinements: self.quad.max_refinements,
                    change: change[i],
                }),
            });
        }
        Ok(result
            .into_iter()
            .map(|b| b.expect("all converged"))
            .collect())
    }

    /// Midpoint sums `∬ E_inc · kernel dA` at refinement `level` for the
    /// receivers listed in `which` (flat row-major patch indices). The
    /// returned vector is parallel to `which`.
    fn level_sums(
        &self,
        x: f64,
        ys: ReceiverAxis,
        zs: ReceiverAxis,
        level: u32,
        which: &[usize],
    ) -> Result<Vec<Complex64>> {
        let h = self.base_step / (1usize << level) as f64;
        let runs_y = partition(self.rect.y_min, self.rect.y_max, h);
        let runs_z = partition(self.rect.z_min, self.rect.z_max, h);
        let pairs = self.pair_weights(&runs_y, &runs_z, h)?;
        let nodes: usize = pairs.iter().map(|p| p.weights.len()).sum();

        let ratio = self.lattice_ratio(&ys, h);
        let table_cost = table_size(&runs_y, &runs_z, &ys, &zs, ratio);
        let direct_cost = which.len() * nodes;
        if ys.count * zs.count == 1 || (direct_cost as f64) < TABLE_COST_FACTOR * table_cost as f64
        {
            return Ok(which
                .par_iter()
                .map(|&i| {
                    let (r, c) = (i / ys.count, i % ys.count);
                    let y = ReceiverAxis::single(ys.position(c));
                    let z = ReceiverAxis::single(zs.position(r));
                    self.tables(x, &pairs, &y, &z, h, 1)
                        .iter()
                        .map(|t| t.sum_for(0, 0))
                        .sum()
                })
                .collect());
        }
        let tables = self.tables(x, &pairs, &ys, &zs, h, ratio);
        Ok(which
            .par_iter()
            .map(|&i| {
                let (r, c) = (i / ys.count, i % ys.count);
                tables.iter().map(|t| t.sum_for(r, c)).sum()
            })
            .collect())
    }

    /// Receiver spacing in units of the cell size.
    fn lattice_ratio(&self, rx: &ReceiverAxis, h: f64) -> usize {
        if rx.count == 1 {
            1
        } else {
            (rx.spacing / h).round() as usize
        }
    }

    /// Incident field times cell area at every node, both axes reversed.
    fn pair_weights(
        &self,
        runs_y: &[NodeRun],
        runs_z: &[NodeRun],
        h: f64,
    ) -> Result<Vec<PairWeights>> {
        let plane = self.rect.plane_x;
        let mut out = Vec::with_capacity(runs_y.len() * runs_z.len());
        for ry in runs_y {
            for rz in runs_z {
                let mut weights = Vec::with_capacity(ry.count * rz.count);
                for ip in 0..ry.count {
                    let y = ry.first + (ry.count - 1 - ip) as f64 * h;
                    for jp in 0..rz.count {
                        let z = rz.first + (rz.count - 1 - jp) as f64 * h;
                        let e = free_space_field(self.source, Vec3::new(plane, y, z), self.k)?;
                        weights.push(e * (ry.width * rz.width));
                    }
                }
                out.push(PairWeights {
                    ry: *ry,
                    rz: *rz,
                    weights,
                });
            }
        }
        Ok(out)
    }

    fn tables<'w>(
        &self,
        x: f64,
        pairs: &'w [PairWeights],
        ys: &ReceiverAxis,
        zs: &ReceiverAxis,
        h: f64,
        ratio: usize,
    ) -> Vec<PairTable<'w>> {
        let dx = x - self.rect.plane_x;
        let k = self.k;
        pairs
            .iter()
            .map(|pair| {
                let oy = Offsets::new(&pair.ry, ys, h, ratio);
                let oz = Offsets::new(&pair.rz, zs, h, ratio);
                let row_len = oz.values.len();
                let mut table = vec![Complex64::new(0.0, 0.0); oy.values.len() * row_len];
                let fill = |(row, &dy): (&mut [Complex64], &f64)| {
                    for (t, &dz) in row.iter_mut().zip(&oz.values) {
                        *t = kernel(dx, dy, dz, k);
                    }
                };
                if table.len() > 4096 {
                    table
                        .par_chunks_mut(row_len)
                        .zip(oy.values.par_iter())
                        .for_each(fill);
                } else {
                    table
                        .chunks_mut(row_len)
                        .zip(oy.values.iter())
                        .for_each(fill);
                }
                PairTable {
                    table,
                    row_len,
                    weights: &pair.weights,
                    ny: oy.count,
                    nz: oz.count,
                    stride_y: oy.stride,
                    stride_z: oz.stride,
                }
            })
            .collect()
    }
}

struct PairWeights {
    ry: NodeRun,
    rz: NodeRun,
    weights: Vec<Complex64>,
}

fn table_size(
    runs_y: &[NodeRun],
    runs_z: &[NodeRun],
    ys: &ReceiverAxis,
    zs: &ReceiverAxis,
    ratio: usize,
) -> usize {
    let len = |run: &NodeRun, rx: &ReceiverAxis| {
        if run.count == 1 {
            rx.count
        } else {
            (rx.count - 1) * ratio + run.count
        }
    };
    let mut total = 0;
    for ry in runs_y {
        for rz in runs_z {
            total += len(ry, ys) * len(rz, zs);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{default_scene, BodyKind, BodyMaterial, BodyModel};

    fn quad(scene: &Scene) -> QuadratureSpec {
        QuadratureSpec::for_wavelength(scene.wavelength())
    }

    fn att_db(e: Complex64, e0: Complex64) -> f64 {
        -20.0 * (e / e0).norm().log10()
    }

    #[test]
    fn partition_is_symmetric_and_tiles() {
        for (lo, hi, h) in [(-0.26, 0.26, 0.012), (-0.9, 0.9, 0.0061), (0.0, 0.05, 0.1)] {
            let runs = partition(lo, hi, h);
            let covered: f64 = runs.iter().map(|r| r.count as f64 * r.width).sum();
            assert!((covered - (hi - lo)).abs() < 1e-12);
            let mut nodes: Vec<f64> = runs
                .iter()
                .flat_map(|r| (0..r.count).map(move |i| r.first + i as f64 * h))
                .collect();
            nodes.sort_by(f64::total_cmp);
            let mid = (lo + hi) / 2.0;
            for (a, b) in nodes.iter().zip(nodes.iter().rev()) {
                assert!(((a - mid) + (b - mid)).abs() < 1e-12);
            }
        }
        assert!(partition(0.3, 0.3, 0.01).is_empty());
    }

    #[test]
    fn base_step_divides_spacing() {
        let scene = default_scene();
        let q = quad(&scene);
        let dlt = scene.manifold.spacing;
        assert_eq!(q.base_step(dlt), dlt);
        let fine = QuadratureSpec {
            initial_step: dlt / 3.5,
            ..q
        };
        assert!((fine.base_step(dlt) - dlt / 4.0).abs() < 1e-18);
    }

    #[test]
    fn rejects_bad_quadrature() {
        let scene = default_scene();
        let lam = scene.wavelength();
        let q = quad(&scene);
        for bad in [
            QuadratureSpec {
                initial_step: lam / 4.0,
                ..q
            },
            QuadratureSpec {
                tolerance: 0.1,
                ..q
            },
            QuadratureSpec {
                tolerance: 0.0,
                ..q
            },
            QuadratureSpec {
                max_refinements: 0,
                ..q
            },
        ] {
            assert!(matches!(
                bad.validate(lam),
                Err(Error::InvalidQuadrature(_))
            ));
        }
    }

    #[test]
    fn empty_silhouette_returns_free_space_exactly() {
        let scene = default_scene();
        let rect = SilhouetteRect::new(0.1, 0.1, -0.9, 0.9, 2.0).unwrap();
        let p = Vec3::new(4.0, 0.05, 0.0);
        let e0 = free_space_field(&scene.source, p, scene.wavenumber()).unwrap();
        let b = screen_field(&scene, &rect, p, &quad(&scene)).unwrap();
        assert_eq!(b.field, e0);
        assert_eq!(b.level, 0);
    }

    #[test]
    fn receiver_in_front_of_body_is_rejected() {
        let scene = default_scene();
        let pose = Pose::new(2.0, 0.0, 0.0);
        for x in [2.0, 1.0] {
            let err =
                blocked_field(&scene, pose, Vec3::new(x, 0.0, 0.0), &quad(&scene)).unwrap_err();
            assert!(matches!(err, Error::Geometry(_)));
        }
    }

    #[test]
    fn no_convergence_is_reported() {
        let scene = default_scene();
        let q = QuadratureSpec {
            tolerance: 1e-9,
            max_refinements: 1,
            ..quad(&scene)
        };
        let err = blocked_field(
            &scene,
            Pose::new(2.0, 0.0, 0.0),
            Vec3::new(4.0, 0.0, 0.0),
            &q,
        )
        .unwrap_err();
        match err {
            Error::AtPoint { source, .. } => {
                assert!(matches!(
                    *source,
                    Error::NoConvergence { refinements: 1, .. }
                ))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn body_on_line_of_sight_attenuates() {
        let scene = default_scene();
        let p = Vec3::new(4.0, 0.0, 0.0);
        let b = blocked_field(&scene, Pose::new(2.0, 0.0, 0.0), p, &quad(&scene)).unwrap();
        let e0 = free_space_field(&scene.source, p, scene.wavenumber()).unwrap();
        let a = att_db(b.field, e0);
        assert!((5.0..=15.0).contains(&a), "{a}");
    }

    #[test]
    fn converged_level_is_stable_under_halving() {
        let scene = default_scene();
        let q = quad(&scene);
        let p = Vec3::new(4.1, 0.2, -0.3);
        let pose = Pose::new(2.1, 0.05, 45.0);
        let coarse = blocked_field(&scene, pose, p, &q).unwrap();
        let fine = blocked_field(
            &scene,
            pose,
            p,
            &QuadratureSpec {
                initial_step: q.initial_step / 2.0,
                ..q
            },
        )
        .unwrap();
        let e0 = free_space_field(&scene.source, p, scene.wavenumber()).unwrap();
        assert!((coarse.field - fine.field).norm() < q.tolerance * e0.norm());
    }

    #[test]
    fn table_path_matches_direct_path() {
        let scene = default_scene().with_window(1, 12, 10).unwrap();
        let q = quad(&scene);
        let pose = Pose::new(2.0, 0.1, 45.0);
        let grid = field_grid(&scene, BodyState::Body(pose), &q).unwrap();
        for (i, p) in array_points(&scene.manifold).iter().enumerate() {
            let b = blocked_field(&scene, pose, *p, &q).unwrap();
            assert!(
                (b.field - grid.samples[i]).norm() <= 1e-12 * b.field.norm(),
                "point {i}"
            );
        }
    }

    #[test]
    fn single_point_grid_equals_blocked_field() {
        let mut scene = default_scene();
        scene.manifold = scene.manifold.window(1, 1, 1).unwrap();
        let q = quad(&scene);
        let pose = Pose::new(2.0, 0.0, 0.0);
        let grid = field_grid(&scene, BodyState::Body(pose), &q).unwrap();
        let b = blocked_field(&scene, pose, scene.manifold.point(0, 0, 0), &q).unwrap();
        assert_eq!(grid.samples, vec![b.field]);
    }

    #[test]
    fn free_space_grid_is_reference_field() {
        let scene = default_scene().with_window(2, 4, 3).unwrap();
        let grid = field_grid(&scene, BodyState::FreeSpace, &quad(&scene)).unwrap();
        assert_eq!(grid.state_id, "free");
        for (e, p) in grid.samples.iter().zip(array_points(&scene.manifold)) {
            assert_eq!(
                *e,
                free_space_field(&scene.source, p, scene.wavenumber()).unwrap()
            );
        }
    }

    #[test]
    fn rectangular_screen_ignores_heading() {
        let mut scene = default_scene();
        scene.body = BodyModel::new(
            BodyKind::RectangularScreen,
            1.0,
            0.4,
            0.4,
            BodyMaterial::default(),
        )
        .unwrap();
        let q = quad(&scene);
        let p = Vec3::new(4.0, 0.1, 0.0);
        let a = blocked_field(&scene, Pose::new(2.0, 0.0, 0.0), p, &q).unwrap();
        let b = blocked_field(&scene, Pose::new(2.0, 0.0, 70.0), p, &q).unwrap();
        assert_eq!(a.field, b.field);
    }
}
