//! Attenuation maps: per-state dB loss relative to free space, and their
//! weighted mean and standard deviation across an ensemble.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diffraction::FieldGrid;
use crate::error::{Error, Result};
use crate::fields::ComplexField;

/// Reported attenuation when the blocked field vanishes.
pub const ATTENUATION_CLAMP_DB: f64 = 150.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    SingleState,
    Mean,
    Std,
}

/// Row-major `n_rows × n_cols` dB grid. Row 0 is the lowest `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationMap {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub kind: MapKind,
}

impl AttenuationMap {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, kind: MapKind) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimsMismatch(format!(
                "{} values for a {rows}x{cols} map",
                values.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            values,
            kind,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Attenuation-weighted centroid (row, col) over cells with positive dB.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (mut w, mut r, mut c) = (0.0, 0.0, 0.0);
        for (i, v) in self.values.iter().enumerate() {
            if *v > 0.0 {
                w += v;
                r += v * (i / self.cols) as f64;
                c += v * (i % self.cols) as f64;
            }
        }
        (w > 0.0).then(|| (r / w, c / w))
    }

    /// Row-major CSV, one map row per line, top line = row 0.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 10);
        for row in self.values.chunks(self.cols) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format_sig6(*v));
            }
            out.push('\n');
        }
        out
    }

    /// 16-bit binary PGM, linear min→0 and max→65535, highest `z` on top.
    pub fn to_pgm(&self) -> Vec<u8> {
        let (lo, hi) = (self.min(), self.max());
        let span = hi - lo;
        let mut out = format!("P5\n{} {}\n65535\n", self.cols, self.rows).into_bytes();
        for r in (0..self.rows).rev() {
            for c in 0..self.cols {
                let v = self.get(r, c);
                let level = if span > 0.0 {
                    ((v - lo) / span * 65535.0).round() as u16
                } else {
                    0
                };
                out.extend_from_slice(&level.to_be_bytes());
            }
        }
        out
    }

    /// Writes `<stem>.csv`, `<stem>.pgm` and `<stem>.pgm.txt` (scale limits).
    pub fn export(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{stem}.csv"));
        let pgm = dir.join(format!("{stem}.pgm"));
        let side = dir.join(format!("{stem}.pgm.txt"));
        fs::write(&csv, self.to_csv())?;
        fs::write(&pgm, self.to_pgm())?;
        fs::write(
            &side,
            format!(
                "min_db={}\nmax_db={}\nrows={}\ncols={}\norientation=top_row_is_max_z\n",
                format_sig6(self.min()),
                format_sig6(self.max()),
                self.rows,
                self.cols
            ),
        )?;
        Ok(vec![csv, pgm, side])
    }
}

/// `%g`-style formatting with six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let mut s = String::new();
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let _ = write!(s, "{:.*}", decimals, v);
        if s.contains('.') {
            let t = s.trim_end_matches('0').trim_end_matches('.').len();
            s.truncate(t);
        }
        if s == "-0" {
            s = "0".into();
        }
    } else {
        let _ = write!(s, "{:.5e}", v);
        if let Some((mant, e)) = s.clone().split_once('e') {
            let mant = if mant.contains('.') {
                mant.trim_end_matches('0').trim_end_matches('.')
            } else {
                mant
            };
            let e: i32 = e.parse().unwrap_or(0);
            let sign = if e < 0 { '-' } else { '+' };
            s = format!("{mant}e{sign}{:02}", e.abs());
        }
    }
    s
}

/// `−10·log10(|E/E0|²)` in dB.
pub fn attenuation_db(e: ComplexField, e0: ComplexField) -> Result<f64> {
    let ref_pow = e0.norm_sqr();
    if ref_pow == 0.0 || !ref_pow.is_finite() {
        return Err(Error::ZeroReference);
    }
    let p = e.norm_sqr();
    if p == 0.0 {
        return Ok(ATTENUATION_CLAMP_DB);
    }
    Ok((-10.0 * (p / ref_pow).log10()).min(ATTENUATION_CLAMP_DB))
}

/// Single-state map of surface `s` of `blocked` against `free`.
pub fn attenuation_map(blocked: &FieldGrid, free: &FieldGrid, s: usize) -> Result<AttenuationMap> {
    if blocked.dims != free.dims {
        return Err(Error::DimsMismatch(format!(
            "blocked {:?} vs free {:?}",
            blocked.dims, free.dims
        )));
    }
    if s >= blocked.dims.0 {
        return Err(Error::OutOfRange(format!(
            "surface {s} of {}",
            blocked.dims.0
        )));
    }
    let values = blocked
        .surface(s)
        .iter()
        .zip(free.surface(s))
        .map(|(e, e0)| attenuation_db(*e, *e0))
        .collect::<Result<Vec<_>>>()?;
    AttenuationMap::new(blocked.dims.1, blocked.dims.2, values, MapKind::SingleState)
}

fn check_stack(stack: &[AttenuationMap], weights: &[f64]) -> Result<(usize, usize)> {
    let first = stack.first().ok_or(Error::ZeroStates)?;
    if stack
        .iter()
        .any(|m| m.rows != first.rows || m.cols != first.cols)
    {
        return Err(Error::DimsMismatch(
            "maps in the stack differ in size".into(),
        ));
    }
    if weights.len() != stack.len() {
        return Err(Error::BadWeights(format!(
            "{} weights for {} states",
            weights.len(),
            stack.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::BadWeights(
            "weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::BadWeights(format!("weights sum to {total}")));
    }
    Ok((first.rows, first.cols))
}

/// Per-cell weighted mean of dB values.
pub fn mean_map(stack: &[AttenuationMap], weights: &[f64]) -> Result<AttenuationMap> {
    let (rows, cols) = check_stack(stack, weights)?;
    let mut values = vec![0.0; rows * cols];
    for (m, w) in stack.iter().zip(weights) {
        for (acc, v) in values.iter_mut().zip(&m.values) {
            *acc += w * v;
        }
    }
    AttenuationMap::new(rows, cols, values, MapKind::Mean)
}

/// Per-cell weighted standard deviation about `mean`.
pub fn std_map(
    stack: &[AttenuationMap],
    mean: &AttenuationMap,
    weights: &[f64],
) -> Result<AttenuationMap> {
    let (rows, cols) = check_stack(stack, weights)?;
    if mean.rows != rows || mean.cols != cols {
        return Err(Error::DimsMismatch(
            "mean map differs from the stack".into(),
        ));
    }
    let mut values = vec![0.0; rows * cols];
    for (m, w) in stack.iter().zip(weights) {
        for ((acc, v), mu) in values.iter_mut().zip(&m.values).zip(&mean.values) {
            let d = v - mu;
            *acc += w * d * d;
        }
    }
    for v in &mut values {
        *v = v.sqrt();
    }
    AttenuationMap::new(rows, cols, values, MapKind::Std)
}
