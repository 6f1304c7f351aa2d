//! Line arrays parallel to the line of sight and attenuation histograms.

use crate::error::{Error, Result};
use crate::geometry::ArrayManifold;

pub const DEFAULT_BIN_WIDTH_DB: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedArray {
    A,
    B,
    C,
}

impl std::str::FromStr for NamedArray {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(NamedArray::A),
            "B" | "b" => Ok(NamedArray::B),
            "C" | "c" => Ok(NamedArray::C),
            other => Err(Error::invalid(
                "array",
                format!("unknown line array `{other}` (expected A, B or C)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArraySelector {
    Named(NamedArray),
    Cell { row: usize, col: usize },
}

/// One receiver per surface at a fixed (row, col).
#[derive(Debug, Clone, PartialEq)]
pub struct LineArraySelection {
    pub fixed_row: usize,
    pub fixed_col: usize,
    /// Flat manifold indices, one per surface.
    pub indices: Vec<usize>,
    /// Snapped transverse coordinates of the selected cell.
    pub y: f64,
    pub z: f64,
}

fn snap(coord: f64, n: usize, spacing: f64) -> usize {
    let i = (coord / spacing + (n as f64 - 1.0) / 2.0).round();
    i.clamp(0.0, (n - 1) as f64) as usize
}

/// Resolves a line array. Named arrays sit at `(y, z) = (45Δ, 90Δ)` (A),
/// the centre (B) and `(−45Δ, −90Δ)` (C), snapped to the nearest cell.
pub fn select_line_array(
    manifold: &ArrayManifold,
    selector: ArraySelector,
) -> Result<LineArraySelection> {
    let d = manifold.spacing;
    let (row, col) = match selector {
        ArraySelector::Named(name) => {
            let (y, z) = match name {
                NamedArray::A => (45.0 * d, 90.0 * d),
                NamedArray::B => (0.0, 0.0),
                NamedArray::C => (-45.0 * d, -90.0 * d),
            };
            (snap(z, manifold.n_rows, d), snap(y, manifold.n_cols, d))
        }
        ArraySelector::Cell { row, col } => {
            if row >= manifold.n_rows || col >= manifold.n_cols {
                return Err(Error::OutOfRange(format!(
                    "cell (row {row}, col {col}) outside {}x{}",
                    manifold.n_rows, manifold.n_cols
                )));
            }
            (row, col)
        }
    };
    Ok(LineArraySelection {
        fixed_row: row,
        fixed_col: col,
        indices: (0..manifold.n_surfaces)
            .map(|s| manifold.flat_index(s, row, col))
            .collect(),
        y: manifold.col_y(col),
        z: manifold.row_z(row),
    })
}

/// Probability mass over left-closed bins `[i·w, (i+1)·w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    /// Left edge of the first bin is `first_bin · bin_width`.
    pub first_bin: i64,
    pub probabilities: Vec<f64>,
}

impl Histogram {
    pub fn bin_edges(&self) -> Vec<(f64, f64)> {
        (0..self.probabilities.len())
            .map(|i| {
                let b = self.first_bin + i as i64;
                (b as f64 * self.bin_width, (b + 1) as f64 * self.bin_width)
            })
            .collect()
    }

    /// Probability mass in bins lying entirely below `limit`.
    pub fn mass_below(&self, limit: f64) -> f64 {
        self.bin_edges()
            .iter()
            .zip(&self.probabilities)
            .filter(|((_, hi), _)| *hi <= limit)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,probability\n");
        for ((lo, hi), p) in self.bin_edges().iter().zip(&self.probabilities) {
            out.push_str(&format!("{lo},{hi},{p}\n"));
        }
        out
    }
}

pub fn pmf(samples: &[f64], bin_width: f64) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::BadBinWidth(bin_width));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("samples", "non-finite attenuation value"));
    }
    let bins: Vec<i64> = samples
        .iter()
        .map(|s| (s / bin_width).floor() as i64)
        .collect();
    let lo = *bins.iter().min().expect("non-empty");
    let hi = *bins.iter().max().expect("non-empty");
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for b in bins {
        counts[(b - lo) as usize] += 1;
    }
    let n = samples.len() as f64;
    Ok(Histogram {
        bin_width,
        first_bin: lo,
        probabilities: counts.iter().map(|c| *c as f64 / n).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub count: usize,
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "n={} mean={:.4} std={:.4} min={:.4} max={:.4} median={:.4}",
            self.count, self.mean, self.std, self.min, self.max, self.median
        )
    }
}

pub fn summary(samples: &[f64]) -> Result<Summary> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    };
    Ok(Summary {
        mean,
        std: var.sqrt(),
        min: sorted[0],
        max: sorted[m - 1],
        median,
        count: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::default_scene;
    use proptest::prelude::*;

    #[test]
    fn named_arrays_on_default_manifold() {
        let m = default_scene().manifold;
        let d = m.spacing;
        let b = select_line_array(&m, ArraySelector::Named(NamedArray::B)).unwrap();
        assert_eq!(b.indices.len(), 50);
        assert!(b.y.abs() <= d / 2.0 + 1e-12 && b.z.abs() <= d / 2.0 + 1e-12);
        let a = select_line_array(&m, ArraySelector::Named(NamedArray::A)).unwrap();
        assert!((a.y - 45.0 * d).abs() <= d / 2.0 + 1e-12, "{}", a.y);
        assert!((a.z - 90.0 * d).abs() <= d / 2.0 + 1e-12, "{}", a.z);
        assert_eq!((a.fixed_row, a.fixed_col), (179, 89));
        let c = select_line_array(&m, ArraySelector::Named(NamedArray::C)).unwrap();
        assert_eq!((c.fixed_row, c.fixed_col), (0, 0));
        assert_eq!(b.indices[1] - b.indices[0], m.surface_len());
    }

    #[test]
    fn out_of_range_cell() {
        let m = default_scene().manifold;
        assert!(matches!(
            select_line_array(&m, ArraySelector::Cell { row: 200, col: 0 }),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn pmf_examples() {
        let h = pmf(&vec![5.2; 1800], 0.5).unwrap();
        assert_eq!(h.bin_edges(), vec![(5.0, 5.5)]);
        assert_eq!(h.probabilities, vec![1.0]);
        let h = pmf(&[0.1, 0.6, 1.9, -0.2], 0.5).unwrap();
        assert_eq!(h.first_bin, -1);
        assert_eq!(h.probabilities, vec![0.25, 0.25, 0.25, 0.0, 0.25]);
        assert_eq!(h.mass_below(2.0), 1.0);
        assert_eq!(h.mass_below(1.5), 0.75);
        assert!(matches!(pmf(&[], 0.5), Err(Error::EmptySamples)));
        assert!(matches!(pmf(&[1.0], 0.0), Err(Error::BadBinWidth(_))));
    }

    #[test]
    fn summary_examples() {
        let s = summary(&[3.5; 7]).unwrap();
        assert_eq!((s.mean, s.std), (3.5, 0.0));
        let s = summary(&[0.0, 10.0]).unwrap();
        assert_eq!(
            (s.mean, s.max, s.min, s.median, s.std),
            (5.0, 10.0, 0.0, 5.0, 5.0)
        );
        assert!(matches!(summary(&[]), Err(Error::EmptySamples)));
    }

    proptest! {
        #[test]
        fn pmf_mass_and_permutation(
            (samples, shuffled) in proptest::collection::vec(-5.0f64..30.0, 1..300)
                .prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())),
            width in 0.05f64..3.0,
        ) {
            let h = pmf(&samples, width).unwrap();
            prop_assert!((h.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(h.probabilities.iter().all(|p| *p >= 0.0));
            prop_assert_eq!(pmf(&shuffled, width).unwrap(), h);
        }
    }
}
