//! Body-state ensembles: nominal positions and the micro-movements around them.

use crate::error::{Error, Result};
use crate::geometry::Pose;

/// Heading set of a micro-movement ensemble (degrees).
pub const ROTATIONS_DEG: [f64; 4] = [0.0, 45.0, 90.0, 135.0];

/// States per nominal position.
pub const MICROSTATE_COUNT: usize = 36;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub nominal: Pose,
    /// (Δx, Δy) in metres, translation-major order.
    pub translation_offsets: Vec<(f64, f64)>,
    pub rotations: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EnsembleSpec {
    /// Full cross product of `±λ/4, 0` offsets with [`ROTATIONS_DEG`],
    /// uniformly weighted.
    pub fn standard(nominal: Pose, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("lambda", "must be positive"));
        }
        let q = lambda / 4.0;
        let steps = [-q, 0.0, q];
        let translation_offsets = steps
            .iter()
            .flat_map(|&dx| steps.iter().map(move |&dy| (dx, dy)))
            .collect::<Vec<_>>();
        let rotations = ROTATIONS_DEG.to_vec();
        let weights = uniform_weights(translation_offsets.len() * rotations.len())?;
        Ok(Self {
            nominal,
            translation_offsets,
            rotations,
            weights,
        })
    }

    pub fn state_count(&self) -> usize {
        self.translation_offsets.len() * self.rotations.len()
    }

    pub fn poses(&self) -> Vec<Pose> {
        let n = self.nominal;
        self.translation_offsets
            .iter()
            .flat_map(|&(dx, dy)| {
                self.rotations
                    .iter()
                    .map(move |&th| Pose::new(n.x + dx, n.y + dy, n.theta + th))
            })
            .collect()
    }

    /// Keeps the states selected by `keep` and renormalises their weights.
    pub fn subset(&self, keep: &[usize]) -> Result<(Vec<Pose>, Vec<f64>)> {
        let poses = self.poses();
        let mut out_p = Vec::with_capacity(keep.len());
        let mut out_w = Vec::with_capacity(keep.len());
        for &i in keep {
            let p = *poses
                .get(i)
                .ok_or_else(|| Error::OutOfRange(format!("state {i} of {}", poses.len())))?;
            out_p.push(p);
            out_w.push(self.weights[i]);
        }
        let w = renormalize(&out_w)?;
        Ok((out_p, w))
    }
}

/// The 36 micro-movement poses around `nominal`: translation-major
/// (Δx then Δy over {−λ/4, 0, +λ/4}), rotation-minor.
pub fn microstates(nominal: Pose, lambda: f64) -> Result<Vec<Pose>> {
    Ok(EnsembleSpec::standard(nominal, lambda)?.poses())
}

/// `1/n` each, with the final entry absorbing rounding so the sum is 1.
pub fn uniform_weights(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::ZeroStates);
    }
    renormalize(&vec![1.0; n])
}

pub fn renormalize(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::ZeroStates);
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::BadWeights(
            "weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::BadWeights("weights sum to zero".into()));
    }
    let mut w: Vec<f64> = weights.iter().map(|x| x / total).collect();
    let head: f64 = w[..w.len() - 1].iter().sum();
    let last = w.len() - 1;
    w[last] = 1.0 - head;
    Ok(w)
}

/// Named nominal positions, in order `p1, p2, p3`.
pub fn nominal_positions() -> [(&'static str, Pose); 3] {
    [
        ("p1", Pose::new(2.0, 0.0, 0.0)),
        ("p2", Pose::new(2.0, 0.25, 0.0)),
        ("p3", Pose::new(2.0, 0.5, 0.0)),
    ]
}

/// Index (0-based) and pose of a named nominal position.
pub fn nominal_by_name(name: &str) -> Result<(usize, Pose)> {
    nominal_positions()
        .iter()
        .enumerate()
        .find(|(_, (n, _))| n.eq_ignore_ascii_case(name.trim()))
        .map(|(i, (_, p))| (i, *p))
        .ok_or_else(|| {
            Error::invalid(
                "position",
                format!("unknown nominal position `{name}` (expected p1, p2 or p3)"),
            )
        })
}
