//! End-to-end steps shared by the command-line tool and the tests:
//! simulate an ensemble into a dataset, then reduce it to maps and
//! line-array statistics.

use std::io::Write;

use crate::dataset::{
    Dataset, DatasetHeader, DatasetWriter, StateRecord, CONVENTION_POSITIVE_JWT, VERSION,
};
use crate::diffraction::{field_grid, BodyState, QuadratureSpec};
use crate::ensemble::{microstates, nominal_positions, uniform_weights};
use crate::error::{Error, Result};
use crate::geometry::{Pose, Scene};
use crate::imaging::{attenuation_db, attenuation_map, mean_map, std_map, AttenuationMap};
use crate::stats::{
    pmf, select_line_array, summary, ArraySelector, Histogram, LineArraySelection, Summary,
};

/// Header for free space followed by the 36 micro-states of each listed
/// nominal position (`(1-based index, pose)`).
pub fn ensemble_header(scene: &Scene, positions: &[(u32, Pose)]) -> Result<DatasetHeader> {
    let lambda = scene.wavelength();
    let mut states = vec![StateRecord::free_space()];
    for &(q, nominal) in positions {
        if q == 0 {
            return Err(Error::invalid(
                "positions",
                "nominal index 0 is reserved for free space",
            ));
        }
        for p in microstates(nominal, lambda)? {
            states.push(StateRecord {
                state_id: states.len() as u32,
                nominal_index: q,
                nominal,
                offset: Pose::new(p.x - nominal.x, p.y - nominal.y, p.theta - nominal.theta),
            });
        }
    }
    let m = &scene.manifold;
    Ok(DatasetHeader {
        version: VERSION,
        frequency_hz: scene.frequency_hz,
        standoff_d: scene.standoff_d,
        dims: (m.n_surfaces, m.n_rows, m.n_cols),
        spacing_m: m.spacing,
        body: scene.body,
        convention: CONVENTION_POSITIVE_JWT,
        states,
    })
}

/// Parses `p1,p3` style lists into `(1-based index, pose)`.
pub fn parse_positions(list: &str) -> Result<Vec<(u32, Pose)>> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (i, pose) = crate::ensemble::nominal_by_name(name)?;
        let entry = (i as u32 + 1, pose);
        if out.contains(&entry) {
            return Err(Error::invalid(
                "positions",
                format!("`{name}` listed twice"),
            ));
        }
        out.push(entry);
    }
    if out.is_empty() {
        return Err(Error::invalid("positions", "no positions given"));
    }
    Ok(out)
}

/// Runs every state of `header` and streams the samples into `out`.
/// `progress` is called after each state with (done, total).
pub fn simulate<W: Write>(
    scene: &Scene,
    header: &DatasetHeader,
    quad: &QuadratureSpec,
    out: W,
    mut progress: impl FnMut(usize, usize),
) -> Result<W> {
    let total = header.states.len();
    let mut writer = DatasetWriter::new(out, header.clone())?;
    for (i, s) in header.states.iter().enumerate() {
        let state = if s.is_free_space() {
            BodyState::FreeSpace
        } else {
            BodyState::Body(s.pose())
        };
        let grid = field_grid(scene, state, quad)?;
        writer.push(&grid.samples)?;
        progress(i + 1, total);
    }
    writer.finish()
}

/// Positions present in a dataset, as `(1-based index, nominal pose)`.
pub fn dataset_positions(header: &DatasetHeader) -> Vec<(u32, Pose)> {
    let mut out: Vec<(u32, Pose)> = Vec::new();
    for s in &header.states {
        if !s.is_free_space() && !out.iter().any(|(q, _)| *q == s.nominal_index) {
            out.push((s.nominal_index, s.nominal));
        }
    }
    out
}

fn position_states(ds: &Dataset, q: u32) -> Result<Vec<usize>> {
    let idx = ds.header.states_of(q);
    if idx.is_empty() {
        return Err(Error::invalid(
            "pos",
            format!("dataset holds no states for p{q}"),
        ));
    }
    Ok(idx)
}

/// Per-state maps of one surface for nominal position `q`.
pub fn state_maps(ds: &Dataset, q: u32, surface: usize) -> Result<Vec<AttenuationMap>> {
    let free = ds.grid(0)?;
    position_states(ds, q)?
        .into_iter()
        .map(|i| attenuation_map(&ds.grid(i)?, &free, surface))
        .collect()
}

/// Uniform-weight mean and standard-deviation maps.
pub fn ensemble_maps(
    ds: &Dataset,
    q: u32,
    surface: usize,
) -> Result<(AttenuationMap, AttenuationMap)> {
    let stack = state_maps(ds, q, surface)?;
    let w = uniform_weights(stack.len())?;
    let mean = mean_map(&stack, &w)?;
    let std = std_map(&stack, &mean, &w)?;
    Ok((mean, std))
}

/// Attenuation samples along a line array for every state of position `q`,
/// state-major.
pub fn line_array_samples(
    ds: &Dataset,
    q: u32,
    selector: ArraySelector,
) -> Result<(LineArraySelection, Vec<f64>)> {
    let manifold = ds.header.manifold()?;
    let sel = select_line_array(&manifold, selector)?;
    let free = &ds.samples[0];
    let mut out = Vec::new();
    for i in position_states(ds, q)? {
        for &j in &sel.indices {
            out.push(attenuation_db(ds.samples[i][j], free[j])?);
        }
    }
    Ok((sel, out))
}

pub fn line_array_stats(
    ds: &Dataset,
    q: u32,
    selector: ArraySelector,
    bin_width: f64,
) -> Result<(LineArraySelection, Histogram, Summary)> {
    let (sel, samples) = line_array_samples(ds, q, selector)?;
    Ok((sel, pmf(&samples, bin_width)?, summary(&samples)?))
}

/// The standard positions as `(1-based index, pose)`.
pub fn all_positions() -> Vec<(u32, Pose)> {
    nominal_positions()
        .iter()
        .enumerate()
        .map(|(i, (_, p))| (i as u32 + 1, *p))
        .collect()
}
