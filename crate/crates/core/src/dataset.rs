//! Binary dataset of complex field samples for a set of body states.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic           4 bytes  "BLKF"
//! version         u32      = 1
//! frequency_hz    f64
//! standoff_d      f64
//! dims            u32 × 3  (n_surfaces, n_rows, n_cols)
//! spacing_m       f64
//! body            f64 × 6  (height, width, thickness, rel_permittivity, loss_tangent, mass_density)
//! body_kind       u8       0 = elliptical cylinder, 1 = rectangular screen
//! convention      u8       1 = e^{+jωt}
//! state_count     u32
//! state table     state_count × 56 bytes:
//!                 state_id u32, nominal u32 (0 = free space, q = p_q),
//!                 nominal x, y, θ f64, Δx, Δy, Δθ f64
//! samples         state_count × n_surfaces × n_rows × n_cols × (re f64, im f64)
//! ```
//!
//! State 0 is always free space.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::diffraction::FieldGrid;
use crate::error::{Error, Result};
use crate::geometry::{ArrayManifold, BodyKind, BodyMaterial, BodyModel, Pose};

pub const MAGIC: [u8; 4] = *b"BLKF";
pub const VERSION: u32 = 1;
/// Flag value for `e^{+jωt}` phasors.
pub const CONVENTION_POSITIVE_JWT: u8 = 1;

const FIXED_HEADER_BYTES: u64 = 4 + 4 + 8 + 8 + 12 + 8 + 48 + 1 + 1 + 4;
const STATE_RECORD_BYTES: u64 = 4 + 4 + 48;
const SAMPLE_BYTES: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRecord {
    pub state_id: u32,
    /// 0 for free space, otherwise the 1-based nominal position.
    pub nominal_index: u32,
    pub nominal: Pose,
    /// Offset from `nominal` (Δx, Δy, Δθ).
    pub offset: Pose,
}

impl StateRecord {
    pub fn free_space() -> Self {
        Self {
            state_id: 0,
            nominal_index: 0,
            nominal: Pose::new(0.0, 0.0, 0.0),
            offset: Pose::new(0.0, 0.0, 0.0),
        }
    }

    pub fn is_free_space(&self) -> bool {
        self.nominal_index == 0
    }

    pub fn pose(&self) -> Pose {
        Pose::new(
            self.nominal.x + self.offset.x,
            self.nominal.y + self.offset.y,
            self.nominal.theta + self.offset.theta,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHeader {
    pub version: u32,
    pub frequency_hz: f64,
    pub standoff_d: f64,
    pub dims: (usize, usize, usize),
    pub spacing_m: f64,
    pub body: BodyModel,
    pub convention: u8,
    pub states: Vec<StateRecord>,
}

impl DatasetHeader {
    pub fn samples_per_state(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }

    pub fn header_bytes(&self) -> u64 {
        FIXED_HEADER_BYTES + STATE_RECORD_BYTES * self.states.len() as u64
    }

    pub fn file_bytes(&self) -> u64 {
        self.header_bytes() + SAMPLE_BYTES * (self.samples_per_state() * self.states.len()) as u64
    }

    pub fn manifold(&self) -> Result<ArrayManifold> {
        ArrayManifold::new(
            self.dims.0,
            self.dims.1,
            self.dims.2,
            self.spacing_m,
            self.standoff_d,
        )
    }

    /// States belonging to nominal position `q` (1-based), in file order.
    pub fn states_of(&self, q: u32) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.nominal_index == q)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    /// One sample vector per state, (surface, row, col) order.
    pub samples: Vec<Vec<Complex64>>,
}

impl Dataset {
    pub fn grid(&self, state: usize) -> Result<FieldGrid> {
        let samples = self
            .samples
            .get(state)
            .ok_or_else(|| Error::OutOfRange(format!("state {state} of {}", self.samples.len())))?;
        let label = match self.header.states[state] {
            s if s.is_free_space() => "free".to_string(),
            s => {
                let p = s.pose();
                format!("x={} y={} theta={}", p.x, p.y, p.theta)
            }
        };
        FieldGrid::new(self.header.dims, samples.clone(), label)
    }
}

fn validate(header: &DatasetHeader, grids: &[&[Complex64]]) -> Result<()> {
    if header.states.len() != grids.len() {
        return Err(Error::DimsMismatch(format!(
            "{} state records for {} grids",
            header.states.len(),
            grids.len()
        )));
    }
    match header.states.first() {
        Some(s) if s.is_free_space() => {}
        _ => return Err(Error::Corrupt("state 0 must be free space".into())),
    }
    let n = header.samples_per_state();
    if let Some((i, g)) = grids.iter().enumerate().find(|(_, g)| g.len() != n) {
        return Err(Error::DimsMismatch(format!(
            "grid {i} has {} samples, header dims {:?} need {n}",
            g.len(),
            header.dims
        )));
    }
    for (k, d) in [header.dims.0, header.dims.1, header.dims.2]
        .iter()
        .enumerate()
    {
        if *d == 0 || *d > u32::MAX as usize {
            return Err(Error::DimsMismatch(format!("dimension {k} = {d}")));
        }
    }
    Ok(())
}

fn body_kind_code(kind: BodyKind) -> u8 {
    match kind {
        BodyKind::EllipticalCylinder => 0,
        BodyKind::RectangularScreen => 1,
    }
}

fn write_header<W: Write>(w: &mut W, h: &DatasetHeader) -> io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&h.version.to_le_bytes())?;
    w.write_all(&h.frequency_hz.to_le_bytes())?;
    w.write_all(&h.standoff_d.to_le_bytes())?;
    for d in [h.dims.0, h.dims.1, h.dims.2] {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    w.write_all(&h.spacing_m.to_le_bytes())?;
    let b = &h.body;
    for v in [
        b.height_hs,
        b.width_ws1,
        b.thickness_ws2,
        b.material.rel_permittivity,
        b.material.loss_tangent,
        b.material.mass_density,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&[body_kind_code(b.kind), h.convention])?;
    w.write_all(&(h.states.len() as u32).to_le_bytes())?;
    for s in &h.states {
        w.write_all(&s.state_id.to_le_bytes())?;
        w.write_all(&s.nominal_index.to_le_bytes())?;
        for v in [
            s.nominal.x,
            s.nominal.y,
            s.nominal.theta,
            s.offset.x,
            s.offset.y,
            s.offset.theta,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn write_samples<W: Write>(w: &mut W, samples: &[Complex64]) -> io::Result<()> {
    let mut buf = Vec::with_capacity(samples.len().min(1 << 16) * 16);
    for chunk in samples.chunks(1 << 16) {
        buf.clear();
        for z in chunk {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Streams a header followed by state grids to any writer.
pub struct DatasetWriter<W: Write> {
    inner: W,
    header: DatasetHeader,
    written: usize,
}

impl<W: Write> DatasetWriter<W> {
    pub fn new(mut inner: W, header: DatasetHeader) -> Result<Self> {
        if header
            .states
            .first()
            .map(|s| !s.is_free_space())
            .unwrap_or(true)
        {
            return Err(Error::Corrupt("state 0 must be free space".into()));
        }
        write_header(&mut inner, &header)?;
        Ok(Self {
            inner,
            header,
            written: 0,
        })
    }

    pub fn push(&mut self, samples: &[Complex64]) -> Result<()> {
        if self.written >= self.header.states.len() {
            return Err(Error::DimsMismatch(format!(
                "more grids than the {} declared states",
                self.header.states.len()
            )));
        }
        if samples.len() != self.header.samples_per_state() {
            return Err(Error::DimsMismatch(format!(
                "grid has {} samples, header dims {:?}",
                samples.len(),
                self.header.dims
            )));
        }
        write_samples(&mut self.inner, samples)?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        if self.written != self.header.states.len() {
            return Err(Error::DimsMismatch(format!(
                "{} grids written, {} declared",
                self.written,
                self.header.states.len()
            )));
        }
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn write_dataset(path: &Path, header: &DatasetHeader, grids: &[FieldGrid]) -> Result<()> {
    let slices: Vec<&[Complex64]> = grids.iter().map(|g| g.samples.as_slice()).collect();
    if let Some(g) = grids.iter().find(|g| g.dims != header.dims) {
        return Err(Error::DimsMismatch(format!(
            "grid {:?} vs header {:?}",
            g.dims, header.dims
        )));
    }
    validate(header, &slices)?;
    let mut w = DatasetWriter::new(BufWriter::new(File::create(path)?), header.clone())?;
    for s in slices {
        w.push(s)?;
    }
    w.finish()?;
    Ok(())
}

/// Reader that tracks its byte offset for truncation reports.
struct Cursor<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.fill(&mut buf)?;
        Ok(buf)
    }

    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        let mut done = 0;
        while done < buf.len() {
            match self.inner.read(&mut buf[done..]) {
                Ok(0) => {
                    return Err(Error::Truncated {
                        offset: self.offset + done as u64,
                    })
                }
                Ok(n) => done += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

fn read_header<R: Read>(c: &mut Cursor<R>) -> Result<DatasetHeader> {
    let magic: [u8; 4] = c.bytes()?;
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let frequency_hz = c.f64()?;
    let standoff_d = c.f64()?;
    let dims = (c.u32()? as usize, c.u32()? as usize, c.u32()? as usize);
    let spacing_m = c.f64()?;
    let mut body = [0.0; 6];
    for v in &mut body {
        *v = c.f64()?;
    }
    let [kind, convention]: [u8; 2] = c.bytes()?;
    let kind = match kind {
        0 => BodyKind::EllipticalCylinder,
        1 => BodyKind::RectangularScreen,
        k => return Err(Error::Corrupt(format!("unknown body kind {k}"))),
    };
    if convention != CONVENTION_POSITIVE_JWT {
        return Err(Error::Corrupt(format!(
            "unknown time convention flag {convention}"
        )));
    }
    let body = BodyModel::new(
        kind,
        body[0],
        body[1],
        body[2],
        BodyMaterial {
            rel_permittivity: body[3],
            loss_tangent: body[4],
            mass_density: body[5],
        },
    )
    .map_err(|e| Error::Corrupt(format!("body record: {e}")))?;
    let count = c.u32()? as usize;
    let mut states = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let state_id = c.u32()?;
        let nominal_index = c.u32()?;
        let mut v = [0.0; 6];
        for x in &mut v {
            *x = c.f64()?;
        }
        states.push(StateRecord {
            state_id,
            nominal_index,
            nominal: Pose::new(v[0], v[1], v[2]),
            offset: Pose::new(v[3], v[4], v[5]),
        });
    }
    let header = DatasetHeader {
        version,
        frequency_hz,
        standoff_d,
        dims,
        spacing_m,
        body,
        convention,
        states,
    };
    if header
        .states
        .first()
        .map(|s| !s.is_free_space())
        .unwrap_or(true)
    {
        return Err(Error::Corrupt("state 0 must be free space".into()));
    }
    Ok(header)
}

pub fn read_header_only(path: &Path) -> Result<DatasetHeader> {
    let mut c = Cursor {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
    };
    read_header(&mut c)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    read_dataset_from(BufReader::new(File::open(path)?))
}

pub fn read_dataset_from<R: Read>(reader: R) -> Result<Dataset> {
    let mut c = Cursor {
        inner: reader,
        offset: 0,
    };
    let header = read_header(&mut c)?;
    let n = header.samples_per_state();
    let mut samples = Vec::with_capacity(header.states.len());
    let mut buf = vec![0u8; n * 16];
    for _ in 0..header.states.len() {
        c.fill(&mut buf)?;
        samples.push(
            buf.chunks_exact(16)
                .map(|b| {
                    Complex64::new(
                        f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
                        f64::from_le_bytes(b[8..].try_into().expect("8 bytes")),
                    )
                })
                .collect(),
        );
    }
    let mut probe = [0u8; 1];
    if c.inner.read(&mut probe)? != 0 {
        return Err(Error::Corrupt(format!(
            "trailing bytes after offset {}",
            c.offset
        )));
    }
    Ok(Dataset { header, samples })
}
