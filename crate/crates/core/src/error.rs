use std::io;

/// Errors produced anywhere in the simulation and analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing configuration key `{0}`")]
    MissingKey(String),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error(
        "array manifold ({extent_m:.4} m along {axis}) does not enclose the body silhouette ({needed_m:.4} m)"
    )]
    ManifoldTooSmall {
        axis: &'static str,
        extent_m: f64,
        needed_m: f64,
    },
    #[error("operation requires an elliptical body")]
    WrongBodyKind,

    #[error("frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("field point coincides with the source")]
    SingularPoint,

    #[error("quadrature did not converge after {refinements} refinements (last change {change:.3e} of |E0|)")]
    NoConvergence { refinements: u32, change: f64 },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid quadrature settings: {0}")]
    InvalidQuadrature(String),
    #[error("at manifold point {index}: {source}")]
    AtPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("contour too coarse: {0} segments per wavelength (minimum 10)")]
    TooCoarse(usize),
    #[error("impedance matrix is singular (pivot ratio {0:.3e}); perturb the wavenumber away from an internal resonance")]
    SingularMatrix(f64),
    #[error("field point lies on the scatterer contour")]
    PointOnContour,
    #[error("line source lies inside or on the contour")]
    SourceInsideContour,
    #[error("slice lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("ensemble has zero states")]
    ZeroStates,

    #[error("reference field is zero")]
    ZeroReference,
    #[error("dimension mismatch: {0}")]
    DimsMismatch(String),
    #[error("bad weights: {0}")]
    BadWeights(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("no samples")]
    EmptySamples,
    #[error("bin width must be positive and finite, got {0}")]
    BadBinWidth(f64),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported dataset version {0}")]
    UnsupportedVersion(u32),
    #[error("dataset truncated at byte offset {offset}")]
    Truncated { offset: u64 },
    #[error("corrupt dataset: {0}")]
    Corrupt(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidValue {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
