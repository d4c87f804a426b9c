use thiserror::Error;

use crate::Point;

pub type Result<T, E = NcError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NcError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("incompatible operands: {0}")]
    Incompatible(String),
    #[error("invalid twist matrix: {0}")]
    InvalidTwist(String),
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("torus point component {index} has modulus {modulus}, expected 1")]
    NotUnitModulus { index: usize, modulus: f64 },
    #[error("site-function coefficients need at least one disorder sample")]
    MissingSamples,
    #[error("read at {site:?} leaves the disorder window: radius {required} required, have {radius}")]
    WindowExceeded { site: Point, required: i64, radius: i64 },
    #[error("disorder configurations come from different specs")]
    SpecMismatch,
    #[error("flux not commensurate with periodic window: {0}")]
    Incommensurate(String),
    #[error("hopping {hop:?} does not fit window of sizes {sizes:?}")]
    RangeExceedsWindow { hop: Point, sizes: Vec<usize> },
    #[error("ambiguous minimal image along axis {axis}: entry of size {magnitude:e} at displacement N/2")]
    AmbiguousImage { axis: usize, magnitude: f64 },
    #[error("empty interior: margin {margin} on sizes {sizes:?}")]
    EmptyInterior { margin: usize, sizes: Vec<usize> },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("gapless: eigenvalue {eigenvalue} lies within {distance:e} of {energy}")]
    Gapless { energy: f64, eigenvalue: f64, distance: f64 },
    #[error("contour passes within {distance:e} of the spectrum")]
    ContourTooClose { distance: f64 },
    #[error("chiral symmetry violated (residual {0:e})")]
    ChiralViolation(f64),
    #[error("operator is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("operator is not a projection (residual {0:e})")]
    NotProjection(f64),
    #[error("invalid multi-index: {0}")]
    InvalidMultiIndex(String),
    #[error("matrix is not antisymmetric (residual {0:e})")]
    NotAntisymmetric(f64),
    #[error("pfaffian needs even dimension, got {0}")]
    OddDimension(usize),
    #[error("hermiticity constraint violated at hopping {0:?}")]
    HermiticityViolation(Point),
    #[error("contradictory explicit hoppings at {0:?}")]
    ContradictoryHoppings(Point),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no samples to average")]
    EmptySamples,
    #[error("determinant nearly vanishes at k = {k} (|det| = {det:e})")]
    NearZeroDeterminant { k: f64, det: f64 },
    #[error("band gap closes on the k-grid at {k:?} (gap {gap:e})")]
    GapClosed { k: Vec<f64>, gap: f64 },
    #[error("disorder sample {index}: {source}")]
    Sample { index: usize, source: Box<NcError> },
}

impl NcError {
    /// Attributes an error to disorder sample `index`.
    pub fn in_sample(self, index: usize) -> Self {
        NcError::Sample { index, source: Box::new(self) }
    }

    /// The underlying error with sample attribution removed.
    pub fn root(&self) -> &NcError {
        match self {
            NcError::Sample { source, .. } => source.root(),
            other => other,
        }
    }
}
