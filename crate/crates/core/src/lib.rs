//! Numerical machinery for twisted crossed products over `Z^d`: finitely
//! supported Fourier polynomials, disorder hulls, magnetic lattice
//! representations, spectral projections and non-commutative Chern numbers.
//!
//! Axes are zero-based throughout the Rust API.

pub mod disorder;
pub mod error;
pub mod invariants;
pub mod lattice;
pub mod models;
pub mod pipeline;
pub mod spectral;
pub mod twist;

mod linalg;

pub use disorder::{DisorderConfig, DisorderSpec, SiteDistribution};
pub use error::{NcError, Result};
pub use invariants::{ChernRange, ChernResult, MultiIndex, Winding};
pub use lattice::{Boundary, LatticeOperator, Window};
pub use models::ModelSpec;
pub use spectral::{Contour, Gap, QuadratureRule, SpectralData};
pub use twist::{Coefficient, NcPoly, NormBackend, Seminorm, TwistMatrix};

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// A point of `Z^d`.
pub type Point = Vec<i64>;
