//! Spectral laboratory for the incompressible plasma–vacuum free-boundary
//! MHD problem in the periodic slab `T² × (-1, 1)`.

pub mod chebyshev;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod fields;
pub mod harmonic;
pub mod scenario;
pub mod spectral;
pub mod surface;

pub use error::{PilError, Result};
