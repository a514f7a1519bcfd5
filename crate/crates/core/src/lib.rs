//! Riesz fractional gradients and divergences on uniform grids: operators,
//! identity checks, membership scans and a variational solver.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod cli;
pub mod csv;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod field;
pub mod frf1;
pub mod grid;
pub mod membership;
pub mod minors;
pub mod norms;
pub mod ops;
pub mod params;
pub mod piola;
pub mod reduce;
pub mod solve;

pub use error::{FracError, Result};
pub use field::{Field, MatrixField, ScalarField, VectorField};
pub use grid::{Grid, RegionMask};
pub use ops::{Backend, FracOperator};
pub use params::FracParams;
