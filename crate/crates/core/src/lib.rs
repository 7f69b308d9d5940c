//! Topological recursion on genus-0 spectral curves and the Frobenius-side
//! data (R-matrices, primitive forms, calibrations) it is compared against.

// Coefficient loops index several arrays at once.
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod error;
pub mod scalar;
pub mod series;
pub mod spectral_curve;
pub mod matrix;
pub mod roots;
pub mod givental_r;
pub mod frobenius_rank2;
pub mod multi;
pub mod local_recursion;
pub mod eo_recursion;
pub mod descendants;

pub use error::{Error, Result};
pub use scalar::{Backend, Scalar};
