//! Outer functions of matrix weights on the unit circle, and the distorted
//! Hilbert spaces they interpolate between.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle;
pub mod experiments;
pub mod error;
pub mod factorization;
pub mod fourier;
pub mod inner;
pub mod interp;
pub mod matrix;
pub mod series;
pub mod toeplitz;

pub use circle::{Angle, Arc, ArcPartition, ArcUnion};
pub use error::{Error, Result};
pub use factorization::{factor_at_zero, FactorOptions, FactorizationResult, SolveMethod};
pub use fourier::{MatrixCircleFunction, MatrixFourierCoeffs};
pub use matrix::CMat;
