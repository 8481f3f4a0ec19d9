//! Cholesky least squares under emulated low-precision arithmetic.
//!
//! - [`precision`]: correctly rounded `b`-bit arithmetic on binary64 carriers.
//! - [`matrix`]: dense complex matrices and binary64 reference kernels
//!   (products, triangular solves, Jacobi SVD, determinants, volume).
//! - [`pipeline`]: the Gram / Cholesky / weight-matrix detector under a
//!   precision context and its error measurement.
//! - [`ensembles`]: Haar unitaries, RANDSVD matrices, random unit vectors.
//! - [`bounds`]: classical and probabilistic round-off bounds.
//! - [`harness`]: CMAT files, Monte-Carlo sweeps, CSV/SVG output and the
//!   statistical self-test.

pub mod bounds;
pub mod ensembles;
pub mod harness;
pub mod matrix;
pub mod par;
pub mod pipeline;
pub mod precision;

pub use bounds::BoundReport;
pub use ensembles::{RandsvdSpec, RngStream, Spectrum};
pub use matrix::{CMatrix, LinalgError};
pub use pipeline::{ErrorMeasurement, FailureStage, LsSolution, SolveOptions, TrialOutcome};
pub use precision::{CScalar, PrecisionContext, PrecisionError, RangePolicy};
