//! Robust phase retrieval by median-truncated gradient descent.
//!
//! Recovers a real signal `x` (up to global sign) from intensity measurements
//! `y_i = (a_iᵀx)² + w_i + η_i` with Gaussian `a_i`, dense bounded noise `w`
//! and a fraction of arbitrary outliers `η`. The solvers truncate gradient
//! contributions using the sample median of the residuals, which stays
//! informative when a constant fraction of the measurements is corrupted.
//!
//! Modules:
//! * [`quantile`] order statistics and the `|uv|` product-normal law
//! * [`model`] signals, ensembles and corruption
//! * [`init`] truncated spectral initialization
//! * [`solvers`] median-TWF, median-RWF and baselines
//! * [`metrics`] distance up to sign and empirical check statistics
//! * [`harness`] seeded experiment sweeps and CSV output

// Coefficient tables keep their published digits; `!(v > 0.0)` is used on
// purpose so NaN is rejected too.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod linalg;

pub mod harness;
pub mod init;
pub mod metrics;
pub mod model;
pub mod quadrature;
pub mod quantile;
pub mod rng;
pub mod solvers;
pub mod special;

pub use error::{Error, Result};
pub use init::{median_spectral_init, mean_spectral_init, InitResult};
pub use metrics::{dist, is_success, relative_error};
pub use model::{generate_problem, CorruptionSpec, ProblemInstance, SensingEnsemble, SignalVector};
pub use solvers::{run_solver, Algorithm, IterateTrace, SolverConfig};
