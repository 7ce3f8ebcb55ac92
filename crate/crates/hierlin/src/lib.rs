//! Variable selection for high-dimensional linear regression with two-way
//! interaction effects.
//!
//! The crate implements forward-stepwise and LASSO-based selectors for the
//! quadratic model
//!
//! ```text
//! Y = b0 + sum_j beta_j X_j + sum_{j<=k} gamma_jk X_j X_k + eps
//! ```
//!
//! together with the semantic layer needed to reason about such models:
//! coding-transformation-invariant importance sets, strong/weak heredity
//! checks, reproducible data generating processes, and a Monte Carlo harness
//! that scores selectors on coverage, exact recovery, coefficient error and
//! out-of-sample prediction.
//!
//! Module map:
//!
//! - [`linalg`]: dense Cholesky, least squares, incremental forward-fit state
//! - [`model`]: effect identifiers, model specs, importance sets, heredity
//! - [`data`]: AR(1) Gaussian and uniform designs, response synthesis, seeds
//! - [`criteria`]: BIC / extended BIC, out-of-sample R^2, coefficient MSE
//! - [`forward`]: forward selection engine, two-stage FS, iFORM, oracle fit
//! - [`lasso`]: coordinate descent, warm-started lambda paths, LASSO selectors
//! - [`evaluation`]: per-replicate metrics, Monte Carlo aggregation, checks
//! - [`config`]: plain-text experiment configuration files
//! - [`cli`]: the `hierlin` command-line front end
//!
//! The `examples/` directory contains one runnable program per capability;
//! start with `cargo run --release --example table1`.

// Index loops mirror the linear-algebra notation throughout.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod criteria;
pub mod data;
pub mod evaluation;
pub mod forward;
pub mod lasso;
pub mod linalg;
pub mod model;
pub mod rng;

pub use criteria::{Criterion, CriterionKind};
pub use data::{Dataset, DesignConfig, DesignFamily};
pub use evaluation::{ExperimentConfig, Method, MetricsReport};
pub use forward::{CandidatePolicy, SelectionResult};
pub use model::{CodingTransform, EffectId, HeredityMode, QuadraticModelSpec};
