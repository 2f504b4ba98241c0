//! Slope estimation for the simple linear model `y = alpha + beta x + e` by
//! driving Gini's cograduation index of the residuals to zero.
//!
//! * [`ranks`]: residual ranks and the index at a fixed slope.
//! * [`process`]: the step function `b -> G(y; b)` over pairwise slopes.
//! * [`estimator`]: point estimate and distribution-free confidence bounds.
//! * [`null`]: exact and simulated null distributions of the index.
//! * [`baselines`]: least squares and Theil–Sen.
//! * [`asymptotics`]: asymptotic variances and relative efficiencies.
//! * [`montecarlo`]: seeded simulation harness.
//! * [`cli`]: the `cograd` command-line tool.

pub mod asymptotics;
pub mod baselines;
pub mod cli;
pub mod error;
pub mod estimator;
mod json;
pub mod montecarlo;
pub mod null;
pub mod process;
pub mod quadrature;
pub mod ranks;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use estimator::{confidence_interval, point_estimate, point_estimate_fast, ConfidenceInterval, SlopeEstimate};
pub use process::{build_step_function, BuildMethod, GiniStepFunction};
pub use ranks::{gini_at, GiniValue, Sample};
