//! Closed-form reference estimators: pooled least squares with treatment as a
//! feature, per-arm least squares, and residual-on-residual ATE with
//! cross-fitted nuisances.

mod dml;
mod linalg;
mod ols;

pub use dml::{dml_ate, dml_ate_with_nuisances, DmlConfig, DmlFit, NuisanceLearner};
pub use linalg::{least_squares, LeastSquares, RIDGE_FALLBACK};
pub use ols::{ols_lr1, ols_lr1_with, ols_lr2, FitScope, Lr1Fit, Lr2Fit, LinearModel, OlsOptions};
