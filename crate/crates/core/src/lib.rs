//! Two-stage neural estimation of individual treatment effects.
//!
//! The crate is organised around the pieces of the estimator and the tooling
//! needed to check it against known ground truth:
//!
//! - [`nn`]: a small dense network engine with exact backpropagation,
//!   per-parameter freeze masks and a finite-difference gradient checker.
//! - [`estimator`]: the two-stage procedure (outcome model without the
//!   treatment, then either an explicit residual fit or a frozen-encoding fit),
//!   ensembling and checkpoints.
//! - [`theory`]: nuisance oracles, the residualised outcome identity, the
//!   orthogonal score and Monte-Carlo Gateaux derivative checks.
//! - [`data`]: synthetic data-generating processes with exact ground truth,
//!   split protocol, replications and CSV ingestion.
//! - [`baselines`]: least-squares baselines and a residual-on-residual
//!   average effect estimator.

// Validation uses negated float comparisons so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod data;
pub mod error;
pub mod estimator;
pub mod nn;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
