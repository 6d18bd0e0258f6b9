//! Dense network engine: forward/backward passes, freeze masks, optimizers,
//! a mini-batch trainer and a finite-difference gradient checker.

mod gradcheck;
mod network;
mod optim;
mod train;

pub use gradcheck::{gradient_check, GradientCheckReport, FD_STEP};
pub use network::{
    logistic, swish, swish_derivative, Activation, Architecture, ForwardCache, LayerSpec, Network,
    TreatmentInit,
};
pub use optim::{FreezeMask, OptimizerConfig, OptimizerKind, OptimizerState};
pub use train::{mse, mse_loss, train, EpochLog, RegressionSet, TrainConfig};
