//! Two-stage treatment-effect estimator.
//!
//! Stage 1 fits `g(x) = E[Y | x]` on a network whose treatment edges are
//! zero and frozen. Stage 2 either refits a fresh network on the residual
//! `Y - g(x)` (explicit-residual variant) or warm-starts from the stage-1
//! network with the covariate encoding frozen and regresses `Y` directly
//! (freezing variant). The effect at `x` is `h(1, x) - h(0, x)`, averaged over
//! an ensemble of train/validation splits.

mod checkpoint;
mod config;
mod ensemble;
mod stage1;
mod stage2;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, NetworkRecord, CHECKPOINT_VERSION};
pub use config::{CdnnConfig, Variant};
pub use ensemble::{fit, CdnnEstimator, Member};
pub use stage1::{compute_residuals, fit_stage1, ResidualDataset, Stage1Model};
pub use stage2::{fit_stage2_explicit, fit_stage2_freezing, Stage2Model, TargetKind};

use ndarray::ArrayView2;

use crate::data::Dataset;
use crate::nn::{Network, RegressionSet};
use crate::Result;

/// Regression set over `data` with the given targets.
pub(crate) fn regression_set(data: &Dataset, target: Vec<f64>) -> Result<RegressionSet> {
    RegressionSet::new(data.covariates(), data.treatments(), target)
}

/// `h(1, x) - h(0, x)` for every row of `x`.
pub(crate) fn double_score(net: &Network, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let n = x.nrows();
    let treated = net.predict(x, &vec![1.0; n])?;
    let control = net.predict(x, &vec![0.0; n])?;
    Ok(treated.iter().zip(&control).map(|(a, b)| a - b).collect())
}
