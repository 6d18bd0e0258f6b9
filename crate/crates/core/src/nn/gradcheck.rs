//! Central finite-difference check of backpropagated gradients.

use super::{mse_loss, Network, RegressionSet};
use crate::Result;

/// Step used for central differences.
pub const FD_STEP: f64 = 1e-5;

/// Relative errors use `max(|analytic|, |numeric|, RELATIVE_FLOOR)` as the
/// denominator so that parameters with vanishing gradients do not divide by 0.
const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheckReport {
    pub max_relative_error: f64,
    pub worst_parameter: usize,
    pub parameters_checked: usize,
}

fn batch_loss(net: &Network, batch: &RegressionSet) -> Result<f64> {
    let pred = net.predict(batch.x.view(), &batch.t)?;
    Ok(mse_loss(&pred, &batch.target)?.0)
}

/// Compares backprop gradients of the batch MSE with central differences over
/// every parameter, frozen or not.
pub fn gradient_check(net: &Network, batch: &RegressionSet) -> Result<GradientCheckReport> {
    let cache = net.forward_batch(batch.x.view(), &batch.t)?;
    let (_, dl) = mse_loss(cache.predictions().as_slice().unwrap(), &batch.target)?;
    let analytic = net.backward_batch(&cache, &dl)?;

    let mut probe = net.clone();
    let mut report = GradientCheckReport {
        max_relative_error: 0.0,
        worst_parameter: 0,
        parameters_checked: net.param_count(),
    };
    for (i, &a) in analytic.iter().enumerate() {
        let original = net.params()[i];
        probe.set_param(i, original + FD_STEP);
        let up = batch_loss(&probe, batch)?;
        probe.set_param(i, original - FD_STEP);
        let down = batch_loss(&probe, batch)?;
        probe.set_param(i, original);
        let numeric = (up - down) / (2.0 * FD_STEP);
        let denom = a.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
        let rel = (a - numeric).abs() / denom;
        if rel > report.max_relative_error {
            report.max_relative_error = rel;
            report.worst_parameter = i;
        }
    }
    Ok(report)
}
