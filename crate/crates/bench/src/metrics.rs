//! Effect-estimation error metrics over paired prediction/truth vectors.

use crate::{BenchError, Result};

fn check<'a>(pred: &[f64], truth: Option<&'a [f64]>) -> Result<&'a [f64]> {
    let truth = truth.ok_or_else(|| {
        BenchError::MetricUnavailable("dataset has no potential-outcome ground truth".into())
    })?;
    if pred.is_empty() || pred.len() != truth.len() {
        return Err(BenchError::MetricUnavailable(format!(
            "{} predictions for {} ground-truth effects",
            pred.len(),
            truth.len()
        )));
    }
    Ok(truth)
}

/// Root mean squared difference between predicted and true effects.
pub fn sqrt_pehe(pred: &[f64], truth: Option<&[f64]>) -> Result<f64> {
    let truth = check(pred, truth)?;
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sum / pred.len() as f64).sqrt())
}

/// Mean of `pred - truth`.
pub fn eps_ate_signed(pred: &[f64], truth: Option<&[f64]>) -> Result<f64> {
    let truth = check(pred, truth)?;
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| p - t).sum();
    Ok(sum / pred.len() as f64)
}

/// `|mean(pred) - mean(truth)|`.
pub fn eps_ate(pred: &[f64], truth: Option<&[f64]>) -> Result<f64> {
    eps_ate_signed(pred, truth).map(f64::abs)
}

/// Pearson correlation; `None` when either side is constant.
pub fn correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
}

/// Sample mean and standard deviation (`n - 1` denominator, 0 for one value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
