//! Mini-batch training with validation early stopping.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{FreezeMask, Network, OptimizerConfig, OptimizerState};
use crate::{rng, Error, Result};

/// Mean squared error and its gradient `2 (pred - target) / N`.
pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    if predictions.len() != targets.len() {
        return Err(Error::InputShape {
            expected: predictions.len(),
            got: targets.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = predictions.len() as f64;
    let mut loss = 0.0;
    let grad = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| {
            let r = p - y;
            loss += r * r;
            2.0 * r / n
        })
        .collect();
    Ok((loss / n, grad))
}

/// Inputs and regression target for one training or validation set.
#[derive(Debug, Clone)]
pub struct RegressionSet {
    pub x: Array2<f64>,
    pub t: Vec<f64>,
    pub target: Vec<f64>,
}

impl RegressionSet {
    pub fn new(x: Array2<f64>, t: Vec<f64>, target: Vec<f64>) -> Result<Self> {
        if x.nrows() != t.len() || t.len() != target.len() {
            return Err(Error::InputShape {
                expected: x.nrows(),
                got: t.len().min(target.len()),
            });
        }
        Ok(Self { x, t, target })
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }
}

/// Mean squared error of `net` on a set.
pub fn mse(net: &Network, set: &RegressionSet) -> Result<f64> {
    let pred = net.predict(set.x.view(), &set.t)?;
    Ok(mse_loss(&pred, &set.target)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Stop after this many epochs without validation improvement.
    pub patience: Option<usize>,
    pub optimizer: OptimizerConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            batch_size: 64,
            patience: Some(25),
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig("epochs and batch size must be >= 1".into()));
        }
        self.optimizer.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_mse: f64,
    pub validation_mse: Option<f64>,
}

/// Trains `net` in place. With a validation set the parameters with the
/// lowest validation MSE (the starting point included) are restored at the end.
pub fn train(
    net: &mut Network,
    mask: &FreezeMask,
    train_set: &RegressionSet,
    validation: Option<&RegressionSet>,
    config: &TrainConfig,
    seed: u64,
) -> Result<Vec<EpochLog>> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if mask.len() != net.param_count() {
        return Err(Error::InputShape {
            expected: net.param_count(),
            got: mask.len(),
        });
    }
    let mut opt = OptimizerState::new(config.optimizer, net.param_count());
    let mut rng = rng::seeded(seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);

    let mut best = match validation {
        Some(v) => Some((mse(net, v)?, net.params().to_vec())),
        None => None,
    };
    let mut since_best = 0usize;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let xb = train_set.x.select(Axis(0), chunk);
            let tb: Vec<f64> = chunk.iter().map(|&i| train_set.t[i]).collect();
            let yb: Vec<f64> = chunk.iter().map(|&i| train_set.target[i]).collect();
            let cache = net.forward_batch(xb.view(), &tb)?;
            let (loss, grad) = mse_loss(cache.predictions().as_slice().unwrap(), &yb)?;
            if !loss.is_finite() {
                return Err(Error::TrainingDivergence {
                    epoch,
                    reason: "non-finite loss".into(),
                });
            }
            loss_sum += loss * chunk.len() as f64;
            let grads = net.backward_batch(&cache, &grad)?;
            opt.step(net, &grads, mask, epoch)?;
        }
        let train_mse = loss_sum / train_set.len() as f64;
        let validation_mse = match validation {
            Some(v) => {
                let m = mse(net, v)?;
                if !m.is_finite() {
                    return Err(Error::TrainingDivergence {
                        epoch,
                        reason: "non-finite validation loss".into(),
                    });
                }
                Some(m)
            }
            None => None,
        };
        log.push(EpochLog {
            epoch,
            train_mse,
            validation_mse,
        });
        if let (Some(m), Some((best_mse, best_params))) = (validation_mse, best.as_mut()) {
            if m < *best_mse {
                *best_mse = m;
                best_params.copy_from_slice(net.params());
                since_best = 0;
            } else {
                since_best += 1;
                if config.patience.is_some_and(|p| since_best >= p) {
                    break;
                }
            }
        }
    }
    if let Some((_, params)) = best {
        net.set_params(params)?;
    }
    Ok(log)
}
