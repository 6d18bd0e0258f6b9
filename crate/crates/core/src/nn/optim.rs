//! Freeze masks and the two update rules.

use serde::{Deserialize, Serialize};

use super::Network;
use crate::{Error, Result};

/// One bit per parameter; `true` means the parameter is never updated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreezeMask {
    frozen: Vec<bool>,
}

impl FreezeMask {
    pub fn none(len: usize) -> Self {
        Self {
            frozen: vec![false; len],
        }
    }

    pub fn all(len: usize) -> Self {
        Self {
            frozen: vec![true; len],
        }
    }

    pub fn for_network(net: &Network) -> Self {
        Self::none(net.param_count())
    }

    pub fn from_bits(frozen: Vec<bool>) -> Self {
        Self { frozen }
    }

    pub fn freeze<I: IntoIterator<Item = usize>>(&mut self, indices: I) {
        for i in indices {
            self.frozen[i] = true;
        }
    }

    pub fn is_frozen(&self, index: usize) -> bool {
        self.frozen[index]
    }

    pub fn len(&self) -> usize {
        self.frozen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frozen.is_empty()
    }

    pub fn frozen_count(&self) -> usize {
        self.frozen.iter().filter(|&&f| f).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.frozen
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "algorithm")]
pub enum OptimizerKind {
    /// `v <- momentum * v + g; p <- p - lr * v`
    SgdMomentum { momentum: f64 },
    /// Bias-corrected first/second moment update.
    AdaptiveMoment { beta1: f64, beta2: f64, epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::adaptive_moment(1e-3)
    }
}

impl OptimizerConfig {
    pub fn adaptive_moment(learning_rate: f64) -> Self {
        Self {
            kind: OptimizerKind::AdaptiveMoment {
                beta1: 0.9,
                beta2: 0.999,
                epsilon: 1e-8,
            },
            learning_rate,
        }
    }

    pub fn sgd(learning_rate: f64, momentum: f64) -> Self {
        Self {
            kind: OptimizerKind::SgdMomentum { momentum },
            learning_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        match self.kind {
            OptimizerKind::SgdMomentum { momentum } if !(0.0..1.0).contains(&momentum) => Err(
                Error::InvalidConfig("momentum must lie in [0, 1)".into()),
            ),
            OptimizerKind::AdaptiveMoment { beta1, beta2, epsilon }
                if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || epsilon <= 0.0 =>
            {
                Err(Error::InvalidConfig("invalid moment decay rates".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizerState {
    config: OptimizerConfig,
    steps: u64,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl OptimizerState {
    pub fn new(config: OptimizerConfig, param_count: usize) -> Self {
        let second = match config.kind {
            OptimizerKind::AdaptiveMoment { .. } => vec![0.0; param_count],
            OptimizerKind::SgdMomentum { .. } => Vec::new(),
        };
        Self {
            config,
            steps: 0,
            first: vec![0.0; param_count],
            second,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// First-moment (or velocity) accumulators.
    pub fn first_moments(&self) -> &[f64] {
        &self.first
    }

    pub fn second_moments(&self) -> &[f64] {
        &self.second
    }

    /// Applies one update to every unfrozen parameter. `epoch` only labels a
    /// divergence error.
    pub fn step(
        &mut self,
        net: &mut Network,
        grads: &[f64],
        mask: &FreezeMask,
        epoch: usize,
    ) -> Result<()> {
        let n = net.param_count();
        if grads.len() != n || mask.len() != n || self.first.len() != n {
            return Err(Error::InputShape {
                expected: n,
                got: grads.len().min(mask.len()).min(self.first.len()),
            });
        }
        if let Some(i) = grads
            .iter()
            .enumerate()
            .find_map(|(i, g)| (!g.is_finite()).then_some(i))
        {
            return Err(Error::TrainingDivergence {
                epoch,
                reason: format!("non-finite gradient for parameter {i}"),
            });
        }
        self.steps += 1;
        let lr = self.config.learning_rate;
        let params = net.params_mut();
        match self.config.kind {
            OptimizerKind::SgdMomentum { momentum } => {
                for i in 0..n {
                    if mask.is_frozen(i) {
                        continue;
                    }
                    let v = momentum * self.first[i] + grads[i];
                    self.first[i] = v;
                    params[i] -= lr * v;
                }
            }
            OptimizerKind::AdaptiveMoment { beta1, beta2, epsilon } => {
                let t = self.steps as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for i in 0..n {
                    if mask.is_frozen(i) {
                        continue;
                    }
                    let g = grads[i];
                    let m = beta1 * self.first[i] + (1.0 - beta1) * g;
                    let v = beta2 * self.second[i] + (1.0 - beta2) * g * g;
                    self.first[i] = m;
                    self.second[i] = v;
                    let m_hat = m / c1;
                    let v_hat = v / c2;
                    params[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, LayerSpec};

    fn scalar_net(value: f64) -> Network {
        let layers = vec![LayerSpec {
            input_width: 2,
            output_width: 1,
            activation: Activation::Identity,
        }];
        let mut net = Network::from_layers(1, false, layers).unwrap();
        net.set_param(0, value);
        net
    }

    #[test]
    fn plain_sgd_arithmetic() {
        let mut net = scalar_net(0.5);
        let mut opt = OptimizerState::new(OptimizerConfig::sgd(0.1, 0.0), 3);
        opt.step(&mut net, &[1.0, 0.0, 0.0], &FreezeMask::none(3), 0)
            .unwrap();
        assert!((net.params()[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn momentum_accumulates() {
        let mut net = scalar_net(0.0);
        let mut opt = OptimizerState::new(OptimizerConfig::sgd(0.1, 0.5), 3);
        let mask = FreezeMask::none(3);
        opt.step(&mut net, &[1.0, 0.0, 0.0], &mask, 0).unwrap();
        opt.step(&mut net, &[1.0, 0.0, 0.0], &mask, 0).unwrap();
        // v1 = 1, v2 = 1.5
        assert!((net.params()[0] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn fully_frozen_mask_is_noop() {
        let mut net = scalar_net(0.5);
        let before = net.params().to_vec();
        let mut opt = OptimizerState::new(OptimizerConfig::default(), 3);
        for _ in 0..10 {
            opt.step(&mut net, &[3.0, -1.0, 2.0], &FreezeMask::all(3), 0)
                .unwrap();
        }
        assert_eq!(net.params(), &before[..]);
        assert!(opt.first_moments().iter().all(|&m| m == 0.0));
        assert!(opt.second_moments().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn adaptive_first_step_is_learning_rate_sized() {
        // At step 1, m_hat = g and v_hat = g^2, so the update is lr * g / (|g| + eps).
        for &g in &[1e-3, 0.5, 7.0, -250.0] {
            let mut net = scalar_net(1.0);
            let mut opt = OptimizerState::new(OptimizerConfig::adaptive_moment(1e-3), 3);
            opt.step(&mut net, &[g, 0.0, 0.0], &FreezeMask::none(3), 0)
                .unwrap();
            let expected = 1e-3 * g.abs() / (g.abs() + 1e-8);
            let moved = (net.params()[0] - 1.0).abs();
            assert!((moved - expected).abs() < 1e-15, "g={g}");
            assert!((moved - 1e-3).abs() < 1e-8);
        }
    }

    #[test]
    fn non_finite_gradient_reports_epoch() {
        let mut net = scalar_net(0.0);
        let mut opt = OptimizerState::new(OptimizerConfig::default(), 3);
        let err = opt
            .step(&mut net, &[f64::NAN, 0.0, 0.0], &FreezeMask::none(3), 17)
            .unwrap_err();
        assert!(matches!(err, Error::TrainingDivergence { epoch: 17, .. }));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(OptimizerConfig::sgd(0.0, 0.0).validate().is_err());
        assert!(OptimizerConfig::sgd(0.1, 1.0).validate().is_err());
        assert!(OptimizerConfig::adaptive_moment(1e-3).validate().is_ok());
    }
}
