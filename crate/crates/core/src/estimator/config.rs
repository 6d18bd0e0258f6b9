use serde::{Deserialize, Serialize};

use crate::nn::{Activation, Architecture, TrainConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    ExplicitResidual,
    Freezing,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::ExplicitResidual => "explicit_residual",
            Variant::Freezing => "freezing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdnnConfig {
    pub hidden_layers: usize,
    pub hidden_units: usize,
    pub hidden_activation: Activation,
    /// Feed `[x, t]` into every layer, not just the first.
    pub input_concat: bool,
    pub stage1: TrainConfig,
    pub stage2: TrainConfig,
    /// Number of train/validation splits, one member each.
    pub ensemble_size: usize,
    /// Share of the fitting data held out for early stopping; 0 disables it.
    pub validation_fraction: f64,
    /// Half-width of the uniform init of stage-2 treatment edges (freezing).
    pub treatment_init_scale: f64,
    /// Number of leading layers whose covariate-side weights and biases stay
    /// frozen in the freezing variant. 1 freezes only `W` and its biases.
    pub freeze_depth: usize,
    pub seed: u64,
}

impl Default for CdnnConfig {
    fn default() -> Self {
        Self {
            hidden_layers: 3,
            hidden_units: 64,
            hidden_activation: Activation::Swish,
            input_concat: false,
            stage1: TrainConfig::default(),
            stage2: TrainConfig::default(),
            ensemble_size: 3,
            validation_fraction: 0.3,
            treatment_init_scale: 1e-2,
            freeze_depth: 1,
            seed: 0,
        }
    }
}

impl CdnnConfig {
    pub fn architecture(&self, covariate_width: usize) -> Architecture {
        Architecture {
            covariate_width,
            hidden_widths: vec![self.hidden_units; self.hidden_layers],
            hidden_activation: self.hidden_activation,
            concat_to_all_layers: self.input_concat,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.stage1.validate()?;
        self.stage2.validate()?;
        if self.hidden_layers > 0 && self.hidden_units == 0 {
            return Err(Error::InvalidConfig("hidden_units must be >= 1".into()));
        }
        if self.ensemble_size == 0 {
            return Err(Error::InvalidConfig("ensemble_size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::InvalidConfig(
                "validation_fraction must lie in [0, 1)".into(),
            ));
        }
        if !(self.treatment_init_scale >= 0.0 && self.treatment_init_scale.is_finite()) {
            return Err(Error::InvalidConfig(
                "treatment_init_scale must be finite and >= 0".into(),
            ));
        }
        if self.freeze_depth == 0 || self.freeze_depth > self.hidden_layers.max(1) {
            return Err(Error::InvalidConfig(format!(
                "freeze_depth must lie in 1..={}",
                self.hidden_layers.max(1)
            )));
        }
        Ok(())
    }
}
