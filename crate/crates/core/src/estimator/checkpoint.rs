//! JSON checkpoints. Floats are written in shortest round-trip form and parsed
//! exactly, so a save/load cycle reproduces every parameter bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CdnnConfig, CdnnEstimator, Member, Stage1Model, Stage2Model, TargetKind, Variant};
use crate::nn::{FreezeMask, LayerSpec, Network};
use crate::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkRecord {
    pub covariate_width: usize,
    pub concat_to_all_layers: bool,
    pub layers: Vec<LayerSpec>,
    pub params: Vec<f64>,
}

impl From<&Network> for NetworkRecord {
    fn from(net: &Network) -> Self {
        Self {
            covariate_width: net.covariate_width(),
            concat_to_all_layers: net.concat_to_all_layers(),
            layers: net.layers().to_vec(),
            params: net.params().to_vec(),
        }
    }
}

impl NetworkRecord {
    pub fn to_network(&self) -> Result<Network> {
        let mut net = Network::from_layers(
            self.covariate_width,
            self.concat_to_all_layers,
            self.layers.clone(),
        )
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
        net.set_params(self.params.clone())
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(net)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberRecord {
    stage1: NetworkRecord,
    stage2: NetworkRecord,
    frozen: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub variant: Variant,
    pub config: CdnnConfig,
    members: Vec<MemberRecord>,
}

impl From<&CdnnEstimator> for Checkpoint {
    fn from(est: &CdnnEstimator) -> Self {
        Self {
            format_version: CHECKPOINT_VERSION,
            variant: est.variant(),
            config: est.config().clone(),
            members: est
                .members()
                .iter()
                .map(|m| MemberRecord {
                    stage1: (&m.stage1.network).into(),
                    stage2: (&m.stage2.network).into(),
                    frozen: m
                        .stage2
                        .frozen_covariate_mask
                        .as_ref()
                        .map(|mask| mask.bits().to_vec()),
                })
                .collect(),
        }
    }
}

impl Checkpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ck.format_version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {}",
                ck.format_version
            )));
        }
        Ok(ck)
    }

    pub fn into_estimator(self) -> Result<CdnnEstimator> {
        let target_kind = match self.variant {
            Variant::ExplicitResidual => TargetKind::Residual,
            Variant::Freezing => TargetKind::Outcome,
        };
        let members = self
            .members
            .iter()
            .map(|r| {
                let stage2 = r.stage2.to_network()?;
                let mask = r.frozen.clone().map(FreezeMask::from_bits);
                if mask.as_ref().is_some_and(|m| m.len() != stage2.param_count()) {
                    return Err(Error::Checkpoint("freeze mask length mismatch".into()));
                }
                Ok(Member {
                    stage1: Stage1Model::from_network(r.stage1.to_network()?)?,
                    stage2: Stage2Model {
                        variant: self.variant,
                        network: stage2,
                        frozen_covariate_mask: mask,
                        target_kind,
                        training_log: Vec::new(),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CdnnEstimator::from_members(members, self.variant, self.config)
    }
}

pub fn save_checkpoint(est: &CdnnEstimator, path: &Path) -> Result<()> {
    std::fs::write(path, Checkpoint::from(est).to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<CdnnEstimator> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_json(&text)?.into_estimator()
}
