use super::{double_score, regression_set, CdnnConfig, ResidualDataset, Stage1Model, Variant};
use crate::data::Dataset;
use crate::nn::{train, EpochLog, FreezeMask, Network, TreatmentInit};
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    Residual,
    Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage2Model {
    pub variant: Variant,
    pub network: Network,
    /// Frozen covariate-side parameters (freezing variant only).
    pub frozen_covariate_mask: Option<FreezeMask>,
    pub target_kind: TargetKind,
    pub training_log: Vec<EpochLog>,
}

impl Stage2Model {
    /// `h(1, x) - h(0, x)` for each row of `data`.
    pub fn ite(&self, data: &Dataset) -> Result<Vec<f64>> {
        double_score(&self.network, data.covariates().view())
    }
}

fn require_both_arms(data: &Dataset) -> Result<()> {
    if data.has_both_arms() {
        Ok(())
    } else {
        Err(Error::DegenerateTreatment(format!(
            "{} of {} units treated",
            data.treated_count(),
            data.len()
        )))
    }
}

/// Regresses residuals on `(x, T)` from a fresh initialisation.
pub fn fit_stage2_explicit(
    residuals: &ResidualDataset,
    validation: Option<&ResidualDataset>,
    config: &CdnnConfig,
    seed: u64,
) -> Result<Stage2Model> {
    config.validate()?;
    require_both_arms(&residuals.base)?;
    let arch = config.architecture(residuals.base.dim());
    let mut init_rng = rng::seeded(rng::derive(seed, rng::stream::INIT, 1));
    let mut network = Network::init(
        &arch,
        TreatmentInit::Uniform(config.treatment_init_scale),
        &mut init_rng,
    )?;
    let mask = FreezeMask::for_network(&network);
    let train_set = regression_set(&residuals.base, residuals.residuals.clone())?;
    let validation_set = validation
        .map(|v| regression_set(&v.base, v.residuals.clone()))
        .transpose()?;
    let log = train(
        &mut network,
        &mask,
        &train_set,
        validation_set.as_ref(),
        &config.stage2,
        rng::derive(seed, rng::stream::SHUFFLE, 1),
    )?;
    Ok(Stage2Model {
        variant: Variant::ExplicitResidual,
        network,
        frozen_covariate_mask: None,
        target_kind: TargetKind::Residual,
        training_log: log,
    })
}

/// Mask of covariate-side parameters kept from stage 1: the covariate input
/// matrix and biases of the first `depth` layers, plus covariate edges into
/// later layers when the input is concatenated everywhere.
pub(crate) fn freezing_mask(network: &Network, depth: usize) -> FreezeMask {
    let mut mask = FreezeMask::for_network(network);
    let treatment: std::collections::HashSet<usize> =
        network.treatment_edges().into_iter().collect();
    mask.freeze(network.covariate_input_matrix());
    for layer in 0..depth.min(network.layers().len() - 1) {
        mask.freeze(network.layer_params(layer).filter(|i| !treatment.contains(i)));
    }
    mask.freeze(network.concat_covariate_edges());
    mask
}

/// Warm-starts from the stage-1 network, freezes its covariate encoding and
/// regresses `Y` on `(x, T)` with freshly initialised treatment edges.
pub fn fit_stage2_freezing(
    stage1: &Stage1Model,
    data: &Dataset,
    validation: Option<&Dataset>,
    config: &CdnnConfig,
    seed: u64,
) -> Result<Stage2Model> {
    config.validate()?;
    let expected = Network::zeros(&config.architecture(data.dim()))?;
    if !stage1.network.same_architecture(&expected) {
        return Err(Error::ArchitectureMismatch(format!(
            "stage-1 network has {} layers over {} covariates; config implies {} over {}",
            stage1.network.layers().len(),
            stage1.network.covariate_width(),
            expected.layers().len(),
            data.dim()
        )));
    }
    let mut network = stage1.network.clone();
    let mut init_rng = rng::seeded(rng::derive(seed, rng::stream::INIT, 1));
    network.init_treatment_edges(
        TreatmentInit::Uniform(config.treatment_init_scale),
        &mut init_rng,
    );
    let mask = freezing_mask(&network, config.freeze_depth);
    let train_set = regression_set(data, data.outcomes())?;
    let validation_set = validation
        .map(|v| regression_set(v, v.outcomes()))
        .transpose()?;
    let log = train(
        &mut network,
        &mask,
        &train_set,
        validation_set.as_ref(),
        &config.stage2,
        rng::derive(seed, rng::stream::SHUFFLE, 1),
    )?;
    Ok(Stage2Model {
        variant: Variant::Freezing,
        network,
        frozen_covariate_mask: Some(mask),
        target_kind: TargetKind::Outcome,
        training_log: log,
    })
}
