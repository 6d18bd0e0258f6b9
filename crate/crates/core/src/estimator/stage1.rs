use super::{regression_set, CdnnConfig};
use crate::data::Dataset;
use crate::nn::{train, EpochLog, FreezeMask, Network, TreatmentInit};
use crate::{rng, Error, Result};

/// Outcome model `g(x)`; treatment edges are zero and were frozen in training.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Model {
    pub network: Network,
    pub training_log: Vec<EpochLog>,
}

impl Stage1Model {
    /// Wraps a network, checking that its treatment edges are exactly zero.
    pub fn from_network(network: Network) -> Result<Self> {
        if let Some(&i) = network
            .treatment_edges()
            .iter()
            .find(|&&i| network.params()[i] != 0.0)
        {
            return Err(Error::IdentityViolation {
                what: "stage-1 treatment edge",
                gap: network.params()[i].abs(),
            });
        }
        Ok(Self {
            network,
            training_log: Vec::new(),
        })
    }

    pub fn predict(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.network
            .predict(data.covariates().view(), &vec![0.0; data.len()])
    }
}

/// Fits `g` on `train_data`, early-stopping on `validation` when given.
/// Treatment values are fed to the network but cannot reach the output.
pub fn fit_stage1(
    train_data: &Dataset,
    validation: Option<&Dataset>,
    config: &CdnnConfig,
    seed: u64,
) -> Result<Stage1Model> {
    config.validate()?;
    if train_data.len() < 2 {
        return Err(Error::InvalidConfig(
            "stage 1 needs at least two samples".into(),
        ));
    }
    let arch = config.architecture(train_data.dim());
    let mut init_rng = rng::seeded(rng::derive(seed, rng::stream::INIT, 0));
    let mut network = Network::init(&arch, TreatmentInit::Zero, &mut init_rng)?;
    let mut mask = FreezeMask::for_network(&network);
    mask.freeze(network.treatment_edges());

    let train_set = regression_set(train_data, train_data.outcomes())?;
    let validation_set = validation
        .map(|v| regression_set(v, v.outcomes()))
        .transpose()?;
    let log = train(
        &mut network,
        &mask,
        &train_set,
        validation_set.as_ref(),
        &config.stage1,
        rng::derive(seed, rng::stream::SHUFFLE, 0),
    )?;
    let mut model = Stage1Model::from_network(network)?;
    model.training_log = log;
    Ok(model)
}

/// A dataset paired with stage-1 residuals `R_i = Y_i - g(x_i)`.
#[derive(Debug, Clone)]
pub struct ResidualDataset {
    pub base: Dataset,
    pub residuals: Vec<f64>,
}

impl ResidualDataset {
    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }
}

pub fn compute_residuals(model: &Stage1Model, data: &Dataset) -> Result<ResidualDataset> {
    if data.dim() != model.network.covariate_width() {
        return Err(Error::InputShape {
            expected: model.network.covariate_width(),
            got: data.dim(),
        });
    }
    let g = model.predict(data)?;
    let residuals = data
        .outcomes()
        .iter()
        .zip(&g)
        .map(|(y, g)| y - g)
        .collect();
    Ok(ResidualDataset {
        base: data.clone(),
        residuals,
    })
}
