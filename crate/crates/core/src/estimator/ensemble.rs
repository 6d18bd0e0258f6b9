use ndarray::ArrayView2;

use super::{
    compute_residuals, double_score, fit_stage1, fit_stage2_explicit, fit_stage2_freezing,
    CdnnConfig, Stage1Model, Stage2Model, Variant,
};
use crate::data::{partition, Dataset};
use crate::rng::{self, stream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub stage1: Stage1Model,
    pub stage2: Stage2Model,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdnnEstimator {
    members: Vec<Member>,
    variant: Variant,
    config: CdnnConfig,
}

fn member_split(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Option<Dataset>)> {
    if fraction == 0.0 {
        return Ok((data.clone(), None));
    }
    let n = data.len();
    let n_val = (fraction * n as f64 + 1e-9).floor() as usize;
    if n_val == 0 || n_val >= n {
        return Err(Error::Split(format!(
            "validation fraction {fraction} leaves an empty part of {n} units"
        )));
    }
    let parts = partition(n, &[n - n_val, n_val], seed);
    Ok((data.subset(&parts[0]), Some(data.subset(&parts[1]))))
}

fn fit_member(data: &Dataset, variant: Variant, config: &CdnnConfig, index: usize) -> Result<Member> {
    let split_seed = rng::derive(config.seed, stream::SPLIT, index as u64);
    let member_seed = rng::derive(config.seed, stream::MEMBER, index as u64);
    let (train, validation) = member_split(data, config.validation_fraction, split_seed)?;
    let stage1 = fit_stage1(&train, validation.as_ref(), config, member_seed)?;
    let stage2 = match variant {
        Variant::ExplicitResidual => {
            let r_train = compute_residuals(&stage1, &train)?;
            let r_val = validation
                .as_ref()
                .map(|v| compute_residuals(&stage1, v))
                .transpose()?;
            fit_stage2_explicit(&r_train, r_val.as_ref(), config, member_seed)?
        }
        Variant::Freezing => {
            fit_stage2_freezing(&stage1, &train, validation.as_ref(), config, member_seed)?
        }
    };
    Ok(Member { stage1, stage2 })
}

/// Fits `config.ensemble_size` members, each on its own train/validation split
/// of `data`. Member errors are reported with the member index.
pub fn fit(data: &Dataset, variant: Variant, config: &CdnnConfig) -> Result<CdnnEstimator> {
    config.validate()?;
    if !data.has_both_arms() {
        return Err(Error::DegenerateTreatment(format!(
            "{} of {} units treated",
            data.treated_count(),
            data.len()
        )));
    }
    let members = (0..config.ensemble_size)
        .map(|i| {
            fit_member(data, variant, config, i).map_err(|e| Error::Member {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CdnnEstimator {
        members,
        variant,
        config: config.clone(),
    })
}

impl CdnnEstimator {
    pub fn from_members(members: Vec<Member>, variant: Variant, config: CdnnConfig) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidConfig("an estimator needs at least one member".into()));
        };
        for (i, m) in members.iter().enumerate() {
            if m.stage2.variant != variant {
                return Err(Error::ArchitectureMismatch(format!(
                    "member {i} is {}, expected {}",
                    m.stage2.variant.name(),
                    variant.name()
                )));
            }
            if !m.stage2.network.same_architecture(&first.stage2.network)
                || !m.stage1.network.same_architecture(&first.stage1.network)
            {
                return Err(Error::ArchitectureMismatch(format!(
                    "member {i} differs in architecture from member 0"
                )));
            }
        }
        Ok(Self {
            members,
            variant,
            config,
        })
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn config(&self) -> &CdnnConfig {
        &self.config
    }

    pub fn covariate_width(&self) -> usize {
        self.members[0].stage2.network.covariate_width()
    }

    /// Mean over members of `h(1, x) - h(0, x)`, one value per row.
    pub fn predict_ite_batch(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        let mut total = vec![0.0; x.nrows()];
        for m in &self.members {
            for (acc, v) in total.iter_mut().zip(double_score(&m.stage2.network, x)?) {
                *acc += v;
            }
        }
        let k = self.members.len() as f64;
        Ok(total.into_iter().map(|v| v / k).collect())
    }

    pub fn predict_ite(&self, x: &[f64]) -> Result<f64> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("one row");
        Ok(self.predict_ite_batch(view)?[0])
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.predict_ite_batch(data.covariates().view())
    }
}
