use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linalg::least_squares;
use crate::data::{partition, Dataset};
use crate::nn::{train, Architecture, FreezeMask, Network, RegressionSet, TrainConfig, TreatmentInit};
use crate::rng::{self, stream};
use crate::{Error, Result};

/// Regression learner for the nuisances `g(x) = E[Y | x]` and `e(x) = E[T | x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NuisanceLearner {
    /// Linear model with penalty `lambda * n` on the slopes.
    Ridge { lambda: f64 },
    Network {
        hidden_widths: Vec<usize>,
        #[serde(default)]
        train: TrainConfig,
    },
}

impl Default for NuisanceLearner {
    fn default() -> Self {
        NuisanceLearner::Ridge { lambda: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DmlConfig {
    pub folds: usize,
    /// When false, nuisances are fitted and evaluated on the full sample.
    pub crossfit: bool,
    pub outcome_learner: NuisanceLearner,
    pub propensity_learner: NuisanceLearner,
    /// Propensity estimates are clamped into `[clamp, 1 - clamp]`.
    pub clamp: f64,
    pub seed: u64,
}

impl Default for DmlConfig {
    fn default() -> Self {
        Self {
            folds: 2,
            crossfit: true,
            outcome_learner: NuisanceLearner::default(),
            propensity_learner: NuisanceLearner::default(),
            clamp: 0.01,
            seed: 0,
        }
    }
}

impl DmlConfig {
    pub fn no_crossfit() -> Self {
        Self {
            crossfit: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.crossfit && self.folds < 2 {
            return Err(Error::InvalidConfig("cross-fitting needs >= 2 folds".into()));
        }
        if !(0.0..0.5).contains(&self.clamp) {
            return Err(Error::InvalidConfig("clamp must lie in [0, 0.5)".into()));
        }
        for l in [&self.outcome_learner, &self.propensity_learner] {
            match l {
                NuisanceLearner::Ridge { lambda } if !(*lambda >= 0.0) => {
                    return Err(Error::InvalidConfig("ridge lambda must be >= 0".into()))
                }
                NuisanceLearner::Network { train, .. } => train.validate()?,
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmlFit {
    pub ate: f64,
    pub stderr: f64,
    /// Number of propensity estimates moved by the clamp.
    pub clamped: usize,
}

impl DmlFit {
    pub fn predict_dataset(&self, data: &Dataset) -> Vec<f64> {
        vec![self.ate; data.len()]
    }
}

// Smallest accepted mean squared treatment residual.
const OVERLAP_FLOOR: f64 = 1e-8;

/// Closed-form effect from nuisance values at each unit:
/// `sum r (Y - g) / sum r^2` with `r = T - e`, plus the sandwich standard error.
pub fn dml_ate_with_nuisances(data: &Dataset, g: &[f64], e: &[f64]) -> Result<DmlFit> {
    let r: Vec<f64> = data.treatments().iter().zip(e).map(|(t, e)| t - e).collect();
    residual_on_residual(data, g, &r, 0)
}

fn residual_on_residual(data: &Dataset, g: &[f64], r: &[f64], clamped: usize) -> Result<DmlFit> {
    let n = data.len();
    if g.len() != n || r.len() != n {
        return Err(Error::InputShape {
            expected: n,
            got: g.len().min(r.len()),
        });
    }
    let y = data.outcomes();
    let u: Vec<f64> = y.iter().zip(g).map(|(y, g)| y - g).collect();
    let nf = n as f64;
    let denom: f64 = r.iter().map(|r| r * r).sum();
    if !(denom / nf >= OVERLAP_FLOOR) {
        return Err(Error::Overlap(denom / nf));
    }
    let numer: f64 = r.iter().zip(&u).map(|(r, u)| r * u).sum();
    let ate = numer / denom;
    let j = denom / nf;
    let meat: f64 = r
        .iter()
        .zip(&u)
        .map(|(r, u)| {
            let psi = (u - ate * r) * r;
            psi * psi
        })
        .sum::<f64>()
        / nf;
    Ok(DmlFit {
        ate,
        stderr: (meat / (j * j) / nf).sqrt(),
        clamped,
    })
}

/// Fits `target` on the covariates of `rows` and predicts at `eval`.
fn fit_predict(
    learner: &NuisanceLearner,
    data: &Dataset,
    target: &[f64],
    rows: &[usize],
    eval: &[usize],
    seed: u64,
) -> Result<Vec<f64>> {
    let samples = data.samples();
    let d = data.dim();
    match learner {
        NuisanceLearner::Ridge { lambda } => {
            let x = DMatrix::from_fn(rows.len(), d + 1, |r, c| {
                if c == 0 {
                    1.0
                } else {
                    samples[rows[r]].x[c - 1]
                }
            });
            let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| target[i]));
            let mut weights = vec![1.0; d + 1];
            weights[0] = 0.0;
            let beta = least_squares(&x, &y, lambda * rows.len() as f64, Some(&weights))?.beta;
            Ok(eval
                .iter()
                .map(|&i| {
                    let mut v = beta[0];
                    for (b, xi) in beta[1..].iter().zip(&samples[i].x) {
                        v += b * xi;
                    }
                    v
                })
                .collect())
        }
        NuisanceLearner::Network {
            hidden_widths,
            train: cfg,
        } => {
            let arch = Architecture::new(d, hidden_widths.clone());
            let mut r = rng::seeded(rng::derive(seed, stream::INIT, 0));
            let mut net = Network::init(&arch, TreatmentInit::Zero, &mut r)?;
            let mut mask = FreezeMask::for_network(&net);
            mask.freeze(net.treatment_edges());
            let sub = data.subset(rows);
            let set = RegressionSet::new(
                sub.covariates(),
                vec![0.0; rows.len()],
                rows.iter().map(|&i| target[i]).collect(),
            )?;
            train(&mut net, &mask, &set, None, cfg, rng::derive(seed, stream::SHUFFLE, 0))?;
            let ev = data.subset(eval);
            net.predict(ev.covariates().view(), &vec![0.0; eval.len()])
        }
    }
}

/// Residual-on-residual effect with learned nuisances.
///
/// The propensity model is fitted to the centred treatment `T - 1/2`, so the
/// treatment residual is `(T - 1/2) - u(x)` with `u` clamped to
/// `[clamp - 1/2, 1/2 - clamp]`. Fold assignment depends only on `n` and the
/// seed.
pub fn dml_ate(data: &Dataset, config: &DmlConfig) -> Result<DmlFit> {
    config.validate()?;
    if !data.has_both_arms() {
        return Err(Error::DegenerateTreatment(format!(
            "{} of {} units treated",
            data.treated_count(),
            data.len()
        )));
    }
    let n = data.len();
    let y = data.outcomes();
    let centred: Vec<f64> = data.treatments().iter().map(|t| t - 0.5).collect();
    let mut g = vec![0.0; n];
    let mut u = vec![0.0; n];
    let all: Vec<usize> = (0..n).collect();
    let folds: Vec<Vec<usize>> = if config.crossfit {
        if n < 2 * config.folds {
            return Err(Error::Split(format!("{n} units for {} folds", config.folds)));
        }
        let sizes: Vec<usize> = (0..config.folds)
            .map(|k| n / config.folds + usize::from(k < n % config.folds))
            .collect();
        partition(n, &sizes, rng::derive(config.seed, stream::FOLDS, 0))
    } else {
        vec![all.clone()]
    };
    for (k, eval) in folds.iter().enumerate() {
        let fit_rows: Vec<usize> = if config.crossfit {
            let mut in_fold = vec![false; n];
            eval.iter().for_each(|&i| in_fold[i] = true);
            all.iter().copied().filter(|&i| !in_fold[i]).collect()
        } else {
            all.clone()
        };
        let seed = rng::derive(config.seed, stream::ESTIMATOR, k as u64);
        let gk = fit_predict(&config.outcome_learner, data, &y, &fit_rows, eval, seed)?;
        let uk = fit_predict(
            &config.propensity_learner,
            data,
            &centred,
            &fit_rows,
            eval,
            rng::derive(seed, stream::ESTIMATOR, 1),
        )?;
        for (j, &i) in eval.iter().enumerate() {
            g[i] = gk[j];
            u[i] = uk[j];
        }
    }
    let bound = 0.5 - config.clamp;
    let mut clamped = 0;
    let r: Vec<f64> = centred
        .iter()
        .zip(&u)
        .map(|(d, &u)| {
            let c = u.clamp(-bound, bound);
            if c != u {
                clamped += 1;
            }
            d - c
        })
        .collect();
    residual_on_residual(data, &g, &r, clamped)
}
