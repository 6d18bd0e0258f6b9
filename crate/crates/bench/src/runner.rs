use std::time::Instant;

use cdnn_core::baselines::{dml_ate, ols_lr1, ols_lr2};
use cdnn_core::data::{generate, load_csv, oracle_of, split, Dataset, DgpSpec, ReplicationSet};
use cdnn_core::estimator::{fit, save_checkpoint, Variant};
use cdnn_core::rng::{self, stream};
use cdnn_core::theory::NuisanceOracle;
use rayon::prelude::*;

use crate::config::{DgpSource, EstimatorKind, ExperimentConfig, MetricScope};
use crate::metrics::{correlation, eps_ate_signed, sqrt_pehe};
use crate::report::{MetricsReport, ReplicationRow, RowMetrics};
use crate::{BenchError, Result};

/// Seed shared by everything inside replication `index`.
pub fn replication_seed(config: &ExperimentConfig, index: usize) -> u64 {
    rng::derive(config.seed, stream::REPLICATION, index as u64)
}

fn replication_spec(config: &ExperimentConfig, base: &DgpSpec, index: usize) -> DgpSpec {
    ReplicationSet::new(base.clone(), config.replications)
        .with_redraw(config.redraw_coefficients)
        .spec(index)
}

/// The dataset of replication `index` and, for generated data, its spec.
pub fn replication_data(
    config: &ExperimentConfig,
    index: usize,
) -> Result<(Dataset, Option<DgpSpec>)> {
    let n = config.n.unwrap_or(0);
    match &config.dgp {
        DgpSource::Family(family) => {
            let spec = replication_spec(config, &family.spec(config.seed), index);
            Ok((generate(&spec, n)?, Some(spec)))
        }
        DgpSource::Spec(base) => {
            let spec = replication_spec(config, base, index);
            Ok((generate(&spec, n)?, Some(spec)))
        }
        DgpSource::CsvGlob(pattern) => {
            let files = ExperimentConfig::csv_files(pattern)?;
            let path = files.get(index).ok_or_else(|| {
                BenchError::Config(format!("no file for replication {index}"))
            })?;
            Ok((load_csv(path)?, None))
        }
    }
}

struct Prepared {
    fit_data: Dataset,
    eval: Dataset,
    theta0: Option<Vec<f64>>,
}

fn prepare(config: &ExperimentConfig, index: usize) -> Result<Prepared> {
    let (data, spec) = replication_data(config, index)?;
    let seed = replication_seed(config, index);
    let (train, validation, test) = split(&data, &config.split, rng::derive(seed, stream::SPLIT, 0))?;
    let fit_data = train.concat(&validation)?;
    let eval = match config.metrics_on {
        MetricScope::Test => test,
        MetricScope::All => data,
    };
    let theta0 = spec
        .map(|s| -> Result<Vec<f64>> {
            let oracle = oracle_of(&s)?;
            Ok(eval.samples().iter().map(|u| oracle.theta0(&u.x)).collect())
        })
        .transpose()?;
    Ok(Prepared {
        fit_data,
        eval,
        theta0,
    })
}

/// Fits one estimator and returns its predicted effects on the evaluation units.
fn predict(
    config: &ExperimentConfig,
    kind: EstimatorKind,
    index: usize,
    prepared: &Prepared,
) -> Result<Vec<f64>> {
    let seed = replication_seed(config, index);
    let (fit_data, eval) = (&prepared.fit_data, &prepared.eval);
    match kind {
        EstimatorKind::CdnnFreezing | EstimatorKind::CdnnExplicit => {
            let variant = if kind == EstimatorKind::CdnnFreezing {
                Variant::Freezing
            } else {
                Variant::ExplicitResidual
            };
            let mut cfg = config.cdnn.clone();
            cfg.seed = rng::derive(seed, stream::ESTIMATOR, config.cdnn.seed);
            let est = fit(fit_data, variant, &cfg)?;
            if let Some(dir) = &config.checkpoint_dir {
                std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
                save_checkpoint(&est, &dir.join(format!("{kind}_rep{index}.json")))?;
            }
            Ok(est.predict_dataset(eval)?)
        }
        EstimatorKind::OlsLr1 => Ok(ols_lr1(fit_data)?.predict_dataset(eval)),
        EstimatorKind::OlsLr2 => Ok(ols_lr2(fit_data)?.predict_dataset(eval)),
        EstimatorKind::Dml => {
            let mut cfg = config.dml.clone();
            cfg.seed = rng::derive(seed, stream::ESTIMATOR, config.dml.seed ^ 0xD31);
            Ok(dml_ate(fit_data, &cfg)?.predict_dataset(eval))
        }
    }
}

fn score(pred: &[f64], prepared: &Prepared) -> Result<RowMetrics> {
    let truth = prepared.eval.true_ite();
    let signed = eps_ate_signed(pred, truth.as_deref())?;
    Ok(RowMetrics {
        sqrt_pehe: sqrt_pehe(pred, truth.as_deref())?,
        eps_ate: signed.abs(),
        eps_ate_signed: signed,
        mean_abs_ite: pred.iter().map(|v| v.abs()).sum::<f64>() / pred.len() as f64,
        theta_correlation: prepared.theta0.as_deref().and_then(|t| correlation(pred, t)),
    })
}

fn run_replication(config: &ExperimentConfig, index: usize) -> Vec<ReplicationRow> {
    let prepared = prepare(config, index);
    config
        .estimators
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let outcome = match &prepared {
                Ok(p) => predict(config, kind, index, p).and_then(|pred| score(&pred, p)),
                Err(e) => Err(BenchError::Config(e.to_string())),
            };
            ReplicationRow {
                estimator: kind,
                replication: index,
                outcome: outcome.map_err(|e| e.to_string()),
                runtime_secs: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

/// Runs every replication, concurrently up to the worker count. Estimator
/// failures become failed rows; only invalid configurations are errors.
pub fn run(config: &ExperimentConfig) -> Result<MetricsReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.effective_workers())
        .build()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    let rows: Vec<ReplicationRow> = pool.install(|| {
        (0..config.replications)
            .into_par_iter()
            .map(|i| run_replication(config, i))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });
    Ok(MetricsReport::from_rows(rows, &config.estimators, config.metrics_on))
}
