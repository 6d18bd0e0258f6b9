use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cdnn_core::baselines::DmlConfig;
use cdnn_core::data::{DgpFamily, DgpSpec, SplitSpec};
use cdnn_core::estimator::CdnnConfig;
use serde::{Deserialize, Serialize};

use crate::{BenchError, Result};

/// Where replication data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DgpSource {
    /// A named synthetic family, seeded from the experiment seed.
    Family(DgpFamily),
    /// An explicit spec; its own seed is the base seed.
    Spec(DgpSpec),
    /// One replication per matching file, in sorted path order.
    CsvGlob(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    CdnnFreezing,
    CdnnExplicit,
    OlsLr1,
    OlsLr2,
    Dml,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::CdnnFreezing,
        EstimatorKind::CdnnExplicit,
        EstimatorKind::OlsLr1,
        EstimatorKind::OlsLr2,
        EstimatorKind::Dml,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::CdnnFreezing => "cdnn_freezing",
            EstimatorKind::CdnnExplicit => "cdnn_explicit",
            EstimatorKind::OlsLr1 => "ols_lr1",
            EstimatorKind::OlsLr2 => "ols_lr2",
            EstimatorKind::Dml => "dml",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown estimator `{s}`")))
    }
}

/// Which units the metrics are computed on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricScope {
    #[default]
    Test,
    All,
}

fn default_replications() -> usize {
    1
}

fn default_split() -> SplitSpec {
    SplitSpec::Ihdp
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dgp: DgpSource,
    /// Samples per generated replication; unused for CSV sources.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Jitter outcome coefficients for replications after the first.
    #[serde(default)]
    pub redraw_coefficients: bool,
    #[serde(default = "default_split")]
    pub split: SplitSpec,
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub cdnn: CdnnConfig,
    #[serde(default)]
    pub dml: DmlConfig,
    #[serde(default)]
    pub seed: u64,
    /// Report path stem; `.csv` and `.md` are appended.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Directory receiving one checkpoint per fitted network estimator.
    #[serde(default)]
    pub checkpoint_dir: Option<PathBuf>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub metrics_on: MetricScope,
}

impl ExperimentConfig {
    pub fn new(dgp: DgpSource, estimators: Vec<EstimatorKind>) -> Self {
        Self {
            dgp,
            n: None,
            replications: 1,
            redraw_coefficients: false,
            split: SplitSpec::Ihdp,
            estimators,
            cdnn: CdnnConfig::default(),
            dml: DmlConfig::default(),
            seed: 0,
            output: None,
            checkpoint_dir: None,
            workers: 1,
            metrics_on: MetricScope::Test,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Files matched by a CSV glob, sorted.
    pub fn csv_files(pattern: &str) -> Result<Vec<PathBuf>> {
        let paths = glob::glob(pattern)
            .map_err(|e| BenchError::Config(format!("bad glob `{pattern}`: {e}")))?;
        let mut files = paths
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| BenchError::Config(e.to_string()))?;
        files.sort();
        Ok(files)
    }

    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(BenchError::Config("at least one estimator is required".into()));
        }
        if self.replications == 0 {
            return Err(BenchError::Config("replications must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(BenchError::Config("workers must be >= 1".into()));
        }
        self.split.validate()?;
        self.cdnn.validate()?;
        self.dml.validate()?;
        match &self.dgp {
            DgpSource::CsvGlob(pattern) => {
                let files = Self::csv_files(pattern)?;
                if files.len() < self.replications {
                    return Err(BenchError::Config(format!(
                        "`{pattern}` matches {} files for {} replications",
                        files.len(),
                        self.replications
                    )));
                }
            }
            DgpSource::Spec(spec) => {
                spec.validate()?;
                self.require_n()?;
            }
            DgpSource::Family(_) => {
                self.require_n()?;
            }
        }
        Ok(())
    }

    fn require_n(&self) -> Result<usize> {
        match self.n {
            Some(n) if n >= 3 => Ok(n),
            _ => Err(BenchError::Config(
                "generated data needs `n` of at least 3".into(),
            )),
        }
    }

    /// `CDNN_WORKERS` when set to a positive integer, otherwise `workers`.
    pub fn effective_workers(&self) -> usize {
        std::env::var("CDNN_WORKERS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&w| w > 0)
            .unwrap_or(self.workers)
    }
}
