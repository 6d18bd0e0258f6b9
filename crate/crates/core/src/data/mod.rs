//! Datasets with optional potential-outcome ground truth, synthetic
//! data-generating processes, the split protocol and CSV ingestion.

mod csv_io;
mod dgp;
mod replication;
mod split;

use std::path::PathBuf;

use ndarray::Array2;

pub use csv_io::{format_f64, load_csv, write_csv};
pub use dgp::{
    generate, oracle_of, Baseline, CovariateLaw, DgpFamily, DgpOracle, DgpSpec, Effect,
    OutcomeSurface, Propensity,
};
pub use replication::{make_replications, ReplicationSet};
pub use split::{partition, split, split_sizes, SplitSpec};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub treated: bool,
    pub y: f64,
}

impl Sample {
    pub fn t(&self) -> f64 {
        if self.treated {
            1.0
        } else {
            0.0
        }
    }
}

/// Both potential outcomes of one unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialOutcomes {
    pub y1: f64,
    pub y0: f64,
}

impl PotentialOutcomes {
    /// Individual effect `y1 - y0`.
    pub fn theta(&self) -> f64 {
        self.y1 - self.y0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Generated(Box<DgpSpec>),
    File(PathBuf),
    Subset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    samples: Vec<Sample>,
    ground_truth: Option<Vec<PotentialOutcomes>>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(
        dim: usize,
        samples: Vec<Sample>,
        ground_truth: Option<Vec<PotentialOutcomes>>,
        provenance: Provenance,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("covariate dimension must be >= 1".into()));
        }
        if let Some(bad) = samples.iter().position(|s| s.x.len() != dim) {
            return Err(Error::Schema {
                row: bad + 1,
                message: format!("expected {dim} covariates, found {}", samples[bad].x.len()),
            });
        }
        if let Some(gt) = &ground_truth {
            if gt.len() != samples.len() {
                return Err(Error::InputShape {
                    expected: samples.len(),
                    got: gt.len(),
                });
            }
        }
        Ok(Self {
            dim,
            samples,
            ground_truth,
            provenance,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn ground_truth(&self) -> Option<&[PotentialOutcomes]> {
        self.ground_truth.as_deref()
    }

    pub fn has_ground_truth(&self) -> bool {
        self.ground_truth.is_some()
    }

    /// Per-unit effects `y1 - y0`, when ground truth is available.
    pub fn true_ite(&self) -> Option<Vec<f64>> {
        self.ground_truth
            .as_ref()
            .map(|gt| gt.iter().map(PotentialOutcomes::theta).collect())
    }

    pub fn covariates(&self) -> Array2<f64> {
        let mut x = Array2::zeros((self.len(), self.dim));
        for (mut row, s) in x.rows_mut().into_iter().zip(&self.samples) {
            row.iter_mut().zip(&s.x).for_each(|(r, v)| *r = *v);
        }
        x
    }

    pub fn treatments(&self) -> Vec<f64> {
        self.samples.iter().map(Sample::t).collect()
    }

    pub fn outcomes(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.y).collect()
    }

    pub fn treated_count(&self) -> usize {
        self.samples.iter().filter(|s| s.treated).count()
    }

    pub fn has_both_arms(&self) -> bool {
        let treated = self.treated_count();
        treated > 0 && treated < self.len()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            dim: self.dim,
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            ground_truth: self
                .ground_truth
                .as_ref()
                .map(|gt| indices.iter().map(|&i| gt[i]).collect()),
            provenance: Provenance::Subset,
        }
    }

    /// Concatenation of two datasets over the same covariate schema.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.dim != other.dim {
            return Err(Error::InputShape {
                expected: self.dim,
                got: other.dim,
            });
        }
        let ground_truth = match (&self.ground_truth, &other.ground_truth) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        Ok(Dataset {
            dim: self.dim,
            samples: self.samples.iter().chain(&other.samples).cloned().collect(),
            ground_truth,
            provenance: Provenance::Subset,
        })
    }

    /// Recodes treatment as `1 - t` and swaps the potential outcomes.
    pub fn swap_arms(&self) -> Dataset {
        Dataset {
            dim: self.dim,
            samples: self
                .samples
                .iter()
                .map(|s| Sample {
                    x: s.x.clone(),
                    treated: !s.treated,
                    y: s.y,
                })
                .collect(),
            ground_truth: self.ground_truth.as_ref().map(|gt| {
                gt.iter()
                    .map(|p| PotentialOutcomes { y1: p.y0, y0: p.y1 })
                    .collect()
            }),
            provenance: Provenance::Subset,
        }
    }

    /// Same covariates, treatments, outcomes and ground truth, bit for bit.
    pub fn same_values(&self, other: &Dataset) -> bool {
        let bits = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.dim == other.dim
            && self.len() == other.len()
            && self.samples.iter().zip(&other.samples).all(|(a, b)| {
                a.treated == b.treated
                    && bits(a.y, b.y)
                    && a.x.iter().zip(&b.x).all(|(p, q)| bits(*p, *q))
            })
            && match (&self.ground_truth, &other.ground_truth) {
                (None, None) => true,
                (Some(a), Some(b)) => a
                    .iter()
                    .zip(b)
                    .all(|(p, q)| bits(p.y1, q.y1) && bits(p.y0, q.y0)),
                _ => false,
            }
    }
}
