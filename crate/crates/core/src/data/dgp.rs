//! Parametric data-generating processes with exact nuisance functions.
//!
//! A [`DgpSpec`] fixes the covariate law, the propensity `e0(x)`, the control
//! surface `f(0, x)` and the effect `theta0(x)`; then `f(1, x) = f(0, x) +
//! theta0(x)` and `g0(x) = e0 f(1, x) + (1 - e0) f(0, x)`. Three named
//! families drive the benchmarks:
//!
//! | family            | control surface          | effect          |
//! |-------------------|--------------------------|-----------------|
//! | `confound-linear` | affine                   | `2`             |
//! | `confound-hetero` | affine                   | `1 + 2 x_0`     |
//! | `null-effect`     | affine                   | `0`             |
//!
//! All three use five standard-normal covariates, noise sigma 0.5 and the
//! confounded propensity `logistic(0.8 x_0 - 0.4 x_1)`.

use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dataset, PotentialOutcomes, Provenance, Sample};
use crate::nn::logistic;
use crate::theory::{self, NuisanceOracle};
use crate::{rng, Error, Result};

/// Propensities must stay inside `(OVERLAP_MIN, 1 - OVERLAP_MIN)` over the
/// covariate support (3-sigma ball for normal covariates).
const OVERLAP_MIN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateLaw {
    /// Independent `N(0, 1)` coordinates.
    StandardNormal,
    /// Independent uniform coordinates on `[-sqrt 3, sqrt 3]` (unit variance).
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Propensity {
    Constant { p: f64 },
    /// `logistic(w . x + b)`
    LogisticLinear { weights: Vec<f64>, bias: f64 },
}

/// Control potential-outcome mean `f(0, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Baseline {
    Affine { intercept: f64, coef: Vec<f64> },
    /// `intercept + coef . x + quad . (x * x)`
    Quadratic { intercept: f64, coef: Vec<f64>, quad: Vec<f64> },
}

/// Effect `theta0(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Effect {
    Affine { intercept: f64, coef: Vec<f64> },
    /// `base + scale * logistic(coef . x)`
    Sigmoid { base: f64, scale: f64, coef: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeSurface {
    pub baseline: Baseline,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSpec {
    pub d: usize,
    pub covariate_law: CovariateLaw,
    pub propensity: Propensity,
    pub outcome: OutcomeSurface,
    pub noise_sigma: f64,
    pub seed: u64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

impl Baseline {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Baseline::Affine { intercept, coef } => intercept + dot(coef, x),
            Baseline::Quadratic { intercept, coef, quad } => {
                intercept
                    + dot(coef, x)
                    + quad.iter().zip(x).map(|(q, v)| q * v * v).sum::<f64>()
            }
        }
    }

    fn coefficients_mut(&mut self) -> Vec<&mut f64> {
        match self {
            Baseline::Affine { intercept, coef } => {
                std::iter::once(intercept).chain(coef.iter_mut()).collect()
            }
            Baseline::Quadratic { intercept, coef, quad } => std::iter::once(intercept)
                .chain(coef.iter_mut())
                .chain(quad.iter_mut())
                .collect(),
        }
    }

    fn vector_lengths(&self) -> Vec<usize> {
        match self {
            Baseline::Affine { coef, .. } => vec![coef.len()],
            Baseline::Quadratic { coef, quad, .. } => vec![coef.len(), quad.len()],
        }
    }
}

impl Effect {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Effect::Affine { intercept, coef } => intercept + dot(coef, x),
            Effect::Sigmoid { base, scale, coef } => base + scale * logistic(dot(coef, x)),
        }
    }

    fn coefficients_mut(&mut self) -> Vec<&mut f64> {
        match self {
            Effect::Affine { intercept, coef } => {
                std::iter::once(intercept).chain(coef.iter_mut()).collect()
            }
            Effect::Sigmoid { base, scale, coef } => std::iter::once(base)
                .chain(std::iter::once(scale))
                .chain(coef.iter_mut())
                .collect(),
        }
    }

    fn vector_lengths(&self) -> Vec<usize> {
        match self {
            Effect::Affine { coef, .. } | Effect::Sigmoid { coef, .. } => vec![coef.len()],
        }
    }
}

impl Propensity {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Propensity::Constant { p } => *p,
            Propensity::LogisticLinear { weights, bias } => logistic(dot(weights, x) + bias),
        }
    }
}

impl OutcomeSurface {
    /// Multiplies every coefficient by an independent factor in `[1 - s, 1 + s]`.
    pub(crate) fn jitter<R: Rng + ?Sized>(&mut self, spread: f64, rng: &mut R) {
        for c in self
            .baseline
            .coefficients_mut()
            .into_iter()
            .chain(self.effect.coefficients_mut())
        {
            *c *= 1.0 + rng.random_range(-spread..=spread);
        }
    }
}

/// Named synthetic families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DgpFamily {
    #[serde(rename = "confound-linear")]
    ConfoundLinear,
    #[serde(rename = "confound-hetero")]
    ConfoundHetero,
    #[serde(rename = "null-effect")]
    NullEffect,
}

impl DgpFamily {
    pub const ALL: [DgpFamily; 3] = [
        DgpFamily::ConfoundLinear,
        DgpFamily::ConfoundHetero,
        DgpFamily::NullEffect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DgpFamily::ConfoundLinear => "confound-linear",
            DgpFamily::ConfoundHetero => "confound-hetero",
            DgpFamily::NullEffect => "null-effect",
        }
    }

    pub fn spec(self, seed: u64) -> DgpSpec {
        let propensity = Propensity::LogisticLinear {
            weights: vec![0.8, -0.4, 0.0, 0.0, 0.0],
            bias: 0.0,
        };
        let (baseline, effect) = match self {
            DgpFamily::ConfoundLinear => (
                Baseline::Affine {
                    intercept: 1.0,
                    coef: vec![1.5, 1.0, -0.5, 0.3, 0.0],
                },
                Effect::Affine {
                    intercept: 2.0,
                    coef: vec![0.0; 5],
                },
            ),
            DgpFamily::ConfoundHetero => (
                Baseline::Affine {
                    intercept: 1.0,
                    coef: vec![1.0, 0.5, -0.5, 0.0, 0.25],
                },
                Effect::Affine {
                    intercept: 1.0,
                    coef: vec![2.0, 0.0, 0.0, 0.0, 0.0],
                },
            ),
            DgpFamily::NullEffect => (
                Baseline::Affine {
                    intercept: 1.0,
                    coef: vec![1.5, 1.0, -0.5, 0.3, 0.0],
                },
                Effect::Affine {
                    intercept: 0.0,
                    coef: vec![0.0; 5],
                },
            ),
        };
        DgpSpec {
            d: 5,
            covariate_law: CovariateLaw::StandardNormal,
            propensity,
            outcome: OutcomeSurface { baseline, effect },
            noise_sigma: 0.5,
            seed,
        }
    }
}

impl FromStr for DgpFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DgpFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown DGP family `{s}`")))
    }
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        if d == 0 {
            return Err(Error::InvalidConfig("covariate dimension must be >= 1".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig("noise sigma must be finite and >= 0".into()));
        }
        let lengths = self
            .outcome
            .baseline
            .vector_lengths()
            .into_iter()
            .chain(self.outcome.effect.vector_lengths());
        for len in lengths {
            if len != d {
                return Err(Error::InvalidConfig(format!(
                    "coefficient vector of length {len} for dimension {d}"
                )));
            }
        }
        match &self.propensity {
            Propensity::Constant { p } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::InvalidConfig("constant propensity must lie in (0, 1)".into()));
                }
            }
            Propensity::LogisticLinear { weights, bias } => {
                if weights.len() != d {
                    return Err(Error::InvalidConfig(format!(
                        "propensity weights of length {} for dimension {d}",
                        weights.len()
                    )));
                }
                // largest |w . x| over the support (3-sigma ball / the box)
                let reach = match self.covariate_law {
                    CovariateLaw::StandardNormal => {
                        3.0 * weights.iter().map(|w| w * w).sum::<f64>().sqrt()
                    }
                    CovariateLaw::Uniform => {
                        3f64.sqrt() * weights.iter().map(|w| w.abs()).sum::<f64>()
                    }
                };
                let lo = logistic(bias - reach);
                let hi = logistic(bias + reach);
                if !(lo > OVERLAP_MIN && hi < 1.0 - OVERLAP_MIN) {
                    return Err(Error::InvalidConfig(format!(
                        "propensity range [{lo:.4}, {hi:.4}] violates overlap bound {OVERLAP_MIN}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Spec for a named family.
    pub fn named(family: &str, seed: u64) -> Result<Self> {
        Ok(family.parse::<DgpFamily>()?.spec(seed))
    }

    fn draw_covariates<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self.covariate_law {
            CovariateLaw::StandardNormal => (0..self.d).map(|_| rng.sample(StandardNormal)).collect(),
            CovariateLaw::Uniform => {
                let a = 3f64.sqrt();
                (0..self.d).map(|_| rng.random_range(-a..a)).collect()
            }
        }
    }
}

/// Exact nuisance functions of a [`DgpSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct DgpOracle {
    spec: DgpSpec,
}

impl DgpOracle {
    pub fn spec(&self) -> &DgpSpec {
        &self.spec
    }
}

impl NuisanceOracle for DgpOracle {
    fn dim(&self) -> usize {
        self.spec.d
    }

    fn f(&self, treated: bool, x: &[f64]) -> f64 {
        let f0 = self.spec.outcome.baseline.eval(x);
        if treated {
            f0 + self.theta0(x)
        } else {
            f0
        }
    }

    fn g0(&self, x: &[f64]) -> f64 {
        theory::marginal_outcome(self, x)
    }

    fn e0(&self, x: &[f64]) -> f64 {
        self.spec.propensity.eval(x)
    }

    fn theta0(&self, x: &[f64]) -> f64 {
        self.spec.outcome.effect.eval(x)
    }

    fn noise_sigma(&self) -> f64 {
        self.spec.noise_sigma
    }
}

pub fn oracle_of(spec: &DgpSpec) -> Result<DgpOracle> {
    spec.validate()?;
    Ok(DgpOracle { spec: spec.clone() })
}

/// Draws `n` units: `x` from the covariate law, `t ~ Bernoulli(e0(x))`,
/// `y(k) = f(k, x) + eps_k` with independent `eps_k ~ N(0, sigma^2)`.
pub fn generate(spec: &DgpSpec, n: usize) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample count must be >= 1".into()));
    }
    let oracle = oracle_of(spec)?;
    let mut r = rng::seeded(spec.seed);
    let sigma = spec.noise_sigma;
    let mut samples = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for _ in 0..n {
        let x = spec.draw_covariates(&mut r);
        let treated = r.random::<f64>() < oracle.e0(&x);
        let z0: f64 = r.sample(StandardNormal);
        let z1: f64 = r.sample(StandardNormal);
        let y0 = oracle.f(false, &x) + sigma * z0;
        let y1 = oracle.f(true, &x) + sigma * z1;
        let y = if treated { y1 } else { y0 };
        samples.push(Sample { x, treated, y });
        truth.push(PotentialOutcomes { y1, y0 });
    }
    Dataset::new(
        spec.d,
        samples,
        Some(truth),
        Provenance::Generated(Box::new(spec.clone())),
    )
}
