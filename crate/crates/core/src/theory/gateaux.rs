//! Monte-Carlo checks of the conditional moment and its Gateaux derivative.
//!
//! For a fixed `x`, observations are drawn as `T ~ Bernoulli(e0(x))`,
//! `Y = f(T, x) + sigma * z`. The finite-difference route evaluates the
//! per-draw central difference of `psi(W, theta0, eta0 + tau (eta - eta0))` at
//! `tau = +-step` on the same draws (common random numbers) and reports the
//! sample mean and its standard error.

use rand::Rng;
use rand_distr::StandardNormal;

use super::score::{naive, psi};
use super::NuisanceOracle;
use crate::{rng, Error, Result};

/// Perturbed propensities must stay inside `[GUARD, 1 - GUARD]`.
pub const PROPENSITY_GUARD: f64 = 1e-3;

/// A scalar direction `x -> delta(x)` in nuisance space.
#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    Zero,
    Constant(f64),
    /// `slope * x[coord]`
    Linear { coord: usize, slope: f64 },
    /// `height * exp(-|x - center|^2 / (2 width^2))`
    RadialBump { center: Vec<f64>, width: f64, height: f64 },
}

impl Direction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Direction::Zero => 0.0,
            Direction::Constant(c) => *c,
            Direction::Linear { coord, slope } => slope * x[*coord],
            Direction::RadialBump { center, width, height } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                height * (-r2 / (2.0 * width * width)).exp()
            }
        }
    }
}

/// `eta - eta0 = (delta_g, delta_e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuisancePerturbation {
    pub delta_g: Direction,
    pub delta_e: Direction,
}

impl NuisancePerturbation {
    pub fn zero() -> Self {
        Self {
            delta_g: Direction::Zero,
            delta_e: Direction::Zero,
        }
    }

    pub fn outcome(delta_g: Direction) -> Self {
        Self {
            delta_g,
            delta_e: Direction::Zero,
        }
    }

    /// Perturbed nuisances `(g, e)` at `x`, rejecting propensities outside
    /// the guard band.
    fn perturbed<O: NuisanceOracle + ?Sized>(&self, oracle: &O, x: &[f64]) -> Result<(f64, f64)> {
        let g = oracle.g0(x) + self.delta_g.eval(x);
        let e = oracle.e0(x) + self.delta_e.eval(x);
        let (lo, hi) = (PROPENSITY_GUARD, 1.0 - PROPENSITY_GUARD);
        if !(lo..=hi).contains(&e) {
            return Err(Error::InvalidPerturbation { value: e, lo, hi });
        }
        Ok((g, e))
    }
}

/// The fixed family of ten directions used by the orthogonality suite:
/// constants, single-coordinate linear functions, radial bumps and mixtures.
pub fn standard_directions(dim: usize) -> Vec<NuisancePerturbation> {
    let second = 1.min(dim - 1);
    let origin = vec![0.0; dim];
    let bump = |height: f64| Direction::RadialBump {
        center: origin.clone(),
        width: 1.0,
        height,
    };
    vec![
        NuisancePerturbation::outcome(Direction::Constant(1.0)),
        NuisancePerturbation::outcome(Direction::Constant(-0.5)),
        NuisancePerturbation { delta_g: Direction::Zero, delta_e: Direction::Constant(0.1) },
        NuisancePerturbation { delta_g: Direction::Zero, delta_e: Direction::Constant(-0.1) },
        NuisancePerturbation::outcome(Direction::Linear { coord: 0, slope: 0.5 }),
        NuisancePerturbation {
            delta_g: Direction::Zero,
            delta_e: Direction::Linear { coord: second, slope: 0.05 },
        },
        NuisancePerturbation::outcome(bump(1.0)),
        NuisancePerturbation { delta_g: Direction::Zero, delta_e: bump(0.1) },
        NuisancePerturbation {
            delta_g: Direction::Constant(0.5),
            delta_e: Direction::Constant(0.05),
        },
        NuisancePerturbation {
            delta_g: Direction::Linear { coord: 0, slope: -1.0 },
            delta_e: bump(-0.08),
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Central-difference step in `tau`.
    pub tau_step: f64,
}

impl MonteCarloConfig {
    pub const MIN_SAMPLES: usize = 10_000;

    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            tau_step: 1e-4,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples < Self::MIN_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "Monte-Carlo checks need at least {} samples",
                Self::MIN_SAMPLES
            )));
        }
        if !(self.tau_step > 0.0) {
            return Err(Error::InvalidConfig("tau step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateauxMethod {
    FiniteDifference,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateauxEstimate {
    pub estimate: f64,
    pub mc_stderr: f64,
}

impl GateauxEstimate {
    /// `|estimate| <= k * stderr`.
    pub fn within(&self, k: f64) -> bool {
        self.estimate.abs() <= k * self.mc_stderr
    }

    fn from_draws(values: impl Iterator<Item = f64>) -> Self {
        // Welford
        let mut n = 0.0;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for v in values {
            n += 1.0;
            let d = v - mean;
            mean += d / n;
            m2 += d * (v - mean);
        }
        let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
        Self {
            estimate: mean,
            mc_stderr: (var / n).sqrt(),
        }
    }
}

/// Draws `(T, Y)` pairs at `x`.
fn draws<'a, O: NuisanceOracle + ?Sized>(
    oracle: &'a O,
    x: &'a [f64],
    mc: &MonteCarloConfig,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    let mut r = rng::seeded(mc.seed);
    let e0 = oracle.e0(x);
    let f1 = oracle.f(true, x);
    let f0 = oracle.f(false, x);
    let sigma = oracle.noise_sigma();
    (0..mc.n_samples).map(move |_| {
        let treated = r.random::<f64>() < e0;
        let z: f64 = r.sample(StandardNormal);
        if treated {
            (1.0, f1 + sigma * z)
        } else {
            (0.0, f0 + sigma * z)
        }
    })
}

/// Monte-Carlo mean of `Y` at `x`.
pub fn marginal_outcome_mc<O: NuisanceOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    mc: &MonteCarloConfig,
) -> Result<GateauxEstimate> {
    mc.validate()?;
    Ok(GateauxEstimate::from_draws(draws(oracle, x, mc).map(|(_, y)| y)))
}

/// Monte-Carlo mean of the orthogonal score at the true nuisances and effect.
pub fn moment_at_truth<O: NuisanceOracle + ?Sized>(
    oracle: &O,
    x: &[f64],
    mc: &MonteCarloConfig,
) -> Result<GateauxEstimate> {
    mc.validate()?;
    let (theta, g, e) = (oracle.theta0(x), oracle.g0(x), oracle.e0(x));
    Ok(GateauxEstimate::from_draws(
        draws(oracle, x, mc).map(|(t, y)| psi(y, t, theta, g, e)),
    ))
}

/// Derivative in `tau` at 0 of `E[psi(W, theta0, eta0 + tau (eta - eta0)) | x]`.
///
/// The analytic route evaluates
/// `(g0 - g + theta0 (e - e0)) E[T - e0 | x] + (e0 - e) (E[Y - g0 | x] - theta0 E[T - e0 | x])`
/// with `E[T | x] = e0(x)` and `E[Y | x] = e0 f(1,x) + (1 - e0) f(0,x)`, and
/// reports a zero standard error.
pub fn gateaux_derivative<O: NuisanceOracle + ?Sized>(
    oracle: &O,
    perturbation: &NuisancePerturbation,
    x: &[f64],
    mc: &MonteCarloConfig,
    method: GateauxMethod,
) -> Result<GateauxEstimate> {
    let (g, e) = perturbation.perturbed(oracle, x)?;
    let (g0, e0, theta0) = (oracle.g0(x), oracle.e0(x), oracle.theta0(x));
    match method {
        GateauxMethod::Analytic => {
            let mean_t = oracle.e0(x);
            let mean_t_resid = mean_t - e0;
            let mean_y = super::marginal_outcome(oracle, x);
            let mean_y_resid = mean_y - g0;
            let estimate = (g0 - g + theta0 * (e - e0)) * mean_t_resid
                + (e0 - e) * (mean_y_resid - theta0 * mean_t_resid);
            Ok(GateauxEstimate {
                estimate,
                mc_stderr: 0.0,
            })
        }
        GateauxMethod::FiniteDifference => {
            mc.validate()?;
            let (dg, de) = (g - g0, e - e0);
            let step = mc.tau_step;
            let (g_up, e_up) = (g0 + step * dg, e0 + step * de);
            let (g_dn, e_dn) = (g0 - step * dg, e0 - step * de);
            Ok(GateauxEstimate::from_draws(draws(oracle, x, mc).map(
                |(t, y)| {
                    (psi(y, t, theta0, g_up, e_up) - psi(y, t, theta0, g_dn, e_dn))
                        / (2.0 * step)
                },
            )))
        }
    }
}

/// The same finite-difference machinery applied to the non-orthogonal score
/// `(Y - g - theta T) T`, which is sensitive to outcome-nuisance perturbations.
pub fn non_orthogonal_control<O: NuisanceOracle + ?Sized>(
    oracle: &O,
    perturbation: &NuisancePerturbation,
    x: &[f64],
    mc: &MonteCarloConfig,
) -> Result<GateauxEstimate> {
    let (g, _) = perturbation.perturbed(oracle, x)?;
    mc.validate()?;
    let (g0, theta0) = (oracle.g0(x), oracle.theta0(x));
    let step = mc.tau_step;
    let (g_up, g_dn) = (g0 + step * (g - g0), g0 - step * (g - g0));
    Ok(GateauxEstimate::from_draws(draws(oracle, x, mc).map(
        |(t, y)| (naive(y, t, theta0, g_up) - naive(y, t, theta0, g_dn)) / (2.0 * step),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_evaluate() {
        assert_eq!(Direction::Zero.eval(&[3.0]), 0.0);
        assert_eq!(Direction::Constant(2.5).eval(&[3.0]), 2.5);
        assert_eq!(Direction::Linear { coord: 1, slope: 2.0 }.eval(&[3.0, -1.0]), -2.0);
        let bump = Direction::RadialBump { center: vec![0.0, 0.0], width: 1.0, height: 0.5 };
        assert_eq!(bump.eval(&[0.0, 0.0]), 0.5);
        assert!(bump.eval(&[3.0, 3.0]) < 1e-3);
    }

    #[test]
    fn ten_standard_directions() {
        assert_eq!(standard_directions(5).len(), 10);
        assert_eq!(standard_directions(1).len(), 10);
    }

    #[test]
    fn too_few_samples_rejected() {
        let mc = MonteCarloConfig::new(100, 0);
        assert!(mc.validate().is_err());
    }
}
