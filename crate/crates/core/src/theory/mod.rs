//! Executable identities behind the estimator.
//!
//! A [`NuisanceOracle`] exposes the true conditional outcome `g0(x) = E[Y|x]`,
//! the propensity `e0(x) = E[T|x]`, the effect `theta0(x)` and the potential
//! outcome means `f(t, x)`. On top of it this module evaluates:
//!
//! - the mixture identity `g0 = e0 f(1,.) + (1 - e0) f(0,.)`;
//! - the residualised outcome identity `f(t,x) - g0(x) = theta0(x) (t - e0(x))`;
//! - the score `psi = (Y - g - theta (T - e)) (T - e)` and its moment condition;
//! - Gateaux derivatives of the conditional moment along nuisance
//!   perturbations, by Monte-Carlo central differences and in closed form.

mod gateaux;
mod oracle;
mod score;

pub use gateaux::{
    gateaux_derivative, marginal_outcome_mc, moment_at_truth, non_orthogonal_control,
    standard_directions, Direction, GateauxEstimate, GateauxMethod, MonteCarloConfig,
    NuisancePerturbation, PROPENSITY_GUARD,
};
pub use oracle::{
    check_consistency, marginal_outcome, residualized_h, NuisanceOracle, RandomOracle,
    ResidualizedOutcome, IDENTITY_TOLERANCE,
};
pub use score::{naive_score, score_psi, ScoreInput};
