use rand::Rng;

use crate::nn::logistic;
use crate::{Error, Result};

/// Absolute tolerance for the algebraic identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Ground-truth nuisance functions of a data-generating process with
/// `Y = f(T, x) + eps`, `eps ~ N(0, noise_sigma^2)` and `T ~ Bernoulli(e0(x))`.
pub trait NuisanceOracle {
    fn dim(&self) -> usize;
    /// Potential-outcome mean `E[Y(t) | x]`.
    fn f(&self, treated: bool, x: &[f64]) -> f64;
    fn g0(&self, x: &[f64]) -> f64;
    fn e0(&self, x: &[f64]) -> f64;
    fn theta0(&self, x: &[f64]) -> f64;
    fn noise_sigma(&self) -> f64;
}

/// `e0(x) f(1,x) + (1 - e0(x)) f(0,x)`.
pub fn marginal_outcome<O: NuisanceOracle + ?Sized>(oracle: &O, x: &[f64]) -> f64 {
    let e = oracle.e0(x);
    e * oracle.f(true, x) + (1.0 - e) * oracle.f(false, x)
}

/// The two forms of `h(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualizedOutcome {
    /// `f(t,x) - g0(x)`
    pub direct: f64,
    /// `theta0(x) (t - e0(x))`
    pub lemma: f64,
}

/// Evaluates `h(t, x)` both directly and through the effect/propensity form,
/// failing if they disagree by more than [`IDENTITY_TOLERANCE`].
pub fn residualized_h<O: NuisanceOracle + ?Sized>(
    oracle: &O,
    treated: bool,
    x: &[f64],
) -> Result<ResidualizedOutcome> {
    let t = if treated { 1.0 } else { 0.0 };
    let direct = oracle.f(treated, x) - oracle.g0(x);
    let lemma = oracle.theta0(x) * (t - oracle.e0(x));
    let gap = (direct - lemma).abs();
    if !(gap <= IDENTITY_TOLERANCE) {
        return Err(Error::IdentityViolation {
            what: "f(t,x) - g0(x) vs theta0(x)(t - e0(x))",
            gap,
        });
    }
    Ok(ResidualizedOutcome { direct, lemma })
}

/// Checks the oracle invariants at `x`: effect consistency, the mixture
/// identity and overlap.
pub fn check_consistency<O: NuisanceOracle + ?Sized>(oracle: &O, x: &[f64]) -> Result<()> {
    let effect_gap = (oracle.f(true, x) - oracle.f(false, x) - oracle.theta0(x)).abs();
    if !(effect_gap <= IDENTITY_TOLERANCE) {
        return Err(Error::IdentityViolation {
            what: "f(1,x) - f(0,x) vs theta0(x)",
            gap: effect_gap,
        });
    }
    let mixture_gap = (marginal_outcome(oracle, x) - oracle.g0(x)).abs();
    if !(mixture_gap <= IDENTITY_TOLERANCE) {
        return Err(Error::IdentityViolation {
            what: "e0 f(1,x) + (1 - e0) f(0,x) vs g0(x)",
            gap: mixture_gap,
        });
    }
    let e = oracle.e0(x);
    if !(e > 0.0 && e < 1.0) {
        return Err(Error::IdentityViolation {
            what: "overlap 0 < e0(x) < 1",
            gap: e,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum SmoothFn {
    Affine { intercept: f64, coef: Vec<f64> },
    Sigmoid { base: f64, scale: f64, coef: Vec<f64> },
}

impl SmoothFn {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SmoothFn::Affine { intercept, coef } => intercept + dot(coef, x),
            SmoothFn::Sigmoid { base, scale, coef } => base + scale * logistic(dot(coef, x)),
        }
    }

    fn draw<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let coef: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        if rng.random_bool(0.5) {
            SmoothFn::Affine {
                intercept: rng.random_range(-3.0..3.0),
                coef,
            }
        } else {
            SmoothFn::Sigmoid {
                base: rng.random_range(-3.0..3.0),
                scale: rng.random_range(-4.0..4.0),
                coef,
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// An oracle specified through `g0`, `e0` and `theta0` (random affine or
/// sigmoid forms); the potential-outcome means are derived as
/// `f(1,x) = g0 + (1 - e0) theta0` and `f(0,x) = g0 - e0 theta0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomOracle {
    dim: usize,
    g0: SmoothFn,
    theta0: SmoothFn,
    propensity_coef: Vec<f64>,
    propensity_bias: f64,
    noise_sigma: f64,
}

impl RandomOracle {
    pub fn draw<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self {
            dim,
            g0: SmoothFn::draw(dim, rng),
            theta0: SmoothFn::draw(dim, rng),
            propensity_coef: (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect(),
            propensity_bias: rng.random_range(-1.0..1.0),
            noise_sigma: rng.random_range(0.0..2.0),
        }
    }
}

impl NuisanceOracle for RandomOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn f(&self, treated: bool, x: &[f64]) -> f64 {
        let e = self.e0(x);
        let theta = self.theta0(x);
        if treated {
            self.g0(x) + (1.0 - e) * theta
        } else {
            self.g0(x) - e * theta
        }
    }

    fn g0(&self, x: &[f64]) -> f64 {
        self.g0.eval(x)
    }

    fn e0(&self, x: &[f64]) -> f64 {
        // kept inside [0.05, 0.95]
        0.05 + 0.9 * logistic(dot(&self.propensity_coef, x) + self.propensity_bias)
    }

    fn theta0(&self, x: &[f64]) -> f64 {
        self.theta0.eval(x)
    }

    fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    struct Fixed {
        e: f64,
        f1: f64,
        f0: f64,
    }

    impl NuisanceOracle for Fixed {
        fn dim(&self) -> usize {
            1
        }
        fn f(&self, treated: bool, _: &[f64]) -> f64 {
            if treated {
                self.f1
            } else {
                self.f0
            }
        }
        fn g0(&self, x: &[f64]) -> f64 {
            marginal_outcome(self, x)
        }
        fn e0(&self, _: &[f64]) -> f64 {
            self.e
        }
        fn theta0(&self, _: &[f64]) -> f64 {
            self.f1 - self.f0
        }
        fn noise_sigma(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn mixture_examples() {
        let o = Fixed { e: 0.0, f1: 5.0, f0: -1.25 };
        assert_eq!(marginal_outcome(&o, &[0.0]), -1.25);
        let o = Fixed { e: 0.5, f1: 2.0, f0: 1.0 };
        assert_eq!(marginal_outcome(&o, &[0.0]), 1.5);
    }

    #[test]
    fn residualized_examples() {
        // theta0 = 1, e0 = 0.25
        let o = Fixed { e: 0.25, f1: 1.0, f0: 0.0 };
        let h1 = residualized_h(&o, true, &[0.0]).unwrap();
        let h0 = residualized_h(&o, false, &[0.0]).unwrap();
        assert_eq!(h1.lemma, 0.75);
        assert_eq!(h0.lemma, -0.25);
        assert!((h1.direct - 0.75).abs() <= IDENTITY_TOLERANCE);
        assert!((h1.lemma - h0.lemma - 1.0).abs() <= IDENTITY_TOLERANCE);

        let null = Fixed { e: 0.4, f1: 3.0, f0: 3.0 };
        assert_eq!(residualized_h(&null, true, &[0.0]).unwrap().direct, 0.0);
        assert_eq!(residualized_h(&null, false, &[0.0]).unwrap().lemma, 0.0);
    }

    struct Broken;
    impl NuisanceOracle for Broken {
        fn dim(&self) -> usize {
            1
        }
        fn f(&self, treated: bool, _: &[f64]) -> f64 {
            if treated {
                2.0
            } else {
                0.0
            }
        }
        fn g0(&self, _: &[f64]) -> f64 {
            5.0
        }
        fn e0(&self, _: &[f64]) -> f64 {
            0.5
        }
        fn theta0(&self, _: &[f64]) -> f64 {
            2.0
        }
        fn noise_sigma(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn broken_oracle_is_detected() {
        assert!(matches!(
            residualized_h(&Broken, true, &[0.0]),
            Err(Error::IdentityViolation { .. })
        ));
        assert!(check_consistency(&Broken, &[0.0]).is_err());
    }

    #[test]
    fn random_oracles_are_consistent() {
        let mut r = rng::seeded(77);
        for _ in 0..200 {
            let o = RandomOracle::draw(3, &mut r);
            let x: Vec<f64> = (0..3).map(|_| r.random_range(-2.0..2.0)).collect();
            check_consistency(&o, &x).unwrap();
            residualized_h(&o, true, &x).unwrap();
            residualized_h(&o, false, &x).unwrap();
        }
    }
}
