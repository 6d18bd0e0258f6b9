//! Fixed-seed invariant suites behind `cdnn verify`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use cdnn_core::data::{oracle_of, DgpFamily};
use cdnn_core::nn::{
    gradient_check, Architecture, Network, RegressionSet, TreatmentInit, FD_STEP,
};
use cdnn_core::rng::{self, stream};
use cdnn_core::theory::{
    check_consistency, gateaux_derivative, marginal_outcome, non_orthogonal_control,
    residualized_h, standard_directions, Direction, GateauxMethod, MonteCarloConfig,
    NuisanceOracle, NuisancePerturbation, RandomOracle, IDENTITY_TOLERANCE,
};
use ndarray::Array2;
use rand::Rng;

use crate::{BenchError, Result};

pub const GRADIENT_TOLERANCE: f64 = 1e-4;
pub const GRADIENT_NETWORKS: usize = 20;
pub const LEMMA_ORACLES: usize = 1000;
pub const PROBE_POINTS: usize = 20;
pub const PROBE_SAMPLES: usize = 100_000;
pub const PROBE_SIGMAS: f64 = 3.0;
pub const CONTROL_PERTURBATIONS: [f64; 4] = [0.5, -0.5, 1.0, -1.0];

const SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyKind {
    Gradients,
    Lemma,
    Orthogonality,
}

impl VerifyKind {
    pub const ALL: [VerifyKind; 3] = [Self::Gradients, Self::Lemma, Self::Orthogonality];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gradients => "gradients",
            Self::Lemma => "lemma",
            Self::Orthogonality => "orthogonality",
        }
    }
}

impl FromStr for VerifyKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown check `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub kind: VerifyKind,
    pub checks: Vec<CheckLine>,
    pub elapsed_secs: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckLine {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "[{mark}] {}/{}: {}", self.kind.name(), c.name, c.detail)?;
        }
        write!(
            f,
            "{}: {} in {:.2}s",
            self.kind.name(),
            if self.passed() { "passed" } else { "FAILED" },
            self.elapsed_secs
        )
    }
}

pub fn verify(kind: VerifyKind) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut report = VerifyReport {
        kind,
        checks: Vec::new(),
        elapsed_secs: 0.0,
    };
    match kind {
        VerifyKind::Gradients => gradients(&mut report)?,
        VerifyKind::Lemma => lemma(&mut report)?,
        VerifyKind::Orthogonality => orthogonality(&mut report)?,
    }
    report.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

fn gradients(report: &mut VerifyReport) -> Result<()> {
    let mut worst: f64 = 0.0;
    let mut params = 0;
    for k in 0..GRADIENT_NETWORKS as u64 {
        let mut r = rng::seeded(rng::derive(SEED, stream::INIT, k));
        let d = r.random_range(1..=5);
        let depth = r.random_range(1..=3);
        let widths = (0..depth).map(|_| r.random_range(2..=8)).collect();
        let mut arch = Architecture::new(d, widths);
        arch.concat_to_all_layers = r.random_bool(0.3);
        let net = Network::init(&arch, TreatmentInit::Uniform(0.5), &mut r)?;
        let n = 8;
        let x = Array2::from_shape_fn((n, d), |_| r.random_range(-2.0..2.0));
        let t = (0..n).map(|_| f64::from(u8::from(r.random_bool(0.5)))).collect();
        let y = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let check = gradient_check(&net, &RegressionSet::new(x, t, y)?)?;
        worst = worst.max(check.max_relative_error);
        params += check.parameters_checked;
    }
    report.push(
        "max_relative_error",
        worst <= GRADIENT_TOLERANCE,
        format!(
            "{worst:.3e} <= {GRADIENT_TOLERANCE:e} over {GRADIENT_NETWORKS} networks, {params} parameters, step {FD_STEP:e}"
        ),
    );
    Ok(())
}

fn lemma(report: &mut VerifyReport) -> Result<()> {
    let mut r = rng::seeded(rng::derive(SEED, stream::PROBE, 0));
    let (mut h_ok, mut mix_ok, mut consistent) = (0, 0, 0);
    let (mut h_gap, mut mix_gap): (f64, f64) = (0.0, 0.0);
    for _ in 0..LEMMA_ORACLES {
        let dim = r.random_range(1..=6);
        let oracle = RandomOracle::draw(dim, &mut r);
        let x: Vec<f64> = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
        let both = [false, true].iter().try_fold(0.0f64, |acc, &t| {
            residualized_h(&oracle, t, &x).map(|h| acc.max((h.direct - h.lemma).abs()))
        });
        if let Ok(gap) = both {
            h_ok += 1;
            h_gap = h_gap.max(gap);
        }
        let gap = (marginal_outcome(&oracle, &x) - oracle.g0(&x)).abs();
        mix_gap = mix_gap.max(gap);
        mix_ok += usize::from(gap <= IDENTITY_TOLERANCE);
        consistent += usize::from(check_consistency(&oracle, &x).is_ok());
    }
    let n = LEMMA_ORACLES;
    report.push(
        "residualized_outcome",
        h_ok == n,
        format!("{h_ok}/{n} within {IDENTITY_TOLERANCE:e}, max gap {h_gap:.2e}"),
    );
    report.push(
        "mixture",
        mix_ok == n,
        format!("{mix_ok}/{n} within {IDENTITY_TOLERANCE:e}, max gap {mix_gap:.2e}"),
    );
    report.push("consistency", consistent == n, format!("{consistent}/{n} oracles consistent"));
    Ok(())
}

fn orthogonality(report: &mut VerifyReport) -> Result<()> {
    let oracle = oracle_of(&DgpFamily::ConfoundHetero.spec(SEED))?;
    let dim = oracle.dim();
    let mut r = rng::seeded(rng::derive(SEED, stream::PROBE, 1));
    let points: Vec<Vec<f64>> = (0..PROBE_POINTS)
        .map(|_| (0..dim).map(|_| r.random_range(-1.5..1.5)).collect())
        .collect();
    let directions = standard_directions(dim);
    let mc_seed = |k: usize| rng::derive(SEED, stream::PROBE, 100 + k as u64);

    let (mut within, mut exact_zero, mut total) = (0, 0, 0);
    let mut worst_z: f64 = 0.0;
    for (i, x) in points.iter().enumerate() {
        for (j, p) in directions.iter().enumerate() {
            let mc = MonteCarloConfig::new(PROBE_SAMPLES, mc_seed(i * directions.len() + j));
            let fd = gateaux_derivative(&oracle, p, x, &mc, GateauxMethod::FiniteDifference)?;
            let analytic = gateaux_derivative(&oracle, p, x, &mc, GateauxMethod::Analytic)?;
            total += 1;
            within += usize::from(fd.within(PROBE_SIGMAS));
            exact_zero += usize::from(analytic.estimate == 0.0);
            if fd.mc_stderr > 0.0 {
                worst_z = worst_z.max(fd.estimate.abs() / fd.mc_stderr);
            }
        }
    }
    report.push(
        "finite_difference",
        within * 100 >= 95 * total,
        format!("{within}/{total} probes within {PROBE_SIGMAS} sigma (need 95%), max |z| {worst_z:.2}"),
    );
    report.push(
        "analytic",
        exact_zero == total,
        format!("{exact_zero}/{total} exactly 0"),
    );

    let (mut rejected, mut controls) = (0, 0);
    let mut weakest_z = f64::INFINITY;
    for (i, x) in points.iter().enumerate() {
        for (j, &c) in CONTROL_PERTURBATIONS.iter().enumerate() {
            let p = NuisancePerturbation::outcome(Direction::Constant(c));
            let mc = MonteCarloConfig::new(PROBE_SAMPLES, mc_seed(10_000 + i * 4 + j));
            let est = non_orthogonal_control(&oracle, &p, x, &mc)?;
            controls += 1;
            rejected += usize::from(!est.within(PROBE_SIGMAS));
            weakest_z = weakest_z.min(est.estimate.abs() / est.mc_stderr);
        }
    }
    report.push(
        "negative_control",
        rejected == controls,
        format!("{rejected}/{controls} rejected at {PROBE_SIGMAS} sigma, min |z| {weakest_z:.1}"),
    );
    Ok(())
}
