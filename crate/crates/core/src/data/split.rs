use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{rng, Error, Result};

/// Train / validation / test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitSpec {
    /// 63% / 27% / 10%.
    #[serde(rename = "ihdp_63_27_10")]
    Ihdp,
    /// 56% / 24% / 20%.
    #[serde(rename = "twins_news_56_24_20")]
    TwinsNews,
    Custom {
        train: f64,
        validation: f64,
        test: f64,
    },
}

impl SplitSpec {
    pub fn fractions(&self) -> (f64, f64, f64) {
        match *self {
            SplitSpec::Ihdp => (0.63, 0.27, 0.10),
            SplitSpec::TwinsNews => (0.56, 0.24, 0.20),
            SplitSpec::Custom {
                train,
                validation,
                test,
            } => (train, validation, test),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = self.fractions();
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(Error::Split("fractions must be positive".into()));
        }
        if ((a + b + c) - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!("fractions sum to {}", a + b + c)));
        }
        Ok(())
    }
}

// Slack against representation error in `fraction * n`.
const FLOOR_SLACK: f64 = 1e-9;

/// Part sizes for `n` units. Validation gets `floor(f_val n)`, the held-in
/// block (train + validation) gets `floor((f_train + f_val) n)`; train takes
/// the rest of the held-in block and test everything beyond it.
pub fn split_sizes(spec: &SplitSpec, n: usize) -> Result<(usize, usize, usize)> {
    spec.validate()?;
    let (ft, fv, _) = spec.fractions();
    let nf = n as f64;
    let validation = (fv * nf + FLOOR_SLACK).floor() as usize;
    let held_in = (((ft + fv) * nf + FLOOR_SLACK).floor() as usize).min(n);
    let train = held_in.saturating_sub(validation);
    let test = n - held_in;
    if train == 0 || validation == 0 || test == 0 {
        return Err(Error::Split(format!(
            "n = {n} leaves an empty part ({train}, {validation}, {test})"
        )));
    }
    Ok((train, validation, test))
}

/// Uniform random partition of `0..n` into consecutive blocks of `sizes`.
pub fn partition(n: usize, sizes: &[usize], seed: u64) -> Vec<Vec<usize>> {
    debug_assert_eq!(sizes.iter().sum::<usize>(), n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let mut parts = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &s in sizes {
        parts.push(order[start..start + s].to_vec());
        start += s;
    }
    parts
}

pub fn split(data: &Dataset, spec: &SplitSpec, seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    let (a, b, c) = split_sizes(spec, data.len())?;
    let parts = partition(data.len(), &[a, b, c], seed);
    Ok((
        data.subset(&parts[0]),
        data.subset(&parts[1]),
        data.subset(&parts[2]),
    ))
}
