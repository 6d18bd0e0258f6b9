use nalgebra::{DMatrix, DVector};

use super::linalg::least_squares;
use crate::data::Dataset;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitScope {
    Pooled,
    Treated,
    Control,
}

/// `intercept + coefficients . features`, where features are the covariates
/// followed by the treatment indicator for pooled fits. Dropped covariates
/// carry a zero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub fitted_on: FitScope,
    pub ridge_fallback: bool,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64], t: Option<f64>) -> f64 {
        let mut v = self.intercept;
        for (c, xi) in self.coefficients.iter().zip(x) {
            v += c * xi;
        }
        if let (Some(t), FitScope::Pooled) = (t, self.fitted_on) {
            v += self.coefficients[x.len()] * t;
        }
        v
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OlsOptions {
    /// Covariate indices left out of the design.
    pub drop_columns: Vec<usize>,
}

fn fit_linear(
    data: &Dataset,
    rows: &[usize],
    with_treatment: bool,
    options: &OlsOptions,
    scope: FitScope,
) -> Result<LinearModel> {
    let d = data.dim();
    if let Some(&bad) = options.drop_columns.iter().find(|&&c| c >= d) {
        return Err(Error::InvalidConfig(format!("cannot drop column {bad} of {d}")));
    }
    let kept: Vec<usize> = (0..d).filter(|c| !options.drop_columns.contains(c)).collect();
    let p = 1 + kept.len() + usize::from(with_treatment);
    let samples = data.samples();
    let x = DMatrix::from_fn(rows.len(), p, |r, c| {
        let s = &samples[rows[r]];
        match c {
            0 => 1.0,
            c if c <= kept.len() => s.x[kept[c - 1]],
            _ => s.t(),
        }
    });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| samples[i].y));
    let fit = least_squares(&x, &y, 0.0, None)?;
    let mut coefficients = vec![0.0; d + usize::from(with_treatment)];
    for (k, &c) in kept.iter().enumerate() {
        coefficients[c] = fit.beta[k + 1];
    }
    if with_treatment {
        coefficients[d] = fit.beta[p - 1];
    }
    Ok(LinearModel {
        intercept: fit.beta[0],
        coefficients,
        fitted_on: scope,
        ridge_fallback: fit.ridge_applied,
    })
}

/// Pooled fit of `Y` on `[x, T]`; the effect is the treatment coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Lr1Fit {
    pub model: LinearModel,
}

impl Lr1Fit {
    pub fn effect(&self) -> f64 {
        *self.model.coefficients.last().expect("treatment coefficient")
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Vec<f64> {
        vec![self.effect(); data.len()]
    }
}

pub fn ols_lr1(data: &Dataset) -> Result<Lr1Fit> {
    ols_lr1_with(data, &OlsOptions::default())
}

pub fn ols_lr1_with(data: &Dataset, options: &OlsOptions) -> Result<Lr1Fit> {
    if !data.has_both_arms() {
        return Err(Error::DegenerateTreatment(format!(
            "{} of {} units treated",
            data.treated_count(),
            data.len()
        )));
    }
    let required = data.dim() + 3;
    if data.len() < required {
        return Err(Error::DegenerateArm {
            arm: "pooled",
            count: data.len(),
            required,
        });
    }
    let rows: Vec<usize> = (0..data.len()).collect();
    Ok(Lr1Fit {
        model: fit_linear(data, &rows, true, options, FitScope::Pooled)?,
    })
}

/// Separate fits of `Y` on `x` within each arm.
#[derive(Debug, Clone, PartialEq)]
pub struct Lr2Fit {
    pub treated: LinearModel,
    pub control: LinearModel,
}

impl Lr2Fit {
    pub fn ite(&self, x: &[f64]) -> f64 {
        self.treated.predict(x, None) - self.control.predict(x, None)
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Vec<f64> {
        data.samples().iter().map(|s| self.ite(&s.x)).collect()
    }
}

pub fn ols_lr2(data: &Dataset) -> Result<Lr2Fit> {
    let required = data.dim() + 3;
    let (treated, control): (Vec<usize>, Vec<usize>) =
        (0..data.len()).partition(|&i| data.samples()[i].treated);
    for (arm, rows) in [("treated", &treated), ("control", &control)] {
        if rows.len() < required {
            return Err(Error::DegenerateArm {
                arm,
                count: rows.len(),
                required,
            });
        }
    }
    let options = OlsOptions::default();
    Ok(Lr2Fit {
        treated: fit_linear(data, &treated, false, &options, FitScope::Treated)?,
        control: fit_linear(data, &control, false, &options, FitScope::Control)?,
    })
}
