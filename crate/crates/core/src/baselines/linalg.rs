use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Ridge added to the Gram matrix when it is numerically singular.
pub const RIDGE_FALLBACK: f64 = 1e-8;

// Smallest acceptable squared Cholesky pivot relative to the largest Gram diagonal.
const PIVOT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub beta: Vec<f64>,
    pub ridge_applied: bool,
}

/// Minimises `|X b - y|^2 + penalty * sum_j w_j b_j^2` through the normal
/// equations, with one step of iterative refinement. `penalty_weights` of
/// `None` means no penalty. A singular system is retried with
/// [`RIDGE_FALLBACK`] on every coefficient and flagged.
pub fn least_squares(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    penalty: f64,
    penalty_weights: Option<&[f64]>,
) -> Result<LeastSquares> {
    if x.nrows() != y.len() {
        return Err(Error::InputShape {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    let xt = x.transpose();
    let mut gram = &xt * x;
    if let Some(w) = penalty_weights {
        for (j, wj) in w.iter().enumerate() {
            gram[(j, j)] += penalty * wj;
        }
    }
    let rhs = &xt * y;
    let scale = gram.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let well_posed = |g: &DMatrix<f64>| {
        g.clone().cholesky().filter(|c| {
            let l = c.l_dirty();
            (0..l.nrows()).all(|i| l[(i, i)] * l[(i, i)] > PIVOT_FLOOR * scale.max(1.0))
        })
    };
    let (chol, ridge_applied, system) = match well_posed(&gram) {
        Some(c) => (c, false, gram),
        None => {
            let mut g = gram;
            for j in 0..g.nrows() {
                g[(j, j)] += RIDGE_FALLBACK * scale.max(1.0);
            }
            let c = g.clone().cholesky().ok_or_else(|| {
                Error::InvalidConfig("least-squares system is singular even with ridge".into())
            })?;
            (c, true, g)
        }
    };
    let mut beta = chol.solve(&rhs);
    let residual = &rhs - &system * &beta;
    beta += chol.solve(&residual);
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidConfig("non-finite least-squares solution".into()));
    }
    Ok(LeastSquares {
        beta: beta.iter().copied().collect(),
        ridge_applied,
    })
}
