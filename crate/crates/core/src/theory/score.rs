/// One observation `(Y, T, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreInput {
    pub y: f64,
    pub treated: bool,
    pub x: Vec<f64>,
}

impl ScoreInput {
    pub fn t(&self) -> f64 {
        if self.treated {
            1.0
        } else {
            0.0
        }
    }
}

/// Orthogonal score `(Y - g - theta (T - e)) (T - e)`.
#[inline]
pub fn score_psi(w: &ScoreInput, theta: f64, g: f64, e: f64) -> f64 {
    psi(w.y, w.t(), theta, g, e)
}

#[inline]
pub(crate) fn psi(y: f64, t: f64, theta: f64, g: f64, e: f64) -> f64 {
    let r = t - e;
    (y - g - theta * r) * r
}

/// Non-orthogonal score `(Y - g - theta T) T`.
#[inline]
pub fn naive_score(w: &ScoreInput, theta: f64, g: f64) -> f64 {
    naive(w.y, w.t(), theta, g)
}

#[inline]
pub(crate) fn naive(y: f64, t: f64, theta: f64, g: f64) -> f64 {
    (y - g - theta * t) * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_arithmetic() {
        let w = ScoreInput { y: 3.0, treated: true, x: vec![] };
        assert_eq!(score_psi(&w, 2.0, 1.0, 0.5), 0.5);
        assert_eq!(naive_score(&w, 2.0, 1.0), 0.0);
    }

    #[test]
    fn vanishes_on_noiseless_truth() {
        // y = g0 + theta0 (t - e0) makes the first factor zero.
        let (g0, theta0, e0) = (1.25, -0.75, 0.5);
        for treated in [false, true] {
            let t = if treated { 1.0 } else { 0.0 };
            let w = ScoreInput { y: g0 + theta0 * (t - e0), treated, x: vec![] };
            assert_eq!(score_psi(&w, theta0, g0, e0), 0.0);
        }
    }
}
