use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{binomial, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaMode {
    /// `theta_(dx,dy) = 1 / (c^(2 dy) C(n-1+|dx|, |dx|))`.
    Graded,
    /// All ones on the truncation.
    Ones,
}

/// Positive objective weights for the weighted completion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaWeights {
    pub mode: ThetaMode,
    pub n: usize,
    pub gamma: f64,
    pub c: f64,
}

/// `2 max(1, gamma)`.
pub fn default_c(gamma: f64) -> f64 {
    2.0 * gamma.max(1.0)
}

pub fn theta_weights(
    n: usize,
    gamma: f64,
    mode: ThetaMode,
    c: Option<f64>,
) -> Result<ThetaWeights> {
    if n == 0 || !(gamma > 0.0) {
        return Err(Error::usage("need n >= 1 and gamma > 0"));
    }
    let c = c.unwrap_or_else(|| default_c(gamma));
    if mode == ThetaMode::Graded && !(c > gamma.max(1.0)) {
        return Err(Error::usage(format!(
            "c = {c} must exceed max(1, gamma) = {}",
            gamma.max(1.0)
        )));
    }
    Ok(ThetaWeights { mode, n, gamma, c })
}

impl ThetaWeights {
    pub fn weight(&self, d: &MultiIndex) -> f64 {
        match self.mode {
            ThetaMode::Ones => 1.0,
            ThetaMode::Graded => {
                let dx = d.head_degree();
                let dy = d.last() as i32;
                1.0 / (self.c.powi(2 * dy) * binomial(self.n - 1 + dx, dx))
            }
        }
    }
}
