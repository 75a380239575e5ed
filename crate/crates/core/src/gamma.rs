//! Gamma distributions parameterized by (shape, mean), and moment matching
//! of sums of independent gamma variates onto a single gamma.


use crate::special::{reg_lower_gamma, SpecialError};
use crate::Scalar;

/// A gamma distribution described by its shape and its mean.
///
/// The usual scale parameter is `mean / shape`; the variance is
/// `mean^2 / shape`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams<F> {
    pub shape: F,
    pub mean: F,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GammaError {
    #[error("shape and mean must be positive and finite")]
    InvalidParams,
    #[error("summand list must be non-empty")]
    EmptySum,
    #[error(transparent)]
    Special(#[from] SpecialError),
}

impl<F: Scalar> GammaParams<F> {
    pub fn new(shape: F, mean: F) -> Result<Self, GammaError> {
        if !(shape > F::zero() && mean > F::zero() && shape.is_finite() && mean.is_finite()) {
            return Err(GammaError::InvalidParams);
        }
        Ok(Self { shape, mean })
    }

    pub fn scale(&self) -> F {
        self.mean / self.shape
    }

    pub fn variance(&self) -> F {
        self.mean * self.mean / self.shape
    }

    /// CDF at `x`: the regularized lower incomplete gamma at `shape·x/mean`.
    pub fn cdf(&self, x: F) -> Result<F, GammaError> {
        if x <= F::zero() {
            if x.is_nan() {
                return Err(SpecialError::Domain("non-finite input").into());
            }
            return Ok(F::zero());
        }
        Ok(reg_lower_gamma(self.shape, self.shape * x / self.mean)?)
    }
}

/// Fit a single gamma to a sum of independent gamma variates by matching the
/// first two moments: the mean adds, and the fitted shape is
/// `Ω² / Σ aⱼ²/mⱼ` (the exact variance of the sum).
pub fn moment_match_gamma_sum<F: Scalar>(
    summands: &[GammaParams<F>],
) -> Result<GammaParams<F>, GammaError> {
    if summands.is_empty() {
        return Err(GammaError::EmptySum);
    }
    let mut mean = F::zero();
    let mut var = F::zero();
    for s in summands {
        mean = mean + s.mean;
        var = var + s.variance();
    }
    GammaParams::new(mean * mean / var, mean)
}
