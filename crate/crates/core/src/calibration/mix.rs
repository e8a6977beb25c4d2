use serde::{Deserialize, Serialize};

use super::CalibrationError;
use crate::affine_models::{CalibratedCurve, CurveError};

/// Curve values on a sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    pub t: Vec<f64>,
    pub value: Vec<f64>,
}

impl SampledCurve {
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.value.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

/// `alpha P_1 + (1 - alpha) P_2` for two curves fitted to the same quotes.
#[derive(Debug, Clone, Copy)]
pub struct ConvexMix<'a> {
    pub first: &'a CalibratedCurve,
    pub second: &'a CalibratedCurve,
    pub alpha: f64,
}

impl<'a> ConvexMix<'a> {
    pub fn new(
        first: &'a CalibratedCurve,
        second: &'a CalibratedCurve,
        alpha: f64,
    ) -> Result<Self, CalibrationError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CalibrationError::Mix(format!("alpha = {alpha} outside [0, 1]")));
        }
        if first.knots() != second.knots() {
            return Err(CalibrationError::Mix("curves were fitted on different maturities".into()));
        }
        Ok(Self { first, second, alpha })
    }

    pub fn value(&self, t: f64) -> Result<f64, CurveError> {
        let a = self.first.value(t)?;
        let b = self.second.value(t)?;
        Ok(self.alpha * a + (1.0 - self.alpha) * b)
    }

    pub fn sample(&self, grid: &[f64]) -> Result<SampledCurve, CurveError> {
        let value = grid.iter().map(|&t| self.value(t)).collect::<Result<_, _>>()?;
        Ok(SampledCurve { t: grid.to_vec(), value })
    }
}

pub fn convex_mix(
    first: &CalibratedCurve,
    second: &CalibratedCurve,
    alpha: f64,
    grid: &[f64],
) -> Result<SampledCurve, CalibrationError> {
    Ok(ConvexMix::new(first, second, alpha)?.sample(grid)?)
}
