use serde::{Deserialize, Serialize};

use super::{CurveError, ModelSpec};

/// A model curve `P(0, t) = exp(-I(t))` on `[0, T_n]` with one level per
/// knot interval `(T_{k-1}, T_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibratedCurve {
    spec: ModelSpec,
    knots: Vec<f64>,
    levels: Vec<f64>,
}

impl CalibratedCurve {
    /// `knots` are `T_1 < ... < T_n` (the origin is implicit).
    pub fn new(spec: ModelSpec, knots: Vec<f64>, levels: Vec<f64>) -> Result<Self, CurveError> {
        spec.validate()?;
        if knots.is_empty() {
            return Err(CurveError::InvalidCurve("no knots".into()));
        }
        if knots.len() != levels.len() {
            return Err(CurveError::InvalidCurve(format!(
                "{} knots but {} levels",
                knots.len(),
                levels.len()
            )));
        }
        let mut prev = 0.0;
        for &k in &knots {
            if !(k.is_finite() && k > prev) {
                return Err(CurveError::InvalidCurve(format!(
                    "knots must be positive and strictly increasing (got {k} after {prev})"
                )));
            }
            prev = k;
        }
        if let Some(b) = levels.iter().find(|b| !b.is_finite()) {
            return Err(CurveError::InvalidCurve(format!("non-finite level {b}")));
        }
        Ok(Self { spec, knots, levels })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `T_k` with `T_0 = 0`.
    pub fn knot(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.knots[k - 1]
        }
    }

    pub fn horizon(&self) -> f64 {
        *self.knots.last().expect("non-empty knots")
    }

    fn check_domain(&self, t: f64) -> Result<(), CurveError> {
        let max = self.horizon();
        if !(t >= 0.0 && t <= max * (1.0 + 1e-14)) {
            return Err(CurveError::OutOfDomain { t, max });
        }
        Ok(())
    }

    /// Coefficient of level `k` (one-based) in `I(t)`.
    pub fn level_exposure(&self, k: usize, t: f64) -> f64 {
        self.spec.level_integral(t - self.knot(k - 1)) - self.spec.level_integral(t - self.knot(k))
    }

    /// `I(t) = -log P(0, t)`.
    pub fn exponent(&self, t: f64) -> Result<f64, CurveError> {
        self.check_domain(t)?;
        let mut out = self.spec.base_exponent(t)?;
        for (k, &b) in self.levels.iter().enumerate() {
            let start = self.knot(k);
            if t <= start {
                break;
            }
            out += b * self.level_exposure(k + 1, t);
        }
        Ok(out)
    }

    /// `P(0, t)`: discount factor or survival probability.
    pub fn value(&self, t: f64) -> Result<f64, CurveError> {
        Ok((-self.exponent(t)?).exp())
    }

    /// `f(0, t) = dI/dt`.
    pub fn forward_rate(&self, t: f64) -> Result<f64, CurveError> {
        self.check_domain(t)?;
        let s = &self.spec;
        let mut out = s.base_forward(t)?;
        for (k, &b) in self.levels.iter().enumerate() {
            let start = self.knot(k);
            if t <= start {
                break;
            }
            out += b * (s.level_rate(t - start) - s.level_rate(t - self.knot(k + 1)));
        }
        Ok(out)
    }

    /// `df/dt`, continuous inside each knot interval (right derivative at knots).
    pub fn forward_rate_deriv(&self, t: f64) -> Result<f64, CurveError> {
        self.check_domain(t)?;
        let s = &self.spec;
        let mut out = s.base_forward_deriv(t)?;
        for (k, &b) in self.levels.iter().enumerate() {
            let start = self.knot(k);
            if t < start {
                break;
            }
            let lo = t - start;
            let hi = t - self.knot(k + 1);
            let d_lo = if lo >= 0.0 { s.a * s.loading_deriv(lo) } else { 0.0 };
            let d_hi = if hi >= 0.0 { s.a * s.loading_deriv(hi) } else { 0.0 };
            out += b * (d_lo - d_hi);
        }
        Ok(out)
    }

    /// `-log P(0, t) / t`, with the forward rate as the limit at `t = 0`.
    pub fn spot_rate(&self, t: f64) -> Result<f64, CurveError> {
        if t == 0.0 {
            return self.forward_rate(0.0);
        }
        Ok(self.exponent(t)? / t)
    }
}
