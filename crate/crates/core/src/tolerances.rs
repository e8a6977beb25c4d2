//! Numerical tolerances shared by the bounds and calibration code.
//!
//! All comparison slacks live here so that they can be audited (and, through
//! `ADMCURVE_TOL_OVERRIDE`, remapped) in one place.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the environment variable that remaps the tolerance table.
pub const TOLERANCE_OVERRIDE_ENV: &str = "ADMCURVE_TOL_OVERRIDE";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Slack used when comparing values that should coincide.
    pub equality: f64,
    /// Slack applied to the arbitrage inequalities before an index is flagged.
    pub arbitrage_slack: f64,
    /// Absolute tolerance of the adaptive quadrature used for `psi`.
    pub quadrature: f64,
    /// Absolute residual tolerance of each bootstrap root.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { equality: 1e-12, arbitrage_slack: 1e-14, quadrature: 1e-10, residual: 1e-12 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ToleranceError {
    #[error("malformed tolerance override entry `{0}` (expected key=value)")]
    Malformed(String),
    #[error("unknown tolerance key `{0}`")]
    UnknownKey(String),
    #[error("tolerance `{key}` must be a positive finite number, got `{value}`")]
    InvalidValue { key: String, value: String },
}

impl Tolerances {
    /// Applies a comma separated `key=value` list on top of `self`.
    ///
    /// Recognised keys: `equality`, `arbitrage_slack`, `quadrature`, `residual`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self, ToleranceError> {
        for entry in spec.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (key, value) =
                entry.split_once('=').ok_or_else(|| ToleranceError::Malformed(entry.to_string()))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed: f64 =
                value.parse().ok().filter(|v: &f64| v.is_finite() && *v > 0.0).ok_or_else(|| {
                    ToleranceError::InvalidValue { key: key.to_string(), value: value.to_string() }
                })?;
            match key {
                "equality" => self.equality = parsed,
                "arbitrage_slack" => self.arbitrage_slack = parsed,
                "quadrature" => self.quadrature = parsed,
                "residual" => self.residual = parsed,
                other => return Err(ToleranceError::UnknownKey(other.to_string())),
            }
        }
        Ok(self)
    }

    /// Default table, remapped by `ADMCURVE_TOL_OVERRIDE` when it is set.
    pub fn from_env() -> Result<Self, ToleranceError> {
        match std::env::var(TOLERANCE_OVERRIDE_ENV) {
            Ok(spec) => Self::default().with_overrides(&spec),
            Err(_) => Ok(Self::default()),
        }
    }
}
