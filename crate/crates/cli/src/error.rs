use admcurve::{ArbitrageReport, BoundsError, CalibrationError, CurveError, LevyError, TermStructureError};
use serde_json::{json, Value};
use thiserror::Error;

/// Failure of one CLI run. Each variant maps to a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("arbitrage detected: {}", .0.detail)]
    Arbitrage(ArbitrageReport),
    #[error("bounds undefined: {0}")]
    Positivity(BoundsError),
    #[error("calibration failed: {0}")]
    Calibration(CalibrationError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Arbitrage(_) | CliError::Positivity(_) => 2,
            CliError::Calibration(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Arbitrage(_) => "arbitrage",
            CliError::Positivity(_) => "positivity",
            CliError::Calibration(_) => "calibration",
        }
    }

    /// Machine-readable description written to stderr.
    pub fn diagnostics(&self) -> Value {
        let detail = match self {
            CliError::Arbitrage(report) => serde_json::to_value(report).unwrap_or(Value::Null),
            CliError::Positivity(BoundsError::PositivityViolated { index, value }) => {
                json!({ "index": index, "value": value })
            }
            CliError::Calibration(e) => calibration_detail(e),
            _ => Value::Null,
        };
        json!({
            "status": "error",
            "exit_code": self.exit_code(),
            "kind": self.kind(),
            "message": self.to_string(),
            "detail": detail,
        })
    }
}

fn calibration_detail(e: &CalibrationError) -> Value {
    match e {
        CalibrationError::NoSolution { index, lo, hi, residual_lo, residual_hi } => json!({
            "reason": "no_solution",
            "index": index,
            "bracket": [lo, hi],
            "residuals": [residual_lo, residual_hi],
        }),
        CalibrationError::NotConverged { index, residual } => {
            json!({ "reason": "not_converged", "index": index, "residual": residual })
        }
        CalibrationError::Inadmissible { index, t_star, violation } => json!({
            "reason": "inadmissible",
            "index": index,
            "t_star": t_star,
            "violation": serde_json::to_value(violation).unwrap_or(Value::Null),
        }),
        _ => Value::Null,
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Arbitrage(report) => CliError::Arbitrage(report),
            BoundsError::PositivityViolated { .. } => CliError::Positivity(e),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        match e {
            CalibrationError::NoSolution { .. }
            | CalibrationError::NotConverged { .. }
            | CalibrationError::Inadmissible { .. }
            | CalibrationError::Curve(_) => CliError::Calibration(e),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<TermStructureError> for CliError {
    fn from(e: TermStructureError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LevyError> for CliError {
    fn from(e: LevyError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
