//! Exact values and model-free bounds implied by OIS and CDS quotes.

mod cds;
mod ois;

pub use cds::{cds_model_free_bounds, cds_model_free_bounds_with};
pub use ois::{
    ois_detect_arbitrage, ois_detect_arbitrage_with, ois_exact_prefix, ois_exact_prefix_with,
    ois_extremal_curves, ois_model_free_bounds, ois_model_free_bounds_with, ExtremalCurves,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine_models::CurveError;
use crate::term_structures::QuoteKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("expected {expected:?} quotes")]
    WrongKind { expected: QuoteKind },
    #[error("degenerate quote at index {index}: previous rate is zero but S_{index} > 0")]
    DegenerateQuote { index: usize },
    #[error("positivity condition 1 - S_(i-1) H_i > 0 fails at index {index} (value {value})")]
    PositivityViolated { index: usize, value: f64 },
    #[error("arbitrage detected at index {}", .0.index.unwrap_or(0))]
    Arbitrage(ArbitrageReport),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Value of the curve at one standard maturity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundValue {
    Exact { value: f64 },
    Interval { min: f64, max: f64 },
}

impl BoundValue {
    pub fn lower(&self) -> f64 {
        match *self {
            BoundValue::Exact { value } => value,
            BoundValue::Interval { min, .. } => min,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            BoundValue::Exact { value } => value,
            BoundValue::Interval { max, .. } => max,
        }
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.lower() - slack && v <= self.upper() + slack
    }
}

/// Axis-aligned box that every arbitrage-free curve crosses on `[t_left, t_right]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub t_left: f64,
    pub v_bottom: f64,
    pub t_right: f64,
    pub v_top: f64,
}

impl Rectangle {
    pub fn contains(&self, t: f64, v: f64, slack: f64) -> bool {
        t >= self.t_left && t <= self.t_right && v >= self.v_bottom - slack && v <= self.v_top + slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    pub kind: QuoteKind,
    pub maturities: Vec<f64>,
    pub values: Vec<BoundValue>,
    pub rectangles: Vec<Rectangle>,
    /// OIS: `H_i`, the accrual between consecutive standard dates (zero on the exact prefix).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h: Vec<f64>,
    /// CDS: `M_i = P^D(T_{i-1}) - P^D(T_i)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<f64>,
    /// CDS: discounted premium accruals `N_i` between standard dates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<f64>,
    /// One-based indices whose bounds were clipped to `[0, 1]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clipped: Vec<usize>,
}

impl BoundsResult {
    /// Rectangles `{(T_{i-1}, lower(T_i)), (T_i, upper(T_{i-1}))}` with `upper(T_0) = 1`.
    pub(crate) fn rectangles_from(maturities: &[f64], values: &[BoundValue]) -> Vec<Rectangle> {
        let mut out = Vec::with_capacity(values.len());
        let (mut t_prev, mut top) = (0.0, 1.0);
        for (t, v) in maturities.iter().zip(values) {
            out.push(Rectangle { t_left: t_prev, v_bottom: v.lower(), t_right: *t, v_top: top });
            t_prev = *t;
            top = v.upper();
        }
        out
    }

    /// `true` when `(t, v)` lies in the union of the rectangles.
    pub fn covers(&self, t: f64, v: f64, slack: f64) -> bool {
        self.rectangles.iter().any(|r| r.contains(t, v, slack))
    }

    /// Range every admissible curve must take at `t`: the bound itself at a
    /// maturity, the covering rectangle in between, `[1, 1]` at `t = 0`.
    /// `None` beyond the last maturity.
    pub fn envelope(&self, t: f64) -> Option<(f64, f64)> {
        if t == 0.0 {
            return Some((1.0, 1.0));
        }
        if let Some(i) = self.maturities.iter().position(|&m| m == t) {
            return Some((self.values[i].lower(), self.values[i].upper()));
        }
        self.rectangles.iter().find(|r| r.t_left < t && t < r.t_right).map(|r| (r.v_bottom, r.v_top))
    }

    pub fn exact_count(&self) -> usize {
        self.values.iter().filter(|v| matches!(v, BoundValue::Exact { .. })).count()
    }
}

/// Outcome of the arbitrage scan: the first offending index, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArbitrageReport {
    pub kind: QuoteKind,
    /// One-based offending index.
    pub index: Option<usize>,
    pub maturity: Option<f64>,
    /// Quote at the offending index.
    pub rate: Option<f64>,
    /// Bound the quote had to respect.
    pub threshold: Option<f64>,
    pub detail: String,
}

impl ArbitrageReport {
    pub fn clean(kind: QuoteKind) -> Self {
        Self {
            kind,
            index: None,
            maturity: None,
            rate: None,
            threshold: None,
            detail: "no arbitrage detected".into(),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.index.is_none()
    }
}
