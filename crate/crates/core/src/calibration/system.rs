use serde::{Deserialize, Serialize};

use super::CalibrationError;
use crate::affine_models::CurveError;
use crate::quadrature::gauss_legendre_8_nodes;
use crate::term_structures::{DiscountCurveFn, PaymentSchedule, QuoteKind, QuoteSet};

/// Linear market-fit system `A P = B` on the payment grid.
///
/// Row `i` only involves grid columns `1..=p_i`, which is what makes a
/// maturity-by-maturity bootstrap possible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketFitSystem {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub grid: PaymentSchedule,
    pub description: Vec<String>,
}

impl MarketFitSystem {
    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.grid.len()
    }

    /// `A P - B` for curve values `P(t_1), ..., P(t_{p_n})`.
    pub fn residuals(&self, values: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, b)| row.iter().zip(values).map(|(x, v)| x * v).sum::<f64>() - b)
            .collect()
    }

    /// One-based index of the last non-zero column of row `i` (zero-based).
    pub fn row_support(&self, i: usize) -> usize {
        self.a[i].iter().rposition(|&x| x != 0.0).map_or(0, |k| k + 1)
    }
}

/// Row `i` of the OIS system: `A[i, k] = S_i delta_k` for `k < p_i`,
/// `A[i, p_i] = S_i delta_{p_i} + 1`, `B[i] = 1`.
pub fn assemble_ois_system(q: &QuoteSet) -> Result<MarketFitSystem, CalibrationError> {
    if q.kind() != QuoteKind::Ois {
        return Err(CalibrationError::WrongKind { expected: QuoteKind::Ois });
    }
    let sched = q.schedule();
    let cols = sched.len();
    let mut a = Vec::with_capacity(q.len());
    let mut description = Vec::with_capacity(q.len());
    for i in 1..=q.len() {
        let s = q.rate(i);
        let p = sched.p(i);
        let mut row = vec![0.0; cols];
        for (k, x) in row.iter_mut().enumerate().take(p) {
            *x = s * sched.accrual(k + 1);
        }
        row[p - 1] += 1.0;
        a.push(row);
        description.push(format!("OIS {}y", q.maturity(i)));
    }
    Ok(MarketFitSystem { a, b: vec![1.0; q.len()], grid: sched.clone(), description })
}

/// Premium leg and maturity term of the CDS system, together with the full
/// pricing functionals (protection leg included) used for calibration.
///
/// The grid form carries `S_i delta_k P^D(t_k)` and `(1 - R) P^D(T_i)` only;
/// the protection integral `(1 - R) int_0^{T_i} f^D P^D Q dt` depends on the
/// shape of `Q` between grid dates and lives in the returned instruments.
pub fn assemble_cds_system(
    q: &QuoteSet,
    disc: &DiscountCurveFn,
    panels_per_period: usize,
) -> Result<(MarketFitSystem, Vec<Instrument>), CalibrationError> {
    if q.kind() != QuoteKind::Cds {
        return Err(CalibrationError::WrongKind { expected: QuoteKind::Cds });
    }
    let lgd = 1.0 - q.recovery().expect("CDS quotes carry a recovery rate");
    let sched = q.schedule();
    let cols = sched.len();
    let mut a = Vec::with_capacity(q.len());
    let mut description = Vec::with_capacity(q.len());
    for i in 1..=q.len() {
        let s = q.rate(i);
        let p = sched.p(i);
        let mut row = vec![0.0; cols];
        for (k, x) in row.iter_mut().enumerate().take(p) {
            *x = s * sched.accrual(k + 1) * disc.discount(sched.date(k + 1))?;
        }
        row[p - 1] += lgd * disc.discount(q.maturity(i))?;
        a.push(row);
        description.push(format!("CDS {}y", q.maturity(i)));
    }
    let system = MarketFitSystem { a, b: vec![lgd; q.len()], grid: sched.clone(), description };
    Ok((system, cds_instruments(q, disc, panels_per_period)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstrumentKind {
    Ois,
    Cds,
    /// Exact-value constraint `P(t*) = v*`.
    Constraint,
}

/// A pricing condition `sum_j coeff_j P(tau_j) = target` with all nodes in `[0, maturity]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instrument {
    pub kind: InstrumentKind,
    pub maturity: f64,
    /// Market quote (rate, spread, or constrained value).
    pub quote: f64,
    pub terms: Vec<(f64, f64)>,
    pub target: f64,
}

impl Instrument {
    pub fn constraint(t: f64, value: f64) -> Result<Self, CalibrationError> {
        if !(t.is_finite() && t > 0.0) || !(value > 0.0 && value <= 1.0) {
            return Err(CalibrationError::InvalidConstraint(format!(
                "constraint P({t}) = {value} needs t > 0 and a value in (0, 1]"
            )));
        }
        Ok(Self {
            kind: InstrumentKind::Constraint,
            maturity: t,
            quote: value,
            terms: vec![(t, 1.0)],
            target: value,
        })
    }

    /// `sum_j coeff_j P(tau_j) - target` for an arbitrary curve.
    pub fn residual<F>(&self, curve: F) -> Result<f64, CurveError>
    where
        F: Fn(f64) -> Result<f64, CurveError>,
    {
        let mut pv = 0.0;
        for &(t, c) in &self.terms {
            pv += c * curve(t)?;
        }
        Ok(pv - self.target)
    }

    /// Residual scaled by the target: the relative PV error.
    pub fn relative_error<F>(&self, curve: F) -> Result<f64, CurveError>
    where
        F: Fn(f64) -> Result<f64, CurveError>,
    {
        let scale = if self.target.abs() > 0.0 { self.target.abs() } else { 1.0 };
        Ok(self.residual(curve)? / scale)
    }
}

pub fn ois_instruments(q: &QuoteSet) -> Result<Vec<Instrument>, CalibrationError> {
    let system = assemble_ois_system(q)?;
    let sched = q.schedule();
    Ok((1..=q.len())
        .map(|i| {
            let row = &system.a[i - 1];
            let terms = (1..=sched.p(i)).map(|k| (sched.date(k), row[k - 1])).collect();
            Instrument {
                kind: InstrumentKind::Ois,
                maturity: q.maturity(i),
                quote: q.rate(i),
                terms,
                target: 1.0,
            }
        })
        .collect())
}

/// CDS pricing functionals in integrated-by-parts form:
///
/// ```text
/// S_i sum_{j<=p_i} delta_j P^D(t_j) Q(t_j) + (1-R) P^D(T_i) Q(T_i)
///     + (1-R) int_0^{T_i} f^D(t) P^D(t) Q(t) dt = 1 - R
/// ```
///
/// The integral uses `panels_per_period` 8-point Gauss-Legendre panels on
/// every premium period.
pub fn cds_instruments(
    q: &QuoteSet,
    disc: &DiscountCurveFn,
    panels_per_period: usize,
) -> Result<Vec<Instrument>, CalibrationError> {
    if q.kind() != QuoteKind::Cds {
        return Err(CalibrationError::WrongKind { expected: QuoteKind::Cds });
    }
    if panels_per_period == 0 {
        return Err(CalibrationError::InvalidConfig("at least one quadrature panel per period".into()));
    }
    let lgd = 1.0 - q.recovery().expect("CDS quotes carry a recovery rate");
    let sched = q.schedule();
    let mut out = Vec::with_capacity(q.len());
    for i in 1..=q.len() {
        let s = q.rate(i);
        let t_i = q.maturity(i);
        let mut terms = Vec::new();
        for j in 1..=sched.p(i) {
            let t = sched.date(j);
            terms.push((t, s * sched.accrual(j) * disc.discount(t)?));
        }
        terms.push((t_i, lgd * disc.discount(t_i)?));
        for j in 1..=sched.p(i) {
            let (lo, hi) = (sched.date(j - 1), sched.date(j));
            let width = (hi - lo) / panels_per_period as f64;
            for panel in 0..panels_per_period {
                let a = lo + panel as f64 * width;
                let b = if panel + 1 == panels_per_period { hi } else { a + width };
                for (x, w) in gauss_legendre_8_nodes(a, b) {
                    terms.push((x, lgd * w * disc.forward(x)? * disc.discount(x)?));
                }
            }
        }
        out.push(Instrument { kind: InstrumentKind::Cds, maturity: t_i, quote: s, terms, target: lgd });
    }
    Ok(out)
}
