use super::{ArbitrageReport, BoundValue, BoundsError, BoundsResult};
use crate::term_structures::{QuoteKind, QuoteSet};
use crate::tolerances::Tolerances;

fn require_ois(q: &QuoteSet) -> Result<(), BoundsError> {
    if q.kind() != QuoteKind::Ois {
        return Err(BoundsError::WrongKind { expected: QuoteKind::Ois });
    }
    Ok(())
}

/// `H_i`: accrual of the unquoted payment dates strictly between `T_{i-1}` and `T_i`.
fn gap_accrual(q: &QuoteSet, i: usize) -> f64 {
    let s = q.schedule();
    s.accrual_sum(s.p(i - 1) + 1, s.p(i) - 1)
}

/// `(S_i / S_{i-1}) (1 - P(T_{i-1}))`, i.e. `S_i` times the annuity up to `T_{i-1}`
/// of a curve that reprices instrument `i - 1`.
///
/// A zero `S_{i-1}` forces the curve to equal one up to `T_{i-1}`, so the
/// annuity is then the plain accrual sum.
fn carried_annuity(q: &QuoteSet, i: usize, p_prev: f64) -> f64 {
    if i == 1 {
        return 0.0;
    }
    let (s, s_prev) = (q.rate(i), q.rate(i - 1));
    if s_prev > 0.0 {
        s / s_prev * (1.0 - p_prev)
    } else {
        s * q.schedule().accrual_sum(1, q.schedule().p(i - 1))
    }
}

/// Discount factors `P(T_1), ..., P(T_{i0 - 1})` fixed by the quotes.
pub fn ois_exact_prefix(q: &QuoteSet) -> Result<Vec<f64>, BoundsError> {
    ois_exact_prefix_with(q, &Tolerances::default())
}

pub fn ois_exact_prefix_with(q: &QuoteSet, tol: &Tolerances) -> Result<Vec<f64>, BoundsError> {
    require_ois(q)?;
    let i0 = q.first_irregular_index();
    let mut out: Vec<f64> = Vec::with_capacity(i0.saturating_sub(1));
    for i in 1..i0 {
        let s = q.rate(i);
        let delta = q.schedule().accrual(i);
        let value = if i == 1 {
            1.0 / (1.0 + s * delta)
        } else {
            let s_prev = q.rate(i - 1);
            let p_prev = out[i - 2];
            if s_prev == 0.0 {
                if s > 0.0 {
                    return Err(BoundsError::DegenerateQuote { index: i });
                }
                p_prev
            } else {
                (1.0 - s / s_prev * (1.0 - p_prev)) / (1.0 + s * delta)
            }
        };
        if !(value > 0.0 && value <= 1.0 + tol.equality) {
            return Err(BoundsError::Arbitrage(ArbitrageReport {
                kind: QuoteKind::Ois,
                index: Some(i),
                maturity: Some(q.maturity(i)),
                rate: Some(s),
                threshold: None,
                detail: format!("implied discount factor {value} outside (0, 1]"),
            }));
        }
        out.push(value);
    }
    Ok(out)
}

/// Scans the quotes for the first index that admits no arbitrage-free curve.
///
/// On the exact prefix the test is `S_i < (1/S_{i-1} + delta_i P / (1 - P))^{-1}`
/// with `P = P(T_{i-1})`; beyond it `delta_i` becomes `H_i + delta_{p_i}` and
/// `P` becomes `P_max(T_{i-1})`.
pub fn ois_detect_arbitrage(q: &QuoteSet) -> Result<ArbitrageReport, BoundsError> {
    ois_detect_arbitrage_with(q, &Tolerances::default())
}

pub fn ois_detect_arbitrage_with(q: &QuoteSet, tol: &Tolerances) -> Result<ArbitrageReport, BoundsError> {
    require_ois(q)?;
    let i0 = q.first_irregular_index();
    let sched = q.schedule();
    // P(T_{i-1}) on the prefix, P_max(T_{i-1}) afterwards.
    let mut p_prev = 1.0;
    let mut annuity = 0.0;
    for i in 1..=q.len() {
        let s = q.rate(i);
        let width = if i < i0 { sched.accrual(i) } else { gap_accrual(q, i) + sched.accrual(sched.p(i)) };
        if i > 1 {
            let s_prev = q.rate(i - 1);
            let threshold = if s_prev == 0.0 || p_prev >= 1.0 {
                0.0
            } else {
                1.0 / (1.0 / s_prev + width * p_prev / (1.0 - p_prev))
            };
            if s < threshold - tol.arbitrage_slack {
                return Ok(ArbitrageReport {
                    kind: QuoteKind::Ois,
                    index: Some(i),
                    maturity: Some(q.maturity(i)),
                    rate: Some(s),
                    threshold: Some(threshold),
                    detail: format!("S_{i} = {s} is below the no-arbitrage threshold {threshold}"),
                });
            }
        }
        if i < i0 {
            // Forward substitution of row i; stays finite when earlier rates vanish.
            let p = (1.0 - s * annuity) / (1.0 + s * width);
            annuity += width * p;
            p_prev = p;
        } else {
            p_prev = (1.0 - carried_annuity(q, i, p_prev)) / (1.0 + s * width);
        }
    }
    Ok(ArbitrageReport::clean(QuoteKind::Ois))
}

/// Exact values before `i0` and sharp `[P_min, P_max]` intervals from `i0` on.
pub fn ois_model_free_bounds(q: &QuoteSet) -> Result<BoundsResult, BoundsError> {
    ois_model_free_bounds_with(q, &Tolerances::default())
}

pub fn ois_model_free_bounds_with(q: &QuoteSet, tol: &Tolerances) -> Result<BoundsResult, BoundsError> {
    require_ois(q)?;
    let report = ois_detect_arbitrage_with(q, tol)?;
    if !report.is_clean() {
        return Err(BoundsError::Arbitrage(report));
    }
    let prefix = ois_exact_prefix_with(q, tol)?;
    let (lower, upper) = recursive_bounds(q, &prefix, tol)?;
    let i0 = q.first_irregular_index();
    let values: Vec<BoundValue> = (1..=q.len())
        .map(|i| {
            if i < i0 {
                BoundValue::Exact { value: prefix[i - 1] }
            } else {
                BoundValue::Interval { min: lower[i - 1], max: upper[i - 1] }
            }
        })
        .collect();
    let maturities: Vec<f64> = (1..=q.len()).map(|i| q.maturity(i)).collect();
    let h = (1..=q.len()).map(|i| if i < i0 { 0.0 } else { gap_accrual(q, i) }).collect();
    Ok(BoundsResult {
        kind: QuoteKind::Ois,
        rectangles: BoundsResult::rectangles_from(&maturities, &values),
        maturities,
        values,
        h,
        m: Vec::new(),
        n: Vec::new(),
        clipped: Vec::new(),
    })
}

/// `(P_min(T_i), P_max(T_i))` for every `i`, equal on the prefix.
fn recursive_bounds(
    q: &QuoteSet,
    prefix: &[f64],
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<f64>), BoundsError> {
    let i0 = q.first_irregular_index();
    let sched = q.schedule();
    let mut lower = prefix.to_vec();
    let mut upper = prefix.to_vec();
    let (mut lo_prev, mut hi_prev) = (1.0, 1.0);
    if let Some(&p) = prefix.last() {
        lo_prev = p;
        hi_prev = p;
    }
    for i in i0..=q.len() {
        let s = q.rate(i);
        let h = gap_accrual(q, i);
        let delta = sched.accrual(sched.p(i));
        let (lo, hi) = if i == 1 {
            ((1.0 - s * h) / (1.0 + s * delta), 1.0 / (1.0 + s * (h + delta)))
        } else {
            let s_prev = q.rate(i - 1);
            if s_prev == 0.0 && s > 0.0 {
                return Err(BoundsError::DegenerateQuote { index: i });
            }
            let positivity = 1.0 - s_prev * h;
            if positivity <= 0.0 {
                return Err(BoundsError::PositivityViolated { index: i, value: positivity });
            }
            let ratio = if s_prev == 0.0 { 0.0 } else { s / s_prev };
            (
                (1.0 - ratio * (1.0 - positivity * lo_prev)) / (1.0 + s * delta),
                (1.0 - ratio * (1.0 - hi_prev)) / (1.0 + s * (h + delta)),
            )
        };
        if lo.is_nan() || lo <= 0.0 {
            return Err(BoundsError::PositivityViolated { index: i, value: lo });
        }
        if lo > hi + tol.equality {
            return Err(BoundsError::Arbitrage(ArbitrageReport {
                kind: QuoteKind::Ois,
                index: Some(i),
                maturity: Some(q.maturity(i)),
                rate: Some(s),
                threshold: None,
                detail: format!("P_min = {lo} exceeds P_max = {hi}"),
            }));
        }
        lower.push(lo);
        upper.push(hi);
        lo_prev = lo;
        hi_prev = hi;
    }
    Ok((lower, upper))
}

/// Step curves on the payment grid that attain the bounds at every maturity.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalCurves {
    pub dates: Vec<f64>,
    /// Equal to `P_min(T_{i-1})` on `[T_{i-1}, T_i)`.
    pub lower: Vec<f64>,
    /// Equal to `P_max(T_i)` on `(T_{i-1}, T_i]`.
    pub upper: Vec<f64>,
}

pub fn ois_extremal_curves(q: &QuoteSet) -> Result<ExtremalCurves, BoundsError> {
    let bounds = ois_model_free_bounds(q)?;
    let sched = q.schedule();
    let mut lower = Vec::with_capacity(sched.len());
    let mut upper = Vec::with_capacity(sched.len());
    let mut lo_prev = 1.0;
    for (i, v) in bounds.values.iter().enumerate() {
        let i = i + 1;
        for _ in sched.p(i - 1) + 1..sched.p(i) {
            lower.push(lo_prev);
            upper.push(v.upper());
        }
        lower.push(v.lower());
        upper.push(v.upper());
        lo_prev = v.lower();
    }
    Ok(ExtremalCurves { dates: sched.dates().to_vec(), lower, upper })
}
