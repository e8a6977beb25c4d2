//! Quotes, payment schedules and evaluable discount curves.
//!
//! Time is measured in year fractions from the quotation date, which is
//! always `0.0`. Grid indices follow the usual market convention: payment
//! dates are numbered `t_1 < t_2 < ... < t_{p_n}` starting at one, and
//! `t_0 = 0` is the quotation date itself. [`PaymentSchedule`] keeps that
//! one-based numbering so the bounds recursions read like their formulas.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine_models::{CalibratedCurve, CurveError};

const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TermStructureError {
    #[error("tenor must be a finite non-negative year fraction, got {0}")]
    InvalidTenor(f64),
    #[error("maturities must be non-empty and strictly increasing")]
    NotIncreasing,
    #[error("maturity {0} is not an integer number of years")]
    NonIntegerYear(f64),
    #[error("maturity {maturity} is not a multiple of 1/{frequency}")]
    MisalignedMaturity { maturity: f64, frequency: u32 },
    #[error("payment frequency must be positive")]
    ZeroFrequency,
    #[error("invalid payment schedule: {0}")]
    InvalidSchedule(String),
    #[error("expected {expected} quotes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("quote {index} is negative or not finite: {value}")]
    InvalidRate { index: usize, value: f64 },
    #[error("recovery rate must lie in [0, 1), got {0}")]
    InvalidRecovery(f64),
    #[error("maturity {maturity} does not coincide with schedule date {date}")]
    ScheduleMismatch { maturity: f64, date: f64 },
}

/// A point in time, in years from the quotation date.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Tenor(f64);

impl Tenor {
    pub fn new(years: f64) -> Result<Self, TermStructureError> {
        if years.is_finite() && years >= 0.0 {
            Ok(Self(years))
        } else {
            Err(TermStructureError::InvalidTenor(years))
        }
    }

    pub fn years(self) -> f64 {
        self.0
    }

    /// Builds a list of tenors, failing on the first invalid value.
    pub fn list(years: &[f64]) -> Result<Vec<Tenor>, TermStructureError> {
        years.iter().map(|&y| Tenor::new(y)).collect()
    }
}

impl TryFrom<f64> for Tenor {
    type Error = TermStructureError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Tenor::new(value)
    }
}

impl From<Tenor> for f64 {
    fn from(t: Tenor) -> f64 {
        t.0
    }
}

/// Payment grid `t_1 < ... < t_{p_n}` with accruals and the positions `p_i`
/// of the quoted maturities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaymentSchedule {
    dates: Vec<f64>,
    accruals: Vec<f64>,
    standard_indices: Vec<usize>,
}

impl PaymentSchedule {
    /// Validating constructor. `standard_indices` are one-based grid indices.
    pub fn new(
        dates: Vec<f64>,
        accruals: Vec<f64>,
        standard_indices: Vec<usize>,
    ) -> Result<Self, TermStructureError> {
        let bad = |msg: &str| Err(TermStructureError::InvalidSchedule(msg.to_string()));
        if dates.is_empty() {
            return bad("no payment dates");
        }
        if dates.iter().any(|d| !d.is_finite()) || dates[0] <= 0.0 {
            return bad("first payment date must be strictly after the quotation date");
        }
        if dates.windows(2).any(|w| w[1] <= w[0]) {
            return bad("payment dates must be strictly increasing");
        }
        if accruals.len() != dates.len() {
            return bad("one accrual per payment date is required");
        }
        if accruals.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return bad("accruals must be positive");
        }
        if standard_indices.is_empty()
            || standard_indices[0] == 0
            || standard_indices.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("standard indices must be one-based and strictly increasing");
        }
        if *standard_indices.last().unwrap() != dates.len() {
            return bad("the last standard index must be the last payment date");
        }
        Ok(Self { dates, accruals, standard_indices })
    }

    /// Schedule on explicit dates with the default day count
    /// `delta_k = t_k - t_{k-1}`. Every maturity must be one of the dates.
    pub fn from_dates(dates: Vec<f64>, maturities: &[Tenor]) -> Result<Self, TermStructureError> {
        let mut prev = 0.0;
        let accruals = dates
            .iter()
            .map(|&d| {
                let a = d - prev;
                prev = d;
                a
            })
            .collect();
        let mut indices = Vec::with_capacity(maturities.len());
        for m in maturities {
            let pos = dates.iter().position(|&d| (d - m.years()).abs() <= GRID_EPS).ok_or(
                TermStructureError::InvalidSchedule(format!("maturity {} is not a payment date", m.years())),
            )?;
            indices.push(pos + 1);
        }
        Self::new(dates, accruals, indices)
    }

    /// Number of payment dates `p_n`.
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[f64] {
        &self.dates
    }

    pub fn accruals(&self) -> &[f64] {
        &self.accruals
    }

    /// One-based grid indices `p_1 < ... < p_n`.
    pub fn standard_indices(&self) -> &[usize] {
        &self.standard_indices
    }

    /// `t_k` for one-based `k`; `t_0` is the quotation date.
    pub fn date(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.dates[k - 1]
        }
    }

    /// `delta_k` for one-based `k >= 1`.
    pub fn accrual(&self, k: usize) -> f64 {
        self.accruals[k - 1]
    }

    /// `p_i` for one-based `i`, with `p_0 = 0`.
    pub fn p(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.standard_indices[i - 1]
        }
    }

    /// Sum of accruals over the one-based inclusive index range.
    pub fn accrual_sum(&self, from: usize, to: usize) -> f64 {
        if from > to {
            return 0.0;
        }
        (from..=to).map(|k| self.accrual(k)).sum()
    }
}

/// Annual OIS fixed-leg grid up to the last maturity, `delta_k = 1`.
pub fn build_ois_schedule(maturities: &[Tenor]) -> Result<PaymentSchedule, TermStructureError> {
    check_increasing(maturities)?;
    let mut years = Vec::with_capacity(maturities.len());
    for m in maturities {
        let y = m.years();
        let rounded = y.round();
        if (y - rounded).abs() > GRID_EPS || rounded < 1.0 {
            return Err(TermStructureError::NonIntegerYear(y));
        }
        years.push(rounded as usize);
    }
    let last = *years.last().unwrap();
    let dates = (1..=last).map(|k| k as f64).collect();
    PaymentSchedule::new(dates, vec![1.0; last], years)
}

/// Uniform premium grid with step `1/frequency` up to the last maturity.
pub fn build_cds_schedule(
    maturities: &[Tenor],
    frequency: u32,
) -> Result<PaymentSchedule, TermStructureError> {
    if frequency == 0 {
        return Err(TermStructureError::ZeroFrequency);
    }
    check_increasing(maturities)?;
    let freq = f64::from(frequency);
    let mut indices = Vec::with_capacity(maturities.len());
    for m in maturities {
        let steps = m.years() * freq;
        let rounded = steps.round();
        if (steps - rounded).abs() > GRID_EPS * freq.max(1.0) || rounded < 1.0 {
            return Err(TermStructureError::MisalignedMaturity { maturity: m.years(), frequency });
        }
        indices.push(rounded as usize);
    }
    let last = *indices.last().unwrap();
    let mut dates: Vec<f64> = (1..=last).map(|k| k as f64 / freq).collect();
    // pin standard dates to the quoted maturities so t_{p_i} == T_i exactly
    for (m, &p) in maturities.iter().zip(&indices) {
        dates[p - 1] = m.years();
    }
    PaymentSchedule::new(dates, vec![1.0 / freq; last], indices)
}

fn check_increasing(maturities: &[Tenor]) -> Result<(), TermStructureError> {
    if maturities.is_empty()
        || maturities[0].years() <= 0.0
        || maturities.windows(2).any(|w| w[1].years() <= w[0].years())
    {
        return Err(TermStructureError::NotIncreasing);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuoteKind {
    Ois,
    Cds,
}

/// Market quotes for one curve: par OIS rates or CDS fair spreads, stored as
/// pure decimals (`0.0720%` is `0.000720`, `58bp` is `0.0058`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteSet {
    kind: QuoteKind,
    maturities: Vec<Tenor>,
    rates: Vec<f64>,
    schedule: PaymentSchedule,
    recovery: Option<f64>,
}

impl QuoteSet {
    pub fn ois(
        maturities: Vec<Tenor>,
        rates: Vec<f64>,
        schedule: PaymentSchedule,
    ) -> Result<Self, TermStructureError> {
        Self::validated(QuoteKind::Ois, maturities, rates, schedule, None)
    }

    pub fn cds(
        maturities: Vec<Tenor>,
        spreads: Vec<f64>,
        schedule: PaymentSchedule,
        recovery: f64,
    ) -> Result<Self, TermStructureError> {
        if !(0.0..1.0).contains(&recovery) {
            return Err(TermStructureError::InvalidRecovery(recovery));
        }
        Self::validated(QuoteKind::Cds, maturities, spreads, schedule, Some(recovery))
    }

    /// OIS quotes on the default annual schedule.
    pub fn ois_annual(maturities: &[f64], rates: &[f64]) -> Result<Self, TermStructureError> {
        let tenors = Tenor::list(maturities)?;
        let schedule = build_ois_schedule(&tenors)?;
        Self::ois(tenors, rates.to_vec(), schedule)
    }

    /// CDS quotes on a uniform premium schedule.
    pub fn cds_uniform(
        maturities: &[f64],
        spreads: &[f64],
        frequency: u32,
        recovery: f64,
    ) -> Result<Self, TermStructureError> {
        let tenors = Tenor::list(maturities)?;
        let schedule = build_cds_schedule(&tenors, frequency)?;
        Self::cds(tenors, spreads.to_vec(), schedule, recovery)
    }

    fn validated(
        kind: QuoteKind,
        maturities: Vec<Tenor>,
        rates: Vec<f64>,
        schedule: PaymentSchedule,
        recovery: Option<f64>,
    ) -> Result<Self, TermStructureError> {
        check_increasing(&maturities)?;
        if rates.len() != maturities.len() {
            return Err(TermStructureError::LengthMismatch { expected: maturities.len(), got: rates.len() });
        }
        if let Some((index, &value)) = rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r >= 0.0))
        {
            return Err(TermStructureError::InvalidRate { index: index + 1, value });
        }
        if schedule.standard_indices().len() != maturities.len() {
            return Err(TermStructureError::LengthMismatch {
                expected: maturities.len(),
                got: schedule.standard_indices().len(),
            });
        }
        for (i, m) in maturities.iter().enumerate() {
            let date = schedule.date(schedule.p(i + 1));
            if (date - m.years()).abs() > GRID_EPS {
                return Err(TermStructureError::ScheduleMismatch { maturity: m.years(), date });
            }
        }
        Ok(Self { kind, maturities, rates, schedule, recovery })
    }

    pub fn kind(&self) -> QuoteKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn maturities(&self) -> &[Tenor] {
        &self.maturities
    }

    /// `T_i` for one-based `i`, with `T_0 = 0`.
    pub fn maturity(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.maturities[i - 1].years()
        }
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// `S_i` for one-based `i`.
    pub fn rate(&self, i: usize) -> f64 {
        self.rates[i - 1]
    }

    pub fn schedule(&self) -> &PaymentSchedule {
        &self.schedule
    }

    pub fn recovery(&self) -> Option<f64> {
        self.recovery
    }

    /// Smallest one-based `i` with `p_i != i`, or `n + 1` when every quoted
    /// maturity is itself the next payment date.
    pub fn first_irregular_index(&self) -> usize {
        (1..=self.len()).find(|&i| self.schedule.p(i) != i).unwrap_or(self.len() + 1)
    }

    /// Same quotes with one rate replaced; used for stress tests and sweeps.
    pub fn with_rate(&self, i: usize, rate: f64) -> Result<Self, TermStructureError> {
        let mut rates = self.rates.clone();
        rates[i - 1] = rate;
        Self::validated(self.kind, self.maturities.clone(), rates, self.schedule.clone(), self.recovery)
    }

    /// Same CDS quotes under a different recovery assumption.
    pub fn with_recovery(&self, recovery: f64) -> Result<Self, TermStructureError> {
        Self::cds(self.maturities.clone(), self.rates.clone(), self.schedule.clone(), recovery)
    }
}

/// Continuously compounded flat curve `P(t) = exp(-r t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatRate {
    pub rate: f64,
}

/// Discount curve used to value CDS legs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DiscountCurveFn {
    Flat(FlatRate),
    Calibrated(CalibratedCurve),
}

impl DiscountCurveFn {
    pub fn flat(rate: f64) -> Self {
        DiscountCurveFn::Flat(FlatRate { rate })
    }

    /// `P^D(0, t)`.
    pub fn discount(&self, t: f64) -> Result<f64, CurveError> {
        match self {
            DiscountCurveFn::Flat(f) => {
                if t < 0.0 {
                    return Err(CurveError::OutOfDomain { t, max: f64::INFINITY });
                }
                Ok((-f.rate * t).exp())
            }
            DiscountCurveFn::Calibrated(c) => c.value(t),
        }
    }

    /// Instantaneous forward `f^D(0, t)`.
    pub fn forward(&self, t: f64) -> Result<f64, CurveError> {
        match self {
            DiscountCurveFn::Flat(f) => {
                if t < 0.0 {
                    return Err(CurveError::OutOfDomain { t, max: f64::INFINITY });
                }
                Ok(f.rate)
            }
            DiscountCurveFn::Calibrated(c) => c.forward_rate(t),
        }
    }

    /// Checks `P(0) = 1` and that `P` does not increase on the sample grid.
    pub fn is_valid_on(&self, grid: &[f64]) -> Result<bool, CurveError> {
        if (self.discount(0.0)? - 1.0).abs() > 1e-15 {
            return Ok(false);
        }
        let mut prev = 1.0;
        for &t in grid {
            let v = self.discount(t)?;
            if v.is_nan() || v <= 0.0 || v > prev + 1e-15 {
                return Ok(false);
            }
            prev = v;
        }
        Ok(true)
    }
}
