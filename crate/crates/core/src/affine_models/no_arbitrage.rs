use serde::{Deserialize, Serialize};

use super::{CalibratedCurve, CurveError, ModelFamily};
use crate::levy::{phi, LevyDriver};

const BISECTION_ITERATIONS: usize = 200;
const STATIONARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `f(T_i) <= 0` at a knot.
    KnotForward,
    /// The forward has an interior stationary point with `f <= 0`.
    InteriorMinimum,
    /// A CIR level `b_i <= 0`.
    NonPositiveLevel,
    /// A CIR parameter (`X0`, `a`, `sigma`) is not positive.
    NonPositiveParameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// One-based knot interval `(T_{i-1}, T_i]`.
    pub interval: usize,
    /// Where the violation was detected.
    pub t_star: f64,
    /// Forward rate at `t_star` when it is meaningful.
    pub forward: Option<f64>,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Admissible,
    Violation(Violation),
}

impl Verdict {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Verdict::Admissible)
    }
}

/// Forward rate on `[T_{i-1}, T_i]` of a Lévy-OU curve written as a function
/// of `x = exp(-a (t - T_{i-1}))`:
///
/// ```text
/// K(x) = b_i + C x - c kappa(-(sigma / a)(1 - e x)),   e = exp(-a T_{i-1})
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KRepresentation {
    pub interval: usize,
    pub start: f64,
    pub end: f64,
    pub level: f64,
    /// `C = f(T_{i-1}) + c kappa(-sigma phi(T_{i-1})) - b_i`.
    pub linear: f64,
    pub discount: f64,
    pub a: f64,
    pub sigma: f64,
    pub c: f64,
    pub driver: LevyDriver,
}

impl KRepresentation {
    pub fn new(curve: &CalibratedCurve, interval: usize) -> Result<Self, CurveError> {
        let spec = curve.spec();
        let ModelFamily::LevyOu { driver, c } = spec.family else {
            return Err(CurveError::WrongFamily { expected: "levy-ou" });
        };
        if interval == 0 || interval > curve.levels().len() {
            return Err(CurveError::InvalidCurve(format!("no knot interval {interval}")));
        }
        let start = curve.knot(interval - 1);
        let level = curve.levels()[interval - 1];
        let f_start = curve.forward_rate(start)?;
        let jump = driver.cumulant(-spec.sigma * phi(spec.a, start))?;
        Ok(Self {
            interval,
            start,
            end: curve.knot(interval),
            level,
            linear: f_start + c * jump - level,
            discount: (-spec.a * start).exp(),
            a: spec.a,
            sigma: spec.sigma,
            c,
            driver,
        })
    }

    /// `x` at the right end of the interval.
    pub fn x_min(&self) -> f64 {
        (-self.a * (self.end - self.start)).exp()
    }

    pub fn x_of(&self, t: f64) -> f64 {
        (-self.a * (t - self.start)).exp()
    }

    pub fn t_of(&self, x: f64) -> f64 {
        self.start - x.ln() / self.a
    }

    fn theta(&self, x: f64) -> f64 {
        -(self.sigma / self.a) * (1.0 - self.discount * x)
    }

    pub fn value(&self, x: f64) -> Result<f64, CurveError> {
        Ok(self.level + self.linear * x - self.c * self.driver.cumulant(self.theta(x))?)
    }

    pub fn deriv(&self, x: f64) -> Result<f64, CurveError> {
        let slope = self.driver.cumulant_deriv(self.theta(x))?;
        Ok(self.linear - self.c * self.sigma / self.a * self.discount * slope)
    }

    /// `df/dt = K'(x) dx/dt = -a x K'(x)`.
    pub fn forward_deriv(&self, t: f64) -> Result<f64, CurveError> {
        let x = self.x_of(t);
        Ok(-self.a * x * self.deriv(x)?)
    }
}

/// Positivity of the forward curve of a Lévy-OU curve on `(0, T_n]`.
///
/// Each interval is checked at its right knot; when `df/dt` changes sign
/// inside the interval the stationary point is located by bisection on `K'`
/// and the forward is checked there as well.
pub fn verify_no_arbitrage_levy_ou(curve: &CalibratedCurve) -> Result<Verdict, CurveError> {
    for i in 1..=curve.levels().len() {
        if let Some(v) = check_interval_levy_ou(curve, i)? {
            return Ok(Verdict::Violation(v));
        }
    }
    Ok(Verdict::Admissible)
}

fn check_interval_levy_ou(curve: &CalibratedCurve, i: usize) -> Result<Option<Violation>, CurveError> {
    let k = KRepresentation::new(curve, i)?;
    let f_end = curve.forward_rate(k.end)?;
    if f_end <= 0.0 {
        return Ok(Some(Violation {
            interval: i,
            t_star: k.end,
            forward: Some(f_end),
            kind: ViolationKind::KnotForward,
        }));
    }
    let (x_lo, x_hi) = (k.x_min(), 1.0);
    let (d_lo, d_hi) = (k.deriv(x_lo)?, k.deriv(x_hi)?);
    if d_lo * d_hi >= 0.0 {
        return Ok(None);
    }
    let x_star = bisect_root(|x| k.deriv(x), x_lo, x_hi, d_lo)?;
    let f_star = k.value(x_star)?;
    log::debug!("interval {i}: stationary forward {f_star:e} at t = {}", k.t_of(x_star));
    if f_star <= 0.0 {
        return Ok(Some(Violation {
            interval: i,
            t_star: k.t_of(x_star),
            forward: Some(f_star),
            kind: ViolationKind::InteriorMinimum,
        }));
    }
    Ok(None)
}

fn bisect_root<F>(g: F, mut lo: f64, mut hi: f64, g_lo: f64) -> Result<f64, CurveError>
where
    F: Fn(f64) -> Result<f64, CurveError>,
{
    let lo_sign = g_lo.signum();
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..BISECTION_ITERATIONS {
        mid = 0.5 * (lo + hi);
        let v = g(mid)?;
        if v.abs() < STATIONARY_TOL {
            break;
        }
        if v.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Extended CIR: positive parameters and levels give a positive forward curve.
pub fn verify_no_arbitrage_cir(curve: &CalibratedCurve) -> Result<Verdict, CurveError> {
    for i in 1..=curve.levels().len() {
        if let Some(v) = check_interval_cir(curve, i)? {
            return Ok(Verdict::Violation(v));
        }
    }
    Ok(Verdict::Admissible)
}

fn check_interval_cir(curve: &CalibratedCurve, i: usize) -> Result<Option<Violation>, CurveError> {
    let spec = curve.spec();
    if !matches!(spec.family, ModelFamily::ExtendedCir) {
        return Err(CurveError::WrongFamily { expected: "cir" });
    }
    if !(spec.x0 > 0.0 && spec.a > 0.0 && spec.sigma > 0.0) {
        return Ok(Some(Violation {
            interval: 1,
            t_star: 0.0,
            forward: None,
            kind: ViolationKind::NonPositiveParameter,
        }));
    }
    if curve.levels()[i - 1] <= 0.0 {
        return Ok(Some(Violation {
            interval: i,
            t_star: curve.knot(i - 1),
            forward: None,
            kind: ViolationKind::NonPositiveLevel,
        }));
    }
    Ok(None)
}

pub fn verify_no_arbitrage(curve: &CalibratedCurve) -> Result<Verdict, CurveError> {
    match curve.spec().family {
        ModelFamily::LevyOu { .. } => verify_no_arbitrage_levy_ou(curve),
        ModelFamily::ExtendedCir => verify_no_arbitrage_cir(curve),
    }
}

/// Checks only the knot interval `(T_{i-1}, T_i]`; used to stop a bootstrap early.
pub fn verify_interval(curve: &CalibratedCurve, i: usize) -> Result<Option<Violation>, CurveError> {
    match curve.spec().family {
        ModelFamily::LevyOu { .. } => check_interval_levy_ou(curve, i),
        ModelFamily::ExtendedCir => check_interval_cir(curve, i),
    }
}
