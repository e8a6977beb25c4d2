//! Market-fit systems and the sequential bootstrap of piecewise-constant
//! mean-reversion levels.

mod mix;
mod system;

pub use mix::{convex_mix, ConvexMix, SampledCurve};
pub use system::{
    assemble_cds_system, assemble_ois_system, cds_instruments, ois_instruments, Instrument, InstrumentKind,
    MarketFitSystem,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine_models::{verify_interval, CalibratedCurve, CurveError, ModelSpec, Verdict, Violation};
use crate::term_structures::{DiscountCurveFn, QuoteKind, QuoteSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("expected {expected:?} quotes")]
    WrongKind { expected: QuoteKind },
    #[error(
        "no level reprices instrument {index}: residual {residual_lo:e} at b = {lo}, {residual_hi:e} at b = {hi}"
    )]
    NoSolution { index: usize, lo: f64, hi: f64, residual_lo: f64, residual_hi: f64 },
    #[error("root search for instrument {index} stopped at residual {residual:e}")]
    NotConverged { index: usize, residual: f64 },
    #[error("level {index} makes the curve inadmissible near t = {t_star}")]
    Inadmissible { index: usize, t_star: f64, violation: Violation },
    #[error("instrument maturities must be strictly increasing ({0})")]
    Unordered(String),
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("curves cannot be mixed: {0}")]
    Mix(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    /// Absolute tolerance on each instrument's PV residual.
    pub residual_tolerance: f64,
    /// Initial search interval, as offsets from the previous level.
    pub bracket: (f64, f64),
    /// Largest offset the bracket may expand to.
    pub bracket_limit: f64,
    pub max_iterations: usize,
    /// Stop at the first level that produces a negative forward curve.
    pub enforce_no_arbitrage: bool,
    /// Gauss-Legendre panels per premium period for CDS protection legs.
    pub panels_per_period: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            residual_tolerance: 1e-12,
            bracket: (-1.0, 5.0),
            bracket_limit: 50.0,
            max_iterations: 200,
            enforce_no_arbitrage: true,
            panels_per_period: 1,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        let (lo, hi) = self.bracket;
        let ok = self.residual_tolerance > 0.0
            && lo < hi
            && self.bracket_limit >= lo.abs().max(hi.abs())
            && self.max_iterations > 0
            && self.panels_per_period > 0;
        if ok {
            Ok(())
        } else {
            Err(CalibrationError::InvalidConfig(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentReport {
    pub kind: InstrumentKind,
    pub maturity: f64,
    pub quote: f64,
    pub implied_level: f64,
    /// PV residual divided by the instrument target.
    pub repricing_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub model: ModelSpec,
    pub instruments: Vec<InstrumentReport>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub curve: CalibratedCurve,
    pub report: CalibrationReport,
}

impl Calibration {
    pub fn max_repricing_error(&self) -> f64 {
        self.report.instruments.iter().map(|r| r.repricing_error.abs()).fold(0.0, f64::max)
    }
}

pub fn calibrate_ois(
    q: &QuoteSet,
    spec: &ModelSpec,
    cfg: &BootstrapConfig,
) -> Result<Calibration, CalibrationError> {
    bootstrap(&ois_instruments(q)?, spec, cfg)
}

pub fn calibrate_cds(
    q: &QuoteSet,
    disc: &DiscountCurveFn,
    spec: &ModelSpec,
    cfg: &BootstrapConfig,
) -> Result<Calibration, CalibrationError> {
    bootstrap(&cds_instruments(q, disc, cfg.panels_per_period)?, spec, cfg)
}

/// Merges exact-value constraints into an instrument list, ordered by maturity.
pub fn with_constraints(
    mut instruments: Vec<Instrument>,
    constraints: &[Instrument],
) -> Result<Vec<Instrument>, CalibrationError> {
    instruments.extend(constraints.iter().cloned());
    instruments.sort_by(|a, b| a.maturity.total_cmp(&b.maturity));
    check_ordered(&instruments)?;
    Ok(instruments)
}

fn check_ordered(instruments: &[Instrument]) -> Result<(), CalibrationError> {
    let mut prev = 0.0;
    for inst in instruments {
        if inst.maturity.is_nan() || inst.maturity <= prev {
            return Err(CalibrationError::Unordered(format!("{} follows {prev}", inst.maturity)));
        }
        if inst.terms.iter().any(|&(t, _)| t < 0.0 || t > inst.maturity) {
            return Err(CalibrationError::Unordered(format!(
                "instrument at {} prices beyond its maturity",
                inst.maturity
            )));
        }
        prev = inst.maturity;
    }
    Ok(())
}

/// Node of one pricing functional with the exponent split into the part fixed
/// by earlier levels and the exposure to the level being solved.
struct Node {
    coeff: f64,
    fixed: f64,
    exposure: f64,
}

fn residual_at(nodes: &[Node], target: f64, level: f64) -> f64 {
    nodes.iter().map(|n| n.coeff * (-(n.fixed + level * n.exposure)).exp()).sum::<f64>() - target
}

/// Solves the instruments one at a time for the level on `(T_{k-1}, T_k]`,
/// with every earlier level frozen. Each instrument's maturity becomes a knot.
pub fn bootstrap(
    instruments: &[Instrument],
    spec: &ModelSpec,
    cfg: &BootstrapConfig,
) -> Result<Calibration, CalibrationError> {
    spec.validate()?;
    cfg.validate()?;
    check_ordered(instruments)?;
    if instruments.is_empty() {
        return Err(CalibrationError::InvalidConfig("no instruments".into()));
    }
    let knots: Vec<f64> = instruments.iter().map(|i| i.maturity).collect();
    let knot = |k: usize| if k == 0 { 0.0 } else { knots[k - 1] };
    let mut levels: Vec<f64> = Vec::with_capacity(knots.len());

    for (idx, inst) in instruments.iter().enumerate() {
        let k = idx + 1;
        let mut nodes = Vec::with_capacity(inst.terms.len());
        let mut mixed_signs = false;
        for &(t, coeff) in &inst.terms {
            let mut fixed = spec.base_exponent(t)?;
            for (j, &b) in levels.iter().enumerate() {
                fixed += b * (spec.level_integral(t - knot(j)) - spec.level_integral(t - knot(j + 1)));
            }
            let exposure = spec.level_integral(t - knot(k - 1));
            mixed_signs |= coeff < 0.0 && exposure > 0.0;
            nodes.push(Node { coeff, fixed, exposure });
        }
        if mixed_signs {
            log::debug!("instrument {k}: residual not guaranteed monotone in the level");
        }
        let f = |b: f64| residual_at(&nodes, inst.target, b);
        let center = levels.last().copied().unwrap_or(spec.x0);
        let level = solve_level(k, &f, center, cfg)?;
        levels.push(level);

        if cfg.enforce_no_arbitrage {
            let partial = CalibratedCurve::new(*spec, knots[..k].to_vec(), levels.clone())?;
            if let Some(v) = verify_interval(&partial, k)? {
                return Err(CalibrationError::Inadmissible { index: k, t_star: v.t_star, violation: v });
            }
        }
    }

    let curve = CalibratedCurve::new(*spec, knots, levels)?;
    let verdict = crate::affine_models::verify_no_arbitrage(&curve)?;
    let mut reports = Vec::with_capacity(instruments.len());
    for (inst, &level) in instruments.iter().zip(curve.levels()) {
        reports.push(InstrumentReport {
            kind: inst.kind,
            maturity: inst.maturity,
            quote: inst.quote,
            implied_level: level,
            repricing_error: inst.relative_error(|t| curve.value(t))?,
        });
    }
    Ok(Calibration { report: CalibrationReport { model: *spec, instruments: reports, verdict }, curve })
}

/// Bracket around `center`, then bisection accelerated by Illinois
/// regula-falsi steps whenever they stay inside the bracket.
fn solve_level<F: Fn(f64) -> f64>(
    index: usize,
    f: &F,
    center: f64,
    cfg: &BootstrapConfig,
) -> Result<f64, CalibrationError> {
    let (mut off_lo, mut off_hi) = cfg.bracket;
    let (mut lo, mut hi) = (center + off_lo, center + off_hi);
    let (mut f_lo, mut f_hi) = (f(lo), f(hi));
    while f_lo.signum() == f_hi.signum() && f_lo != 0.0 && f_hi != 0.0 {
        if off_lo <= -cfg.bracket_limit && off_hi >= cfg.bracket_limit {
            return Err(CalibrationError::NoSolution { index, lo, hi, residual_lo: f_lo, residual_hi: f_hi });
        }
        off_lo = (2.0 * off_lo).max(-cfg.bracket_limit);
        off_hi = (2.0 * off_hi).min(cfg.bracket_limit);
        lo = center + off_lo;
        hi = center + off_hi;
        f_lo = f(lo);
        f_hi = f(hi);
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }

    let tol = cfg.residual_tolerance;
    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    // side of the last accepted secant step, for the Illinois weight
    let mut last_side = 0i8;
    for iter in 0..cfg.max_iterations {
        let secant = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let use_secant = iter % 3 != 2 && secant.is_finite() && secant > lo && secant < hi;
        let x = if use_secant { secant } else { 0.5 * (lo + hi) };
        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
            if use_secant && last_side == -1 {
                f_hi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if use_secant && last_side == 1 {
                f_lo *= 0.5;
            }
            last_side = 1;
        }
        if hi - lo <= f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
    }
    if best.1.abs() <= tol {
        Ok(best.0)
    } else {
        Err(CalibrationError::NotConverged { index, residual: best.1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::LevyDriver;
    use approx::assert_relative_eq;

    fn gamma_spec(c: f64) -> ModelSpec {
        ModelSpec::levy_ou(LevyDriver::gamma(200.0).unwrap(), c, 0.00063, 0.01, 1.0).unwrap()
    }

    #[test]
    fn single_ois_instrument_recovers_closed_form() {
        let q = QuoteSet::ois_annual(&[1.0], &[0.01]).unwrap();
        let cir = ModelSpec::extended_cir(0.01, 1.0, 0.2).unwrap();
        for spec in [gamma_spec(10.0), cir] {
            let cfg = BootstrapConfig { enforce_no_arbitrage: false, ..Default::default() };
            let cal = calibrate_ois(&q, &spec, &cfg).unwrap();
            assert_relative_eq!(cal.curve.value(1.0).unwrap(), 1.0 / 1.01, epsilon = 1e-10);
        }
    }

    #[test]
    fn locality_of_perturbations() {
        let t = [1.0, 2.0, 3.0, 5.0];
        let rates = [0.002, 0.004, 0.006, 0.009];
        let q = QuoteSet::ois_annual(&t, &rates).unwrap();
        let spec = gamma_spec(10.0);
        let cfg = BootstrapConfig::default();
        let base = calibrate_ois(&q, &spec, &cfg).unwrap();
        let bumped = calibrate_ois(&q.with_rate(3, 0.0065).unwrap(), &spec, &cfg).unwrap();
        assert_eq!(&base.curve.levels()[..2], &bumped.curve.levels()[..2]);
        assert_ne!(base.curve.levels()[2], bumped.curve.levels()[2]);
        let again = calibrate_ois(&q, &spec, &cfg).unwrap();
        assert_eq!(base.curve.levels(), again.curve.levels());
    }

    #[test]
    fn no_solution_is_reported_with_endpoints() {
        // A 100% one-year rate needs a level far outside the bracket.
        let q = QuoteSet::ois_annual(&[1.0], &[1.0]).unwrap();
        let err = calibrate_ois(&q, &gamma_spec(1.0), &BootstrapConfig::default()).unwrap_err();
        match err {
            CalibrationError::NoSolution { index, residual_lo, residual_hi, .. } => {
                assert_eq!(index, 1);
                assert_eq!(residual_lo.signum(), residual_hi.signum());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inadmissible_step_stops_the_bootstrap() {
        // Sharply falling CIR credit spreads need a negative level.
        let q = QuoteSet::cds_uniform(&[1.0, 2.0], &[0.03, 0.001], 4, 0.4).unwrap();
        let spec = ModelSpec::extended_cir(0.03, 1.0, 1.0).unwrap();
        let err =
            calibrate_cds(&q, &DiscountCurveFn::flat(0.03), &spec, &BootstrapConfig::default()).unwrap_err();
        assert!(matches!(err, CalibrationError::Inadmissible { index: 2, .. }), "{err:?}");
        let cfg = BootstrapConfig { enforce_no_arbitrage: false, ..Default::default() };
        let cal = calibrate_cds(&q, &DiscountCurveFn::flat(0.03), &spec, &cfg).unwrap();
        assert!(!cal.report.verdict.is_admissible());
    }

    #[test]
    fn constraint_inserts_a_knot() {
        let q = QuoteSet::ois_annual(&[1.0, 2.0, 5.0], &[0.002, 0.004, 0.009]).unwrap();
        let spec = gamma_spec(10.0);
        let free = calibrate_ois(&q, &spec, &BootstrapConfig::default()).unwrap();
        let target = free.curve.value(3.5).unwrap() - 0.002;
        let inst =
            with_constraints(ois_instruments(&q).unwrap(), &[Instrument::constraint(3.5, target).unwrap()])
                .unwrap();
        let cal = bootstrap(&inst, &spec, &BootstrapConfig::default()).unwrap();
        assert_eq!(cal.curve.knots(), &[1.0, 2.0, 3.5, 5.0]);
        assert!((cal.curve.value(3.5).unwrap() - target).abs() < 1e-12);
        assert!(cal.max_repricing_error() < 1e-10);
    }

    #[test]
    fn unordered_instruments_rejected() {
        let q = QuoteSet::ois_annual(&[1.0, 2.0], &[0.002, 0.004]).unwrap();
        let dup =
            with_constraints(ois_instruments(&q).unwrap(), &[Instrument::constraint(2.0, 0.99).unwrap()]);
        assert!(matches!(dup, Err(CalibrationError::Unordered(_))));
    }

    #[test]
    fn config_validation() {
        let bad = BootstrapConfig { bracket: (1.0, -1.0), ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(BootstrapConfig::default().validate().is_ok());
    }
}
