use std::path::Path;

use admcurve::bounds::{
    cds_model_free_bounds_with, ois_detect_arbitrage_with, ois_extremal_curves, ois_model_free_bounds_with,
};
use admcurve::calibration::{
    bootstrap, cds_instruments, ois_instruments, with_constraints, ConvexMix, Instrument,
};
use admcurve::{
    ArbitrageReport, BootstrapConfig, BoundsResult, CalibratedCurve, Calibration, DiscountCurveFn,
    LevyDriver, ModelSpec, QuoteKind, QuoteSet, Tolerances,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::input;
use crate::output::{self, fmt, Output, BOUNDS_HEADER, RECTANGLES_HEADER};
use crate::{CreditArgs, DriverKind, Kind, ModelArgs, ModelKind, SolverArgs, SweepParam};

fn tolerances() -> Result<Tolerances, CliError> {
    Tolerances::from_env().map_err(|e| CliError::Input(e.to_string()))
}

fn check_step(step: f64) -> Result<(), CliError> {
    if step.is_finite() && step > 0.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!("--step must be positive, got {step}")))
    }
}

/// Quotes plus, for CDS, the discount curve used to value them.
struct Market {
    quotes: QuoteSet,
    disc: Option<DiscountCurveFn>,
}

fn load_market(path: &Path, kind: Kind, credit: &CreditArgs) -> Result<Market, CliError> {
    match kind {
        Kind::Ois => Ok(Market { quotes: input::read_ois(path)?, disc: None }),
        Kind::Cds => {
            let recovery =
                credit.recovery.ok_or_else(|| CliError::Input("CDS quotes need --recovery".into()))?;
            let quotes = input::read_cds(path, credit.frequency, recovery)?;
            let disc = match (&credit.flat_rate, &credit.discount_curve) {
                (Some(r), None) if r.is_finite() => DiscountCurveFn::flat(*r),
                (None, Some(file)) => input::read_discount_curve(file)?,
                _ => {
                    return Err(CliError::Input(
                        "CDS quotes need a finite --flat-rate or a --discount-curve".into(),
                    ))
                }
            };
            let horizon = quotes.maturity(quotes.len());
            if !disc.is_valid_on(quotes.schedule().dates())? || disc.discount(horizon).is_err() {
                return Err(CliError::Input(
                    "discount curve is not a valid curve on the premium grid".into(),
                ));
            }
            Ok(Market { quotes, disc: Some(disc) })
        }
    }
}

fn bounds_for(m: &Market, tol: &Tolerances) -> Result<BoundsResult, CliError> {
    Ok(match &m.disc {
        None => ois_model_free_bounds_with(&m.quotes, tol)?,
        Some(d) => cds_model_free_bounds_with(&m.quotes, d, tol)?,
    })
}

fn write_bounds(out: &Output, b: &BoundsResult) -> Result<(), CliError> {
    out.csv("bounds.csv", &BOUNDS_HEADER, &output::bounds_rows(b))?;
    out.csv("rectangles.csv", &RECTANGLES_HEADER, &output::rectangle_rows(b))?;
    out.json("bounds.json", b)?;
    Ok(())
}

pub fn ois_bounds(path: &Path, out_dir: &Path, step: f64) -> Result<(), CliError> {
    check_step(step)?;
    let tol = tolerances()?;
    let q = input::read_ois(path)?;
    let b = ois_model_free_bounds_with(&q, &tol)?;
    let out = Output::create(out_dir)?;
    write_bounds(&out, &b)?;

    let ext = ois_extremal_curves(&q)?;
    let rows: Vec<Vec<String>> = ext
        .dates
        .iter()
        .zip(ext.lower.iter().zip(&ext.upper))
        .map(|(t, (lo, hi))| vec![fmt(*t), fmt(*lo), fmt(*hi)])
        .collect();
    out.csv("extremal.csv", &["t", "lower", "upper"], &rows)?;

    // Envelope of discount factors and spot rates between the maturities.
    let mut rows = Vec::new();
    for t in output::sample_grid(step, q.maturity(q.len())) {
        if let Some((lo, hi)) = b.envelope(t) {
            let (spot_lo, spot_hi) = if t > 0.0 { (-hi.ln() / t, -lo.ln() / t) } else { (0.0, 0.0) };
            rows.push(vec![fmt(t), fmt(lo), fmt(hi), fmt(spot_lo), fmt(spot_hi)]);
        }
    }
    out.csv("envelope.csv", &["t", "lower", "upper", "spot_lower", "spot_upper"], &rows)?;
    Ok(())
}

pub fn cds_bounds(path: &Path, credit: &CreditArgs, out_dir: &Path) -> Result<(), CliError> {
    let tol = tolerances()?;
    let market = load_market(path, Kind::Cds, credit)?;
    let b = bounds_for(&market, &tol)?;
    if !b.clipped.is_empty() {
        log::warn!("bounds clipped to [0, 1] at indices {:?}", b.clipped);
    }
    write_bounds(&Output::create(out_dir)?, &b)
}

pub fn detect_arb(
    path: &Path,
    kind: Kind,
    credit: &CreditArgs,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let tol = tolerances()?;
    let market = load_market(path, kind, credit)?;
    let report = match kind {
        Kind::Ois => ois_detect_arbitrage_with(&market.quotes, &tol)?,
        Kind::Cds => match bounds_for(&market, &tol) {
            Ok(_) => ArbitrageReport::clean(QuoteKind::Cds),
            Err(CliError::Arbitrage(r)) => r,
            Err(e) => return Err(e),
        },
    };
    if let Some(dir) = out_dir {
        Output::create(dir)?.json("arbitrage.json", &report)?;
    }
    print!("{}", output::to_json(&report)?);
    if report.is_clean() {
        Ok(())
    } else {
        Err(CliError::Arbitrage(report))
    }
}

fn model_spec(m: &ModelArgs, tol: &Tolerances, solver: &SolverArgs) -> Result<ModelSpec, CliError> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::Input(format!("--{name} is required")));
    let (x0, a, sigma) = (need(m.x0, "x0")?, need(m.a, "a")?, need(m.sigma, "sigma")?);
    let spec = match m.model {
        ModelKind::Cir => ModelSpec::extended_cir(x0, a, sigma)?,
        ModelKind::LevyOu => {
            let driver = match m.driver {
                DriverKind::Brownian => LevyDriver::BrownianMotion,
                DriverKind::Gamma => LevyDriver::gamma(m.lambda)?,
                DriverKind::Ig => LevyDriver::inverse_gaussian(m.lambda)?,
            };
            ModelSpec::levy_ou(driver, m.c, x0, a, sigma)?
        }
    };
    let spec = spec.with_quadrature_tol(solver.quadrature_tol.unwrap_or(tol.quadrature));
    spec.validate()?;
    Ok(spec)
}

fn bootstrap_config(solver: &SolverArgs, tol: &Tolerances) -> Result<BootstrapConfig, CliError> {
    let d = BootstrapConfig::default();
    let cfg = BootstrapConfig {
        residual_tolerance: solver.residual_tol.unwrap_or(tol.residual),
        max_iterations: solver.max_iterations.unwrap_or(d.max_iterations),
        panels_per_period: solver.panels.unwrap_or(d.panels_per_period),
        enforce_no_arbitrage: !solver.allow_arbitrage,
        ..d
    };
    cfg.validate()?;
    Ok(cfg)
}

fn instruments(m: &Market, cfg: &BootstrapConfig) -> Result<Vec<Instrument>, CliError> {
    Ok(match &m.disc {
        None => ois_instruments(&m.quotes)?,
        Some(d) => cds_instruments(&m.quotes, d, cfg.panels_per_period)?,
    })
}

/// Largest distance of the sampled curve outside the bounds envelope.
fn bounds_excursion(curve: &CalibratedCurve, b: &BoundsResult, grid: &[f64]) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for &t in grid {
        if let Some((lo, hi)) = b.envelope(t) {
            let v = curve.value(t)?;
            worst = worst.max(lo - v).max(v - hi);
        }
    }
    Ok(worst.max(0.0))
}

fn curve_rows(curve: &CalibratedCurve, step: f64) -> Result<Vec<Vec<String>>, CliError> {
    let grid = output::sample_grid(step, curve.horizon());
    Ok(output::curve_rows(&grid, |t| curve.value(t), |t| curve.forward_rate(t))?)
}

fn curve_header(kind: Kind) -> [&'static str; 4] {
    match kind {
        Kind::Ois => ["t", "discount", "spot_rate", "forward_rate"],
        Kind::Cds => ["t", "survival", "spot_rate", "forward_rate"],
    }
}

#[derive(Serialize)]
struct BoundsCheck {
    /// `None` when the bounds are undefined for these quotes.
    max_excursion: Option<f64>,
}

/// Bounds used to vet calibrated curves. Arbitrage in the quotes is fatal;
/// undefined bounds only disable the check.
fn vetting_bounds(m: &Market, tol: &Tolerances) -> Result<Option<BoundsResult>, CliError> {
    match bounds_for(m, tol) {
        Ok(b) => Ok(Some(b)),
        Err(CliError::Positivity(e)) => {
            log::warn!("skipping the bounds check: {e}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn calibrate(
    path: &Path,
    kind: Kind,
    model: &ModelArgs,
    credit: &CreditArgs,
    solver: &SolverArgs,
    constraints: &[(f64, f64)],
    step: f64,
    out_dir: &Path,
) -> Result<(), CliError> {
    check_step(step)?;
    let tol = tolerances()?;
    let market = load_market(path, kind, credit)?;
    let spec = model_spec(model, &tol, solver)?;
    let cfg = bootstrap_config(solver, &tol)?;
    let bounds = vetting_bounds(&market, &tol)?;

    let extra =
        constraints.iter().map(|&(t, v)| Instrument::constraint(t, v)).collect::<Result<Vec<_>, _>>()?;
    let inst = with_constraints(instruments(&market, &cfg)?, &extra)?;
    let fit = bootstrap(&inst, &spec, &cfg)?;

    let grid = output::sample_grid(step, fit.curve.horizon());
    let check = BoundsCheck {
        max_excursion: bounds.as_ref().map(|b| bounds_excursion(&fit.curve, b, &grid)).transpose()?,
    };
    let out = Output::create(out_dir)?;
    out.csv("curve.csv", &curve_header(kind), &curve_rows(&fit.curve, step)?)?;
    out.json("curve.json", &fit.curve)?;
    out.json(
        "report.json",
        &json!({
            "calibration": fit.report,
            "levels": fit.curve.levels(),
            "knots": fit.curve.knots(),
            "max_repricing_error": fit.max_repricing_error(),
            "bounds_check": check,
        }),
    )?;
    Ok(())
}

fn with_param(m: &ModelArgs, p: SweepParam, v: f64) -> ModelArgs {
    let mut m = m.clone();
    match p {
        SweepParam::C => m.c = v,
        SweepParam::X0 => m.x0 = Some(v),
        SweepParam::Lambda => m.lambda = v,
        SweepParam::A => m.a = Some(v),
        SweepParam::Sigma => m.sigma = Some(v),
    }
    m
}

fn param_name(p: SweepParam) -> &'static str {
    match p {
        SweepParam::C => "c",
        SweepParam::X0 => "x0",
        SweepParam::Lambda => "lambda",
        SweepParam::A => "a",
        SweepParam::Sigma => "sigma",
    }
}

#[derive(Serialize)]
struct SweepEntry {
    value: f64,
    file: Option<String>,
    levels: Option<Vec<f64>>,
    max_repricing_error: Option<f64>,
    admissible: Option<bool>,
    max_bounds_excursion: Option<f64>,
    error: Option<serde_json::Value>,
}

/// A finished sweep run and the file it wrote.
type RunResult = Result<(Calibration, String), CliError>;

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    path: &Path,
    kind: Kind,
    param: SweepParam,
    values: &[f64],
    model: &ModelArgs,
    credit: &CreditArgs,
    solver: &SolverArgs,
    step: f64,
    out_dir: &Path,
) -> Result<(), CliError> {
    check_step(step)?;
    let tol = tolerances()?;
    let market = load_market(path, kind, credit)?;
    let cfg = bootstrap_config(solver, &tol)?;
    let bounds = vetting_bounds(&market, &tol)?;
    let inst = instruments(&market, &cfg)?;
    let specs = values
        .iter()
        .map(|&v| model_spec(&with_param(model, param, v), &tol, solver))
        .collect::<Result<Vec<_>, _>>()?;
    let out = Output::create(out_dir)?;
    let name = param_name(param);

    // Workers write their own files; the overlay waits for all of them.
    let results: Vec<(f64, RunResult)> = values
        .par_iter()
        .zip(specs.par_iter())
        .map(|(&v, spec)| {
            let run = || -> RunResult {
                let fit = bootstrap(&inst, spec, &cfg)?;
                let file = format!("curve_{name}_{}.csv", fmt(v));
                out.csv(&file, &curve_header(kind), &curve_rows(&fit.curve, step)?)?;
                Ok((fit, file))
            };
            (v, run())
        })
        .collect();

    let horizon = market.quotes.maturity(market.quotes.len());
    let grid = output::sample_grid(step, horizon);
    let mut entries = Vec::with_capacity(results.len());
    let mut first_error = None;
    let mut columns: Vec<(String, &CalibratedCurve)> = Vec::new();
    for (v, res) in &results {
        match res {
            Ok((fit, file)) => {
                let excursion =
                    bounds.as_ref().map(|b| bounds_excursion(&fit.curve, b, &grid)).transpose()?;
                entries.push(SweepEntry {
                    value: *v,
                    file: Some(file.clone()),
                    levels: Some(fit.curve.levels().to_vec()),
                    max_repricing_error: Some(fit.max_repricing_error()),
                    admissible: Some(fit.report.verdict.is_admissible()),
                    max_bounds_excursion: excursion,
                    error: None,
                });
                columns.push((format!("{name}={}", fmt(*v)), &fit.curve));
            }
            Err(e) => {
                entries.push(SweepEntry {
                    value: *v,
                    file: None,
                    levels: None,
                    max_repricing_error: None,
                    admissible: None,
                    max_bounds_excursion: None,
                    error: Some(e.diagnostics()),
                });
                first_error.get_or_insert(e);
            }
        }
    }

    let mut header = vec!["t".to_string(), "lower".into(), "upper".into()];
    header.extend(columns.iter().map(|(label, _)| label.clone()));
    let mut rows = Vec::with_capacity(grid.len());
    for &t in &grid {
        let (lo, hi) = bounds.as_ref().and_then(|b| b.envelope(t)).unwrap_or((f64::NAN, f64::NAN));
        let mut row = vec![fmt(t), fmt(lo), fmt(hi)];
        for (_, curve) in &columns {
            row.push(fmt(curve.value(t)?));
        }
        rows.push(row);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv("overlay.csv", &header, &rows)?;
    out.json("sweep.json", &json!({ "param": name, "runs": entries }))?;

    match first_error {
        None => Ok(()),
        Some(CliError::Calibration(e)) => Err(CliError::Calibration(e.clone())),
        Some(e) => Err(CliError::Input(e.to_string())),
    }
}

pub fn mix(
    first: &Path,
    second: &Path,
    alpha: f64,
    quotes: Option<&Path>,
    step: f64,
    out_dir: &Path,
) -> Result<(), CliError> {
    check_step(step)?;
    let c1 = input::read_curve(first)?;
    let c2 = input::read_curve(second)?;
    let mix = ConvexMix::new(&c1, &c2, alpha)?;
    let grid = output::sample_grid(step, c1.horizon());
    // Forward rate of the mix: the value-weighted average of the two forwards.
    let forward = |t: f64| {
        let (p1, p2) = (c1.value(t)?, c2.value(t)?);
        let p = alpha * p1 + (1.0 - alpha) * p2;
        Ok((alpha * p1 * c1.forward_rate(t)? + (1.0 - alpha) * p2 * c2.forward_rate(t)?) / p)
    };
    let rows = output::curve_rows(&grid, |t| mix.value(t), forward)?;
    let sample = mix.sample(&grid)?;

    let repricing = match quotes {
        Some(p) => {
            let q = input::read_ois(p)?;
            let mut worst: f64 = 0.0;
            for inst in ois_instruments(&q)? {
                worst = worst.max(inst.relative_error(|t| mix.value(t))?.abs());
            }
            Some(worst)
        }
        None => None,
    };
    let out = Output::create(out_dir)?;
    out.csv("mix.csv", &["t", "value", "spot_rate", "forward_rate"], &rows)?;
    out.json(
        "mix.json",
        &json!({
            "alpha": alpha,
            "monotone": sample.is_nonincreasing(0.0),
            "max_repricing_error": repricing,
        }),
    )?;
    Ok(())
}
