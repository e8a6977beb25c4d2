use std::fs::File;
use std::path::Path;

use admcurve::{CalibratedCurve, DiscountCurveFn, QuoteSet};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
struct OisRow {
    maturity_years: f64,
    rate: f64,
}

#[derive(Debug, Deserialize)]
struct CdsRow {
    maturity_years: f64,
    spread_bp: f64,
}

fn open(path: &Path) -> Result<csv::Reader<File>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn expect_header(rdr: &mut csv::Reader<File>, path: &Path, columns: &[&str]) -> Result<(), CliError> {
    let header = rdr.headers()?;
    if header.iter().eq(columns.iter().copied()) {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "{}: expected header `{}`, found `{}`",
            path.display(),
            columns.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )))
    }
}

/// `maturity_years,rate` with rates as decimals (`0.00072` for 0.072%).
pub fn read_ois(path: &Path) -> Result<QuoteSet, CliError> {
    let mut rdr = open(path)?;
    expect_header(&mut rdr, path, &["maturity_years", "rate"])?;
    let (mut t, mut s) = (Vec::new(), Vec::new());
    for row in rdr.deserialize() {
        let row: OisRow = row?;
        t.push(row.maturity_years);
        s.push(row.rate);
    }
    if t.is_empty() {
        return Err(CliError::Input(format!("{}: no quotes", path.display())));
    }
    Ok(QuoteSet::ois_annual(&t, &s)?)
}

/// `maturity_years,spread_bp`; spreads are converted to decimals.
pub fn read_cds(path: &Path, frequency: u32, recovery: f64) -> Result<QuoteSet, CliError> {
    let mut rdr = open(path)?;
    expect_header(&mut rdr, path, &["maturity_years", "spread_bp"])?;
    let (mut t, mut s) = (Vec::new(), Vec::new());
    for row in rdr.deserialize() {
        let row: CdsRow = row?;
        t.push(row.maturity_years);
        s.push(row.spread_bp / 1e4);
    }
    if t.is_empty() {
        return Err(CliError::Input(format!("{}: no quotes", path.display())));
    }
    Ok(QuoteSet::cds_uniform(&t, &s, frequency, recovery)?)
}

/// A discount curve file holds either a tagged discount curve
/// (`{"type": "flat", "rate": 0.03}`) or a curve written by `calibrate`.
pub fn read_discount_curve(path: &Path) -> Result<DiscountCurveFn, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if let Ok(curve) = serde_json::from_str::<DiscountCurveFn>(&text) {
        return Ok(curve);
    }
    let curve = read_curve_text(&text, path)?;
    Ok(DiscountCurveFn::Calibrated(curve))
}

pub fn read_curve(path: &Path) -> Result<CalibratedCurve, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    read_curve_text(&text, path)
}

fn read_curve_text(text: &str, path: &Path) -> Result<CalibratedCurve, CliError> {
    let curve: CalibratedCurve =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    // Deserialisation bypasses the constructor's checks.
    Ok(CalibratedCurve::new(*curve.spec(), curve.knots().to_vec(), curve.levels().to_vec())?)
}

/// Parses `T=V` into an exact-value constraint.
pub fn parse_constraint(s: &str) -> Result<(f64, f64), String> {
    let (t, v) = s.split_once('=').ok_or_else(|| format!("expected T=V, got `{s}`"))?;
    let t: f64 = t.trim().parse().map_err(|_| format!("bad maturity in `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("bad value in `{s}`"))?;
    Ok((t, v))
}
