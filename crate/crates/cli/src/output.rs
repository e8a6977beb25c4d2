use std::fs;
use std::path::{Path, PathBuf};

use admcurve::{BoundValue, BoundsResult, CurveError};
use serde::Serialize;

use crate::error::CliError;

/// 12 significant digits, fixed notation for ordinary magnitudes, trailing
/// zeros removed.
pub fn fmt(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-6..=15).contains(&exp) {
        return sci;
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, to_json(value)?)?;
        Ok(path)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn bounds_rows(b: &BoundsResult) -> Vec<Vec<String>> {
    b.maturities
        .iter()
        .zip(&b.values)
        .map(|(t, v)| match *v {
            BoundValue::Exact { value } => vec![fmt(*t), "exact".into(), fmt(value), String::new()],
            BoundValue::Interval { min, max } => vec![fmt(*t), "interval".into(), fmt(min), fmt(max)],
        })
        .collect()
}

pub const BOUNDS_HEADER: [&str; 4] = ["maturity", "kind", "value_or_min", "max"];
pub const RECTANGLES_HEADER: [&str; 4] = ["t_left", "v_bottom", "t_right", "v_top"];

pub fn rectangle_rows(b: &BoundsResult) -> Vec<Vec<String>> {
    b.rectangles.iter().map(|r| vec![fmt(r.t_left), fmt(r.v_bottom), fmt(r.t_right), fmt(r.v_top)]).collect()
}

/// `0, step, 2 step, ...` up to `horizon`, with the horizon itself included.
pub fn sample_grid(step: f64, horizon: f64) -> Vec<f64> {
    let n = (horizon / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
    if let Some(&last) = grid.last() {
        if horizon - last > 1e-9 * horizon.max(1.0) {
            grid.push(horizon);
        } else {
            *grid.last_mut().unwrap() = horizon;
        }
    }
    grid
}

/// Samples of a curve: value, continuously compounded spot rate and
/// instantaneous forward rate.
pub fn curve_rows<V, F>(grid: &[f64], value: V, forward: F) -> Result<Vec<Vec<String>>, CurveError>
where
    V: Fn(f64) -> Result<f64, CurveError>,
    F: Fn(f64) -> Result<f64, CurveError>,
{
    grid.iter()
        .map(|&t| {
            let v = value(t)?;
            let f = forward(t)?;
            // The spot rate at t = 0 is the short rate.
            let spot = if t > 0.0 { -v.ln() / t } else { f };
            Ok(vec![fmt(t), fmt(v), fmt(spot), fmt(f)])
        })
        .collect()
}
