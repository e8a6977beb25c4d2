//! Composite and adaptive 8-point Gauss-Legendre rules.

use thiserror::Error;

/// Panel cap of the adaptive rule.
pub const MAX_PANELS: usize = 1 << 14;
const MAX_DEPTH: usize = 60;

const NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

#[derive(Debug, Error, Clone, PartialEq)]
#[error("adaptive quadrature did not converge within {panels} panels (estimated error {achieved:e})")]
pub struct QuadratureError {
    pub panels: usize,
    pub achieved: f64,
}

/// Nodes and weights of the 8-point rule mapped onto `[lo, hi]`.
pub fn gauss_legendre_8_nodes(lo: f64, hi: f64) -> [(f64, f64); 8] {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut out = [(0.0, 0.0); 8];
    for (j, (&x, &w)) in NODES.iter().zip(&WEIGHTS).enumerate() {
        out[2 * j] = (mid - half * x, half * w);
        out[2 * j + 1] = (mid + half * x, half * w);
    }
    out
}

pub fn gauss_legendre_8<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    gauss_legendre_8_nodes(lo, hi).iter().map(|&(x, w)| w * f(x)).sum()
}

/// Composite rule on `panels` equal sub-intervals.
pub fn composite<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .map(|k| {
            let a = lo + k as f64 * h;
            let b = if k + 1 == panels { hi } else { a + h };
            gauss_legendre_8(f, a, b)
        })
        .sum()
}

/// Adaptive rule: a panel is bisected until its 8-point estimate and the sum
/// over its two halves agree to within the panel's share of `tol`.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> Result<f64, QuadratureError> {
    if hi <= lo {
        return Ok(0.0);
    }
    let width = hi - lo;
    let mut stack = vec![(lo, hi, gauss_legendre_8(f, lo, hi), 0usize)];
    let mut total = 0.0;
    let mut leaves = 0usize;
    let mut err_left = 0.0;
    while let Some((a, b, coarse, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = gauss_legendre_8(f, a, m);
        let right = gauss_legendre_8(f, m, b);
        let fine = left + right;
        let diff = (fine - coarse).abs();
        let share = tol * (b - a) / width;
        if diff <= share || depth >= MAX_DEPTH || leaves + stack.len() + 2 > MAX_PANELS {
            if diff > share {
                err_left += diff;
            }
            total += fine;
            leaves += 2;
        } else {
            stack.push((m, b, right, depth + 1));
            stack.push((a, m, left, depth + 1));
        }
    }
    if err_left > tol {
        return Err(QuadratureError { panels: leaves, achieved: err_left });
    }
    Ok(total)
}
