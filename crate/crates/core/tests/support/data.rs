//! Market data used throughout the integration tests.

use admcurve::{QuoteSet, Tenor};

/// OIS par rates as of 31 May 2013, in percent.
pub const OIS_MATURITIES: [f64; 14] =
    [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 15.0, 20.0, 30.0, 40.0];
pub const OIS_RATES_PCT: [f64; 14] = [
    0.0720, 0.1530, 0.2870, 0.4540, 0.6390, 0.8210, 0.9930, 1.1570, 1.3090, 1.4470, 1.9300, 2.1160, 2.1820,
    2.2090,
];

/// AIG CDS spreads as of 17 December 2007, in basis points.
pub const CDS_MATURITIES: [f64; 4] = [3.0, 5.0, 7.0, 10.0];
pub const CDS_SPREADS_BP: [f64; 4] = [58.0, 54.0, 52.0, 49.0];

/// Jump-frequency sweep of the Gamma-driven OU construction.
pub const C_SWEEP: [f64; 11] = [1.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0];

/// Initial default intensities (in percent) of the CIR credit construction.
pub const X0_SWEEP_PCT: [f64; 11] = [0.01, 0.25, 0.49, 0.73, 0.97, 1.21, 1.45, 1.69, 1.94, 2.18, 2.42];

pub fn ois_quotes() -> QuoteSet {
    let rates: Vec<f64> = OIS_RATES_PCT.iter().map(|r| r / 100.0).collect();
    QuoteSet::ois_annual(&OIS_MATURITIES, &rates).unwrap()
}

pub fn cds_quotes(recovery: f64) -> QuoteSet {
    let spreads: Vec<f64> = CDS_SPREADS_BP.iter().map(|s| s / 1e4).collect();
    QuoteSet::cds_uniform(&CDS_MATURITIES, &spreads, 4, recovery).unwrap()
}

pub fn tenors(v: &[f64]) -> Vec<Tenor> {
    Tenor::list(v).unwrap()
}
