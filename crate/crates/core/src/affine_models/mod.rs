//! Exponential-affine curve generators with a piecewise-constant
//! mean-reversion level.
//!
//! Both model families share the same structure: the log of the curve is
//!
//! ```text
//! -log P(0, t) = base(t) + sum_k b_k * (G(t - T_{k-1}) - G(t - T_k))
//! ```
//!
//! where `G` vanishes on the negative half-line. For the Lévy-driven OU model
//! `G = xi` and `base(t) = X0 phi(t) + c psi(t)`; for the extended CIR model
//! `G = eta` and `base(t) = X0 varphi(t)`. The calibration code relies on this
//! being affine in every level.

mod curve;
mod no_arbitrage;

pub use curve::CalibratedCurve;
pub use no_arbitrage::{
    verify_interval, verify_no_arbitrage, verify_no_arbitrage_cir, verify_no_arbitrage_levy_ou,
    KRepresentation, Verdict, Violation, ViolationKind,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levy::{self, LevyDriver, LevyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("t = {t} lies outside the curve domain [0, {max}]")]
    OutOfDomain { t: f64, max: f64 },
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("operation requires a {expected} model")]
    WrongFamily { expected: &'static str },
    #[error(transparent)]
    Levy(#[from] LevyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelFamily {
    /// `dX = a(b(t) - X)dt + sigma dY_{ct}`.
    LevyOu { driver: LevyDriver, c: f64 },
    /// `dX = a(b(t) - X)dt + sigma sqrt(X) dW`.
    ExtendedCir,
}

fn default_quadrature_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    /// Initial short rate or default intensity.
    pub x0: f64,
    /// Mean-reversion speed.
    pub a: f64,
    pub sigma: f64,
    /// Absolute tolerance used for the `psi` quadrature.
    #[serde(default = "default_quadrature_tol")]
    pub quadrature_tol: f64,
}

impl ModelSpec {
    pub fn levy_ou(driver: LevyDriver, c: f64, x0: f64, a: f64, sigma: f64) -> Result<Self, CurveError> {
        let spec = Self {
            family: ModelFamily::LevyOu { driver, c },
            x0,
            a,
            sigma,
            quadrature_tol: default_quadrature_tol(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn extended_cir(x0: f64, a: f64, sigma: f64) -> Result<Self, CurveError> {
        let spec =
            Self { family: ModelFamily::ExtendedCir, x0, a, sigma, quadrature_tol: default_quadrature_tol() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_quadrature_tol(mut self, tol: f64) -> Self {
        self.quadrature_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<(), CurveError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CurveError::InvalidSpec(format!("{name} must be positive, got {v}")))
            }
        };
        positive("a", self.a)?;
        positive("sigma", self.sigma)?;
        positive("quadrature tolerance", self.quadrature_tol)?;
        if !(self.x0.is_finite() && self.x0 >= 0.0) {
            return Err(CurveError::InvalidSpec(format!("x0 must be non-negative, got {}", self.x0)));
        }
        if let ModelFamily::LevyOu { driver, c } = self.family {
            positive("c", c)?;
            driver.validate()?;
        }
        Ok(())
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            ModelFamily::LevyOu { .. } => "levy-ou",
            ModelFamily::ExtendedCir => "cir",
        }
    }

    /// `h = sqrt(a^2 + 2 sigma^2)` of the CIR formulas.
    pub fn cir_h(&self) -> f64 {
        (self.a * self.a + 2.0 * self.sigma * self.sigma).sqrt()
    }

    /// Loading of the initial state: `phi` (OU) or `varphi` (CIR).
    pub fn loading(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self.family {
            ModelFamily::LevyOu { .. } => levy::phi(self.a, s),
            ModelFamily::ExtendedCir => {
                let (h, a) = (self.cir_h(), self.a);
                let e = (-h * s).exp();
                -2.0 * (-h * s).exp_m1() / (h + a + (h - a) * e)
            }
        }
    }

    /// Derivative of [`loading`](Self::loading) in `s`.
    pub fn loading_deriv(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self.family {
            ModelFamily::LevyOu { .. } => (-self.a * s).exp(),
            ModelFamily::ExtendedCir => {
                let (h, a) = (self.cir_h(), self.a);
                let e = (-h * s).exp();
                let d = h + a + (h - a) * e;
                4.0 * h * h * e / (d * d)
            }
        }
    }

    /// Second derivative of the loading.
    pub fn loading_deriv2(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self.family {
            ModelFamily::LevyOu { .. } => -self.a * (-self.a * s).exp(),
            ModelFamily::ExtendedCir => {
                let (h, a) = (self.cir_h(), self.a);
                let e = (-h * s).exp();
                let d = h + a + (h - a) * e;
                // d/ds [4h^2 e / d^2] with e' = -h e, d' = -h (h - a) e
                -4.0 * h * h * h * e * (d - 2.0 * (h - a) * e) / (d * d * d)
            }
        }
    }

    /// Level kernel `G`: `xi` (OU) or `eta` (CIR); zero for `s <= 0`.
    pub fn level_integral(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self.family {
            ModelFamily::LevyOu { .. } => levy::xi(self.a, s),
            ModelFamily::ExtendedCir => {
                let (h, a, sigma) = (self.cir_h(), self.a, self.sigma);
                // log((h + a + (h - a)e^{-hs}) / 2h) = log(1 - (h - a)(1 - e^{-hs}) / 2h)
                let log_term = ((h - a) * (-h * s).exp_m1() / (2.0 * h)).ln_1p();
                2.0 * a * (s / (h + a) + log_term / (sigma * sigma))
            }
        }
    }

    /// `dG/ds = a * loading(s)`.
    pub fn level_rate(&self, s: f64) -> f64 {
        self.a * self.loading(s)
    }

    /// `d^2G/ds^2 = a * loading'(s)` for `s > 0`, zero otherwise.
    pub fn level_rate_deriv(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            self.a * self.loading_deriv(s)
        }
    }

    /// Level-independent part of `-log P(0, t)`.
    pub fn base_exponent(&self, t: f64) -> Result<f64, CurveError> {
        let init = self.x0 * self.loading(t);
        match self.family {
            ModelFamily::LevyOu { driver, c } => {
                let psi = levy::psi_fast(&driver, self.a, self.sigma, t, self.quadrature_tol)?;
                Ok(init + c * psi)
            }
            ModelFamily::ExtendedCir => Ok(init),
        }
    }

    /// Level-independent part of the instantaneous forward rate.
    pub fn base_forward(&self, t: f64) -> Result<f64, CurveError> {
        let init = self.x0 * self.loading_deriv(t);
        match self.family {
            ModelFamily::LevyOu { driver, c } => {
                let jump = driver.cumulant(-self.sigma * levy::phi(self.a, t.max(0.0)))?;
                Ok(init - c * jump)
            }
            ModelFamily::ExtendedCir => Ok(init),
        }
    }

    /// Time derivative of [`base_forward`](Self::base_forward).
    pub fn base_forward_deriv(&self, t: f64) -> Result<f64, CurveError> {
        let init = self.x0 * self.loading_deriv2(t);
        match self.family {
            ModelFamily::LevyOu { driver, c } => {
                let t = t.max(0.0);
                let slope = driver.cumulant_deriv(-self.sigma * levy::phi(self.a, t))?;
                Ok(init + c * self.sigma * (-self.a * t).exp() * slope)
            }
            ModelFamily::ExtendedCir => Ok(init),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cir() -> ModelSpec {
        ModelSpec::extended_cir(0.01, 0.7, 0.3).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::extended_cir(0.01, 0.0, 1.0).is_err());
        assert!(ModelSpec::extended_cir(-0.01, 1.0, 1.0).is_err());
        assert!(ModelSpec::levy_ou(LevyDriver::BrownianMotion, 0.0, 0.01, 1.0, 1.0).is_err());
        assert!(ModelSpec::levy_ou(LevyDriver::Gamma { lambda: -2.0 }, 1.0, 0.01, 1.0, 1.0).is_err());
        let s = cir();
        assert!(s.cir_h() > s.a);
    }

    #[test]
    fn cir_eta_differentiates_to_a_varphi() {
        let s = cir();
        let h = 1e-5;
        for t in [0.01, 0.5, 1.0, 3.0, 10.0, 25.0] {
            let fd = (s.level_integral(t + h) - s.level_integral(t - h)) / (2.0 * h);
            assert!((fd - s.level_rate(t)).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn loading_derivatives_match_finite_differences() {
        let h = 1e-5;
        let ou = ModelSpec::levy_ou(LevyDriver::BrownianMotion, 1.0, 0.01, 0.3, 0.1).unwrap();
        for s in [&ou, &cir()] {
            for t in [0.2, 1.0, 7.5] {
                let d1 = (s.loading(t + h) - s.loading(t - h)) / (2.0 * h);
                assert!((d1 - s.loading_deriv(t)).abs() < 1e-8);
                let d2 = (s.loading_deriv(t + h) - s.loading_deriv(t - h)) / (2.0 * h);
                assert!((d2 - s.loading_deriv2(t)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn cir_varphi_is_increasing() {
        let s = cir();
        let mut prev = 0.0;
        for k in 1..200 {
            let v = s.loading(k as f64 * 0.1);
            assert!(v > prev);
            prev = v;
        }
        assert_eq!(s.loading(0.0), 0.0);
        assert_eq!(s.level_integral(0.0), 0.0);
    }

    #[test]
    fn base_forward_derivative_matches_finite_differences() {
        let s = ModelSpec::levy_ou(LevyDriver::gamma(200.0).unwrap(), 10.0, 0.00063, 0.01, 1.0).unwrap();
        let h = 1e-5;
        for t in [0.5, 5.0, 30.0] {
            let fd = (s.base_forward(t + h).unwrap() - s.base_forward(t - h).unwrap()) / (2.0 * h);
            assert!((fd - s.base_forward_deriv(t).unwrap()).abs() < 1e-7);
        }
    }
}
