//! Lévy drivers for the OU short-rate / intensity model.
//!
//! A driver is described by its cumulant `kappa(theta) = log E[exp(theta Y_1)]`.
//! Every call site evaluates `kappa` at `-sigma * phi(.) <= 0`, where all
//! supported families are finite and smooth.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{self, QuadratureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("jump scale lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("cumulant argument {theta} outside the domain of the {family} driver")]
    Domain { family: &'static str, theta: f64 },
    #[error("model parameter `{name}` must be positive, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Driving Lévy process. `lambda` is the inverse of the mean jump size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LevyDriver {
    BrownianMotion,
    Gamma { lambda: f64 },
    InverseGaussian { lambda: f64 },
}

impl LevyDriver {
    pub fn gamma(lambda: f64) -> Result<Self, LevyError> {
        check_lambda(lambda)?;
        Ok(LevyDriver::Gamma { lambda })
    }

    pub fn inverse_gaussian(lambda: f64) -> Result<Self, LevyError> {
        check_lambda(lambda)?;
        Ok(LevyDriver::InverseGaussian { lambda })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LevyDriver::BrownianMotion => "brownian",
            LevyDriver::Gamma { .. } => "gamma",
            LevyDriver::InverseGaussian { .. } => "inverse-gaussian",
        }
    }

    /// Re-checks `lambda` for drivers built by hand or deserialized.
    pub fn validate(&self) -> Result<(), LevyError> {
        match *self {
            LevyDriver::BrownianMotion => Ok(()),
            LevyDriver::Gamma { lambda } | LevyDriver::InverseGaussian { lambda } => check_lambda(lambda),
        }
    }

    fn in_domain(&self, theta: f64) -> Result<(), LevyError> {
        let ok = match *self {
            LevyDriver::BrownianMotion => theta.is_finite(),
            LevyDriver::Gamma { lambda } => theta < lambda,
            LevyDriver::InverseGaussian { lambda } => 2.0 * theta < lambda * lambda,
        };
        if ok {
            Ok(())
        } else {
            Err(LevyError::Domain { family: self.name(), theta })
        }
    }

    /// `kappa(theta)`.
    pub fn cumulant(&self, theta: f64) -> Result<f64, LevyError> {
        self.in_domain(theta)?;
        Ok(match *self {
            LevyDriver::BrownianMotion => 0.5 * theta * theta,
            LevyDriver::Gamma { lambda } => -(-theta / lambda).ln_1p(),
            LevyDriver::InverseGaussian { lambda } => {
                // lambda - sqrt(lambda^2 - 2 theta), written without cancellation
                let root = (lambda * lambda - 2.0 * theta).sqrt();
                2.0 * theta / (lambda + root)
            }
        })
    }

    /// `kappa'(theta)`, strictly increasing for every family.
    pub fn cumulant_deriv(&self, theta: f64) -> Result<f64, LevyError> {
        self.in_domain(theta)?;
        Ok(match *self {
            LevyDriver::BrownianMotion => theta,
            LevyDriver::Gamma { lambda } => 1.0 / (lambda - theta),
            LevyDriver::InverseGaussian { lambda } => 1.0 / (lambda * lambda - 2.0 * theta).sqrt(),
        })
    }
}

fn check_lambda(lambda: f64) -> Result<(), LevyError> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(LevyError::InvalidLambda(lambda))
    }
}

/// `phi(s) = (1 - exp(-a s)) / a`.
pub fn phi(a: f64, s: f64) -> f64 {
    -(-a * s).exp_m1() / a
}

/// `xi(s) = s - phi(s)`, zero for `s <= 0`.
pub fn xi(a: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let x = a * s;
    if x < 1e-3 {
        // series of (exp(-x) - 1 + x) / a
        s * x * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0)
    } else {
        s - phi(a, s)
    }
}

/// `psi(s) = -int_0^s kappa(-sigma phi(s - theta)) dtheta`, by adaptive
/// Gauss-Legendre to absolute tolerance `tol`.
///
/// The change-of-time factor `c` is not applied here.
pub fn psi(driver: &LevyDriver, a: f64, sigma: f64, s: f64, tol: f64) -> Result<f64, LevyError> {
    check_positive("a", a)?;
    check_positive("sigma", sigma)?;
    if s <= 0.0 {
        return Ok(0.0);
    }
    // substitute u = s - theta; the integrand is smooth on [0, s]
    let integrand =
        |u: f64| driver.cumulant(-sigma * phi(a, u)).expect("cumulant is finite on the negative half-line");
    Ok(-quadrature::adaptive(&integrand, 0.0, s, tol)?)
}

/// Closed form of `psi` for the Brownian driver:
/// `-(sigma^2 / 2 a^2) (s - 2 phi(s) + (1 - exp(-2 a s)) / 2a)`.
pub fn psi_brownian(a: f64, sigma: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let half_phi2 = -(-2.0 * a * s).exp_m1() / (2.0 * a);
    -(sigma * sigma) / (2.0 * a * a) * (s - 2.0 * phi(a, s) + half_phi2)
}

/// `psi` with the Brownian closed form as fast path.
pub fn psi_fast(driver: &LevyDriver, a: f64, sigma: f64, s: f64, tol: f64) -> Result<f64, LevyError> {
    match driver {
        LevyDriver::BrownianMotion => {
            check_positive("a", a)?;
            check_positive("sigma", sigma)?;
            Ok(psi_brownian(a, sigma, s))
        }
        _ => psi(driver, a, sigma, s, tol),
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<(), LevyError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(LevyError::InvalidParameter { name, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn drivers() -> [LevyDriver; 4] {
        [
            LevyDriver::BrownianMotion,
            LevyDriver::gamma(200.0).unwrap(),
            LevyDriver::gamma(3.0).unwrap(),
            LevyDriver::inverse_gaussian(5.0).unwrap(),
        ]
    }

    #[test]
    fn cumulant_vanishes_at_zero() {
        for d in drivers() {
            assert_eq!(d.cumulant(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn cumulant_reference_values() {
        assert_eq!(LevyDriver::BrownianMotion.cumulant(-1.0).unwrap(), 0.5);
        let g = LevyDriver::gamma(200.0).unwrap();
        assert_relative_eq!(g.cumulant(-1.0).unwrap(), -(1.005f64).ln(), max_relative = 1e-15);
        assert_relative_eq!(g.cumulant(-1.0).unwrap(), -0.004_987_541_511_038_968, max_relative = 1e-12);
        let ig = LevyDriver::inverse_gaussian(5.0).unwrap();
        assert_relative_eq!(ig.cumulant(-2.0).unwrap(), 5.0 - 29f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn cumulant_derivative_reference_values() {
        assert_eq!(LevyDriver::BrownianMotion.cumulant_deriv(-2.0).unwrap(), -2.0);
        let g = LevyDriver::gamma(200.0).unwrap();
        assert_relative_eq!(g.cumulant_deriv(0.0).unwrap(), 0.005, max_relative = 1e-15);
    }

    #[test]
    fn cumulant_derivative_matches_finite_differences() {
        let h = 1e-6;
        for d in drivers() {
            for theta in [-5.0, -1.0, -0.01] {
                let fd = (d.cumulant(theta + h).unwrap() - d.cumulant(theta - h).unwrap()) / (2.0 * h);
                let exact = d.cumulant_deriv(theta).unwrap();
                assert!(
                    (exact - fd).abs() < 1e-8 * exact.abs().max(1.0),
                    "{d:?} at {theta}: {exact} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn domain_errors() {
        let g = LevyDriver::gamma(2.0).unwrap();
        assert!(matches!(g.cumulant(2.0), Err(LevyError::Domain { .. })));
        assert!(g.cumulant(1.0).is_ok());
        let ig = LevyDriver::inverse_gaussian(2.0).unwrap();
        assert!(ig.cumulant_deriv(2.0).is_err());
        assert!(matches!(LevyDriver::gamma(0.0), Err(LevyError::InvalidLambda(_))));
        assert!(LevyDriver::Gamma { lambda: -1.0 }.validate().is_err());
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.01, 0.0), 0.0);
        assert_eq!(xi(0.01, 0.0), 0.0);
        assert_relative_eq!(phi(0.01, 10.0), 9.516_258_196_404_042, max_relative = 1e-14);
        assert_relative_eq!(phi(0.01, 10_000.0), (1.0 - (-100f64).exp()) / 0.01, epsilon = 1e-10);
    }

    #[test]
    fn xi_series_branch_is_continuous() {
        let a = 0.5;
        let s = 1e-3 / a;
        let below = xi(a, s * (1.0 - 1e-9));
        let above = xi(a, s * (1.0 + 1e-9));
        assert_relative_eq!(below, above, max_relative = 1e-8);
        let direct = s - (1.0 - (-a * s).exp()) / a;
        assert_relative_eq!(xi(a, s), direct, max_relative = 1e-9);
    }

    #[test]
    fn psi_is_zero_at_origin() {
        for d in drivers() {
            assert_eq!(psi(&d, 0.01, 1.0, 0.0, 1e-10).unwrap(), 0.0);
        }
    }

    #[test]
    fn psi_brownian_quadrature_matches_closed_form() {
        for &(a, sigma) in &[(0.01, 1.0), (0.3, 0.02), (1.5, 0.4)] {
            for s in [0.5, 3.0, 10.0, 40.0] {
                let q = psi(&LevyDriver::BrownianMotion, a, sigma, s, 1e-10).unwrap();
                let c = psi_brownian(a, sigma, s);
                assert!((q - c).abs() < 1e-9, "a={a} s={s}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn psi_gamma_self_consistent() {
        let d = LevyDriver::gamma(200.0).unwrap();
        let coarse = psi(&d, 0.01, 1.0, 5.0, 1e-10).unwrap();
        let fine = psi(&d, 0.01, 1.0, 5.0, 1e-13).unwrap();
        assert!((coarse - fine).abs() < 1e-9);
        // composite rule on a fixed, much finer grid as an independent check
        let integrand = |u: f64| d.cumulant(-phi(0.01, u)).unwrap();
        let reference = -quadrature::composite(&integrand, 0.0, 5.0, 64);
        assert!((coarse - reference).abs() < 1e-10);
    }

    #[test]
    fn psi_rejects_bad_parameters() {
        let d = LevyDriver::BrownianMotion;
        assert!(psi(&d, 0.0, 1.0, 1.0, 1e-10).is_err());
        assert!(psi(&d, 1.0, -1.0, 1.0, 1e-10).is_err());
        assert!(psi_fast(&d, 1.0, 0.0, 1.0, 1e-10).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_driver() -> impl Strategy<Value = LevyDriver> {
            prop_oneof![
                Just(LevyDriver::BrownianMotion),
                (0.5f64..500.0).prop_map(|l| LevyDriver::Gamma { lambda: l }),
                (0.5f64..50.0).prop_map(|l| LevyDriver::InverseGaussian { lambda: l }),
            ]
        }

        proptest! {
            #[test]
            fn cumulant_is_midpoint_convex(d in any_driver(), t1 in -50.0f64..0.0, t2 in -50.0f64..0.0) {
                let mid = d.cumulant(0.5 * (t1 + t2)).unwrap();
                let chord = 0.5 * (d.cumulant(t1).unwrap() + d.cumulant(t2).unwrap());
                prop_assert!(mid <= chord + 1e-12 * chord.abs().max(1.0));
            }

            #[test]
            fn cumulant_derivative_increasing(d in any_driver()) {
                let grid: Vec<f64> = (0..100).map(|k| -20.0 + 20.0 * k as f64 / 99.0).collect();
                for w in grid.windows(2) {
                    prop_assert!(d.cumulant_deriv(w[1]).unwrap() > d.cumulant_deriv(w[0]).unwrap());
                }
            }

            #[test]
            fn psi_monotone_in_horizon(l in 1.0f64..500.0, a in 0.01f64..2.0, sigma in 0.05f64..2.0) {
                // subordinators: kappa < 0 on the integrand's range, so psi >= 0 and grows with s
                let d = LevyDriver::Gamma { lambda: l };
                let mut prev = 0.0;
                for k in 1..=8 {
                    let v = psi(&d, a, sigma, k as f64 * 2.5, 1e-10).unwrap();
                    prop_assert!(v >= prev - 1e-12);
                    prev = v;
                }
                // Brownian: kappa >= 0 so psi <= 0
                prop_assert!(psi_brownian(a, sigma, 10.0) <= 0.0);
            }

            #[test]
            fn psi_refinement_is_stable(l in 1.0f64..500.0, s in 0.1f64..40.0) {
                let d = LevyDriver::Gamma { lambda: l };
                let base = psi(&d, 0.05, 1.0, s, 1e-10).unwrap();
                let integrand = |u: f64| d.cumulant(-phi(0.05, u)).unwrap();
                let halved = -quadrature::composite(&integrand, 0.0, s, 32);
                prop_assert!((base - halved).abs() < 1e-10);
            }
        }
    }
}
