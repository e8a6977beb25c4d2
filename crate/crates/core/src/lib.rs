//! Model-free bounds and arbitrage-free affine construction of discount and
//! survival curves from OIS and CDS quotes.
//!
//! Conventions: times are year fractions measured from `t0 = 0`, rates and
//! spreads are plain decimals, and instrument / grid indices are one-based
//! wherever they mirror the usual `T_i`, `t_k` notation.

pub mod affine_models;
pub mod bounds;
pub mod calibration;
pub mod levy;
pub mod quadrature;
pub mod term_structures;
pub mod tolerances;

pub use affine_models::{CalibratedCurve, CurveError, ModelFamily, ModelSpec, Verdict};
pub use bounds::{ArbitrageReport, BoundValue, BoundsError, BoundsResult, Rectangle};
pub use calibration::{BootstrapConfig, Calibration, CalibrationError, CalibrationReport, Instrument};
pub use levy::{LevyDriver, LevyError};
pub use term_structures::{
    build_cds_schedule, build_ois_schedule, DiscountCurveFn, PaymentSchedule, QuoteKind, QuoteSet, Tenor,
    TermStructureError,
};
pub use tolerances::Tolerances;
