//! Numerical tolerances shared across modules.

use serde::{Deserialize, Serialize};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
/// Relative to the largest eigenvalue.
pub const SUPPORT_TOL: f64 = 1e-12;
pub const SOLVE_TOL: f64 = 1e-10;
pub const CPTP_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;
pub const RISK_TOL: f64 = 1e-9;
pub const WEAK_VALUE_FLOOR: f64 = 1e-12;
pub const OVERLAP_FLOOR: f64 = 1e-12;
/// Normal-equation residual above which results carry a warning.
pub const RESIDUAL_WARN: f64 = 1e-8;
/// Environment eigenvalues below this are dropped when extracting Kraus operators.
pub const KRAUS_DROP_TOL: f64 = 1e-14;
pub const FD_STEP: f64 = 1e-5;
pub const CLASSICAL_SUM_TOL: f64 = 1e-12;

/// Overridable thresholds used when judging results (warnings, report
/// assertions, selftest gates). Core constructors always use the constants
/// above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed negativity of a reported risk.
    pub risk: f64,
    pub residual_warn: f64,
    /// Allowed negativity of a Fisher-information monotonicity slack.
    pub monotonicity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            risk: RISK_TOL,
            residual_warn: RESIDUAL_WARN,
            monotonicity: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            risk: self.risk * factor,
            residual_warn: self.residual_warn * factor,
            monotonicity: self.monotonicity * factor,
        }
    }
}
