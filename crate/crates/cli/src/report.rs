//! Report types. Every report round-trips through [`crate::json`].

use serde::{Deserialize, Serialize};

use qretro_core::fisher::MonotonicityReport;
use qretro_core::gaussian::NumericEstimate;
use qretro_core::ComplexMatrix;

use crate::scenario::{Scenario, WignerSpec};

/// Row-major matrix of `[re, im]` pairs.
pub type MatrixOut = Vec<Vec<[f64; 2]>>;

pub fn matrix_out(m: &ComplexMatrix) -> MatrixOut {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub results: Results,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub warnings: Vec<String>,
    /// Wall time; the only field that varies between identical runs.
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Results {
    Personick(PersonickResult),
    Complex(ComplexResult),
    WeakValue(WeakValueResult),
    Classical(ClassicalResult),
    QfiMono(QfiMonoResult),
    Gaussian(GaussianResult),
    Risk(RiskResult),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersonickResult {
    pub estimator: MatrixOut,
    /// `tr rho X^2 - tr kappa(rho) Xc^2`.
    pub min_risk: f64,
    /// Risk functional evaluated directly at the estimator.
    pub direct_risk: f64,
    pub residual: f64,
    pub support_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexResult {
    pub estimator: MatrixOut,
    pub min_risk: f64,
    pub direct_risk: f64,
    pub residual: f64,
    pub support_rank: usize,
    /// Optimal Hermitian risk, when the observable is Hermitian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermitian_min_risk: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakValueResult {
    pub outcomes: Vec<WeakValueOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakValueOutcome {
    pub label: String,
    pub probability: f64,
    /// Real weak value; only for Hermitian observables.
    pub weak_value: Option<f64>,
    pub complex_weak_value: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalResult {
    pub outcomes: Vec<ClassicalOutcome>,
    pub min_risk: f64,
    /// Largest difference between the Bayes estimate and the diagonal of the
    /// quantum estimator for the embedded problem.
    pub max_embedding_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalOutcome {
    pub outcome: usize,
    pub probability: f64,
    pub estimate: Option<f64>,
    pub embedded_estimate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QfiMonoResult {
    pub rows: Vec<MonoRow>,
    pub summary: MonoSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonoRow {
    pub index: usize,
    pub family: String,
    pub dim_in: usize,
    pub dim_out: usize,
    pub theta: f64,
    #[serde(flatten)]
    pub report: MonotonicityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonoSummary {
    pub instances: usize,
    pub min_slack: f64,
    pub max_agreement_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianResult {
    pub estimate: f64,
    /// `exp(-d^T (S_rho + S_E)^{-1} d / 2)` for the mean difference `d`.
    pub overlap: f64,
    pub product: WignerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskResult {
    pub picture: String,
    pub risk: f64,
}

/// One invariant of the selftest suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub instances: usize,
    /// Largest value of the checked error measure; passes when `<= tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckOutcome {
    pub fn slack(&self) -> f64 {
        self.tolerance - self.worst
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<28} n={:<5} worst={:.3e} tol={:.1e} slack={:.3e}{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.worst,
            self.tolerance,
            self.slack(),
            self.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}
