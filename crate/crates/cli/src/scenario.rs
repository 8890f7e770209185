//! Scenario files: one JSON object per file, tagged by `kind`.
//!
//! Matrices are row-major nested arrays. Each entry is either a real number
//! or a `[re, im]` pair.

use serde::{Deserialize, Serialize};

use qretro_core::channels::{ClassicalChannel, Povm, QuantumChannel};
use qretro_core::fisher::StateFamily;
use qretro_core::gaussian::{GaussianWigner, GridSpec, LinearQuadrature};
use qretro_core::tol::Tolerances;
use qretro_core::{ComplexMatrix, DensityOperator, HermitianOperator, C64};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(re) => C64::new(re, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

pub type MatrixSpec = Vec<Vec<Entry>>;

pub fn matrix_spec(m: &ComplexMatrix) -> MatrixSpec {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(|z| Entry::Complex([z.re, z.im])).collect())
        .collect()
}

pub fn real_matrix_spec(rows: &[Vec<f64>]) -> MatrixSpec {
    rows.iter()
        .map(|row| row.iter().map(|&x| Entry::Real(x)).collect())
        .collect()
}

pub(crate) fn matrix(spec: &MatrixSpec, field: &str) -> Result<ComplexMatrix, CliError> {
    let rows: Vec<Vec<C64>> = spec.iter().map(|row| row.iter().map(|e| e.value()).collect()).collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| CliError::from(e).context(field))
}

pub(crate) fn hermitian(spec: &MatrixSpec, field: &str) -> Result<HermitianOperator, CliError> {
    HermitianOperator::new(matrix(spec, field)?).map_err(|e| CliError::from(e).context(field))
}

pub(crate) fn density(spec: &MatrixSpec, field: &str) -> Result<DensityOperator, CliError> {
    DensityOperator::new(matrix(spec, field)?).map_err(|e| CliError::from(e).context(field))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    Personick(PersonickSpec),
    Complex(ComplexSpec),
    WeakValue(WeakValueSpec),
    Classical(ClassicalSpec),
    QfiMono(QfiMonoSpec),
    Gaussian(GaussianSpec),
    Risk(RiskSpec),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Personick(_) => "personick",
            Scenario::Complex(_) => "complex",
            Scenario::WeakValue(_) => "weak-value",
            Scenario::Classical(_) => "classical",
            Scenario::QfiMono(_) => "qfi-mono",
            Scenario::Gaussian(_) => "gaussian",
            Scenario::Risk(_) => "risk",
        }
    }

    pub fn tolerances(&self) -> Option<Tolerances> {
        match self {
            Scenario::Personick(s) => s.tolerances,
            Scenario::Complex(s) => s.tolerances,
            Scenario::WeakValue(s) => s.tolerances,
            Scenario::Classical(s) => s.tolerances,
            Scenario::QfiMono(s) => s.tolerances,
            Scenario::Gaussian(s) => s.tolerances,
            Scenario::Risk(s) => s.tolerances,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        crate::json::from_str(text)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonickSpec {
    pub state: MatrixSpec,
    pub observable: MatrixSpec,
    pub channel: ChannelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub state: MatrixSpec,
    /// Need not be Hermitian.
    pub observable: MatrixSpec,
    pub channel: ChannelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakValueSpec {
    pub state: MatrixSpec,
    pub observable: MatrixSpec,
    pub povm: PovmSpec,
    /// Defaults to every outcome.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmSpec {
    pub effects: Vec<MatrixSpec>,
    pub labels: Vec<String>,
}

impl PovmSpec {
    pub(crate) fn build(&self) -> Result<Povm, CliError> {
        let effects = self
            .effects
            .iter()
            .enumerate()
            .map(|(i, e)| hermitian(e, &format!("povm.effects[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        Povm::new(effects, self.labels.clone()).map_err(|e| CliError::from(e).context("povm"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSpec {
    pub prior: Vec<f64>,
    /// Value of the estimand for each input symbol.
    pub values: Vec<f64>,
    /// `transition[y][x] = P(y | x)`.
    pub transition: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// Either one explicit `(family, channel, theta)` problem or a seeded sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfiMonoSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default)]
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub instances: usize,
    #[serde(default = "default_dim_min")]
    pub dim_min: usize,
    #[serde(default = "default_dim_max")]
    pub dim_max: usize,
}

fn default_dim_min() -> usize {
    2
}

fn default_dim_max() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub state: WignerSpec,
    pub effect: WignerSpec,
    pub observable: QuadratureSpec,
    /// Also evaluate the grid integrals (1-2 modes).
    #[serde(default)]
    pub numeric_check: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSpec {
    #[serde(default = "unit_weight")]
    pub weight: f64,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

fn unit_weight() -> f64 {
    1.0
}

impl WignerSpec {
    pub(crate) fn build(&self, field: &str) -> Result<GaussianWigner, CliError> {
        GaussianWigner::new(self.weight, self.mean.clone(), self.covariance.clone())
            .map_err(|e| CliError::from(e).context(field))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
}

impl QuadratureSpec {
    pub(crate) fn build(&self) -> Result<LinearQuadrature, CliError> {
        LinearQuadrature::new(self.coeffs.clone(), self.offset).map_err(|e| CliError::from(e).context("observable"))
    }
}

/// Risk of a given estimator, in the Schrodinger picture (`channel`) or the
/// Heisenberg picture (`heisenberg`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskSpec {
    pub state: MatrixSpec,
    pub observable: MatrixSpec,
    pub estimator: MatrixSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heisenberg: Option<HeisenbergSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeisenbergSpec {
    pub dims: Vec<usize>,
    pub unitary: MatrixSpec,
    pub estimand_factor: usize,
    pub estimator_factor: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Kraus {
        operators: Vec<MatrixSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Classical {
        transition: Vec<Vec<f64>>,
    },
    Povm {
        effects: Vec<MatrixSpec>,
        labels: Vec<String>,
    },
    PartialTrace {
        dims: Vec<usize>,
        keep: Vec<usize>,
    },
    /// `rho -> tr_rest U (rho (x) environment) U^dag`, keeping factor `keep`.
    Dilation {
        unitary: MatrixSpec,
        environment: MatrixSpec,
        dims: Vec<usize>,
        keep: usize,
    },
    /// `rho -> sum_x <x|rho|x> states[x]`.
    Cq {
        states: Vec<MatrixSpec>,
    },
    Identity {
        dim: usize,
    },
    /// Replaces every input with the maximally mixed state.
    Depolarizing {
        dim: usize,
    },
}

impl ChannelSpec {
    pub(crate) fn build(&self) -> Result<QuantumChannel, CliError> {
        let wrap = |e: qretro_core::Error| CliError::from(e).context("channel");
        match self {
            ChannelSpec::Kraus { operators, labels } => {
                let kraus = operators
                    .iter()
                    .enumerate()
                    .map(|(i, k)| matrix(k, &format!("channel.operators[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let first = kraus
                    .first()
                    .ok_or_else(|| CliError::Validation("channel: no Kraus operators".into()))?;
                let ch = QuantumChannel::new(first.ncols(), first.nrows(), kraus).map_err(wrap)?;
                match labels {
                    Some(l) => ch.with_output_labels(l.clone()).map_err(wrap),
                    None => Ok(ch),
                }
            }
            ChannelSpec::Classical { transition } => Ok(QuantumChannel::from_classical(
                &ClassicalChannel::new(transition.clone()).map_err(wrap)?,
            )),
            ChannelSpec::Povm { effects, labels } => {
                let povm = PovmSpec {
                    effects: effects.clone(),
                    labels: labels.clone(),
                }
                .build()?;
                QuantumChannel::from_povm(&povm).map_err(wrap)
            }
            ChannelSpec::PartialTrace { dims, keep } => QuantumChannel::partial_trace(dims, keep).map_err(wrap),
            ChannelSpec::Dilation {
                unitary,
                environment,
                dims,
                keep,
            } => {
                let u = matrix(unitary, "channel.unitary")?;
                let env = density(environment, "channel.environment")?;
                QuantumChannel::from_dilation(&u, &env, dims, *keep).map_err(wrap)
            }
            ChannelSpec::Cq { states } => {
                let states = states
                    .iter()
                    .enumerate()
                    .map(|(i, s)| density(s, &format!("channel.states[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                QuantumChannel::from_cq_ensemble(&states).map_err(wrap)
            }
            ChannelSpec::Identity { dim } => Ok(QuantumChannel::identity(*dim)),
            ChannelSpec::Depolarizing { dim } => Ok(QuantumChannel::fully_depolarizing(*dim)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `base + theta * direction`.
    Affine { base: MatrixSpec, direction: MatrixSpec },
    /// `exp(-i theta H) state exp(i theta H)`.
    Unitary { state: MatrixSpec, generator: MatrixSpec },
    /// `p_i ∝ probabilities_i exp(theta generator_i)`.
    DiagonalExponential {
        probabilities: Vec<f64>,
        generator: Vec<f64>,
    },
    /// `(1 - theta) state + theta I / d`.
    Depolarizing { state: MatrixSpec },
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Affine { .. } => "affine",
            FamilySpec::Unitary { .. } => "unitary",
            FamilySpec::DiagonalExponential { .. } => "diagonal_exponential",
            FamilySpec::Depolarizing { .. } => "depolarizing",
        }
    }

    pub(crate) fn build(&self) -> Result<StateFamily, CliError> {
        let wrap = |e: qretro_core::Error| CliError::from(e).context("family");
        match self {
            FamilySpec::Affine { base, direction } => {
                StateFamily::affine(density(base, "family.base")?, hermitian(direction, "family.direction")?)
                    .map_err(wrap)
            }
            FamilySpec::Unitary { state, generator } => StateFamily::unitary_rotation(
                density(state, "family.state")?,
                hermitian(generator, "family.generator")?,
            )
            .map_err(wrap),
            FamilySpec::DiagonalExponential {
                probabilities,
                generator,
            } => StateFamily::diagonal_exponential(probabilities.clone(), generator.clone()).map_err(wrap),
            FamilySpec::Depolarizing { state } => Ok(StateFamily::depolarizing(density(state, "family.state")?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_real_and_complex_entries() {
        let s = Scenario::parse(
            r#"{"kind": "personick",
                "state": [[0.5, 0], [0, 0.5]],
                "observable": [[1, [0, -1]], [[0, 1], -1]],
                "channel": {"type": "identity", "dim": 2}}"#,
        )
        .unwrap();
        assert_eq!(s.kind(), "personick");
        let Scenario::Personick(p) = s else { unreachable!() };
        let x = hermitian(&p.observable, "observable").unwrap();
        assert_eq!(x[(0, 1)], C64::new(0.0, -1.0));
    }

    #[test]
    fn unknown_fields_are_rejected_by_name() {
        let err =
            Scenario::parse(r#"{"kind": "classical", "prior": [1], "values": [0], "transition": [[1]], "extra": 1}"#)
                .unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
        let err = Scenario::parse(r#"{"kind": "classical", "prior": [1], "values": [0]}"#).unwrap_err();
        assert!(err.to_string().contains("transition"), "{err}");
    }

    #[test]
    fn unknown_kind_is_a_parse_error() {
        let err = Scenario::parse(r#"{"kind": "bogus"}"#).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn corrupted_kraus_channel_names_cptp() {
        let spec = ChannelSpec::Kraus {
            operators: vec![real_matrix_spec(&[vec![1.0, 0.0], vec![0.0, 0.5]])],
            labels: None,
        };
        let err = spec.build().unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("cptp"), "{err}");
    }
}
