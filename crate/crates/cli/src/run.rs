//! Dispatch from a parsed scenario to the library.

use std::time::Instant;

use qretro_core::estimators::{
    classical_conditional_expectation, complex_estimator, complex_risk, complex_weak_value, embed_classical,
    heisenberg_risk, personick_estimator, schrodinger_risk, weak_value,
};
use qretro_core::fisher::monotonicity_check;
use qretro_core::gaussian::{
    gaussian_product, numeric_quadrature_estimate_with, overlap_factor, quadrature_estimator, GridSpec,
};
use qretro_core::sweep::{self, Execution};
use qretro_core::tol::{Tolerances, WEAK_VALUE_FLOOR};
use qretro_core::{ClassicalChannel, Error, HermitianOperator, QuantumChannel};

use crate::error::CliError;
use crate::report::*;
use crate::scenario::*;
use crate::sweeps;

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    pub tol_scale: f64,
    pub exec: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: None,
            tol_scale: 1.0,
            exec: Execution::default(),
        }
    }
}

struct Ctx {
    tol: Tolerances,
    warnings: Vec<String>,
}

impl Ctx {
    fn risk(&self, name: &str, value: f64) -> Result<f64, CliError> {
        if value < -self.tol.risk {
            return Err(CliError::Numerical(format!(
                "{name} = {value:e} is below -{:e}",
                self.tol.risk
            )));
        }
        Ok(value)
    }

    fn residual(&mut self, residual: f64) {
        if residual > self.tol.residual_warn {
            self.warnings.push(format!(
                "stationarity residual {residual:e} exceeds {:e}; the right-hand side has weight off the support",
                self.tol.residual_warn
            ));
        }
    }
}

pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<Report, CliError> {
    if !opts.tol_scale.is_finite() || opts.tol_scale <= 0.0 {
        return Err(CliError::Validation(format!(
            "tolerance scale {} must be positive",
            opts.tol_scale
        )));
    }
    let start = Instant::now();
    let mut ctx = Ctx {
        tol: scenario.tolerances().unwrap_or_default().scaled(opts.tol_scale),
        warnings: Vec::new(),
    };
    let results = match scenario {
        Scenario::Personick(s) => Results::Personick(personick(s, &mut ctx)?),
        Scenario::Complex(s) => Results::Complex(complex(s, &mut ctx)?),
        Scenario::WeakValue(s) => Results::WeakValue(weak_values(s, &mut ctx)?),
        Scenario::Classical(s) => Results::Classical(classical(s, &mut ctx)?),
        Scenario::QfiMono(s) => Results::QfiMono(qfi_mono(s, opts, &mut ctx)?),
        Scenario::Gaussian(s) => Results::Gaussian(gaussian(s, opts, &mut ctx)?),
        Scenario::Risk(s) => Results::Risk(risk(s, &mut ctx)?),
    };
    Ok(Report {
        scenario: scenario.clone(),
        results,
        diagnostics: Diagnostics {
            warnings: ctx.warnings,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}

fn personick(s: &PersonickSpec, ctx: &mut Ctx) -> Result<PersonickResult, CliError> {
    let rho = density(&s.state, "state")?;
    let x = hermitian(&s.observable, "observable")?;
    let k = s.channel.build()?;
    let est = personick_estimator(&rho, &x, &k)?;
    let direct = schrodinger_risk(&rho, &x, &k, &est.estimator)?;
    ctx.residual(est.residual);
    Ok(PersonickResult {
        estimator: matrix_out(est.estimator.matrix()),
        min_risk: ctx.risk("min_risk", est.min_risk)?,
        direct_risk: ctx.risk("direct_risk", direct)?,
        residual: est.residual,
        support_rank: est.support_rank,
    })
}

fn complex(s: &ComplexSpec, ctx: &mut Ctx) -> Result<ComplexResult, CliError> {
    let rho = density(&s.state, "state")?;
    let x = matrix(&s.observable, "observable")?;
    let k = s.channel.build()?;
    let est = complex_estimator(&rho, &x, &k)?;
    let direct = complex_risk(&rho, &x, &k, &est.estimator)?;
    ctx.residual(est.residual);
    let hermitian_min_risk = match HermitianOperator::new(x.clone()) {
        Ok(h) => Some(personick_estimator(&rho, &h, &k)?.min_risk),
        Err(_) => None,
    };
    Ok(ComplexResult {
        estimator: matrix_out(&est.estimator),
        min_risk: ctx.risk("min_risk", est.min_risk)?,
        direct_risk: ctx.risk("direct_risk", direct)?,
        residual: est.residual,
        support_rank: est.support_rank,
        hermitian_min_risk,
    })
}

fn weak_values(s: &WeakValueSpec, ctx: &mut Ctx) -> Result<WeakValueResult, CliError> {
    let rho = density(&s.state, "state")?;
    let x = matrix(&s.observable, "observable")?;
    let povm = s.povm.build()?;
    let probabilities = povm.probabilities(&rho)?;
    let herm = HermitianOperator::new(x.clone()).ok();
    let labels = s.outcomes.clone().unwrap_or_else(|| povm.labels().to_vec());
    let mut outcomes = Vec::with_capacity(labels.len());
    for label in labels {
        let y = povm.index_of(&label)?;
        let probability = probabilities[y];
        if probability <= WEAK_VALUE_FLOOR {
            ctx.warnings.push(format!(
                "outcome {label:?} has probability {probability:e}; weak value undefined"
            ));
            outcomes.push(WeakValueOutcome {
                label,
                probability,
                weak_value: None,
                complex_weak_value: None,
            });
            continue;
        }
        let wv = herm.as_ref().map(|h| weak_value(&rho, h, &povm, &label)).transpose()?;
        let cwv = complex_weak_value(&rho, &x, &povm, &label)?;
        outcomes.push(WeakValueOutcome {
            label,
            probability,
            weak_value: wv,
            complex_weak_value: Some([cwv.re, cwv.im]),
        });
    }
    Ok(WeakValueResult { outcomes })
}

fn classical(s: &ClassicalSpec, ctx: &mut Ctx) -> Result<ClassicalResult, CliError> {
    let c = ClassicalChannel::new(s.transition.clone()).map_err(|e| CliError::from(e).context("transition"))?;
    let direct = classical_conditional_expectation(&s.prior, &c, &s.values)?;
    let (rho, x) = embed_classical(&s.prior, &s.values)?;
    let est = personick_estimator(&rho, &x, &QuantumChannel::from_classical(&c))?;
    ctx.residual(est.residual);
    let mut gap = est.estimator.max_off_diagonal();
    let outcomes = direct
        .iter()
        .enumerate()
        .map(|(y, v)| {
            let embedded = v.estimate.map(|_| est.estimator[(y, y)].re);
            if let (Some(a), Some(b)) = (v.estimate, embedded) {
                gap = gap.max((a - b).abs());
            }
            ClassicalOutcome {
                outcome: y,
                probability: v.probability,
                estimate: v.estimate,
                embedded_estimate: embedded,
            }
        })
        .collect();
    Ok(ClassicalResult {
        outcomes,
        min_risk: ctx.risk("min_risk", est.min_risk)?,
        max_embedding_gap: gap,
    })
}

fn qfi_mono(s: &QfiMonoSpec, opts: &RunOptions, ctx: &mut Ctx) -> Result<QfiMonoResult, CliError> {
    let rows = match (&s.sweep, &s.family, &s.channel) {
        (Some(sw), None, None) => {
            if sw.dim_min < 1 || sw.dim_max < sw.dim_min || sw.dim_max > 8 {
                return Err(CliError::Validation(format!(
                    "sweep dimensions {}..={} must satisfy 1 <= dim_min <= dim_max <= 8",
                    sw.dim_min, sw.dim_max
                )));
            }
            let seed = opts.seed.or(s.seed).unwrap_or(0);
            let rows = sweep::map_indexed(opts.exec, sw.instances, |i| {
                let inst = sweeps::monotonicity_instance(seed, i, sw.dim_min, sw.dim_max);
                let report = sweeps::monotonicity_report(&inst)?;
                Ok::<_, Error>(MonoRow {
                    index: i,
                    family: inst.family_name.to_string(),
                    dim_in: inst.channel.dim_in(),
                    dim_out: inst.channel.dim_out(),
                    theta: inst.theta,
                    report,
                })
            });
            rows.into_iter().collect::<Result<Vec<_>, _>>()?
        }
        (None, Some(fam), Some(ch)) => {
            let family = fam.build()?;
            let k = ch.build()?;
            let report = monotonicity_check(&family, &k, s.theta)?;
            vec![MonoRow {
                index: 0,
                family: fam.name().to_string(),
                dim_in: k.dim_in(),
                dim_out: k.dim_out(),
                theta: s.theta,
                report,
            }]
        }
        _ => {
            return Err(CliError::Validation(
                "qfi-mono needs either `sweep` or both `family` and `channel`".into(),
            ))
        }
    };
    let min_slack = rows.iter().map(|r| r.report.slack).fold(f64::INFINITY, f64::min);
    let max_gap = rows.iter().map(|r| r.report.agreement_gap).fold(0.0, f64::max);
    let tolerance = ctx.tol.monotonicity;
    let passed = rows
        .iter()
        .all(|r| r.report.slack >= -tolerance && r.report.agreement_gap <= tolerance);
    if !passed {
        ctx.warnings.push(format!(
            "monotonicity violated: min slack {min_slack:e}, max agreement gap {max_gap:e}, tolerance {tolerance:e}"
        ));
    }
    Ok(QfiMonoResult {
        summary: MonoSummary {
            instances: rows.len(),
            min_slack: if rows.is_empty() { 0.0 } else { min_slack },
            max_agreement_gap: max_gap,
            tolerance,
            passed,
        },
        rows,
    })
}

fn gaussian(s: &GaussianSpec, opts: &RunOptions, ctx: &mut Ctx) -> Result<GaussianResult, CliError> {
    let state = s.state.build("state")?;
    let effect = s.effect.build("effect")?;
    let x = s.observable.build()?;
    let estimate = quadrature_estimator(&state, &effect, &x)?;
    let product = gaussian_product(&state, &effect)?;
    let overlap = overlap_factor(&state, &effect)?;
    let (numeric, numeric_gap) = if s.numeric_check {
        let grid = s.grid.unwrap_or_else(|| GridSpec::for_modes(state.n_modes()));
        let num = numeric_quadrature_estimate_with(opts.exec, &state, &effect, &x, &grid)?;
        let gap = (num.value - estimate).abs();
        if gap > sweeps::GAUSSIAN_TOL * estimate.abs().max(1.0) {
            ctx.warnings
                .push(format!("closed form and grid integral differ by {gap:e}"));
        }
        (Some(num), Some(gap))
    } else {
        (None, None)
    };
    Ok(GaussianResult {
        estimate,
        overlap,
        product: WignerSpec {
            weight: product.weight(),
            mean: product.mean().to_vec(),
            covariance: product.covariance(),
        },
        numeric,
        numeric_gap,
    })
}

fn risk(s: &RiskSpec, ctx: &mut Ctx) -> Result<RiskResult, CliError> {
    let x = hermitian(&s.observable, "observable")?;
    let xcheck = hermitian(&s.estimator, "estimator")?;
    let (picture, value) = match (&s.channel, &s.heisenberg) {
        (Some(ch), None) => {
            let rho = density(&s.state, "state")?;
            let k = ch.build()?;
            ("schrodinger", schrodinger_risk(&rho, &x, &k, &xcheck)?)
        }
        (None, Some(h)) => {
            let rho0 = density(&s.state, "state")?;
            let u = matrix(&h.unitary, "heisenberg.unitary")?;
            let value = heisenberg_risk(&rho0, &x, h.estimand_factor, &xcheck, h.estimator_factor, &h.dims, &u)?;
            ("heisenberg", value)
        }
        _ => {
            return Err(CliError::Validation(
                "risk needs exactly one of `channel` or `heisenberg`".into(),
            ))
        }
    };
    Ok(RiskResult {
        picture: picture.to_string(),
        risk: ctx.risk("risk", value)?,
    })
}
