//! Seeded invariant sweeps shared by `selftest`, the `qfi-mono` sweep mode,
//! the acceptance tests and the benches.
//!
//! Instance `i` of a check draws from `instance_rng(seed, tag << 32 | i)`,
//! where `tag` is fixed per check, so checks are independent of each other
//! and of the execution mode.

use rand::Rng;

use qretro_core::channels::QuantumChannel;
use qretro_core::estimators::{
    classical_conditional_expectation, complex_weak_value, embed_classical, heisenberg_risk, personick_estimator,
    schrodinger_risk, weak_value,
};
use qretro_core::fisher::{monotonicity_check, MonotonicityReport, StateFamily};
use qretro_core::gaussian::{
    numeric_quadrature_estimate_with, quadrature_estimator, GaussianWigner, GridSpec, LinearQuadrature,
};
use qretro_core::linalg::{eig_hermitian, jordan_product, jordan_trace_identity_check, tensor};
use qretro_core::random::{self, instance_rng};
use qretro_core::sweep::{self, Execution};
use qretro_core::{ClassicalChannel, ComplexMatrix, DensityOperator, Error, HermitianOperator};

use crate::report::CheckOutcome;

pub const PICTURE_TOL: f64 = 1e-10;
pub const RISK_FORMULA_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;
pub const CLASSICAL_TOL: f64 = 1e-10;
pub const BSC_TOL: f64 = 1e-12;
pub const WEAK_VALUE_TOL: f64 = 1e-10;
pub const COMPLEX_WEAK_VALUE_TOL: f64 = 1e-12;
pub const MONOTONICITY_TOL: f64 = 1e-8;
pub const IDENTITY_SLACK_TOL: f64 = 1e-10;
pub const DEPOLARIZED_QFI_TOL: f64 = 1e-10;
pub const GAUSSIAN_TOL: f64 = 1e-6;
pub const FLAT_LIMIT_TOL: f64 = 1e-4;
pub const JORDAN_TOL: f64 = 1e-12;
pub const CHANNEL_TOL: f64 = 1e-12;

type Measure = Result<f64, String>;

fn rng_for(seed: u64, tag: u64, index: usize) -> impl Rng {
    instance_rng(seed, (tag << 32) | index as u64)
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Folds per-instance error measures into one gated outcome. An instance
/// that errors, or a NaN, fails the check.
pub fn gate(name: &str, tolerance: f64, values: Vec<Measure>) -> CheckOutcome {
    let instances = values.len();
    let mut worst = f64::NEG_INFINITY;
    let mut detail = None;
    for (i, v) in values.into_iter().enumerate() {
        match v {
            Ok(x) if x.is_nan() => {
                detail.get_or_insert_with(|| format!("instance {i}: NaN"));
            }
            Ok(x) => worst = worst.max(x),
            Err(e) => {
                detail.get_or_insert_with(|| format!("instance {i}: {e}"));
            }
        }
    }
    if instances == 0 {
        worst = 0.0;
    }
    CheckOutcome {
        name: name.to_string(),
        instances,
        worst,
        tolerance,
        passed: detail.is_none() && worst <= tolerance,
        detail,
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Heisenberg and Schrodinger risks of random estimators through random
/// dilations agree.
pub fn picture_equivalence(exec: Execution, seed: u64, n: usize) -> CheckOutcome {
    let values = sweep::map_indexed(exec, n, |i| picture_gap(seed, i));
    gate("picture_equivalence", PICTURE_TOL, values)
}

fn picture_gap(seed: u64, i: usize) -> Measure {
    let mut rng = rng_for(seed, 1, i);
    let da = random::dimension(&mut rng, 2, 3);
    let db = random::dimension(&mut rng, 2, 3);
    let dims = [da, db];
    let keep = rng.random_range(0..2usize);
    let u = random::unitary(&mut rng, da * db);
    let env = random::density_operator(&mut rng, db);
    let rho = random::density_operator(&mut rng, da);
    let x = random::hermitian_operator(&mut rng, da);
    let xcheck = random::hermitian_operator(&mut rng, dims[keep]);
    let k = QuantumChannel::from_dilation(&u, &env, &dims, keep).map_err(err)?;
    let rho0 = DensityOperator::new(tensor(rho.matrix(), env.matrix())).map_err(err)?;
    let h = heisenberg_risk(&rho0, &x, 0, &xcheck, keep, &dims, &u).map_err(err)?;
    let s = schrodinger_risk(&rho, &x, &k, &xcheck).map_err(err)?;
    Ok(relative_gap(h, s))
}

/// Random estimation problem `(rho, X, kappa)`; every fifth state is rank one.
fn random_problem<R: Rng>(rng: &mut R, i: usize) -> (DensityOperator, HermitianOperator, QuantumChannel) {
    let d = random::dimension(rng, 2, 4);
    let d_out = random::dimension(rng, 2, 4);
    let n_kraus = random::dimension(rng, 1, 3);
    let rank = if i.is_multiple_of(5) { 1 } else { d };
    let rho = random::density_operator_with_rank(rng, d, rank);
    let x = random::hermitian_operator(rng, d);
    let k = random::channel(rng, d, d_out, n_kraus);
    (rho, x, k)
}

/// Returns the risk-formula check and the optimality check.
pub fn personick_optimality(exec: Execution, seed: u64, n: usize, perturbations: usize) -> [CheckOutcome; 2] {
    let pairs = sweep::map_indexed(exec, n, |i| optimality_instance(seed, i, perturbations));
    let (formula, optimality) = pairs
        .into_iter()
        .map(|r| match r {
            Ok((a, b)) => (Ok(a), Ok(b)),
            Err(e) => (Err(e.clone()), Err(e)),
        })
        .unzip();
    [
        gate("personick_risk_formula", RISK_FORMULA_TOL, formula),
        gate("personick_optimality", OPTIMALITY_TOL, optimality),
    ]
}

fn optimality_instance(seed: u64, i: usize, perturbations: usize) -> Result<(f64, f64), String> {
    let mut rng = rng_for(seed, 2, i);
    let (rho, x, k) = random_problem(&mut rng, i);
    let best = personick_estimator(&rho, &x, &k).map_err(err)?;
    let direct = schrodinger_risk(&rho, &x, &k, &best.estimator).map_err(err)?;
    let scale = 1.0 + direct.abs();
    let formula_gap = (direct - best.min_risk).abs() / scale;
    let mut violation = f64::NEG_INFINITY;
    for _ in 0..perturbations {
        let h = random::hermitian_operator(&mut rng, k.dim_out());
        let eps = 10f64.powf(uniform(&mut rng, -4.0, 0.0));
        let moved = best.estimator.add(&h.scale(eps));
        let risk = schrodinger_risk(&rho, &x, &k, &moved).map_err(err)?;
        violation = violation.max((best.min_risk - risk) / scale);
    }
    Ok((formula_gap, violation))
}

/// Returns the random classical-embedding check and the binary symmetric
/// channel check.
pub fn classical_reduction(exec: Execution, seed: u64, n: usize) -> [CheckOutcome; 2] {
    let values = sweep::map_indexed(exec, n, |i| classical_gap(seed, i));
    [
        gate("classical_reduction", CLASSICAL_TOL, values),
        gate("classical_bsc", BSC_TOL, vec![bsc_gap()]),
    ]
}

/// `E[X | Y = y]` by enumerating the joint distribution.
fn bayes_enumeration(px: &[f64], c: &ClassicalChannel, xvals: &[f64]) -> Vec<Option<f64>> {
    let mut joint = vec![vec![0.0; px.len()]; c.n_out()];
    for (x, &p) in px.iter().enumerate() {
        for (y, row) in joint.iter_mut().enumerate() {
            row[x] = p * c.prob(y, x);
        }
    }
    joint
        .iter()
        .map(|row| {
            let py: f64 = row.iter().sum();
            (py > 1e-12).then(|| row.iter().zip(xvals).map(|(p, v)| p * v).sum::<f64>() / py)
        })
        .collect()
}

fn embedded_gap(px: &[f64], c: &ClassicalChannel, xvals: &[f64]) -> Measure {
    let oracle = bayes_enumeration(px, c, xvals);
    let (rho, x) = embed_classical(px, xvals).map_err(err)?;
    let est = personick_estimator(&rho, &x, &QuantumChannel::from_classical(c)).map_err(err)?;
    let direct = classical_conditional_expectation(px, c, xvals).map_err(err)?;
    let m = est.estimator.matrix();
    let mut gap = m.max_off_diagonal();
    for (y, expected) in oracle.iter().enumerate() {
        if let Some(v) = expected {
            gap = gap.max((m[(y, y)].re - v).abs()).max(m[(y, y)].im.abs());
            let d = direct[y].estimate.ok_or("conditional expectation missing")?;
            gap = gap.max((d - v).abs());
        }
    }
    Ok(gap)
}

fn classical_gap(seed: u64, i: usize) -> Measure {
    let mut rng = rng_for(seed, 3, i);
    let n_in = random::dimension(&mut rng, 2, 6);
    let n_out = random::dimension(&mut rng, 2, 6);
    let px = random::probability_vector(&mut rng, n_in);
    let c = random::classical_channel(&mut rng, n_in, n_out);
    let xvals: Vec<f64> = (0..n_in).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();
    embedded_gap(&px, &c, &xvals)
}

/// Uniform prior on `{0, 1}` through a flip-0.2 channel: estimates 0.2 and 0.8.
fn bsc_gap() -> Measure {
    let c = ClassicalChannel::binary_symmetric(0.2).map_err(err)?;
    let (rho, x) = embed_classical(&[0.5, 0.5], &[0.0, 1.0]).map_err(err)?;
    let est = personick_estimator(&rho, &x, &QuantumChannel::from_classical(&c)).map_err(err)?;
    let m = est.estimator.matrix();
    Ok((m[(0, 0)].re - 0.2)
        .abs()
        .max((m[(1, 1)].re - 0.8).abs())
        .max(m.max_off_diagonal()))
}

/// Returns the estimator-diagonal check and the complex-real-part check.
pub fn weak_values(exec: Execution, seed: u64, n: usize) -> [CheckOutcome; 2] {
    let pairs = sweep::map_indexed(exec, n, |i| weak_value_instance(seed, i));
    let (diag, complex) = pairs
        .into_iter()
        .map(|r| match r {
            Ok((a, b)) => (Ok(a), Ok(b)),
            Err(e) => (Err(e.clone()), Err(e)),
        })
        .unzip();
    [
        gate("weak_value_diagonal", WEAK_VALUE_TOL, diag),
        gate("complex_weak_value_real_part", COMPLEX_WEAK_VALUE_TOL, complex),
    ]
}

fn weak_value_instance(seed: u64, i: usize) -> Result<(f64, f64), String> {
    let mut rng = rng_for(seed, 4, i);
    let d = random::dimension(&mut rng, 2, 3);
    let outcomes = random::dimension(&mut rng, 2, 4);
    let rho = random::density_operator(&mut rng, d);
    let x = random::hermitian_operator(&mut rng, d);
    let povm = random::povm(&mut rng, d, outcomes);
    let k = QuantumChannel::from_povm(&povm).map_err(err)?;
    let est = personick_estimator(&rho, &x, &k).map_err(err)?;
    let (mut diag_gap, mut complex_gap) = (est.estimator.max_off_diagonal(), 0.0f64);
    for (y, label) in povm.labels().iter().enumerate() {
        let wv = weak_value(&rho, &x, &povm, label).map_err(err)?;
        let scale = 1.0 + wv.abs();
        diag_gap = diag_gap.max((est.estimator[(y, y)].re - wv).abs() / scale);
        let cwv = complex_weak_value(&rho, x.matrix(), &povm, label).map_err(err)?;
        complex_gap = complex_gap.max((cwv.re - wv).abs() / scale);
    }
    Ok((diag_gap, complex_gap))
}

/// Random one-parameter family and channel for the Fisher-information sweep.
pub struct MonotonicityInstance {
    pub family: StateFamily,
    pub family_name: &'static str,
    pub channel: QuantumChannel,
    pub theta: f64,
}

pub fn monotonicity_instance(seed: u64, index: usize, dim_min: usize, dim_max: usize) -> MonotonicityInstance {
    let mut rng = rng_for(seed, 5, index);
    let d = random::dimension(&mut rng, dim_min, dim_max);
    let d_out = random::dimension(&mut rng, dim_min, dim_max);
    let n_kraus = random::dimension(&mut rng, 1, 3);
    let (family, family_name, theta) = random_family(&mut rng, index % 4, d);
    let channel = random::channel(&mut rng, d, d_out, n_kraus);
    MonotonicityInstance {
        family,
        family_name,
        channel,
        theta,
    }
}

fn random_family<R: Rng>(rng: &mut R, kind: usize, d: usize) -> (StateFamily, &'static str, f64) {
    let rho0 = random::density_operator(rng, d);
    match kind {
        0 => {
            let h = random::hermitian_operator(rng, d);
            let fam = StateFamily::unitary_rotation(rho0, h).expect("matching dimensions");
            (fam, "unitary", uniform(rng, -1.0, 1.0))
        }
        1 => (StateFamily::depolarizing(rho0), "depolarizing", uniform(rng, 0.1, 0.9)),
        2 => {
            let p0 = random::probability_vector(rng, d);
            let g: Vec<f64> = (0..d).map(|_| uniform(rng, -1.0, 1.0)).collect();
            let fam = StateFamily::diagonal_exponential(p0, g).expect("valid weights");
            (fam, "diagonal_exponential", uniform(rng, -1.0, 1.0))
        }
        _ => {
            // Traceless direction scaled so the state stays positive definite
            // for |theta| <= 1.
            let h = random::hermitian_operator(rng, d);
            let shift = h.trace_re() / d as f64;
            let traceless = h.sub(&HermitianOperator::identity(d).scale(shift));
            let spec = eig_hermitian(&traceless).expect("hermitian");
            let norm = spec.max_eigenvalue().abs().max(spec.min_eigenvalue().abs());
            let lambda_min = eig_hermitian(&rho0).expect("hermitian").min_eigenvalue();
            let direction = traceless.scale(0.5 * lambda_min / norm);
            let fam = StateFamily::affine(rho0, direction).expect("traceless direction");
            (fam, "affine", uniform(rng, -1.0, 1.0))
        }
    }
}

pub fn monotonicity_report(inst: &MonotonicityInstance) -> Result<MonotonicityReport, Error> {
    monotonicity_check(&inst.family, &inst.channel, inst.theta)
}

/// Returns the slack, agreement, identity-channel, depolarizing-channel and
/// diagonal-family checks.
pub fn qfi_monotonicity(exec: Execution, seed: u64, n: usize) -> [CheckOutcome; 5] {
    let rows = sweep::map_indexed(exec, n, |i| {
        let inst = monotonicity_instance(seed, i, 2, 4);
        let random = monotonicity_report(&inst).map_err(err)?;
        let d = inst.family.dim();
        let identity = monotonicity_check(&inst.family, &QuantumChannel::identity(d), inst.theta).map_err(err)?;
        let depol =
            monotonicity_check(&inst.family, &QuantumChannel::fully_depolarizing(d), inst.theta).map_err(err)?;
        Ok::<_, String>((random, identity, depol))
    });
    let pick = |f: &dyn Fn(&(MonotonicityReport, MonotonicityReport, MonotonicityReport)) -> f64| -> Vec<Measure> {
        rows.iter().map(|r| r.as_ref().map(f).map_err(|e| e.clone())).collect()
    };
    [
        gate("qfi_monotonicity", MONOTONICITY_TOL, pick(&|r| -r.0.slack)),
        gate("qfi_slack_equals_risk", MONOTONICITY_TOL, pick(&|r| r.0.agreement_gap)),
        gate("qfi_identity_channel", IDENTITY_SLACK_TOL, pick(&|r| r.1.slack.abs())),
        gate(
            "qfi_depolarizing_channel",
            DEPOLARIZED_QFI_TOL,
            pick(&|r| r.2.j_out.abs()),
        ),
        gate("qfi_diagonal_family", MONOTONICITY_TOL, diagonal_family_gaps()),
    ]
}

/// `diag((1 + theta) / 2, (1 - theta) / 2)` has Fisher information
/// `1 / (1 - theta^2)`.
fn diagonal_family_gaps() -> Vec<Measure> {
    let family = StateFamily::affine(
        DensityOperator::maximally_mixed(2),
        HermitianOperator::from_real_diagonal(&[0.5, -0.5]),
    )
    .expect("traceless direction");
    [0.0, 0.5]
        .iter()
        .map(|&theta| {
            let rep = monotonicity_check(&family, &QuantumChannel::identity(2), theta).map_err(err)?;
            Ok((rep.j_in - 1.0 / (1.0 - theta * theta)).abs())
        })
        .collect()
}

/// Symmetric covariance with eigenvalues in `[0.5, 1.5]`.
fn random_covariance<R: Rng>(rng: &mut R, dim: usize) -> Vec<Vec<f64>> {
    let b: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| uniform(rng, -0.5, 0.5)).collect())
        .collect();
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let bbt: f64 = (0..dim).map(|k| b[i][k] * b[j][k]).sum::<f64>() / dim as f64;
                    bbt + if i == j { 0.5 } else { 0.0 }
                })
                .collect()
        })
        .collect()
}

fn random_wigner<R: Rng>(rng: &mut R, n_modes: usize, weight: f64) -> GaussianWigner {
    let dim = 2 * n_modes;
    let mean = (0..dim).map(|_| uniform(rng, -1.5, 1.5)).collect();
    GaussianWigner::new(weight, mean, random_covariance(rng, dim)).expect("valid random Gaussian")
}

pub struct GaussianInstance {
    pub state: GaussianWigner,
    pub effect: GaussianWigner,
    pub observable: LinearQuadrature,
}

pub fn gaussian_instance(seed: u64, n_modes: usize, index: usize) -> GaussianInstance {
    let mut rng = rng_for(seed, 6 + n_modes as u64, index);
    let state = random_wigner(&mut rng, n_modes, 1.0);
    let weight = uniform(&mut rng, 0.2, 2.0);
    let effect = random_wigner(&mut rng, n_modes, weight);
    let coeffs = (0..2 * n_modes).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
    let observable = LinearQuadrature::new(coeffs, uniform(&mut rng, -1.0, 1.0)).expect("finite coefficients");
    GaussianInstance {
        state,
        effect,
        observable,
    }
}

fn gaussian_gap(seed: u64, n_modes: usize, index: usize) -> Measure {
    let inst = gaussian_instance(seed, n_modes, index);
    let closed = quadrature_estimator(&inst.state, &inst.effect, &inst.observable).map_err(err)?;
    let numeric = numeric_quadrature_estimate_with(
        Execution::Sequential,
        &inst.state,
        &inst.effect,
        &inst.observable,
        &GridSpec::for_modes(n_modes),
    )
    .map_err(err)?;
    Ok((numeric.value - closed).abs() / closed.abs().max(1.0))
}

fn flat_limit_gap(seed: u64, n_modes: usize, index: usize) -> Measure {
    let inst = gaussian_instance(seed, n_modes, index);
    let dim = 2 * n_modes;
    let flat_cov = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1e6 } else { 0.0 }).collect())
        .collect();
    let flat = GaussianWigner::new(1.0, inst.effect.mean().to_vec(), flat_cov).map_err(err)?;
    let est = quadrature_estimator(&inst.state, &flat, &inst.observable).map_err(err)?;
    Ok((est - inst.observable.eval(inst.state.mean())).abs())
}

/// Returns the one-mode and two-mode grid-oracle checks and the flat-effect
/// check.
pub fn gaussian_oracle(exec: Execution, seed: u64, one_mode: usize, two_mode: usize) -> [CheckOutcome; 3] {
    let one = sweep::map_indexed(exec, one_mode, |i| gaussian_gap(seed, 1, i));
    let two = sweep::map_indexed(exec, two_mode, |i| gaussian_gap(seed, 2, i));
    let flat = sweep::map_indexed(exec, one_mode + two_mode, |i| {
        if i < one_mode {
            flat_limit_gap(seed, 1, i)
        } else {
            flat_limit_gap(seed, 2, i - one_mode)
        }
    });
    [
        gate("gaussian_oracle_one_mode", GAUSSIAN_TOL, one),
        gate("gaussian_oracle_two_mode", GAUSSIAN_TOL, two),
        gate("gaussian_flat_effect", FLAT_LIMIT_TOL, flat),
    ]
}

/// Returns the Hermiticity and trace-identity checks for Jordan products.
pub fn jordan_identities(exec: Execution, seed: u64, n: usize) -> [CheckOutcome; 2] {
    let pairs = sweep::map_indexed(exec, n, |i| {
        let mut rng = rng_for(seed, 9, i);
        let d = random::dimension(&mut rng, 2, 8);
        let x = random::hermitian(&mut rng, d);
        let y = random::hermitian(&mut rng, d);
        let z = random::hermitian(&mut rng, d);
        let j = jordan_product(&x, &y).map_err(err)?;
        let herm = j.hermiticity_defect() / (1.0 + j.max_abs());
        let scale = 1.0 + x.frobenius_norm() * y.frobenius_norm() * z.frobenius_norm();
        let trace = jordan_trace_identity_check(&x, &y, &z).map_err(err)? / scale;
        Ok::<_, String>((herm, trace))
    });
    let (herm, trace) = pairs
        .into_iter()
        .map(|r| match r {
            Ok((a, b)) => (Ok(a), Ok(b)),
            Err(e) => (Err(e.clone()), Err(e)),
        })
        .unzip();
    [
        gate("jordan_hermiticity", JORDAN_TOL, herm),
        gate("jordan_trace_identity", JORDAN_TOL, trace),
    ]
}

/// Random channels keep random states normalized and positive.
pub fn channel_preservation(exec: Execution, seed: u64, n: usize) -> CheckOutcome {
    let values = sweep::map_indexed(exec, n, |i| {
        let mut rng = rng_for(seed, 10, i);
        let d_in = random::dimension(&mut rng, 2, 4);
        let d_out = random::dimension(&mut rng, 2, 4);
        let n_kraus = random::dimension(&mut rng, 1, 4);
        let k = random::channel(&mut rng, d_in, d_out, n_kraus);
        let rho = random::density_operator(&mut rng, d_in);
        let out = k.apply_hermitian(&rho).map_err(err)?;
        let min = eig_hermitian(&out).map_err(err)?.min_eigenvalue();
        Ok((out.trace_re() - 1.0).abs().max(-min))
    });
    gate("channel_trace_positivity", CHANNEL_TOL, values)
}

/// A Kraus set with `sum K^dag K != I` must be rejected under the name "cptp".
pub fn cptp_rejection() -> CheckOutcome {
    let corrupted = vec![ComplexMatrix::from_real_diagonal(&[1.0, 0.5])];
    let measure = match QuantumChannel::new(2, 2, corrupted) {
        Err(Error::Invariant { invariant: "cptp", .. }) => Ok(0.0),
        Err(other) => Err(format!("rejected for the wrong reason: {other}")),
        Ok(_) => Err("corrupted channel was accepted".to_string()),
    };
    gate("cptp_rejection", 0.0, vec![measure])
}
