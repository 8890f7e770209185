//! Symmetric logarithmic derivatives, quantum Fisher information, and the
//! monotonicity of the Fisher information under parameter-independent
//! channels.
//!
//! The SLD `S` of a family `rho(theta)` solves `d rho / d theta = rho o S`,
//! the same Jordan equation as the optimal estimator. Pushing the family
//! through a channel turns `S_rho` into the optimal estimate of itself, and
//! the drop in Fisher information equals the minimum risk of that estimate.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::estimators::personick_estimator;
use crate::linalg::{
    eig_hermitian, solve_jordan_with, ComplexMatrix, DensityOperator, HermitianOperator, Spectrum, C64,
};
use crate::tol;

type StateFn = dyn Fn(f64) -> Result<DensityOperator> + Send + Sync;
type DerivativeFn = dyn Fn(f64) -> Result<HermitianOperator> + Send + Sync;

/// One-parameter family of density operators.
#[derive(Clone)]
pub struct StateFamily {
    dim: usize,
    state: Arc<StateFn>,
    derivative: Option<Arc<DerivativeFn>>,
    fd_step: f64,
}

impl fmt::Debug for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateFamily")
            .field("dim", &self.dim)
            .field("analytic_derivative", &self.derivative.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl StateFamily {
    /// Family without an analytic derivative; derivatives use central
    /// differences.
    pub fn new(dim: usize, state: impl Fn(f64) -> Result<DensityOperator> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            state: Arc::new(state),
            derivative: None,
            fd_step: tol::FD_STEP,
        }
    }

    pub fn with_derivative(
        mut self,
        derivative: impl Fn(f64) -> Result<HermitianOperator> + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    /// Drops any analytic derivative so central differences are used.
    pub fn finite_difference(mut self, step: f64) -> Self {
        self.derivative = None;
        self.fd_step = step;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn state_at(&self, theta: f64) -> Result<DensityOperator> {
        let rho = (self.state)(theta)?;
        if rho.dim() != self.dim {
            return Err(Error::dims("state_at", self.dim, rho.dim()));
        }
        Ok(rho)
    }

    /// `d rho / d theta`, analytic when available.
    ///
    /// The central-difference path removes the (rounding-level) trace of the
    /// difference quotient, since every member has unit trace.
    pub fn derivative_at(&self, theta: f64) -> Result<HermitianOperator> {
        let d = match &self.derivative {
            Some(df) => {
                let d = df(theta)?;
                if d.dim() != self.dim {
                    return Err(Error::dims("derivative_at", self.dim, d.dim()));
                }
                let tr = d.trace_re();
                if tr.abs() > tol::TRACE_TOL * d.max_abs().max(1.0) {
                    return Err(Error::invariant("trace", format!("derivative has trace {tr:e}")));
                }
                d
            }
            None => {
                let h = self.fd_step;
                let plus = self.state_at(theta + h)?;
                let minus = self.state_at(theta - h)?;
                let quotient = plus.sub(&minus).scale(0.5 / h);
                let drift = quotient.trace_re() / self.dim as f64;
                quotient.sub(&HermitianOperator::identity(self.dim).scale(drift))
            }
        };
        Ok(d)
    }

    /// `rho(theta) = base + theta * direction` for traceless `direction`.
    pub fn affine(base: DensityOperator, direction: HermitianOperator) -> Result<Self> {
        if base.dim() != direction.dim() {
            return Err(Error::dims("affine family", base.dim(), direction.dim()));
        }
        let tr = direction.trace_re();
        if tr.abs() > tol::TRACE_TOL {
            return Err(Error::invariant("trace", format!("direction has trace {tr:e}")));
        }
        let dim = base.dim();
        let dir = direction.clone();
        Ok(Self::new(dim, move |theta| {
            DensityOperator::from_hermitian(base.add(&dir.scale(theta)))
        })
        .with_derivative(move |_| Ok(direction.clone())))
    }

    /// `rho(theta) = (1 - theta) rho0 + theta I / d`, valid for `theta` in `[0, 1]`.
    pub fn depolarizing(rho0: DensityOperator) -> Self {
        let d = rho0.dim();
        let mixed = DensityOperator::maximally_mixed(d);
        let direction = mixed.sub(&rho0);
        Self::affine(rho0, direction).expect("difference of unit-trace states is traceless")
    }

    /// `rho(theta) = exp(-i theta H) rho0 exp(i theta H)`.
    pub fn unitary_rotation(rho0: DensityOperator, generator: HermitianOperator) -> Result<Self> {
        if rho0.dim() != generator.dim() {
            return Err(Error::dims("unitary family", rho0.dim(), generator.dim()));
        }
        let spectrum = eig_hermitian(&generator)?;
        let dim = rho0.dim();
        let evolve = Arc::new(move |theta: f64| -> Result<DensityOperator> {
            let u = unitary_from_spectrum(&spectrum, theta);
            DensityOperator::new(&(&u * rho0.matrix()) * &u.adjoint())
        });
        let evolve_state = evolve.clone();
        Ok(
            Self::new(dim, move |theta| evolve_state(theta)).with_derivative(move |theta| {
                // d rho / d theta = -i [H, rho(theta)]
                let rho = evolve(theta)?;
                let comm = &(generator.matrix() * rho.matrix()) - &(rho.matrix() * generator.matrix());
                HermitianOperator::new(comm.scale(C64::new(0.0, -1.0)))
            }),
        )
    }

    /// Diagonal exponential family `p_i(theta) ∝ p0_i exp(theta g_i)`.
    pub fn diagonal_exponential(p0: Vec<f64>, generator: Vec<f64>) -> Result<Self> {
        if p0.len() != generator.len() || p0.is_empty() {
            return Err(Error::dims("diagonal exponential family", p0.len(), generator.len()));
        }
        if p0.iter().any(|p| !p.is_finite() || *p < 0.0) || p0.iter().sum::<f64>() <= 0.0 {
            return Err(Error::invariant(
                "probability",
                "base weights must be nonnegative with positive sum",
            ));
        }
        let dim = p0.len();
        let g = Arc::new(generator);
        let g_state = g.clone();
        let p_state = p0.clone();
        Ok(Self::new(dim, move |theta| {
            DensityOperator::from_probabilities(&exponential_tilt(&p_state, &g_state, theta))
        })
        .with_derivative(move |theta| {
            // d p_i / d theta = p_i (g_i - <g>)
            let p = exponential_tilt(&p0, &g, theta);
            let mean: f64 = p.iter().zip(g.iter()).map(|(p, g)| p * g).sum();
            let dp: Vec<f64> = p.iter().zip(g.iter()).map(|(p, g)| p * (g - mean)).collect();
            Ok(HermitianOperator::from_real_diagonal(&dp))
        }))
    }
}

fn exponential_tilt(p0: &[f64], g: &[f64], theta: f64) -> Vec<f64> {
    let shift = g.iter().map(|g| theta * g).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = p0.iter().zip(g).map(|(p, g)| p * (theta * g - shift).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

fn unitary_from_spectrum(spectrum: &Spectrum, theta: f64) -> ComplexMatrix {
    let v = &spectrum.eigenvectors;
    let phases: Vec<C64> = spectrum
        .eigenvalues
        .iter()
        .map(|l| C64::from_polar(1.0, -theta * l))
        .collect();
    let n = phases.len();
    let d = ComplexMatrix::from_fn(n, n, |i, j| if i == j { phases[i] } else { C64::new(0.0, 0.0) });
    &(v * &d) * &v.adjoint()
}

/// Symmetric logarithmic derivative at one parameter value.
#[derive(Clone, Debug, PartialEq)]
pub struct Sld {
    pub operator: HermitianOperator,
    /// `||rho o S - d rho / d theta||_F`.
    pub residual: f64,
    pub support_rank: usize,
}

/// Solves `d rho / d theta = rho o S` on the support of `rho(theta)`.
///
/// An inconsistent equation (a derivative with weight on the kernel of
/// `rho`, which happens where the rank changes with `theta`) is an error.
pub fn sld(family: &StateFamily, theta: f64) -> Result<Sld> {
    let rho = family.state_at(theta)?;
    let derivative = family.derivative_at(theta)?;
    sld_of(&rho, &derivative)
}

fn sld_of(rho: &DensityOperator, derivative: &HermitianOperator) -> Result<Sld> {
    let spectrum = eig_hermitian(rho)?;
    let sol = solve_jordan_with(&spectrum, rho, derivative)?;
    if sol.residual > tol::RESIDUAL_WARN * derivative.frobenius_norm().max(1.0) {
        return Err(Error::numerical(
            "sld",
            format!(
                "derivative not supported by rho (rank {}, residual {:e}); the rank changes at this parameter",
                sol.support_rank, sol.residual
            ),
        ));
    }
    Ok(Sld {
        operator: sol.solution,
        residual: sol.residual,
        support_rank: sol.support_rank,
    })
}

/// Quantum Fisher information `tr rho S^2`.
pub fn qfi(rho: &DensityOperator, s: &HermitianOperator) -> Result<f64> {
    if rho.dim() != s.dim() {
        return Err(Error::dims("qfi", rho.dim(), s.dim()));
    }
    Ok(rho.trace_product(&s.jordan(s)?))
}

/// The family `kappa(rho(theta))`, with derivative `kappa(d rho / d theta)`.
pub fn push_forward(family: &StateFamily, k: &QuantumChannel) -> Result<StateFamily> {
    if family.dim() != k.dim_in() {
        return Err(Error::dims("push_forward", k.dim_in(), family.dim()));
    }
    let (src, ch) = (family.clone(), k.clone());
    let (src_d, ch_d) = (family.clone(), k.clone());
    Ok(
        StateFamily::new(k.dim_out(), move |theta| ch.apply_density(&src.state_at(theta)?))
            .with_derivative(move |theta| ch_d.apply_hermitian(&src_d.derivative_at(theta)?)),
    )
}

/// Comparison of the output SLD with the optimal estimate of the input SLD.
#[derive(Clone, Debug, PartialEq)]
pub struct PushforwardReport {
    /// `S_{kappa(rho)}`.
    pub output_sld: HermitianOperator,
    /// Optimal estimator of `S_rho` through `kappa`.
    pub estimated_sld: HermitianOperator,
    /// `||output_sld - estimated_sld||_F`.
    pub gap: f64,
    /// `||kappa(rho) o S_{kappa(rho)} - kappa(rho o S_rho)||_F`.
    pub jordan_gap: f64,
    pub output_rank: usize,
}

pub fn sld_pushforward_check(family: &StateFamily, k: &QuantumChannel, theta: f64) -> Result<PushforwardReport> {
    let rho = family.state_at(theta)?;
    let s_in = sld(family, theta)?;
    let out_family = push_forward(family, k)?;
    let s_out = sld(&out_family, theta)?;
    let est = personick_estimator(&rho, &s_in.operator, k)?;
    let out_state = k.apply_hermitian(&rho)?;
    let lhs = out_state.jordan(&s_out.operator)?;
    let rhs = k.apply_hermitian(&rho.jordan(&s_in.operator)?)?;
    Ok(PushforwardReport {
        gap: (s_out.operator.matrix() - est.estimator.matrix()).frobenius_norm(),
        jordan_gap: (lhs.matrix() - rhs.matrix()).frobenius_norm(),
        output_rank: s_out.support_rank,
        output_sld: s_out.operator,
        estimated_sld: est.estimator,
    })
}

/// Fisher information before and after a channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub j_in: f64,
    pub j_out: f64,
    /// `j_in - j_out`.
    pub slack: f64,
    /// Minimum risk of estimating `S_rho` through the channel.
    pub estimation_risk: f64,
    /// `|slack - estimation_risk|`.
    pub agreement_gap: f64,
    pub input_rank: usize,
    pub output_rank: usize,
}

pub fn monotonicity_check(family: &StateFamily, k: &QuantumChannel, theta: f64) -> Result<MonotonicityReport> {
    let rho = family.state_at(theta)?;
    let s_in = sld(family, theta)?;
    let j_in = qfi(&rho, &s_in.operator)?;
    let out_family = push_forward(family, k)?;
    let out_state = out_family.state_at(theta)?;
    let s_out = sld(&out_family, theta)?;
    let j_out = qfi(&out_state, &s_out.operator)?;
    let est = personick_estimator(&rho, &s_in.operator, k)?;
    let slack = j_in - j_out;
    Ok(MonotonicityReport {
        j_in,
        j_out,
        slack,
        estimation_risk: est.min_risk,
        agreement_gap: (slack - est.min_risk).abs(),
        input_rank: s_in.support_rank,
        output_rank: s_out.support_rank,
    })
}
