//! Mean-square retrodiction: risk functionals in both pictures, the optimal
//! (Personick) estimator and its classical, measurement and complex forms.

use serde::{Deserialize, Serialize};

use crate::channels::{ClassicalChannel, Povm, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, embed, pseudo_inverse_with, solve_jordan_with, trace_of_product, unitarity_defect, ComplexMatrix,
    DensityOperator, HermitianOperator, C64,
};
use crate::tol;

/// Optimal Hermitian estimator and its risk.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationResult {
    pub estimator: HermitianOperator,
    pub min_risk: f64,
    /// `||kappa(rho) o Xc - kappa(rho o X)||_F`.
    pub residual: f64,
    /// Rank of `kappa(rho)`.
    pub support_rank: usize,
    /// Set when the residual exceeds the warning threshold.
    pub residual_warning: bool,
}

/// Optimal unconstrained (possibly non-Hermitian) estimator and its risk.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexEstimationResult {
    pub estimator: ComplexMatrix,
    pub min_risk: f64,
    /// `||Xc kappa(rho) - kappa(X rho)||_F`.
    pub residual: f64,
    pub support_rank: usize,
    pub residual_warning: bool,
}

/// Conditional estimate for one outcome of a classical problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalValue {
    pub probability: f64,
    /// `None` when the outcome probability is below the conditioning floor.
    pub estimate: Option<f64>,
}

fn check_dims(op: &'static str, rho: &DensityOperator, x_dim: usize, k: &QuantumChannel) -> Result<()> {
    if rho.dim() != k.dim_in() {
        return Err(Error::dims(op, format!("state of dimension {}", k.dim_in()), rho.dim()));
    }
    if x_dim != k.dim_in() {
        return Err(Error::dims(
            op,
            format!("observable of dimension {}", k.dim_in()),
            x_dim,
        ));
    }
    Ok(())
}

fn real_part(op: &'static str, z: C64, scale: f64) -> Result<f64> {
    if z.im.abs() > 1e-12 * (1.0 + scale) {
        return Err(Error::numerical(op, format!("risk has imaginary part {:e}", z.im)));
    }
    Ok(z.re)
}

fn residual_warning(residual: f64, rhs_norm: f64) -> bool {
    residual > tol::RESIDUAL_WARN * rhs_norm.max(1.0)
}

/// Schrodinger-picture risk
/// `tr rho X^2 - 2 tr Xc kappa(rho o X) + tr kappa(rho) Xc^2`.
pub fn schrodinger_risk(
    rho: &DensityOperator,
    x: &HermitianOperator,
    k: &QuantumChannel,
    xcheck: &HermitianOperator,
) -> Result<f64> {
    check_dims("schrodinger_risk", rho, x.dim(), k)?;
    if xcheck.dim() != k.dim_out() {
        return Err(Error::dims(
            "schrodinger_risk",
            format!("estimator of dimension {}", k.dim_out()),
            xcheck.dim(),
        ));
    }
    let prior = trace_of_product(rho, &(x.matrix() * x.matrix()));
    let cross = trace_of_product(xcheck, &k.apply(rho.jordan(x)?.matrix())?);
    let spread = trace_of_product(&k.apply(rho)?, &(xcheck.matrix() * xcheck.matrix()));
    let risk = prior - cross * 2.0 + spread;
    real_part(
        "schrodinger_risk",
        risk,
        prior.norm() + 2.0 * cross.norm() + spread.norm(),
    )
}

/// Heisenberg-picture risk `tr rho0 (X - U^dag Xc U)^2` on the full space
/// `dims`, with `X` acting on subsystem `estimand_factor` and `Xc` on
/// subsystem `estimator_factor`.
pub fn heisenberg_risk(
    rho0: &DensityOperator,
    x: &HermitianOperator,
    estimand_factor: usize,
    xcheck: &HermitianOperator,
    estimator_factor: usize,
    dims: &[usize],
    u: &ComplexMatrix,
) -> Result<f64> {
    let total: usize = dims.iter().product();
    if rho0.dim() != total {
        return Err(Error::dims("heisenberg_risk", total, rho0.dim()));
    }
    if !u.is_square() || u.nrows() != total {
        return Err(Error::dims(
            "heisenberg_risk",
            format!("{total}x{total} unitary"),
            format!("{}x{}", u.nrows(), u.ncols()),
        ));
    }
    let defect = unitarity_defect(u);
    if defect > tol::UNITARY_TOL {
        return Err(Error::invariant("unitary", format!("max |U^dag U - I| = {defect:e}")));
    }
    let x_full = embed(x, dims, estimand_factor)?;
    let xc_full = embed(xcheck, dims, estimator_factor)?;
    let evolved = &(&u.adjoint() * &xc_full) * u;
    let diff = &x_full - &evolved;
    let risk = trace_of_product(rho0, &(&diff * &diff));
    real_part("heisenberg_risk", risk, risk.norm())
}

/// Optimal Hermitian estimator: solves `kappa(rho) o Xc = kappa(rho o X)` on
/// the support of `kappa(rho)` and evaluates the minimum risk
/// `tr rho X^2 - tr kappa(rho) Xc^2`.
pub fn personick_estimator(
    rho: &DensityOperator,
    x: &HermitianOperator,
    k: &QuantumChannel,
) -> Result<EstimationResult> {
    check_dims("personick_estimator", rho, x.dim(), k)?;
    let output = k.apply_hermitian(rho)?;
    let target = k.apply_hermitian(&rho.jordan(x)?)?;
    let spectrum = eig_hermitian(&output)?;
    let min = spectrum.min_eigenvalue();
    if min < -tol::PSD_TOL * spectrum.scale().max(1.0) {
        return Err(Error::invariant("psd", format!("kappa(rho) has eigenvalue {min:e}")));
    }
    let sol = solve_jordan_with(&spectrum, &output, &target)?;
    let prior = rho.trace_product(&x.jordan(x)?);
    let explained = output.trace_product(&sol.solution.jordan(&sol.solution)?);
    Ok(EstimationResult {
        min_risk: prior - explained,
        residual: sol.residual,
        support_rank: sol.support_rank,
        residual_warning: residual_warning(sol.residual, target.frobenius_norm()),
        estimator: sol.solution,
    })
}

fn outcome_probability(rho: &DensityOperator, p: &Povm, label: &str) -> Result<(f64, usize)> {
    if rho.dim() != p.dim() {
        return Err(Error::dims("weak_value", p.dim(), rho.dim()));
    }
    let y = p.index_of(label)?;
    let prob = p.effects()[y].trace_product(rho);
    if prob <= tol::WEAK_VALUE_FLOOR {
        return Err(Error::ZeroProbability {
            outcome: label.to_string(),
            probability: prob,
        });
    }
    Ok((prob, y))
}

/// Real weak value `tr E(y)(rho o X) / tr E(y) rho`.
pub fn weak_value(rho: &DensityOperator, x: &HermitianOperator, p: &Povm, label: &str) -> Result<f64> {
    if x.dim() != p.dim() {
        return Err(Error::dims("weak_value", p.dim(), x.dim()));
    }
    let (prob, y) = outcome_probability(rho, p, label)?;
    Ok(p.effects()[y].trace_product(&rho.jordan(x)?) / prob)
}

/// Complex weak value `tr E(y) X rho / tr E(y) rho`.
pub fn complex_weak_value(rho: &DensityOperator, x: &ComplexMatrix, p: &Povm, label: &str) -> Result<C64> {
    if !x.is_square() || x.nrows() != p.dim() {
        return Err(Error::dims("complex_weak_value", p.dim(), x.nrows()));
    }
    let (prob, y) = outcome_probability(rho, p, label)?;
    Ok(trace_of_product(p.effects()[y].matrix(), &(x * rho.matrix())) / prob)
}

/// Diagonal state and observable for a classical estimation problem.
pub fn embed_classical(px: &[f64], xvals: &[f64]) -> Result<(DensityOperator, HermitianOperator)> {
    if px.len() != xvals.len() {
        return Err(Error::dims("embed_classical", px.len(), xvals.len()));
    }
    check_distribution(px)?;
    Ok((
        DensityOperator::from_probabilities(px)?,
        HermitianOperator::from_real_diagonal(xvals),
    ))
}

fn check_distribution(px: &[f64]) -> Result<()> {
    if px.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invariant(
            "probability",
            "negative or non-finite prior probability",
        ));
    }
    let total: f64 = px.iter().sum();
    if (total - 1.0).abs() > tol::CLASSICAL_SUM_TOL {
        return Err(Error::invariant("probability", format!("prior sums to {total}")));
    }
    Ok(())
}

/// Classical conditional expectation `sum_x P(y|x) P(x) x / P(y)` for every
/// outcome `y`.
pub fn classical_conditional_expectation(
    px: &[f64],
    c: &ClassicalChannel,
    xvals: &[f64],
) -> Result<Vec<ConditionalValue>> {
    if px.len() != c.n_in() || xvals.len() != c.n_in() {
        return Err(Error::dims(
            "classical_conditional_expectation",
            c.n_in(),
            format!("prior of length {} and values of length {}", px.len(), xvals.len()),
        ));
    }
    check_distribution(px)?;
    Ok((0..c.n_out())
        .map(|y| {
            let probability: f64 = (0..c.n_in()).map(|x| c.prob(y, x) * px[x]).sum();
            let estimate = (probability > tol::WEAK_VALUE_FLOOR)
                .then(|| (0..c.n_in()).map(|x| c.prob(y, x) * px[x] * xvals[x]).sum::<f64>() / probability);
            ConditionalValue { probability, estimate }
        })
        .collect())
}

/// Complex-risk functional
/// `tr rho X^dag X - tr kappa(rho X^dag) Xc - tr Xc^dag kappa(X rho) + tr kappa(rho) Xc^dag Xc`.
pub fn complex_risk(
    rho: &DensityOperator,
    x: &ComplexMatrix,
    k: &QuantumChannel,
    xcheck: &ComplexMatrix,
) -> Result<f64> {
    check_dims("complex_risk", rho, x.nrows(), k)?;
    if !x.is_square() || !xcheck.is_square() || xcheck.nrows() != k.dim_out() {
        return Err(Error::dims("complex_risk", k.dim_out(), xcheck.nrows()));
    }
    let xd = x.adjoint();
    let xcd = xcheck.adjoint();
    let prior = trace_of_product(rho, &(&xd * x));
    let left = trace_of_product(&k.apply(&(rho.matrix() * &xd))?, xcheck);
    let right = trace_of_product(&xcd, &k.apply(&(x * rho.matrix()))?);
    let spread = trace_of_product(&k.apply(rho)?, &(&xcd * xcheck));
    let risk = prior - left - right + spread;
    real_part(
        "complex_risk",
        risk,
        prior.norm() + left.norm() + right.norm() + spread.norm(),
    )
}

/// Optimal unconstrained estimator `Xc = kappa(X rho) kappa(rho)^+`, zero on
/// the kernel of `kappa(rho)`.
pub fn complex_estimator(
    rho: &DensityOperator,
    x: &ComplexMatrix,
    k: &QuantumChannel,
) -> Result<ComplexEstimationResult> {
    if !x.is_square() {
        return Err(Error::dims(
            "complex_estimator",
            "square observable",
            format!("{}x{}", x.nrows(), x.ncols()),
        ));
    }
    check_dims("complex_estimator", rho, x.nrows(), k)?;
    let output = k.apply_hermitian(rho)?;
    let target = k.apply(&(x * rho.matrix()))?;
    let spectrum = eig_hermitian(&output)?;
    let pinv = pseudo_inverse_with(&spectrum, tol::SUPPORT_TOL);
    let estimator = &target * pinv.matrix();
    let residual = (&(&estimator * output.matrix()) - &target).frobenius_norm();
    let prior = trace_of_product(rho, &(&x.adjoint() * x)).re;
    let explained = trace_of_product(&output, &(&estimator.adjoint() * &estimator)).re;
    Ok(ComplexEstimationResult {
        min_risk: prior - explained,
        residual,
        support_rank: spectrum.rank(tol::SUPPORT_TOL),
        residual_warning: residual_warning(residual, target.frobenius_norm()),
        estimator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::apply_dilation;
    use crate::linalg::{pauli_x, pauli_y, pauli_z, tensor};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn herm(m: ComplexMatrix) -> HermitianOperator {
        HermitianOperator::new(m).unwrap()
    }

    fn sigma_x_basis() -> Povm {
        let s = 0.5f64.sqrt();
        let basis = ComplexMatrix::from_real_rows(&[vec![s, s], vec![s, -s]]).unwrap();
        Povm::projective(&basis, vec!["+".into(), "-".into()]).unwrap()
    }

    #[test]
    fn schrodinger_risk_special_cases() {
        let rho = DensityOperator::from_probabilities(&[1.0, 0.0]).unwrap();
        let x = herm(pauli_z());
        let id = QuantumChannel::identity(2);
        assert!(schrodinger_risk(&rho, &x, &id, &x).unwrap().abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random::density_operator(&mut rng, 3);
        let x = random::hermitian_operator(&mut rng, 3);
        let k = random::channel(&mut rng, 3, 2, 2);
        let prior = rho.trace_product(&x.jordan(&x).unwrap());
        let r = schrodinger_risk(&rho, &x, &k, &HermitianOperator::zeros(2)).unwrap();
        assert!((r - prior).abs() < 1e-13);
        assert!(schrodinger_risk(&rho, &x, &k, &HermitianOperator::zeros(3)).is_err());
    }

    #[test]
    fn heisenberg_risk_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random::density_operator(&mut rng, 2);
        let env = random::density_operator(&mut rng, 2);
        let rho0 = DensityOperator::new(tensor(&rho, &env)).unwrap();
        let x = random::hermitian_operator(&mut rng, 2);
        let id = ComplexMatrix::identity(4);
        let r = heisenberg_risk(&rho0, &x, 0, &x, 0, &[2, 2], &id).unwrap();
        assert!(r.abs() < 1e-14);
        let u = random::unitary(&mut rng, 4);
        let r = heisenberg_risk(&rho0, &x, 0, &HermitianOperator::zeros(2), 1, &[2, 2], &u).unwrap();
        let prior = rho.trace_product(&x.jordan(&x).unwrap());
        assert!((r - prior).abs() < 1e-13);
        let bad = id.scale_real(2.0);
        assert!(heisenberg_risk(&rho0, &x, 0, &x, 0, &[2, 2], &bad).is_err());
    }

    #[test]
    fn pictures_agree_on_random_dilation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for keep in [0, 1] {
            let u = random::unitary(&mut rng, 4);
            let rho = random::density_operator(&mut rng, 2);
            let env = random::density_operator(&mut rng, 2);
            let x = random::hermitian_operator(&mut rng, 2);
            let xc = random::hermitian_operator(&mut rng, 2);
            let k = QuantumChannel::from_dilation(&u, &env, &[2, 2], keep).unwrap();
            let rho0 = DensityOperator::new(tensor(&rho, &env)).unwrap();
            let h = heisenberg_risk(&rho0, &x, 0, &xc, keep, &[2, 2], &u).unwrap();
            let s = schrodinger_risk(&rho, &x, &k, &xc).unwrap();
            assert!((h - s).abs() <= 1e-10 * h.abs().max(1.0), "{h} vs {s}");
        }
    }

    #[test]
    fn identity_channel_recovers_observable() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random::density_operator(&mut rng, 3);
        let x = random::hermitian_operator(&mut rng, 3);
        let r = personick_estimator(&rho, &x, &QuantumChannel::identity(3)).unwrap();
        assert!((r.estimator.matrix() - x.matrix()).max_abs() < 1e-10);
        assert!(r.min_risk.abs() < 1e-10);
        assert_eq!(r.support_rank, 3);
        assert!(!r.residual_warning);
    }

    #[test]
    fn depolarized_output_gives_prior_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random::density_operator(&mut rng, 3);
        let x = random::hermitian_operator(&mut rng, 3);
        let r = personick_estimator(&rho, &x, &QuantumChannel::fully_depolarizing(3)).unwrap();
        let mean = rho.trace_product(&x);
        let second = rho.trace_product(&x.jordan(&x).unwrap());
        assert!((r.estimator.matrix() - &ComplexMatrix::identity(3).scale_real(mean)).max_abs() < 1e-12);
        assert!((r.min_risk - (second - mean * mean)).abs() < 1e-12);
    }

    #[test]
    fn unbiased_qubit_measured_in_conjugate_basis() {
        let rho = DensityOperator::maximally_mixed(2);
        let x = herm(pauli_z());
        let k = QuantumChannel::from_povm(&sigma_x_basis()).unwrap();
        let r = personick_estimator(&rho, &x, &k).unwrap();
        assert!(r.estimator.max_abs() < 1e-15);
        assert!((r.min_risk - 1.0).abs() < 1e-15);
    }

    #[test]
    fn estimator_is_stationary_and_risk_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let rho = random::density_operator(&mut rng, 3);
            let x = random::hermitian_operator(&mut rng, 3);
            let k = random::channel(&mut rng, 3, 2, 3);
            let r = personick_estimator(&rho, &x, &k).unwrap();
            let direct = schrodinger_risk(&rho, &x, &k, &r.estimator).unwrap();
            assert!((direct - r.min_risk).abs() < 1e-9);
            assert!(r.min_risk >= -1e-9);
            for _ in 0..5 {
                let o = random::hermitian_operator(&mut rng, 2);
                for eps in [1e-3, -1e-3, 1e-1, -1e-1] {
                    let pert = r.estimator.add(&o.scale(eps));
                    assert!(schrodinger_risk(&rho, &x, &k, &pert).unwrap() >= r.min_risk - 1e-9);
                }
                let h = 1e-4;
                let plus = schrodinger_risk(&rho, &x, &k, &r.estimator.add(&o.scale(h))).unwrap();
                let minus = schrodinger_risk(&rho, &x, &k, &r.estimator.add(&o.scale(-h))).unwrap();
                assert!(((plus - minus) / (2.0 * h)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rank_deficient_output_uses_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // A pure input through a unitary channel has a rank-one image.
        let rho = random::density_operator_with_rank(&mut rng, 3, 1);
        let x = random::hermitian_operator(&mut rng, 3);
        let r = personick_estimator(&rho, &x, &QuantumChannel::identity(3)).unwrap();
        assert_eq!(r.support_rank, 1);
        assert!(r.residual < 1e-10);
        assert!(!r.residual_warning);
        let direct = schrodinger_risk(&rho, &x, &QuantumChannel::identity(3), &r.estimator).unwrap();
        assert!((direct - r.min_risk).abs() < 1e-10);
        assert!(r.min_risk.abs() < 1e-10);
    }

    #[test]
    fn weak_value_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = random::density_operator(&mut rng, 2);
        let x = random::hermitian_operator(&mut rng, 2);
        let wv = weak_value(&rho, &x, &Povm::trivial(2, "all"), "all").unwrap();
        assert!((wv - rho.trace_product(&x)).abs() < 1e-14);

        let eig = DensityOperator::from_probabilities(&[1.0, 0.0]).unwrap();
        let p = random::povm(&mut rng, 2, 3);
        let z = herm(pauli_z());
        for label in p.labels() {
            assert!((weak_value(&eig, &z, &p, label).unwrap() - 1.0).abs() < 1e-12);
        }

        let wv = weak_value(&eig, &herm(pauli_x()), &sigma_x_basis(), "+").unwrap();
        assert!((wv - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weak_value_refuses_impossible_outcomes() {
        let rho = DensityOperator::from_probabilities(&[1.0, 0.0]).unwrap();
        let err = weak_value(&rho, &herm(pauli_x()), &Povm::computational(2), "1").unwrap_err();
        assert!(matches!(err, Error::ZeroProbability { .. }));
        let err = weak_value(&rho, &herm(pauli_x()), &Povm::computational(2), "7").unwrap_err();
        assert!(matches!(err, Error::UnknownOutcome(_)));
    }

    #[test]
    fn measurement_estimator_is_diagonal_weak_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random::density_operator(&mut rng, 3);
        let x = random::hermitian_operator(&mut rng, 3);
        let p = random::povm(&mut rng, 3, 4);
        let r = personick_estimator(&rho, &x, &QuantumChannel::from_povm(&p).unwrap()).unwrap();
        assert!(r.estimator.max_off_diagonal() < 1e-10);
        for (y, label) in p.labels().iter().enumerate() {
            let wv = weak_value(&rho, &x, &p, label).unwrap();
            assert!((r.estimator[(y, y)].re - wv).abs() < 1e-10);
        }
    }

    #[test]
    fn classical_expectation_cases() {
        let px = [0.2, 0.3, 0.5];
        let xs = [1.0, -2.0, 4.0];
        let out = classical_conditional_expectation(&px, &ClassicalChannel::identity(3), &xs).unwrap();
        for (y, v) in out.iter().enumerate() {
            assert!((v.estimate.unwrap() - xs[y]).abs() < 1e-15);
        }
        let flat = ClassicalChannel::new(vec![vec![0.4; 3], vec![0.6; 3]]).unwrap();
        let mean: f64 = px.iter().zip(&xs).map(|(p, x)| p * x).sum();
        for v in classical_conditional_expectation(&px, &flat, &xs).unwrap() {
            assert!((v.estimate.unwrap() - mean).abs() < 1e-14);
        }
        let bsc = ClassicalChannel::binary_symmetric(0.2).unwrap();
        let out = classical_conditional_expectation(&[0.5, 0.5], &bsc, &[0.0, 1.0]).unwrap();
        assert!((out[0].estimate.unwrap() - 0.2).abs() < 1e-15);
        assert!((out[1].estimate.unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn classical_zero_probability_outcome_is_flagged() {
        let c = ClassicalChannel::new(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let out = classical_conditional_expectation(&[0.5, 0.5], &c, &[1.0, 3.0]).unwrap();
        assert_eq!(out[0].estimate, Some(2.0));
        assert_eq!(out[1].estimate, None);
        assert!(classical_conditional_expectation(&[0.5, 0.6], &c, &[1.0, 3.0]).is_err());
    }

    #[test]
    fn classical_reduction_matches_quantum_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let c = random::classical_channel(&mut rng, 4, 3);
        let px = random::probability_vector(&mut rng, 4);
        let xs: Vec<f64> = (0..4).map(|i| i as f64 - 1.5).collect();
        let (rho, x) = embed_classical(&px, &xs).unwrap();
        let r = personick_estimator(&rho, &x, &QuantumChannel::from_classical(&c)).unwrap();
        assert!(r.estimator.max_off_diagonal() < 1e-10);
        for (y, v) in classical_conditional_expectation(&px, &c, &xs)
            .unwrap()
            .iter()
            .enumerate()
        {
            assert!((r.estimator[(y, y)].re - v.estimate.unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn cq_ensemble_estimator_is_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let states: Vec<_> = (0..3).map(|_| random::density_operator(&mut rng, 2)).collect();
        let k = QuantumChannel::from_cq_ensemble(&states).unwrap();
        let (rho, x) = embed_classical(&[0.2, 0.5, 0.3], &[-1.0, 0.0, 2.0]).unwrap();
        let r = personick_estimator(&rho, &x, &k).unwrap();
        // kappa(rho o X) = sum_x rho_x P(x) x
        let expect = states
            .iter()
            .zip([-0.2, 0.0, 0.6])
            .fold(HermitianOperator::zeros(2), |acc, (s, w)| acc.add(&s.scale(w)));
        let output = k.apply_hermitian(&rho).unwrap();
        let lhs = output.jordan(&r.estimator).unwrap();
        assert!((lhs.matrix() - expect.matrix()).max_abs() < 1e-10);
    }

    #[test]
    fn partial_trace_channel_estimator() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rho = random::density_operator(&mut rng, 4);
        let x = random::hermitian_operator(&mut rng, 4);
        let k = QuantumChannel::partial_trace(&[2, 2], &[1]).unwrap();
        let r = personick_estimator(&rho, &x, &k).unwrap();
        let direct = schrodinger_risk(&rho, &x, &k, &r.estimator).unwrap();
        assert!((direct - r.min_risk).abs() < 1e-10);
        // Observables of the kept factor are recovered exactly.
        let local = random::hermitian_operator(&mut rng, 2);
        let embedded = herm(tensor(&ComplexMatrix::identity(2), &local));
        let r = personick_estimator(&rho, &embedded, &k).unwrap();
        assert!((r.estimator.matrix() - local.matrix()).max_abs() < 1e-10);
        assert!(r.min_risk.abs() < 1e-10);
    }

    #[test]
    fn complex_weak_value_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rho = random::density_operator(&mut rng, 2);
        let x = random::complex_matrix(&mut rng, 2, 2);
        let wv = complex_weak_value(&rho, &x, &Povm::trivial(2, "1"), "1").unwrap();
        assert!((wv - trace_of_product(&x, &rho)).norm() < 1e-14);

        let h = random::hermitian_operator(&mut rng, 2);
        let p = random::povm(&mut rng, 2, 3);
        for label in p.labels() {
            let c = complex_weak_value(&rho, &h, &p, label).unwrap();
            assert!((c.re - weak_value(&rho, &h, &p, label).unwrap()).abs() < 1e-12);
        }

        let zero = DensityOperator::from_probabilities(&[1.0, 0.0]).unwrap();
        let c = complex_weak_value(&zero, &pauli_y(), &sigma_x_basis(), "+").unwrap();
        assert!((c - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn complex_estimator_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let rho = random::density_operator(&mut rng, 3);
        let x = random::complex_matrix(&mut rng, 3, 3);
        let r = complex_estimator(&rho, &x, &QuantumChannel::identity(3)).unwrap();
        assert!((&r.estimator - &x).max_abs() < 1e-10);
        assert!(r.min_risk.abs() < 1e-10);

        let r = complex_estimator(&rho, &x, &QuantumChannel::fully_depolarizing(3)).unwrap();
        let mean = trace_of_product(&x, &rho);
        assert!((&r.estimator - &ComplexMatrix::identity(3).scale(mean)).max_abs() < 1e-12);

        let rho = random::density_operator(&mut rng, 2);
        let x = &pauli_x() + &pauli_y().scale(C64::new(0.0, 1.0));
        let p = random::povm(&mut rng, 2, 3);
        let r = complex_estimator(&rho, &x, &QuantumChannel::from_povm(&p).unwrap()).unwrap();
        for (y, label) in p.labels().iter().enumerate() {
            let wv = complex_weak_value(&rho, &x, &p, label).unwrap();
            assert!((r.estimator[(y, y)] - wv).norm() < 1e-10);
        }
    }

    #[test]
    fn complex_estimator_is_optimal_and_beats_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let rho = random::density_operator(&mut rng, 3);
            let k = random::channel(&mut rng, 3, 3, 2);
            let x = random::complex_matrix(&mut rng, 3, 3);
            let r = complex_estimator(&rho, &x, &k).unwrap();
            let direct = complex_risk(&rho, &x, &k, &r.estimator).unwrap();
            assert!((direct - r.min_risk).abs() < 1e-9);
            for _ in 0..5 {
                let z = random::complex_matrix(&mut rng, 3, 3);
                for eps in [C64::new(1e-2, 0.0), C64::new(0.0, 1e-2), C64::new(-0.3, 0.2)] {
                    let pert = &r.estimator + &z.scale(eps);
                    assert!(complex_risk(&rho, &x, &k, &pert).unwrap() >= r.min_risk - 1e-9);
                }
            }
            let h = random::hermitian_operator(&mut rng, 3);
            let c = complex_estimator(&rho, &h, &k).unwrap();
            let p = personick_estimator(&rho, &h, &k).unwrap();
            assert!(c.min_risk <= p.min_risk + 1e-9);
        }
    }

    #[test]
    fn post_composition_never_reduces_risk() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..10 {
            let rho = random::density_operator(&mut rng, 3);
            let x = random::hermitian_operator(&mut rng, 3);
            let k = random::channel(&mut rng, 3, 3, 2);
            let after = random::channel(&mut rng, 3, 2, 2);
            let r1 = personick_estimator(&rho, &x, &k).unwrap();
            let r2 = personick_estimator(&rho, &x, &k.then(&after).unwrap()).unwrap();
            assert!(r2.min_risk >= r1.min_risk - 1e-9);
        }
    }

    #[test]
    fn dilation_oracle_for_schrodinger_risk() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let u = random::unitary(&mut rng, 4);
        let env = random::density_operator(&mut rng, 2);
        let rho = random::density_operator(&mut rng, 2);
        let x = random::hermitian_operator(&mut rng, 2);
        let xc = random::hermitian_operator(&mut rng, 2);
        let k = QuantumChannel::from_dilation(&u, &env, &[2, 2], 1).unwrap();
        // kappa(rho) and kappa(rho o X) from the explicit dilation.
        let out = apply_dilation(&u, &env, &[2, 2], 1, &rho).unwrap();
        let out_x = apply_dilation(&u, &env, &[2, 2], 1, &rho.jordan(&x).unwrap()).unwrap();
        let expect = rho.trace_product(&x.jordan(&x).unwrap()) - 2.0 * trace_of_product(&xc, &out_x).re
            + trace_of_product(&out, &(xc.matrix() * xc.matrix())).re;
        assert!((schrodinger_risk(&rho, &x, &k, &xc).unwrap() - expect).abs() < 1e-12);
    }
}
