//! Gaussian Wigner functions and quadrature smoothing in phase space.
//!
//! Conventions: phase-space coordinates are ordered `(q_1..q_n, p_1..p_n)`
//! in dimensionless units with hbar = 1, so the vacuum has covariance `I/2`;
//! a Wigner function integrates to the trace of its operator, which is the
//! `weight` here. Effects need not be normalized.
//!
//! For an observable linear in the quadratures, the optimal estimate
//! `int W_E W_rho X / int W_E W_rho` is `X` evaluated at the mean of the
//! normalized product Gaussian. [`numeric_wigner_integral`] evaluates the
//! defining integrals on a tensor grid as an independent check.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::{self, Execution};
use crate::tol;

/// `weight * N(mean, covariance)` over `2 n_modes` quadrature coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianWigner {
    n_modes: usize,
    weight: f64,
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

/// Observable `coeffs . (q, p) + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearQuadrature {
    pub coeffs: Vec<f64>,
    pub offset: f64,
}

impl LinearQuadrature {
    pub fn new(coeffs: Vec<f64>, offset: f64) -> Result<Self> {
        if coeffs.is_empty() || !coeffs.len().is_multiple_of(2) {
            return Err(Error::invariant("dims", "quadrature coefficients need length 2n"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !offset.is_finite() {
            return Err(Error::invariant("finite", "non-finite quadrature coefficient"));
        }
        Ok(Self { coeffs, offset })
    }

    /// Position quadrature `q_mode` of an `n_modes` system.
    pub fn position(n_modes: usize, mode: usize) -> Self {
        let mut coeffs = vec![0.0; 2 * n_modes];
        coeffs[mode] = 1.0;
        Self { coeffs, offset: 0.0 }
    }

    pub fn constant(n_modes: usize, c: f64) -> Self {
        Self {
            coeffs: vec![0.0; 2 * n_modes],
            offset: c,
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.coeffs.iter().zip(z).map(|(c, z)| c * z).sum::<f64>() + self.offset
    }
}

fn cholesky(m: &DMatrix<f64>, op: &'static str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| Error::numerical(op, "covariance is not positive definite"))
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

impl GaussianWigner {
    pub fn new(weight: f64, mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::invariant("dims", format!("mean has length {dim}, expected 2n")));
        }
        if covariance.len() != dim || covariance.iter().any(|r| r.len() != dim) {
            return Err(Error::dims("covariance", format!("{dim}x{dim}"), "mismatched rows"));
        }
        let cov = DMatrix::from_fn(dim, dim, |i, j| covariance[i][j]);
        Self::from_parts(weight, DVector::from_vec(mean), cov)
    }

    fn from_parts(weight: f64, mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::invariant("weight", format!("weight {weight} must be positive")));
        }
        if mean.iter().chain(covariance.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invariant("finite", "non-finite Gaussian parameter"));
        }
        let scale = covariance.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::invariant("covariance", format!("asymmetry {asym:e}")));
        }
        let covariance = symmetrized(&covariance);
        if Cholesky::new(covariance.clone()).is_none() {
            return Err(Error::invariant("covariance", "covariance is not positive definite"));
        }
        Ok(Self {
            n_modes: mean.len() / 2,
            weight,
            mean,
            covariance,
        })
    }

    /// Vacuum state: zero mean, covariance `I/2`, unit weight.
    pub fn vacuum(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self::from_parts(1.0, DVector::zeros(dim), DMatrix::identity(dim, dim) * 0.5).expect("vacuum is valid")
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn covariance(&self) -> Vec<Vec<f64>> {
        (0..self.covariance.nrows())
            .map(|i| self.covariance.row(i).iter().copied().collect())
            .collect()
    }

    pub fn covariance_matrix(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn with_weight(&self, weight: f64) -> Result<Self> {
        Self::from_parts(weight, self.mean.clone(), self.covariance.clone())
    }

    /// Pointwise value.
    pub fn density(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.mean.len() {
            return Err(Error::dims("density", self.mean.len(), z.len()));
        }
        let chol = cholesky(&self.covariance, "density")?;
        let d = DVector::from_column_slice(z) - &self.mean;
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let dim = self.mean.len() as f64;
        let log = self.weight.ln() - 0.5 * (d.dot(&chol.solve(&d)) + log_det + dim * (2.0 * std::f64::consts::PI).ln());
        Ok(log.exp())
    }
}

fn check_modes(a: &GaussianWigner, b: &GaussianWigner) -> Result<()> {
    if a.n_modes != b.n_modes {
        return Err(Error::dims("gaussian modes", a.n_modes, b.n_modes));
    }
    Ok(())
}

/// Dimensionless overlap `exp(-(mu_a - mu_b)^T (S_a + S_b)^{-1} (mu_a - mu_b) / 2)`.
pub fn overlap_factor(a: &GaussianWigner, b: &GaussianWigner) -> Result<f64> {
    check_modes(a, b)?;
    let total = &a.covariance + &b.covariance;
    let chol = cholesky(&total, "overlap_factor")?;
    let delta = &a.mean - &b.mean;
    Ok((-0.5 * delta.dot(&chol.solve(&delta))).exp())
}

/// Pointwise product of two Gaussians, returned as a weighted Gaussian whose
/// weight is the integral of the product.
pub fn gaussian_product(a: &GaussianWigner, b: &GaussianWigner) -> Result<GaussianWigner> {
    check_modes(a, b)?;
    let dim = 2 * a.n_modes;
    let total = &a.covariance + &b.covariance;
    let chol = cholesky(&total, "gaussian_product")?;
    let delta = &a.mean - &b.mean;
    let mahalanobis = delta.dot(&chol.solve(&delta));
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let log_overlap = -0.5 * (mahalanobis + log_det + dim as f64 * (2.0 * std::f64::consts::PI).ln());
    // (S_a^-1 + S_b^-1)^-1 = S_a (S_a + S_b)^-1 S_b
    let covariance = symmetrized(&(&a.covariance * chol.solve(&b.covariance)));
    let mean = &b.covariance * chol.solve(&a.mean) + &a.covariance * chol.solve(&b.mean);
    let weight = a.weight * b.weight * log_overlap.exp();
    GaussianWigner::from_parts(weight, mean, covariance)
        .map_err(|e| Error::numerical("gaussian_product", e.to_string()))
}

/// Optimal estimate of a linear quadrature observable given a state and an
/// effect, both Gaussian.
pub fn quadrature_estimator(wr: &GaussianWigner, we: &GaussianWigner, x: &LinearQuadrature) -> Result<f64> {
    check_modes(wr, we)?;
    if x.coeffs.len() != 2 * wr.n_modes {
        return Err(Error::dims("quadrature_estimator", 2 * wr.n_modes, x.coeffs.len()));
    }
    let overlap = overlap_factor(wr, we)?;
    if overlap <= tol::OVERLAP_FLOOR {
        return Err(Error::ZeroProbability {
            outcome: "gaussian effect".into(),
            probability: overlap,
        });
    }
    let product = gaussian_product(wr, we)?;
    Ok(x.eval(product.mean()))
}

/// Tensor-grid trapezoid rule over a box centred on the tightest Gaussian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Odd, so the half-resolution grid is a subgrid.
    pub points_per_axis: usize,
    /// Box half-width in marginal standard deviations of the tightest Gaussian.
    pub half_width_sigmas: f64,
    /// Largest acceptable truncation estimate, relative to the integral of |f|.
    pub max_truncation: f64,
}

impl GridSpec {
    /// 801 points per axis for one mode; 61 per axis for two modes, where
    /// the four-dimensional grid would otherwise be out of reach.
    pub fn for_modes(n_modes: usize) -> Self {
        Self {
            points_per_axis: if n_modes <= 1 { 801 } else { 61 },
            half_width_sigmas: 10.0,
            max_truncation: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericIntegral {
    pub value: f64,
    /// Bound on the mass outside the box: boundary maximum times box volume,
    /// relative to the integral of |f|.
    pub truncation_estimate: f64,
    /// `|I_h - I_2h|`.
    pub resolution_estimate: f64,
}

/// Grid evaluation of `int W_E W_rho X / int W_E W_rho`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericEstimate {
    pub value: f64,
    pub numerator: NumericIntegral,
    pub denominator: NumericIntegral,
}

const MAX_DIM: usize = 4;

struct Evaluator {
    precision: [[f64; MAX_DIM]; MAX_DIM],
    mean: [f64; MAX_DIM],
    log_norm: f64,
    dim: usize,
}

impl Evaluator {
    fn new(g: &GaussianWigner) -> Result<Self> {
        let chol = cholesky(&g.covariance, "wigner evaluation")?;
        let dim = g.mean.len();
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let inv = chol.inverse();
        let mut precision = [[0.0; MAX_DIM]; MAX_DIM];
        let mut mean = [0.0; MAX_DIM];
        for i in 0..dim.min(MAX_DIM) {
            mean[i] = g.mean[i];
            for j in 0..dim.min(MAX_DIM) {
                precision[i][j] = inv[(i, j)];
            }
        }
        Ok(Self {
            precision,
            mean,
            log_norm: g.weight.ln() - 0.5 * (log_det + dim as f64 * (2.0 * std::f64::consts::PI).ln()),
            dim,
        })
    }

    fn log_density(&self, z: &[f64]) -> f64 {
        let n = self.dim;
        let mut d = [0.0; MAX_DIM];
        for i in 0..n {
            d[i] = z[i] - self.mean[i];
        }
        let mut q = 0.0;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| self.precision[i][j] * d[j]).sum();
            q += d[i] * row;
        }
        self.log_norm - 0.5 * q
    }
}

/// Integral of the product of `ws` (times `x`, if given) over phase space.
pub fn numeric_wigner_integral(
    ws: &[GaussianWigner],
    x: Option<&LinearQuadrature>,
    grid: &GridSpec,
) -> Result<NumericIntegral> {
    numeric_wigner_integral_with(Execution::default(), ws, x, grid)
}

pub fn numeric_wigner_integral_with(
    exec: Execution,
    ws: &[GaussianWigner],
    x: Option<&LinearQuadrature>,
    grid: &GridSpec,
) -> Result<NumericIntegral> {
    let sums = grid_sums(exec, ws, x, grid)?;
    let (plain, weighted) = sums.finish()?;
    Ok(if x.is_some() { weighted } else { plain })
}

/// Numerator and denominator of the smoothed estimate from one grid pass.
pub fn numeric_quadrature_estimate(
    wr: &GaussianWigner,
    we: &GaussianWigner,
    x: &LinearQuadrature,
    grid: &GridSpec,
) -> Result<NumericEstimate> {
    numeric_quadrature_estimate_with(Execution::default(), wr, we, x, grid)
}

pub fn numeric_quadrature_estimate_with(
    exec: Execution,
    wr: &GaussianWigner,
    we: &GaussianWigner,
    x: &LinearQuadrature,
    grid: &GridSpec,
) -> Result<NumericEstimate> {
    let sums = grid_sums(exec, &[wr.clone(), we.clone()], Some(x), grid)?;
    let (denominator, numerator) = sums.finish()?;
    if denominator.value <= 0.0 {
        return Err(Error::numerical(
            "numeric_quadrature_estimate",
            "integrand vanishes on the grid",
        ));
    }
    Ok(NumericEstimate {
        value: numerator.value / denominator.value,
        numerator,
        denominator,
    })
}

struct GridSums {
    total: Slab,
    cell: f64,
    coarse_cell: f64,
    volume: f64,
    max_truncation: f64,
}

impl GridSums {
    /// `(int f, int f x)`; the second equals the first when no observable was given.
    fn finish(&self) -> Result<(NumericIntegral, NumericIntegral)> {
        let integral = |fine: f64, coarse: f64, abs: f64, boundary: f64| -> Result<NumericIntegral> {
            let value = fine * self.cell;
            let abs_integral = abs * self.cell;
            let truncation_estimate = if abs_integral > 0.0 {
                boundary * self.volume / abs_integral
            } else {
                0.0
            };
            if truncation_estimate > self.max_truncation {
                return Err(Error::numerical(
                    "numeric_wigner_integral",
                    format!("grid too coarse: estimated truncation error {truncation_estimate:e}"),
                ));
            }
            Ok(NumericIntegral {
                value,
                truncation_estimate,
                resolution_estimate: (value - coarse * self.coarse_cell).abs(),
            })
        };
        let t = &self.total;
        Ok((
            integral(t.fine[0], t.coarse[0], t.abs[0], t.boundary[0])?,
            integral(t.fine[1], t.coarse[1], t.abs[1], t.boundary[1])?,
        ))
    }
}

fn grid_sums(
    exec: Execution,
    ws: &[GaussianWigner],
    x: Option<&LinearQuadrature>,
    grid: &GridSpec,
) -> Result<GridSums> {
    let first = ws
        .first()
        .ok_or_else(|| Error::invariant("dims", "no Wigner functions to integrate"))?;
    let n_modes = first.n_modes;
    if ws.iter().any(|w| w.n_modes != n_modes) {
        return Err(Error::invariant("dims", "Wigner functions have different mode counts"));
    }
    if !(1..=2).contains(&n_modes) {
        return Err(Error::invariant(
            "dims",
            format!("grid integration supports 1-2 modes, got {n_modes}"),
        ));
    }
    if let Some(x) = x {
        if x.coeffs.len() != 2 * n_modes {
            return Err(Error::dims("numeric_wigner_integral", 2 * n_modes, x.coeffs.len()));
        }
    }
    let n = grid.points_per_axis;
    if n < 5 || n.is_multiple_of(2) {
        return Err(Error::invariant(
            "grid",
            format!("need an odd number of points >= 5, got {n}"),
        ));
    }
    let dim = 2 * n_modes;
    let tight = ws
        .iter()
        .min_by(|a, b| a.covariance.determinant().total_cmp(&b.covariance.determinant()))
        .expect("nonempty");
    let half: Vec<f64> = (0..dim)
        .map(|i| grid.half_width_sigmas * tight.covariance[(i, i)].sqrt())
        .collect();
    let lower: Vec<f64> = (0..dim).map(|i| tight.mean[i] - half[i]).collect();
    let step: Vec<f64> = half.iter().map(|h| 2.0 * h / (n - 1) as f64).collect();
    let evaluators = ws.iter().map(Evaluator::new).collect::<Result<Vec<_>>>()?;

    let inner = n.pow(dim as u32 - 1);
    let slabs = sweep::map_indexed(exec, n, |i0| {
        let mut acc = Slab::default();
        let mut idx = [0usize; MAX_DIM];
        let mut z = [0.0; MAX_DIM];
        idx[0] = i0;
        for flat in 0..inner {
            let mut rest = flat;
            for axis in (1..dim).rev() {
                idx[axis] = rest % n;
                rest /= n;
            }
            let mut weight = 1.0;
            let mut on_boundary = false;
            let mut on_coarse = true;
            for axis in 0..dim {
                let k = idx[axis];
                z[axis] = lower[axis] + k as f64 * step[axis];
                if k == 0 || k == n - 1 {
                    weight *= 0.5;
                    on_boundary = true;
                }
                if k % 2 == 1 {
                    on_coarse = false;
                }
            }
            let z = &z[..dim];
            let f = evaluators.iter().map(|e| e.log_density(z)).sum::<f64>().exp();
            let fx = match x {
                Some(x) => f * x.eval(z),
                None => f,
            };
            for (slot, v) in [f, fx].into_iter().enumerate() {
                acc.fine[slot] += weight * v;
                acc.abs[slot] += weight * v.abs();
                if on_coarse {
                    acc.coarse[slot] += weight * v;
                }
                if on_boundary {
                    acc.boundary[slot] = acc.boundary[slot].max(v.abs());
                }
            }
        }
        acc
    });

    let mut total = Slab::default();
    for s in &slabs {
        for slot in 0..2 {
            total.fine[slot] += s.fine[slot];
            total.coarse[slot] += s.coarse[slot];
            total.abs[slot] += s.abs[slot];
            total.boundary[slot] = total.boundary[slot].max(s.boundary[slot]);
        }
    }
    let cell: f64 = step.iter().product();
    Ok(GridSums {
        total,
        cell,
        coarse_cell: cell * 2f64.powi(dim as i32),
        volume: half.iter().map(|h| 2.0 * h).product(),
        max_truncation: grid.max_truncation,
    })
}

/// Per-slab sums; slot 0 is `f`, slot 1 is `f x`.
#[derive(Clone, Copy, Default)]
struct Slab {
    fine: [f64; 2],
    coarse: [f64; 2],
    abs: [f64; 2],
    boundary: [f64; 2],
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(weight: f64, mean: [f64; 2], cov: [[f64; 2]; 2]) -> GaussianWigner {
        GaussianWigner::new(weight, mean.to_vec(), cov.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn flat(n_modes: usize) -> GaussianWigner {
        let dim = 2 * n_modes;
        GaussianWigner::from_parts(1.0, DVector::zeros(dim), DMatrix::identity(dim, dim) * 1e6).unwrap()
    }

    #[test]
    fn validation() {
        assert!(GaussianWigner::new(1.0, vec![0.0], vec![vec![1.0]]).is_err());
        assert!(GaussianWigner::new(0.0, vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(matches!(
            GaussianWigner::new(1.0, vec![0.0, 0.0], vec![vec![1.0, 2.0], vec![2.0, 1.0]]),
            Err(Error::Invariant {
                invariant: "covariance",
                ..
            })
        ));
        assert!(GaussianWigner::new(1.0, vec![0.0, 0.0], vec![vec![1.0, 0.1], vec![0.2, 1.0]]).is_err());
        assert!(LinearQuadrature::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn product_of_identical_unit_gaussians() {
        let unit = g1(1.0, [0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]]);
        let p = gaussian_product(&unit, &unit).unwrap();
        assert_eq!(p.mean(), &[0.0, 0.0]);
        assert!((p.covariance_matrix() - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
        // int N(0, I)^2 = 1 / (4 pi)
        assert!((p.weight() - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-15);
    }

    #[test]
    fn flat_effect_leaves_state_unchanged() {
        let state = g1(1.0, [0.3, -0.7], [[0.8, 0.1], [0.1, 0.5]]);
        let p = gaussian_product(&state, &flat(1)).unwrap();
        for (a, b) in p.mean().iter().zip(state.mean()) {
            assert!((a - b).abs() < 1e-4);
        }
        assert!((p.covariance_matrix() - state.covariance_matrix()).amax() < 1e-4);
        let q = LinearQuadrature::position(1, 0);
        assert!((quadrature_estimator(&state, &flat(1), &q).unwrap() - 0.3).abs() < 1e-4);
    }

    #[test]
    fn product_is_symmetric() {
        let a = g1(2.0, [0.3, -0.7], [[0.8, 0.1], [0.1, 0.5]]);
        let b = g1(0.5, [-1.0, 0.2], [[0.4, -0.2], [-0.2, 0.9]]);
        let ab = gaussian_product(&a, &b).unwrap();
        let ba = gaussian_product(&b, &a).unwrap();
        assert!((ab.weight() - ba.weight()).abs() <= 1e-12 * ab.weight());
        assert!((&ab.mean - &ba.mean).amax() <= 1e-12);
        assert!((ab.covariance_matrix() - ba.covariance_matrix()).amax() <= 1e-12);
    }

    #[test]
    fn midpoint_of_equal_covariances() {
        let state = GaussianWigner::vacuum(1);
        let effect = g1(1.0, [2.0, 0.0], [[0.5, 0.0], [0.0, 0.5]]);
        let q = LinearQuadrature::position(1, 0);
        let est = quadrature_estimator(&state, &effect, &q).unwrap();
        assert!((est - 1.0).abs() < 1e-15);
        let grid = GridSpec::for_modes(1);
        let num = numeric_wigner_integral(&[state.clone(), effect.clone()], Some(&q), &grid).unwrap();
        let den = numeric_wigner_integral(&[state, effect], None, &grid).unwrap();
        assert!((num.value / den.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_observable_and_effect_weight_cancel() {
        let state = g1(1.0, [0.3, -0.7], [[0.8, 0.1], [0.1, 0.5]]);
        let effect = g1(3.0, [-1.0, 0.2], [[0.4, -0.2], [-0.2, 0.9]]);
        let c = LinearQuadrature::constant(1, 2.5);
        assert_eq!(quadrature_estimator(&state, &effect, &c).unwrap(), 2.5);
        let q = LinearQuadrature::new(vec![0.7, -1.3], 0.4).unwrap();
        let a = quadrature_estimator(&state, &effect, &q).unwrap();
        let b = quadrature_estimator(&state, &effect.with_weight(1e-3).unwrap(), &q).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn estimator_is_affine_in_observable() {
        let state = g1(1.0, [0.3, -0.7], [[0.8, 0.1], [0.1, 0.5]]);
        let effect = g1(1.0, [-1.0, 0.2], [[0.4, -0.2], [-0.2, 0.9]]);
        let q = LinearQuadrature::new(vec![0.7, -1.3], 0.0).unwrap();
        let base = quadrature_estimator(&state, &effect, &q).unwrap();
        let scaled = LinearQuadrature::new(vec![0.7 * 3.0, -1.3 * 3.0], 1.5).unwrap();
        let out = quadrature_estimator(&state, &effect, &scaled).unwrap();
        assert!((out - (3.0 * base + 1.5)).abs() <= 1e-12);
    }

    #[test]
    fn same_gaussian_gives_its_mean() {
        let state = g1(1.0, [0.3, -0.7], [[0.8, 0.1], [0.1, 0.5]]);
        let q = LinearQuadrature::new(vec![2.0, 1.0], 0.5).unwrap();
        let est = quadrature_estimator(&state, &state, &q).unwrap();
        assert!((est - q.eval(state.mean())).abs() < 1e-14);
    }

    #[test]
    fn negligible_overlap_is_signalled() {
        let state = GaussianWigner::vacuum(1);
        let far = g1(1.0, [40.0, 0.0], [[0.5, 0.0], [0.0, 0.5]]);
        let err = quadrature_estimator(&state, &far, &LinearQuadrature::position(1, 0)).unwrap_err();
        assert!(matches!(err, Error::ZeroProbability { .. }));
    }

    #[test]
    fn numeric_moments_of_single_gaussian() {
        let g = g1(1.0, [0.4, -1.1], [[0.9, 0.3], [0.3, 0.6]]);
        let grid = GridSpec::for_modes(1);
        let norm = numeric_wigner_integral(std::slice::from_ref(&g), None, &grid).unwrap();
        assert!((norm.value - 1.0).abs() < 1e-8);
        let q = LinearQuadrature::position(1, 0);
        let first = numeric_wigner_integral(&[g], Some(&q), &grid).unwrap();
        assert!((first.value - 0.4).abs() < 1e-8);
    }

    #[test]
    fn numeric_integral_matches_product_weight() {
        let a = g1(1.0, [0.3, -0.7], [[0.8, 0.1], [0.1, 0.5]]);
        let b = g1(2.0, [-0.4, 0.2], [[0.4, -0.2], [-0.2, 0.9]]);
        let grid = GridSpec::for_modes(1);
        let num = numeric_wigner_integral(&[a.clone(), b.clone()], None, &grid).unwrap();
        let closed = gaussian_product(&a, &b).unwrap().weight();
        assert!((num.value - closed).abs() < 1e-6 * closed.max(1.0));
        assert!(num.resolution_estimate < 1e-8);
    }

    #[test]
    fn coarse_grid_is_reported() {
        let g = GaussianWigner::vacuum(1);
        let grid = GridSpec {
            points_per_axis: 41,
            half_width_sigmas: 1.5,
            max_truncation: 1e-8,
        };
        let err = numeric_wigner_integral(&[g], None, &grid).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }));
        assert!(err.to_string().contains("grid too coarse"));
    }

    #[test]
    fn density_at_mean() {
        let g = g1(2.0, [0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]]);
        let peak = g.density(&[0.5, 0.5]).unwrap();
        assert!((peak - 2.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!(g.density(&[0.0]).is_err());
    }

    #[test]
    fn two_mode_estimate_matches_grid() {
        let state = GaussianWigner::new(
            1.0,
            vec![0.2, -0.3, 0.5, 0.1],
            vec![
                vec![0.9, 0.1, 0.0, 0.05],
                vec![0.1, 0.7, 0.1, 0.0],
                vec![0.0, 0.1, 1.1, -0.2],
                vec![0.05, 0.0, -0.2, 0.8],
            ],
        )
        .unwrap();
        let effect = GaussianWigner::new(
            0.3,
            vec![-0.5, 0.4, 0.0, 0.9],
            vec![
                vec![1.2, 0.0, 0.2, 0.0],
                vec![0.0, 0.6, 0.0, 0.1],
                vec![0.2, 0.0, 0.9, 0.0],
                vec![0.0, 0.1, 0.0, 1.4],
            ],
        )
        .unwrap();
        let x = LinearQuadrature::new(vec![1.0, -0.5, 0.25, 2.0], 0.3).unwrap();
        let closed = quadrature_estimator(&state, &effect, &x).unwrap();
        let grid = GridSpec::for_modes(2);
        let num = numeric_quadrature_estimate(&state, &effect, &x, &grid).unwrap();
        assert!((num.value - closed).abs() < 1e-6, "{} vs {closed}", num.value);
        let weight = gaussian_product(&state, &effect).unwrap().weight();
        assert!((num.denominator.value - weight).abs() < 1e-8 * weight);
    }

    #[test]
    fn numeric_integral_rejects_three_modes() {
        let g = GaussianWigner::vacuum(3);
        assert!(numeric_wigner_integral(&[g], None, &GridSpec::for_modes(3)).is_err());
    }

    #[test]
    fn execution_modes_agree_bitwise() {
        let a = GaussianWigner::vacuum(1);
        let grid = GridSpec {
            points_per_axis: 101,
            ..GridSpec::for_modes(1)
        };
        let par = numeric_wigner_integral_with(Execution::Parallel, std::slice::from_ref(&a), None, &grid).unwrap();
        let seq = numeric_wigner_integral_with(Execution::Sequential, &[a], None, &grid).unwrap();
        assert_eq!(par.value.to_bits(), seq.value.to_bits());
    }
}
