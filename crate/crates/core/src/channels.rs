//! Completely positive trace-preserving maps in Kraus form, and the
//! constructors that lower dilations, classical channels, classical-quantum
//! ensembles, measurements and partial traces onto it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, eig_hermitian, partial_trace, tensor, unitarity_defect, ComplexMatrix, DensityOperator, HermitianOperator,
    Subsystems, C64,
};
use crate::tol;

/// Quantum channel `rho -> sum_k K_k rho K_k^dag`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    /// Names of the output basis states, for measurement channels.
    output_labels: Option<Vec<String>>,
}

/// Diagnostics of a Kraus family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    /// `max |sum K^dag K - I|`.
    pub deviation: f64,
    pub choi_min_eigenvalue: f64,
    pub accepted: bool,
}

/// Checks trace preservation and complete positivity of a Kraus family.
pub fn validate_kraus(dim_in: usize, dim_out: usize, kraus: &[ComplexMatrix]) -> Result<CptpReport> {
    check_kraus_shapes(dim_in, dim_out, kraus)?;
    let deviation = tp_deviation(dim_in, kraus);
    let choi = choi_matrix(dim_in, dim_out, kraus);
    let choi_min_eigenvalue = eig_hermitian(&HermitianOperator::symmetrize(&choi))?.min_eigenvalue();
    Ok(CptpReport {
        deviation,
        choi_min_eigenvalue,
        accepted: deviation <= tol::CPTP_TOL && choi_min_eigenvalue >= -tol::PSD_TOL,
    })
}

fn check_kraus_shapes(dim_in: usize, dim_out: usize, kraus: &[ComplexMatrix]) -> Result<()> {
    if dim_in == 0 || dim_out == 0 {
        return Err(Error::invariant("dims", "channel dimensions must be positive"));
    }
    if kraus.is_empty() {
        return Err(Error::invariant("cptp", "empty Kraus list"));
    }
    for k in kraus {
        if k.nrows() != dim_out || k.ncols() != dim_in {
            return Err(Error::dims(
                "kraus operator",
                format!("{dim_out}x{dim_in}"),
                format!("{}x{}", k.nrows(), k.ncols()),
            ));
        }
    }
    Ok(())
}

fn tp_deviation(dim_in: usize, kraus: &[ComplexMatrix]) -> f64 {
    let sum = kraus.iter().fold(ComplexMatrix::zeros(dim_in, dim_in), |acc, k| {
        &acc + &(&k.adjoint() * k)
    });
    (&sum - &ComplexMatrix::identity(dim_in)).max_abs()
}

/// `sum_ij |i><j| (x) kappa(|i><j|)`.
fn choi_matrix(dim_in: usize, dim_out: usize, kraus: &[ComplexMatrix]) -> ComplexMatrix {
    let mut choi = ComplexMatrix::zeros(dim_in * dim_out, dim_in * dim_out);
    for i in 0..dim_in {
        for j in 0..dim_in {
            let unit = ComplexMatrix::unit(dim_in, dim_in, i, j);
            let image = apply_kraus(kraus, &unit);
            choi = &choi + &tensor(&unit, &image);
        }
    }
    choi
}

fn apply_kraus(kraus: &[ComplexMatrix], m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, _) = (kraus[0].nrows(), kraus[0].ncols());
    kraus.iter().fold(ComplexMatrix::zeros(rows, rows), |acc, k| {
        &acc + &(&(k * m) * &k.adjoint())
    })
}

impl QuantumChannel {
    /// Builds a channel, rejecting Kraus families that are not trace
    /// preserving within tolerance.
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        check_kraus_shapes(dim_in, dim_out, &kraus)?;
        let deviation = tp_deviation(dim_in, &kraus);
        if deviation > tol::CPTP_TOL {
            return Err(Error::invariant(
                "cptp",
                format!("max |sum K^dag K - I| = {deviation:e}"),
            ));
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
            output_labels: None,
        })
    }

    pub fn with_output_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim_out {
            return Err(Error::dims("output labels", self.dim_out, labels.len()));
        }
        self.output_labels = Some(labels);
        Ok(self)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn output_labels(&self) -> Option<&[String]> {
        self.output_labels.as_deref()
    }

    pub fn validate_cptp(&self) -> Result<CptpReport> {
        validate_kraus(self.dim_in, self.dim_out, &self.kraus)
    }

    /// `sum_k K_k m K_k^dag` for any square `m` of the input dimension.
    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !m.is_square() || m.nrows() != self.dim_in {
            return Err(Error::dims(
                "apply_channel",
                format!("{0}x{0}", self.dim_in),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        Ok(apply_kraus(&self.kraus, m))
    }

    pub fn apply_hermitian(&self, h: &HermitianOperator) -> Result<HermitianOperator> {
        Ok(HermitianOperator::symmetrize(&self.apply(h)?))
    }

    pub fn apply_density(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::from_hermitian(self.apply_hermitian(rho)?)
    }

    /// Heisenberg-picture adjoint `Y -> sum_k K_k^dag Y K_k`.
    pub fn apply_adjoint(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !y.is_square() || y.nrows() != self.dim_out {
            return Err(Error::dims("apply_adjoint", self.dim_out, y.nrows()));
        }
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| {
                &acc + &(&(&k.adjoint() * y) * k)
            }))
    }

    /// `next o self`: apply `self` first.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if next.dim_in != self.dim_out {
            return Err(Error::dims("compose", self.dim_out, next.dim_in));
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|l| self.kraus.iter().map(move |k| l * k))
            .collect();
        let mut out = QuantumChannel::new(self.dim_in, next.dim_out, kraus)?;
        out.output_labels = next.output_labels.clone();
        Ok(out)
    }

    pub fn identity(d: usize) -> Self {
        Self::new(d, d, vec![ComplexMatrix::identity(d)]).expect("identity is trace preserving")
    }

    /// Replacement channel `rho -> tr(rho) sigma`.
    pub fn constant(dim_in: usize, sigma: &DensityOperator) -> Result<Self> {
        let spectrum = eig_hermitian(sigma)?;
        let d_out = sigma.dim();
        let mut kraus = Vec::new();
        for (e, &p) in spectrum.eigenvalues.iter().enumerate() {
            if p <= tol::KRAUS_DROP_TOL {
                continue;
            }
            let phi = spectrum.eigenvector(e);
            for j in 0..dim_in {
                kraus.push(ComplexMatrix::from_fn(d_out, dim_in, |i, col| {
                    if col == j {
                        phi[i] * p.sqrt()
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }));
            }
        }
        Self::new(dim_in, d_out, kraus)
    }

    /// `rho -> tr(rho) I / d`.
    pub fn fully_depolarizing(d: usize) -> Self {
        Self::constant(d, &DensityOperator::maximally_mixed(d)).expect("maximally mixed state is valid")
    }

    /// Channel `rho -> tr_{traced} U (rho (x) env) U^dag`.
    ///
    /// `dims[0]` is the input system; `env` lives on `dims[1..]`; the output
    /// is the single subsystem `keep`. Kraus operators are contracted from
    /// `U` against the eigenvectors of `env`.
    pub fn from_dilation(u: &ComplexMatrix, env: &DensityOperator, dims: &[usize], keep: usize) -> Result<Self> {
        let sys = check_dilation(u, env, dims, keep)?;
        let (kept, traced) = sys.split(&[keep])?;
        let d_in = dims[0];
        let d_env = env.dim();
        let d_out = dims[keep];
        let d_traced = sys.dim_of(&traced);
        let spectrum = eig_hermitian(env)?;
        let mut kraus = Vec::new();
        for (e, &p) in spectrum.eigenvalues.iter().enumerate() {
            if p <= tol::KRAUS_DROP_TOL {
                continue;
            }
            let phi = spectrum.eigenvector(e);
            let weight = p.sqrt();
            for t in 0..d_traced {
                kraus.push(ComplexMatrix::from_fn(d_out, d_in, |j, a| {
                    let row = sys.compose(&kept, j, &traced, t);
                    let acc: C64 = (0..d_env).map(|b| u[(row, a * d_env + b)] * phi[b]).sum();
                    acc * weight
                }));
            }
        }
        Self::new(d_in, d_out, kraus)
    }

    /// Classical channel embedded as `sum_{x,y} P(y|x) |y><x| rho |x><y|`.
    pub fn from_classical(c: &ClassicalChannel) -> Self {
        let mut kraus = Vec::new();
        for y in 0..c.n_out {
            for x in 0..c.n_in {
                let p = c.prob(y, x);
                if p > 0.0 {
                    kraus.push(ComplexMatrix::unit(c.n_out, c.n_in, y, x).scale_real(p.sqrt()));
                }
            }
        }
        let labels = (0..c.n_out).map(|y| y.to_string()).collect();
        Self::new(c.n_in, c.n_out, kraus)
            .and_then(|k| k.with_output_labels(labels))
            .expect("column-stochastic transition gives a channel")
    }

    /// `rho -> sum_x <x|rho|x> rho_x` for a classical-quantum ensemble.
    pub fn from_cq_ensemble(states: &[DensityOperator]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::invariant("dims", "empty classical-quantum ensemble"))?;
        let d_out = first.dim();
        let n_in = states.len();
        let mut kraus = Vec::new();
        for (x, rho_x) in states.iter().enumerate() {
            if rho_x.dim() != d_out {
                return Err(Error::dims("channel_from_cq_ensemble", d_out, rho_x.dim()));
            }
            let spectrum = eig_hermitian(rho_x)?;
            for (e, &p) in spectrum.eigenvalues.iter().enumerate() {
                if p <= tol::KRAUS_DROP_TOL {
                    continue;
                }
                let phi = spectrum.eigenvector(e);
                kraus.push(ComplexMatrix::from_fn(d_out, n_in, |i, col| {
                    if col == x {
                        phi[i] * p.sqrt()
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }));
            }
        }
        Self::new(n_in, d_out, kraus)
    }

    /// Measurement map `rho -> sum_y tr(E(y) rho) |y><y|`, output basis
    /// labelled by the POVM outcomes.
    pub fn from_povm(p: &Povm) -> Result<Self> {
        let n = p.effects.len();
        let mut kraus = Vec::new();
        for (y, effect) in p.effects.iter().enumerate() {
            let spectrum = eig_hermitian(effect)?;
            for (j, &mu) in spectrum.eigenvalues.iter().enumerate() {
                if mu <= tol::KRAUS_DROP_TOL {
                    continue;
                }
                let psi = spectrum.eigenvector(j);
                kraus.push(ComplexMatrix::from_fn(n, p.dim, |row, col| {
                    if row == y {
                        psi[col].conj() * mu.sqrt()
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }));
            }
        }
        Self::new(p.dim, n, kraus)?.with_output_labels(p.labels.clone())
    }

    /// Partial trace over every subsystem not in `keep`.
    pub fn partial_trace(dims: &[usize], keep: &[usize]) -> Result<Self> {
        let sys = Subsystems::new(dims)?;
        let (kept, traced) = sys.split(keep)?;
        let dk = sys.dim_of(&kept);
        let dt = sys.dim_of(&traced);
        let d = sys.total();
        let kraus = (0..dt)
            .map(|t| {
                ComplexMatrix::from_fn(dk, d, |i, col| {
                    if col == sys.compose(&kept, i, &traced, t) {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Self::new(d, dk, kraus)
    }
}

fn check_dilation(u: &ComplexMatrix, env: &DensityOperator, dims: &[usize], keep: usize) -> Result<Subsystems> {
    if dims.len() < 2 {
        return Err(Error::invariant(
            "dims",
            "a dilation needs the input and at least one environment factor",
        ));
    }
    let sys = Subsystems::new(dims)?;
    if keep >= dims.len() {
        return Err(Error::invariant("keep", format!("subsystem {keep} out of range")));
    }
    if !u.is_square() || u.nrows() != sys.total() {
        return Err(Error::dims(
            "dilation unitary",
            format!("{0}x{0}", sys.total()),
            format!("{}x{}", u.nrows(), u.ncols()),
        ));
    }
    let env_dim: usize = dims[1..].iter().product();
    if env.dim() != env_dim {
        return Err(Error::dims("dilation environment", env_dim, env.dim()));
    }
    let defect = unitarity_defect(u);
    if defect > tol::UNITARY_TOL {
        return Err(Error::invariant("unitary", format!("max |U^dag U - I| = {defect:e}")));
    }
    Ok(sys)
}

/// Evaluates `tr_{traced} U (rho (x) env) U^dag` directly on the full space.
pub fn apply_dilation(
    u: &ComplexMatrix,
    env: &DensityOperator,
    dims: &[usize],
    keep: usize,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_dilation(u, env, dims, keep)?;
    if rho.nrows() != dims[0] || !rho.is_square() {
        return Err(Error::dims("apply_dilation", dims[0], rho.nrows()));
    }
    let joint = tensor(rho, env);
    partial_trace(&(&(u * &joint) * &u.adjoint()), dims, &[keep])
}

/// Positive operator-valued measure with labelled outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<HermitianOperator>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOperator>, labels: Vec<String>) -> Result<Self> {
        let first = effects.first().ok_or_else(|| Error::invariant("povm", "no effects"))?;
        let dim = first.dim();
        if labels.len() != effects.len() {
            return Err(Error::dims("povm labels", effects.len(), labels.len()));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::invariant("povm", format!("duplicate outcome label {dup:?}")));
        }
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (effect, label) in effects.iter().zip(&labels) {
            if effect.dim() != dim {
                return Err(Error::dims("povm effect", dim, effect.dim()));
            }
            let min = eig_hermitian(effect)?.min_eigenvalue();
            if min < -tol::PSD_TOL {
                return Err(Error::invariant(
                    "psd",
                    format!("effect {label:?} has eigenvalue {min:e}"),
                ));
            }
            total = &total + effect.matrix();
        }
        let deviation = (&total - &ComplexMatrix::identity(dim)).max_abs();
        if deviation > tol::CPTP_TOL {
            return Err(Error::invariant(
                "povm",
                format!("effects sum to identity only within {deviation:e}"),
            ));
        }
        Ok(Self { dim, effects, labels })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(basis: &ComplexMatrix, labels: Vec<String>) -> Result<Self> {
        let defect = unitarity_defect(basis);
        if defect > tol::UNITARY_TOL {
            return Err(Error::invariant(
                "unitary",
                format!("basis is not orthonormal ({defect:e})"),
            ));
        }
        let effects = (0..basis.ncols())
            .map(|j| {
                let v: Vec<C64> = linalg::column(basis, j).iter().copied().collect();
                HermitianOperator::symmetrize(&ComplexMatrix::outer(&v))
            })
            .collect();
        Self::new(effects, labels)
    }

    /// Measurement in the computational basis with labels "0", "1", ...
    pub fn computational(d: usize) -> Self {
        let labels = (0..d).map(|y| y.to_string()).collect();
        Self::projective(&ComplexMatrix::identity(d), labels).expect("standard basis")
    }

    /// The single-outcome POVM `{I}`.
    pub fn trivial(d: usize, label: &str) -> Self {
        Self::new(vec![HermitianOperator::identity(d)], vec![label.to_string()]).expect("identity effect")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    pub fn effect(&self, label: &str) -> Result<&HermitianOperator> {
        Ok(&self.effects[self.index_of(label)?])
    }

    /// Outcome probabilities `tr E(y) rho`.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        if rho.dim() != self.dim {
            return Err(Error::dims("povm probabilities", self.dim, rho.dim()));
        }
        Ok(self.effects.iter().map(|e| e.trace_product(rho)).collect())
    }
}

/// Column-stochastic transition matrix `P(y|x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalChannel {
    n_in: usize,
    n_out: usize,
    /// Row-major `n_out x n_in`; entry `(y, x)` is `P(y|x)`.
    transition: Vec<f64>,
}

impl ClassicalChannel {
    /// `rows[y][x] = P(y|x)`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_out = rows.len();
        let n_in = rows.first().map_or(0, Vec::len);
        if n_out == 0 || n_in == 0 || rows.iter().any(|r| r.len() != n_in) {
            return Err(Error::invariant(
                "probability",
                "transition matrix must be a nonempty rectangle",
            ));
        }
        let transition: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(bad) = transition.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::invariant(
                "probability",
                format!("invalid transition probability {bad}"),
            ));
        }
        let c = Self {
            n_in,
            n_out,
            transition,
        };
        for x in 0..n_in {
            let total: f64 = (0..n_out).map(|y| c.prob(y, x)).sum();
            if (total - 1.0).abs() > tol::CLASSICAL_SUM_TOL {
                return Err(Error::invariant("probability", format!("column {x} sums to {total}")));
            }
        }
        Ok(c)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|y| (0..n).map(|x| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(rows).expect("identity is stochastic")
    }

    pub fn binary_symmetric(flip: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]])
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.transition[y * self.n_in + x]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.transition.chunks(self.n_in).map(<[f64]>::to_vec).collect()
    }

    /// Output distribution `P_Y = P_{Y|X} P_X`.
    pub fn propagate(&self, px: &[f64]) -> Result<Vec<f64>> {
        if px.len() != self.n_in {
            return Err(Error::dims("propagate", self.n_in, px.len()));
        }
        Ok((0..self.n_out)
            .map(|y| (0..self.n_in).map(|x| self.prob(y, x) * px[x]).sum())
            .collect())
    }
}
