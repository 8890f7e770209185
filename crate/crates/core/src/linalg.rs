//! Dense complex-matrix kernel: Hermitian algebra, tensor products, partial
//! traces, eigendecomposition and the Jordan-product linear solve.

use std::ops::{Add, Deref, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invariant("shape", "matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(Error::dims(
                "from_row_major",
                format!("{} entries", rows * cols),
                format!("{} entries", entries.len()),
            ));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invariant("shape", "ragged rows"));
        }
        let flat: Vec<C64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), cols, &flat)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::invariant("shape", "matrix dimensions must be positive"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invariant("finite", "matrix contains NaN or infinite entries"));
        }
        Ok(Self(m))
    }

    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self(m)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Rank-one projector |v><v| (not normalized).
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    /// The matrix unit |i><j| of shape rows x cols.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.0[(i, j)] = ONE;
        m
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn row_major(&self) -> Vec<C64> {
        (0..self.nrows())
            .flat_map(|i| (0..self.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    /// `max |m_ij - conj(m_ji)|`; zero for Hermitian matrices.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.nrows().min(self.ncols())).map(|i| self.0[(i, i)]).collect()
    }

    /// Largest off-diagonal modulus.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                if i != j {
                    worst = worst.max(self.0[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn checked_mul(&self, rhs: &Self, op: &'static str) -> Result<Self> {
        if self.ncols() != rhs.nrows() {
            return Err(Error::dims(
                op,
                format!("{} rows on the right", self.ncols()),
                rhs.nrows(),
            ));
        }
        Ok(self * rhs)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => C64::new(0.0, -1.0),
        (1, 0) => C64::new(0.0, 1.0),
        _ => ZERO,
    })
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
}

/// Hermitian matrix, stored symmetrized.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    /// Accepts `m` if its hermiticity defect is within tolerance (relative to
    /// its largest entry once that exceeds one) and stores `(m + m^dag) / 2`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invariant(
                "square",
                format!("{}x{} matrix is not square", m.nrows(), m.ncols()),
            ));
        }
        let defect = m.hermiticity_defect();
        let allowed = tol::HERMITICITY_TOL * m.max_abs().max(1.0);
        if defect > allowed {
            return Err(Error::invariant(
                "hermitian",
                format!("max |M - M^dag| = {defect:e} exceeds {allowed:e}"),
            ));
        }
        Ok(Self::symmetrize(&m))
    }

    /// Hermitian part `(m + m^dag) / 2` of any square matrix.
    pub fn symmetrize(m: &ComplexMatrix) -> Self {
        let h = (&m.0 + m.0.adjoint()) * C64::new(0.5, 0.0);
        Self(ComplexMatrix(h))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(ComplexMatrix::from_real_diagonal(diag))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Real trace.
    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale_real(s))
    }

    /// Jordan product of two Hermitian operators, itself Hermitian.
    pub fn jordan(&self, other: &Self) -> Result<Self> {
        Ok(Self::symmetrize(&jordan_product(&self.0, &other.0)?))
    }

    /// `tr(self * other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> f64 {
        trace_of_product(&self.0, &other.0).re
    }
}

impl Deref for HermitianOperator {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator(HermitianOperator);

impl DensityOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(m)?)
    }

    pub fn from_hermitian(h: HermitianOperator) -> Result<Self> {
        let tr = h.trace_re();
        if (tr - 1.0).abs() > tol::TRACE_TOL {
            return Err(Error::invariant("trace", format!("trace {tr} differs from 1")));
        }
        let spectrum = eig_hermitian(&h)?;
        let min = spectrum.eigenvalues[0];
        if min < -tol::PSD_TOL {
            return Err(Error::invariant("psd", format!("minimum eigenvalue {min:e}")));
        }
        Ok(Self(h))
    }

    /// Pure state |v><v| / <v|v>.
    pub fn pure(v: &[C64]) -> Result<Self> {
        let norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if v.is_empty() || !norm_sqr.is_finite() || norm_sqr <= 0.0 {
            return Err(Error::invariant("finite", "state vector must be nonzero and finite"));
        }
        Self::new(ComplexMatrix::outer(v).scale_real(1.0 / norm_sqr))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(HermitianOperator::identity(d).scale(1.0 / d as f64))
    }

    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::from_real_diagonal(p))
    }

    pub fn hermitian(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianOperator {
        self.0
    }
}

impl Deref for DensityOperator {
    type Target = HermitianOperator;

    fn deref(&self) -> &HermitianOperator {
        &self.0
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue modulus, used as the scale for relative cutoffs.
    pub fn scale(&self) -> f64 {
        self.max_eigenvalue().abs().max(self.min_eigenvalue().abs())
    }

    /// Number of eigenvalues above `rel_tol * scale`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.scale();
        self.eigenvalues.iter().filter(|&&l| l > cut).count()
    }

    /// `V f(diag(lambda)) V^dag`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let v = self.eigenvectors.as_dmatrix();
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = C64::new(f(l), 0.0);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fl;
            }
        }
        HermitianOperator::symmetrize(&ComplexMatrix(scaled * v.adjoint()))
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        self.map_eigenvalues(|l| l)
    }

    pub fn eigenvector(&self, j: usize) -> Vec<C64> {
        self.eigenvectors.as_dmatrix().column(j).iter().copied().collect()
    }
}

/// Eigendecomposition of a Hermitian operator.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<Spectrum> {
    let n = h.dim();
    let max_iter = 1000 * n.max(1);
    let eig = SymmetricEigen::try_new(h.as_dmatrix().clone(), f64::EPSILON, max_iter)
        .ok_or_else(|| Error::numerical("eig_hermitian", format!("no convergence for dimension {n}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::numerical("eig_hermitian", "non-finite eigenvalue"));
    }
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: ComplexMatrix(vectors),
    })
}

fn require_same_square(op: &'static str, mats: &[&ComplexMatrix]) -> Result<usize> {
    let n = mats[0].nrows();
    for m in mats {
        if !m.is_square() || m.nrows() != n {
            return Err(Error::dims(
                op,
                format!("{n}x{n}"),
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
    }
    Ok(n)
}

/// `(ab + ba) / 2`.
pub fn jordan_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_same_square("jordan_product", &[a, b])?;
    let ab = &a.0 * &b.0;
    let ba = &b.0 * &a.0;
    Ok(ComplexMatrix((ab + ba) * C64::new(0.5, 0.0)))
}

/// `tr(ab)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let (n, m) = (a.nrows(), a.ncols());
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..m {
            acc += a.0[(i, k)] * b.0[(k, i)];
        }
    }
    acc
}

/// `|tr x(y o z) - tr (x o y) z|`, zero up to rounding for all inputs.
pub fn jordan_trace_identity_check(x: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix) -> Result<f64> {
    require_same_square("jordan_trace_identity_check", &[x, y, z])?;
    let lhs = trace_of_product(x, &jordan_product(y, z)?);
    let rhs = trace_of_product(&jordan_product(x, y)?, z);
    Ok((lhs - rhs).norm())
}

/// Kronecker product; the left factor carries the slow index.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Mixed-radix index bookkeeping for a tensor-product space.
#[derive(Clone, Debug)]
pub(crate) struct Subsystems {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl Subsystems {
    pub(crate) fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::invariant(
                "dims",
                format!("invalid subsystem dimensions {dims:?}"),
            ));
        }
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        Ok(Self {
            dims: dims.to_vec(),
            strides,
        })
    }

    pub(crate) fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub(crate) fn dim_of(&self, factors: &[usize]) -> usize {
        factors.iter().map(|&k| self.dims[k]).product()
    }

    /// Full-space index from a local index over `factors` (in the given
    /// order, first slowest) and a local index over the complementary factors.
    pub(crate) fn compose(&self, factors: &[usize], local: usize, rest: &[usize], other: usize) -> usize {
        self.place(factors, local) + self.place(rest, other)
    }

    fn place(&self, factors: &[usize], mut local: usize) -> usize {
        let mut full = 0;
        for &k in factors.iter().rev() {
            full += (local % self.dims[k]) * self.strides[k];
            local /= self.dims[k];
        }
        full
    }

    /// Sorted, deduplicated factor set and its complement.
    pub(crate) fn split(&self, keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        if keep.is_empty() {
            return Err(Error::invariant("keep", "kept subsystem set is empty"));
        }
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&bad) = kept.iter().find(|&&k| k >= self.dims.len()) {
            return Err(Error::invariant(
                "keep",
                format!("subsystem {bad} out of range for {} factors", self.dims.len()),
            ));
        }
        let traced = (0..self.dims.len()).filter(|k| !kept.contains(k)).collect();
        Ok((kept, traced))
    }
}

/// Traces out every subsystem not listed in `keep`. The kept factors appear
/// in ascending order in the result.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let sys = Subsystems::new(dims)?;
    if !m.is_square() || m.nrows() != sys.total() {
        return Err(Error::dims(
            "partial_trace",
            format!("square matrix of size {}", sys.total()),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let (kept, traced) = sys.split(keep)?;
    let dk = sys.dim_of(&kept);
    let dt = sys.dim_of(&traced);
    let index: Vec<Vec<usize>> = (0..dk)
        .map(|i| (0..dt).map(|t| sys.compose(&kept, i, &traced, t)).collect())
        .collect();
    let out = DMatrix::from_fn(dk, dk, |i, j| {
        (0..dt).map(|t| m.0[(index[i][t], index[j][t])]).sum::<C64>()
    });
    Ok(ComplexMatrix(out))
}

/// `I (x) ... (x) op (x) ... (x) I` with `op` on subsystem `factor`.
pub fn embed(op: &ComplexMatrix, dims: &[usize], factor: usize) -> Result<ComplexMatrix> {
    Subsystems::new(dims)?;
    if factor >= dims.len() {
        return Err(Error::invariant("dims", format!("factor {factor} out of range")));
    }
    if !op.is_square() || op.nrows() != dims[factor] {
        return Err(Error::dims(
            "embed",
            dims[factor],
            format!("{}x{}", op.nrows(), op.ncols()),
        ));
    }
    let before: usize = dims[..factor].iter().product();
    let after: usize = dims[factor + 1..].iter().product();
    Ok(tensor(
        &tensor(&ComplexMatrix::identity(before), op),
        &ComplexMatrix::identity(after),
    ))
}

/// Maximum entrywise deviation of `u^dag u` from the identity.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let g = u.0.adjoint() * &u.0;
    (&g - DMatrix::<C64>::identity(u.nrows(), u.nrows()))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Solution of the Jordan equation `a o x = b`.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanSolution {
    pub solution: HermitianOperator,
    /// `||a o x - b||_F`.
    pub residual: f64,
    /// Rank of `a` at the support cutoff.
    pub support_rank: usize,
}

fn check_psd(spectrum: &Spectrum, op: &'static str) -> Result<()> {
    let min = spectrum.min_eigenvalue();
    let allowed = tol::PSD_TOL * spectrum.scale().max(1.0);
    if min < -allowed {
        return Err(Error::invariant("psd", format!("{op}: minimum eigenvalue {min:e}")));
    }
    Ok(())
}

/// Solves `a o x = b` for Hermitian `x` given positive semidefinite `a`.
///
/// In the eigenbasis of `a`, `x_ij = 2 b_ij / (l_i + l_j)` whenever
/// `l_i + l_j` exceeds the support cutoff and zero otherwise, so the block
/// of `x` on the kernel of `a` is zero. The residual exposes components of
/// `b` that no Hermitian `x` can reproduce.
pub fn solve_jordan(a: &HermitianOperator, b: &HermitianOperator) -> Result<JordanSolution> {
    require_same_square("solve_jordan", &[a, b])?;
    let spectrum = eig_hermitian(a)?;
    check_psd(&spectrum, "solve_jordan")?;
    solve_jordan_with(&spectrum, a, b)
}

pub(crate) fn solve_jordan_with(
    spectrum: &Spectrum,
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> Result<JordanSolution> {
    let v = spectrum.eigenvectors.as_dmatrix();
    let b_eig = v.adjoint() * b.as_dmatrix() * v;
    let cut = tol::SUPPORT_TOL * spectrum.max_eigenvalue().max(0.0);
    let l = &spectrum.eigenvalues;
    let n = l.len();
    let x_eig = DMatrix::from_fn(n, n, |i, j| {
        let denom = l[i] + l[j];
        if denom > cut && denom > 0.0 {
            b_eig[(i, j)] * (2.0 / denom)
        } else {
            ZERO
        }
    });
    let solution = HermitianOperator::symmetrize(&ComplexMatrix(v * x_eig * v.adjoint()));
    let residual = (&jordan_product(a, &solution)? - b.matrix()).frobenius_norm();
    if !residual.is_finite() {
        return Err(Error::numerical("solve_jordan", "non-finite residual"));
    }
    Ok(JordanSolution {
        solution,
        residual,
        support_rank: spectrum.rank(tol::SUPPORT_TOL),
    })
}

/// Orthogonal projector onto eigenvectors with eigenvalue above
/// `tol * lambda_max`.
pub fn support_projector(h: &HermitianOperator, tol: f64) -> Result<HermitianOperator> {
    let spectrum = eig_hermitian(h)?;
    let cut = tol * spectrum.max_eigenvalue().max(0.0);
    Ok(spectrum.map_eigenvalues(|l| if l > cut { 1.0 } else { 0.0 }))
}

/// Moore-Penrose inverse of a positive semidefinite operator, inverting only
/// eigenvalues above `tol * lambda_max`.
pub fn pseudo_inverse_psd(h: &HermitianOperator, tol: f64) -> Result<HermitianOperator> {
    let spectrum = eig_hermitian(h)?;
    Ok(pseudo_inverse_with(&spectrum, tol))
}

pub(crate) fn pseudo_inverse_with(spectrum: &Spectrum, tol: f64) -> HermitianOperator {
    let cut = tol * spectrum.max_eigenvalue().max(0.0);
    spectrum.map_eigenvalues(|l| if l > cut && l > 0.0 { 1.0 / l } else { 0.0 })
}

/// Matrix square root of a positive semidefinite operator; negative rounding
/// noise in the spectrum is clipped to zero.
pub fn sqrt_psd(h: &HermitianOperator) -> Result<HermitianOperator> {
    let spectrum = eig_hermitian(h)?;
    check_psd(&spectrum, "sqrt_psd")?;
    Ok(spectrum.map_eigenvalues(|l| l.max(0.0).sqrt()))
}

/// Column vector helper used by the channel constructors.
pub(crate) fn column(m: &ComplexMatrix, j: usize) -> DVector<C64> {
    m.0.column(j).into_owned()
}
