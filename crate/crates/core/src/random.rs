//! Seeded random instances for property sweeps.
//!
//! Every sweep draws from [`instance_rng`], a ChaCha8 stream generator keyed
//! by `(seed, index)`. The instance at a given index is therefore identical
//! whether a sweep runs sequentially or in parallel, and on every platform.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::{ClassicalChannel, Povm, QuantumChannel};
use crate::linalg::{ComplexMatrix, DensityOperator, HermitianOperator, C64};

/// Generator for instance `index` of a sweep seeded with `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Ginibre matrix with standard complex normal entries.
pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(normal(rng), normal(rng)) * 0.5f64.sqrt())
}

/// Hermitian matrix from the Gaussian unitary ensemble.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = complex_matrix(rng, d, d);
    HermitianOperator::symmetrize(&g).into_matrix()
}

pub fn hermitian_operator<R: Rng + ?Sized>(rng: &mut R, d: usize) -> HermitianOperator {
    HermitianOperator::symmetrize(&complex_matrix(rng, d, d))
}

/// Full-rank density matrix `G G^dag / tr(G G^dag)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    density_with_rank(rng, d, d)
}

pub fn density_with_rank<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> ComplexMatrix {
    let g = complex_matrix(rng, d, rank.clamp(1, d));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    HermitianOperator::symmetrize(&m.scale_real(1.0 / tr)).into_matrix()
}

pub fn density_operator<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityOperator {
    DensityOperator::new(density(rng, d)).expect("random density is valid")
}

pub fn density_operator_with_rank<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> DensityOperator {
    DensityOperator::new(density_with_rank(rng, d, rank)).expect("random density is valid")
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = complex_matrix(rng, d, d).into_dmatrix();
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    ComplexMatrix::wrap(q * phases)
}

/// Channel with `n_kraus` Kraus operators cut from a random isometry.
pub fn channel<R: Rng + ?Sized>(rng: &mut R, dim_in: usize, dim_out: usize, n_kraus: usize) -> QuantumChannel {
    let n_kraus = n_kraus.max(dim_in.div_ceil(dim_out)).max(1);
    let big = dim_out * n_kraus;
    let u = unitary(rng, big);
    let kraus = (0..n_kraus)
        .map(|k| ComplexMatrix::from_fn(dim_out, dim_in, |i, j| u[(k * dim_out + i, j)]))
        .collect();
    QuantumChannel::new(dim_in, dim_out, kraus).expect("isometry blocks are trace preserving")
}

/// POVM with `n` effects `S^{-1/2} A_y^dag A_y S^{-1/2}`.
pub fn povm<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> Povm {
    let raw: Vec<HermitianOperator> = (0..n)
        .map(|_| {
            let a = complex_matrix(rng, d, d);
            HermitianOperator::symmetrize(&(&a.adjoint() * &a))
        })
        .collect();
    let total = raw.iter().skip(1).fold(raw[0].clone(), |acc, e| acc.add(e));
    let inv_sqrt = crate::linalg::eig_hermitian(&total)
        .expect("positive definite sum")
        .map_eigenvalues(|l| 1.0 / l.sqrt());
    let effects = raw
        .iter()
        .map(|e| HermitianOperator::symmetrize(&(&(inv_sqrt.matrix() * e.matrix()) * inv_sqrt.matrix())))
        .collect();
    let labels = (0..n).map(|y| y.to_string()).collect();
    Povm::new(effects, labels).expect("normalized effects form a POVM")
}

pub fn probability_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

pub fn classical_channel<R: Rng + ?Sized>(rng: &mut R, n_in: usize, n_out: usize) -> ClassicalChannel {
    let columns: Vec<Vec<f64>> = (0..n_in).map(|_| probability_vector(rng, n_out)).collect();
    let rows = (0..n_out).map(|y| columns.iter().map(|col| col[y]).collect()).collect();
    ClassicalChannel::new(rows).expect("normalized columns")
}

/// Uniform integer in `lo..=hi`.
pub fn dimension<R: Rng + ?Sized>(rng: &mut R, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}
