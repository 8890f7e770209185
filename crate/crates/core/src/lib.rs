//! Optimal mean-square retrodiction of quantum observables through quantum
//! channels.
//!
//! The central object is the quantum conditional expectation: given a state
//! `rho`, an observable `X` and a channel `kappa`, the Hermitian estimator
//! `Xc` minimizing `tr rho X^2 - 2 tr Xc kappa(rho o X) + tr kappa(rho) Xc^2`
//! solves the Jordan-product equation `kappa(rho) o Xc = kappa(rho o X)`.
//! Specializations covered here:
//!
//! - classical conditional expectations ([`estimators::classical_conditional_expectation`]),
//! - real and complex weak values for measurement channels,
//! - Gaussian quadrature smoothing in phase space ([`gaussian`]),
//! - symmetric logarithmic derivatives and monotonicity of the quantum
//!   Fisher information ([`fisher`]).
//!
//! Random instance generation ([`random`]) and sweep execution ([`sweep`])
//! support the property suites; sweeps run on rayon when the `parallel`
//! feature is enabled (default) and sequentially otherwise.

pub mod channels;
pub mod error;
pub mod estimators;
pub mod fisher;
pub mod gaussian;
pub mod linalg;
pub mod random;
pub mod sweep;
pub mod tol;

pub use channels::{ClassicalChannel, CptpReport, Povm, QuantumChannel};
pub use error::{Error, Result};
pub use estimators::{ComplexEstimationResult, EstimationResult};
pub use fisher::StateFamily;
pub use gaussian::{GaussianWigner, GridSpec, LinearQuadrature};
pub use linalg::{ComplexMatrix, DensityOperator, HermitianOperator, Spectrum, C64};
pub use sweep::Execution;
