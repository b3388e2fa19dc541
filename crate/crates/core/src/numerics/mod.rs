//! Self-contained dense complex linear algebra sized for few-level systems:
//! matrices, Hermitian eigendecomposition, matrix exponential, spectral
//! scalar functions and a fixed-step linear ODE integrator.

pub mod eig;
pub mod expm;
pub mod matrix;
pub mod ode;
pub mod scalar;

pub use eig::{hermitian_eigen, hermitian_fn};
pub use expm::expm;
pub use matrix::{kron, norms, operator_norm, ComplexMatrix, HermitianMatrix, Norms};
pub use ode::ode_solve_linear;
pub use scalar::{phi_scalar, ScalarFn};
