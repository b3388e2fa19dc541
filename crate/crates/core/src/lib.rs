//! Simulation of repeated quantum interactions and their continuous limits.
//!
//! A small quantum system repeatedly interacts, for a short duration `h`,
//! with fresh copies of an environment. Each interaction applies a unitary
//! step operator on (system ⊗ one environment copy); the chain of copies
//! forms a spin-chain Fock space. As `h -> 0`, with the interaction strengths
//! scaled by characteristic powers of `h`, the discrete dynamics converges to
//! the solution of a quantum stochastic differential equation driven by
//! creation, annihilation and exchange noises, and the reduced system
//! dynamics converges to a Lindblad semigroup.
//!
//! The crate builds both sides of that limit and measures the distance
//! between them:
//!
//! * [`model`]: the chain state space, operators on (system ⊗ copy) split
//!   into environment sectors, and exact dense evolution on a few sites.
//! * [`hamiltonian`]: the three-scale interaction Hamiltonian, its unitary
//!   step operator, a series evaluation of that step used as an independent
//!   cross-check, and the closed-form limit coefficients.
//! * [`discrete`]: coherent-vector discretization, matrix elements of the
//!   discrete evolution through a per-site recursion, and the reduced
//!   completely positive step map.
//! * [`continuous`]: matrix elements of the limit equation via an ODE
//!   reduction, the Lindblad generator and its semigroup.
//! * [`dilation`]: unitary dilation of a Kraus family on one environment
//!   copy and semigroup convergence checks.
//! * [`scenarios`]: named model families (von Neumann measurement, two-level
//!   atom, weak coupling, low density) with closed forms used as oracles.
//! * [`harness`]: scenario configs, convergence sweeps and report emission
//!   backing the `rqi` command line tool.

pub mod continuous;
pub mod dilation;
pub mod discrete;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod scenarios;
pub mod superop;

pub use error::{Error, Result};
