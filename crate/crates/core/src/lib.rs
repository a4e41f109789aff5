//! Time-dependent coupled cluster workbench.
//!
//! `tdccm` implements the normal and extended coupled cluster methods (NCCM and
//! ECCM) on a truncated Fock ⊗ two-level space, the non-Hermitian
//! interaction-picture (NHIP) operator calculus built on time-dependent Dyson
//! maps, and an exact-diagonalization oracle against which both are checked.
//! The Rabi model
//!
//! ```text
//! h = ½ω₀σᶻ + ω b†b + g (σ⁺ + σ⁻)(b† + b)
//! ```
//!
//! is the reference system throughout. Pseudo-spin operators carry the factor
//! 2 convention (`σ⁺` has matrix entry 2).
//!
//! Module map:
//!
//! - [`hilbert`]: space specification, dense operators, the Rabi Hamiltonian
//!   and exact diagonalization.
//! - [`nccm`]: configuration algebra, similarity transforms, expectation
//!   functional, analytic gradients, Poisson brackets and amplitude recovery.
//! - [`eccm`]: the doubly exponentiated coordinates `σ, σ̃` and their
//!   evolution equations.
//! - [`dynamics`]: integrators, observables, the stationary Newton solver with
//!   continuation in `g`, and linear-response excitation spectra.
//! - [`nhip`]: metric, Coriolis operator, evolution generator and the
//!   ket/ketket/observable evolution laws with invariant monitors.
//! - [`cli`]: config-driven batch runs writing CSV and JSON manifests.
//! - [`verify`]: randomized invariant suites.

pub mod cli;
pub mod dynamics;
pub mod eccm;
mod error;
pub mod hilbert;
pub mod linalg;
pub mod nccm;
pub mod nhip;
pub mod verify;

pub use error::{Error, Result};
pub use hilbert::{
    ed_evolve, ed_ground, rabi_hamiltonian, CMatrix, CVector, ElementaryOps, OperatorMatrix,
    RabiParams, SpaceSpec, Spin, C64,
};
pub use nccm::{CcmState, ConfigIndex, ConfigSet};
