//! Emergent (freezing) Hamiltonians for hardcore-boson lattices and collective
//! spins.
//!
//! A state `|psi(t)> = exp(-i H_f t) |psi(0)>` is an eigenstate of
//! `M(t) = exp(-i H_f t) H_0 exp(i H_f t)` whenever `|psi(0)>` is an eigenstate
//! of `H_0`. Quenching the generator from `H_f` to `M(t)` therefore freezes the
//! state. This crate builds `M(t)` exactly where closed forms exist, through
//! dense unitary conjugation, and through truncated nested-commutator series,
//! and provides the propagation and entanglement diagnostics needed to study
//! the protocol.

pub mod emergent;
pub mod error;
pub mod evolution;
pub mod lattice;
pub mod linalg;
pub mod models;
pub mod oat;
pub mod observables;
pub mod runner;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
pub use lattice::{FockBasis, LatticeGeometry};
pub use sparse::{SparseHermitian, StateVector, Term, TermSpec};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
