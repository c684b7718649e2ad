//! Total detection probability of quantum walks under stroboscopic
//! projective monitoring.
//!
//! A particle evolves under a graph Hamiltonian `H = -γ·A + diag(onsite)` and
//! every `τ` time units a projective yes/no measurement asks whether it sits in
//! the detection state. This crate computes the probability `P_det` that the
//! particle is ever detected, in three independent ways:
//!
//! * [`detection::pdet_series`] iterates the measurement protocol directly and
//!   sums the first-detection probabilities `F_n`;
//! * [`detection::pdet_spectral`] evaluates the closed spectral formula from the
//!   bright eigenstates of the evolution operator;
//! * [`quotient::pdet_symmetrized`] reduces the Hamiltonian onto the subspace that
//!   is symmetric under the stabilizer of the detection state and applies the
//!   spectral formula there.
//!
//! The [`symmetry`] module provides the weighted-graph automorphism search,
//! stabilizer subgroups (with their phase characters), the number `ν` of
//! physically equivalent states and the upper bound `P_det ≤ ⟨ψ|P_S|ψ⟩`.
//!
//! Units: `ħ = 1`, energies in units of `γ` when the graph is built with unit
//! weights, and `τ` in units of `ħ/γ`.

pub mod analysis;
pub mod detection;
pub mod error;
pub mod graph;
pub mod quotient;
pub mod rational;
pub mod spectral;
pub mod state;
pub mod sweep;
pub mod symmetry;

pub use error::{Error, Result};
pub use graph::{build_named, hamiltonian, load_graph, save_graph, Edge, WeightedGraph};
pub use state::{HermitianMatrix, QuantumState, C64};
