//! Exact numerics for bosonic light cones on small lattices.
//!
//! The crate builds Bose-Hubbard Hamiltonians on capped fixed-`N` Fock
//! sectors, evolves states and observables exactly (dense eigendecomposition
//! or Krylov), and measures particle propagation and state-dependent
//! Lieb-Robinson quantities.

pub mod astlo;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use fock::FockBasis;
pub use lattice::{ball, Lattice, SiteSet};
pub use operators::{
    build_hamiltonian, build_hopping, build_potential, number_operator, second_quantize,
    DenseMatrix, DiagonalOperator, HamiltonianParams, PotentialKind, SparseOperator, C64,
};
pub use states::QuantumState;
