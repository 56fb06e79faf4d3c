//! Spin operators, interaction tensors, cluster descriptions and Hamiltonians.

mod hamiltonian;
mod operators;
mod spec;
mod species;
mod symmetry;
mod tensor;

pub use hamiltonian::{build_hamiltonian, HamiltonianTerms};
pub use operators::{embed, spin_operators, SpinOperators};
pub use spec::{CouplingSpec, HyperfineSpec, SiteSpec, SpinSystemSpec, ZfsParams, DIMENSION_CAP};
pub use species::{SpeciesKind, SpinSpecies, GAMMA_C13, GAMMA_E, GAMMA_N14, GAMMA_N15};
pub use symmetry::{exchange_classes, swap_permutation, Unit};
pub use tensor::{rotate_tensor, AxisOrientation, InteractionTensor, AXIS_TOL};

pub(crate) use operators::strides;
