//! Hilbert space, operators, generators and the initial state of the
//! single-mode Dicke model.

mod liouvillian;
mod operators;
mod params;
mod space;
mod spectrum;
mod state;

pub(crate) use operators::check_shape;
pub use liouvillian::{build_liouvillian, vec_index};
pub use operators::{
    build_field_operators, build_hamiltonian, build_parity_operator, build_spin_operators,
    FieldOperators, HamiltonianParts, SpinOperators,
};
pub use params::ModelParams;
pub use space::{HilbertSpace, ParitySector};
pub use spectrum::{spectral_gap, spectral_gap_with_limit, DEFAULT_DENSE_LIMIT};
pub use state::{initial_state, thermal_tail_weight, thermal_weights, QuantumState, StateData};
