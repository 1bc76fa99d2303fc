//! Scalar diagnostics of a state and reductions to its subsystems.

mod concurrence;
mod field;
mod record;
mod reduce;
mod squeezing;

pub use concurrence::{two_qubit_reduced_dm, wootters_concurrence};
pub use field::{field_quadrature_stats, field_squeezing, QuadratureStats};
pub use record::{ObservableRecord, RECORD_COLUMNS};
pub use reduce::{reduce_to_field, reduce_to_qubits, ReducedDensityMatrix, Subsystem};
pub use squeezing::{spin_squeezing_even, spin_squeezing_from_qubits};
