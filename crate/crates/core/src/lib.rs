//! Finite-size Dicke model driven across its superradiant transition by a
//! linear coupling ramp.

pub mod error;
pub mod model;
pub mod observables;
pub mod propagation;
pub mod quasiprob;
pub mod sparse;
pub mod sweep;

pub use error::{DickeError, Result};
pub use model::{HilbertSpace, ModelParams, ParitySector, QuantumState};
pub use sparse::SparseOperator;
