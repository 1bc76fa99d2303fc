//! Phase-space pictures of the two subsystems.

mod angular;
mod plane;
mod sphere;

pub use angular::{normalized_legendre, spherical_harmonic, wigner_3j, wigner_3j_checked};
pub use plane::{
    field_wigner, fringe_wavelength, negativity_volume, negativity_with_error, support_check, CutAxis, PlaneGrid,
    WignerField, WignerMode,
};
pub use sphere::{
    agarwal_wigner, agarwal_wigner_from_table, gauss_legendre, multipole_expectations, MultipoleTable, SphereField,
    SphereGrid, IMAG_DISCARD, IMAG_FAIL,
};
