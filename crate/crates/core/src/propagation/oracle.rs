//! Brute-force reference propagation with dense exponentials.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::schedule::RampSchedule;
use crate::error::{DickeError, Result};
use crate::model::{build_liouvillian, check_shape, HamiltonianParts, ModelParams, QuantumState, StateData};

pub const ORACLE_PURE_LIMIT: usize = 256;
pub const ORACLE_DENSITY_LIMIT: usize = 64;

/// Propagator `exp(-i H dt)` from the real symmetric eigendecomposition.
fn unitary_step(h: &DMatrix<f64>, dt: f64) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * dt)));
    &v * phases * v.transpose()
}

/// Ramp with `lambda` frozen at the midpoint of each of `n_steps` equal
/// substeps, each advanced by a dense exponential.
///
/// Pure states are limited to dimension 256 and density matrices to 64.
/// With `kappa > 0` every substep exponentiates the dense `d^2 x d^2`
/// Liouvillian, so keep `d` small.
pub fn dense_oracle_propagate(
    initial: &QuantumState,
    params: &ModelParams,
    schedule: &RampSchedule,
    n_steps: usize,
) -> Result<QuantumState> {
    schedule.validate()?;
    let space = initial.space_arc().clone();
    check_shape(&space, params)?;
    if n_steps == 0 {
        return Err(DickeError::param("n_steps", "must be at least 1"));
    }
    let d = space.dim();
    let limit = if initial.is_pure() { ORACLE_PURE_LIMIT } else { ORACLE_DENSITY_LIMIT };
    if d > limit {
        return Err(DickeError::DimensionLimit { dim: d, limit });
    }
    let parts = HamiltonianParts::new(&space, params);
    let total = schedule.duration();
    let dt = total / n_steps as f64;
    let dense_h = |lambda: f64| {
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (r, c, v) in parts.at(lambda).triplets() {
            m[(r, c)] = v.re;
        }
        m
    };

    let mut data = initial.data().clone();
    for k in 0..n_steps {
        let lambda = schedule.lambda_at((k as f64 + 0.5) * dt);
        data = match data {
            StateData::Pure(psi) => {
                if params.kappa != 0.0 {
                    return Err(DickeError::param("kappa", "pure-state oracle needs kappa = 0"));
                }
                StateData::Pure(unitary_step(&dense_h(lambda), dt) * psi)
            }
            StateData::Density(rho) if params.kappa == 0.0 => {
                let u = unitary_step(&dense_h(lambda), dt);
                StateData::Density(&u * rho * u.adjoint())
            }
            StateData::Density(rho) => {
                let l = build_liouvillian(&space, params, lambda)?.to_dense();
                let prop = (l * C64::new(dt, 0.0)).exp();
                let v = prop * DVector::from_column_slice(rho.as_slice());
                StateData::Density(DMatrix::from_column_slice(d, d, v.as_slice()))
            }
        };
    }
    let state = match data {
        StateData::Pure(psi) => QuantumState::pure(space, psi)?,
        StateData::Density(rho) => QuantumState::density(space, rho)?,
    };
    Ok(state.at(total, schedule.lambda_end))
}
