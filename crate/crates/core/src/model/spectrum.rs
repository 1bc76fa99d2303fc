use nalgebra::DMatrix;

use super::operators::HamiltonianParts;
use super::{HilbertSpace, ModelParams, ParitySector};
use crate::error::{DickeError, Result};

pub const DEFAULT_DENSE_LIMIT: usize = 4000;

/// `E1 - E0` of `H(lambda)` restricted to the even-parity sector.
pub fn spectral_gap(params: &ModelParams, lambda: f64) -> Result<f64> {
    spectral_gap_with_limit(params, lambda, DEFAULT_DENSE_LIMIT)
}

pub fn spectral_gap_with_limit(params: &ModelParams, lambda: f64, dim_limit: usize) -> Result<f64> {
    params.validate()?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(DickeError::param("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    let space = HilbertSpace::new(params.n_qubits, params.fock_cutoff, ParitySector::Even)?;
    let d = space.dim();
    if d > dim_limit {
        return Err(DickeError::DimensionLimit { dim: d, limit: dim_limit });
    }
    if d < 2 {
        return Err(DickeError::param("fock_cutoff", "even sector has fewer than two states"));
    }
    // all matrix elements are real
    let h = HamiltonianParts::new(&space, params).at(lambda);
    let mut dense = DMatrix::<f64>::zeros(d, d);
    for (r, c, v) in h.triplets() {
        dense[(r, c)] = v.re;
    }
    let mut evals: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
    evals.sort_by(|a, b| a.total_cmp(b));
    Ok(evals[1] - evals[0])
}
