use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{DickeError, Result};
use crate::model::{QuantumState, StateData};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    /// All qubits, in the `|j, m>` basis with `m` ascending.
    QubitsAll,
    /// The field mode in the truncated Fock basis.
    Field,
    /// Any two qubits, in the `|up up>, |up down>, |down up>, |down down>` basis.
    QubitPair,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensityMatrix {
    pub subsystem: Subsystem,
    pub matrix: DMatrix<C64>,
}

impl ReducedDensityMatrix {
    pub fn new(subsystem: Subsystem, matrix: DMatrix<C64>) -> Self {
        Self { subsystem, matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `tr rho^2`
    pub fn purity(&self) -> f64 {
        // tr(rho rho) = sum_ij rho_ij rho_ji = sum_ij |rho_ij|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(DickeError::InvalidState(format!("reduced trace {tr}")));
        }
        let herm = (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-10 {
            return Err(DickeError::InvalidState(format!("reduced Hermiticity error {herm:.3e}")));
        }
        let min = self.matrix.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-8 {
            return Err(DickeError::InvalidState(format!("reduced eigenvalue {min:.3e}")));
        }
        Ok(())
    }
}

/// Partial trace over the field: an `(N+1) x (N+1)` matrix.
pub fn reduce_to_qubits(state: &QuantumState) -> ReducedDensityMatrix {
    let space = state.space();
    let ds = space.spin_dim();
    let mut out = DMatrix::zeros(ds, ds);
    let labels = space.labels();
    match state.data() {
        StateData::Pure(psi) => {
            for n in 0..space.fock_dim() {
                for s2 in 0..ds {
                    let Some(j) = space.index_of(s2, n) else { continue };
                    let b = psi[j].conj();
                    if b == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for s1 in 0..ds {
                        if let Some(i) = space.index_of(s1, n) {
                            out[(s1, s2)] += psi[i] * b;
                        }
                    }
                }
            }
        }
        StateData::Density(rho) => {
            for (j, &(s2, n2)) in labels.iter().enumerate() {
                for (i, &(s1, n1)) in labels.iter().enumerate() {
                    if n1 == n2 {
                        out[(s1, s2)] += rho[(i, j)];
                    }
                }
            }
        }
    }
    ReducedDensityMatrix::new(Subsystem::QubitsAll, out)
}

/// Partial trace over the qubits: a `fock_cutoff x fock_cutoff` matrix.
pub fn reduce_to_field(state: &QuantumState) -> ReducedDensityMatrix {
    let space = state.space();
    let df = space.fock_dim();
    let mut out = DMatrix::zeros(df, df);
    match state.data() {
        StateData::Pure(psi) => {
            for s in 0..space.spin_dim() {
                for n2 in 0..df {
                    let Some(j) = space.index_of(s, n2) else { continue };
                    let b = psi[j].conj();
                    if b == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for n1 in 0..df {
                        if let Some(i) = space.index_of(s, n1) {
                            out[(n1, n2)] += psi[i] * b;
                        }
                    }
                }
            }
        }
        StateData::Density(rho) => {
            let labels = space.labels();
            for (j, &(s2, n2)) in labels.iter().enumerate() {
                for (i, &(s1, n1)) in labels.iter().enumerate() {
                    if s1 == s2 {
                        out[(n1, n2)] += rho[(i, j)];
                    }
                }
            }
        }
    }
    ReducedDensityMatrix::new(Subsystem::Field, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_field_operators, HilbertSpace, ParitySector};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_pure(space: &Arc<HilbertSpace>, rng: &mut ChaCha8Rng) -> QuantumState {
        let v = DVector::from_fn(space.dim(), |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        QuantumState::pure(space.clone(), v.normalize()).unwrap()
    }

    #[test]
    fn product_state_has_pure_marginals() {
        let sp = Arc::new(HilbertSpace::full(3, 4).unwrap());
        let st = QuantumState::basis(sp, 1, 2).unwrap();
        assert!((reduce_to_qubits(&st).purity() - 1.0).abs() < 1e-12);
        assert!((reduce_to_field(&st).purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlated_state_has_half_purity() {
        let sp = Arc::new(HilbertSpace::full(1, 2).unwrap());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = DVector::zeros(4);
        v[sp.index_of(0, 0).unwrap()] = C64::new(h, 0.0);
        v[sp.index_of(1, 1).unwrap()] = C64::new(h, 0.0);
        let st = QuantumState::pure(sp, v).unwrap();
        assert!((reduce_to_qubits(&st).purity() - 0.5).abs() < 1e-12);
        assert!((reduce_to_field(&st).purity() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn random_states_reduce_to_unit_trace() {
        let sp = Arc::new(HilbertSpace::full(4, 5).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..50 {
            let st = random_pure(&sp, &mut rng);
            let st = if k % 2 == 0 { st } else { st.to_density() };
            for r in [reduce_to_qubits(&st), reduce_to_field(&st)] {
                assert!((r.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
                r.validate().unwrap();
            }
        }
    }

    #[test]
    fn photon_number_commutes_with_reduction() {
        let sp = Arc::new(HilbertSpace::new(3, 6, ParitySector::Even).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let st = random_pure(&sp, &mut rng);
        let direct = st.expectation(&build_field_operators(&sp).number).re;
        let rb = reduce_to_field(&st);
        let via: f64 = (0..rb.dim()).map(|n| n as f64 * rb.matrix[(n, n)].re).sum();
        assert!((direct - via).abs() < 1e-10);
    }

    #[test]
    fn sector_and_full_space_reductions_agree() {
        let sp = Arc::new(HilbertSpace::new(2, 5, ParitySector::Even).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let st = random_pure(&sp, &mut rng);
        let full = st.to_full_space();
        let a = reduce_to_qubits(&st).matrix;
        let b = reduce_to_qubits(&full).matrix;
        assert!((a - b).norm() < 1e-14);
    }
}
