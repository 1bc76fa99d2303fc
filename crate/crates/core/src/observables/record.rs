use serde::{Deserialize, Serialize};

use super::concurrence::{two_qubit_reduced_dm, wootters_concurrence};
use super::field::{field_quadrature_stats, field_squeezing};
use super::reduce::{reduce_to_field, reduce_to_qubits};
use super::squeezing::spin_squeezing_from_qubits;
use crate::model::{QuantumState, StateData};

/// Column order of trajectory CSV files.
pub const RECORD_COLUMNS: [&str; 10] = [
    "t",
    "lambda",
    "qubit_op",
    "field_op",
    "spin_sq",
    "concurrence",
    "field_sq",
    "parity",
    "purity_qubits",
    "purity_field",
];

/// All scalar observables of one trajectory sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub lambda: f64,
    /// `<Jz>/N + 1/2`
    pub qubit_op: f64,
    /// `<a^dag a>/N`
    pub field_op: f64,
    /// `1 - xi_q^2`
    pub spin_sq: f64,
    /// Two-qubit Wootters concurrence (zero for `N < 2`).
    pub concurrence: f64,
    /// `1 - xi_b^2`
    pub field_sq: f64,
    pub parity: f64,
    pub purity_qubits: f64,
    pub purity_field: f64,
}

impl ObservableRecord {
    pub fn from_state(state: &QuantumState) -> Self {
        let space = state.space();
        let n = space.n_qubits() as f64;
        let rho_q = reduce_to_qubits(state);
        let rho_b = reduce_to_field(state);

        let jz: f64 = (0..rho_q.dim()).map(|s| space.m_of(s) * rho_q.matrix[(s, s)].re).sum();
        let photons: f64 = (0..rho_b.dim()).map(|k| k as f64 * rho_b.matrix[(k, k)].re).sum();
        let concurrence = match two_qubit_reduced_dm(&rho_q) {
            Ok(r2) => wootters_concurrence(&r2.matrix),
            Err(_) => 0.0,
        };
        let parity = match state.data() {
            StateData::Pure(psi) => (0..space.dim()).map(|i| space.parity(i) as f64 * psi[i].norm_sqr()).sum(),
            StateData::Density(rho) => (0..space.dim()).map(|i| space.parity(i) as f64 * rho[(i, i)].re).sum(),
        };
        Self {
            t: state.time,
            lambda: state.lambda,
            qubit_op: jz / n + 0.5,
            field_op: photons / n,
            spin_sq: spin_squeezing_from_qubits(&rho_q),
            concurrence,
            field_sq: field_squeezing(&field_quadrature_stats(&rho_b)),
            parity,
            purity_qubits: rho_q.purity(),
            purity_field: rho_b.purity(),
        }
    }

    pub fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.lambda,
            self.qubit_op,
            self.field_op,
            self.spin_sq,
            self.concurrence,
            self.field_sq,
            self.parity,
            self.purity_qubits,
            self.purity_field,
        ]
    }

    /// Largest absolute difference over the observable columns (time and
    /// coupling excluded).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values()[2..]
            .iter()
            .zip(&other.values()[2..])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{initial_state, HilbertSpace, ModelParams, ParitySector};
    use std::sync::Arc;

    #[test]
    fn initial_record() {
        let p = ModelParams::new(8, 10);
        let sp = Arc::new(HilbertSpace::new(8, 10, ParitySector::Even).unwrap());
        let r = ObservableRecord::from_state(&initial_state(&sp, &p).unwrap());
        assert_eq!(r.qubit_op, 0.0);
        assert_eq!(r.field_op, 0.0);
        assert_eq!(r.spin_sq, 0.0);
        assert_eq!(r.concurrence, 0.0);
        assert_eq!(r.field_sq, 0.0);
        assert_eq!(r.parity, 1.0);
        assert_eq!(r.purity_qubits, 1.0);
    }

    #[test]
    fn pure_and_density_records_agree() {
        let p = ModelParams::new(3, 4).with_nbar(0.2);
        let sp = Arc::new(HilbertSpace::full(3, 4).unwrap());
        let st = initial_state(&sp, &p).unwrap();
        let r = ObservableRecord::from_state(&st);
        assert!(r.purity_field < 1.0);
        assert!(r.field_op > 0.0);
    }
}
