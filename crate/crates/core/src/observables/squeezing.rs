use num_complex::Complex64 as C64;

use super::reduce::{reduce_to_qubits, ReducedDensityMatrix};
use crate::model::QuantumState;

/// `1 - xi_q^2 = (2/N)(|<J+^2>| + <Jz^2> - N^2/4)`.
///
/// Evaluable for any state; it equals `(N - 1) c_W` only for even-parity
/// states under unitary evolution. Negative values are returned unclipped.
pub fn spin_squeezing_even(state: &QuantumState) -> f64 {
    spin_squeezing_from_qubits(&reduce_to_qubits(state))
}

pub fn spin_squeezing_from_qubits(rho_q: &ReducedDensityMatrix) -> f64 {
    let ds = rho_q.dim();
    let n = (ds - 1) as f64;
    let j = n / 2.0;
    let m = |s: usize| s as f64 - j;
    let raise = |s: usize| (j * (j + 1.0) - m(s) * (m(s) + 1.0)).sqrt();
    let rho = &rho_q.matrix;
    let mut jp2 = C64::new(0.0, 0.0);
    let mut jz2 = 0.0;
    for s in 0..ds {
        jz2 += m(s) * m(s) * rho[(s, s)].re;
        if s + 2 < ds {
            // <s+2| J+^2 |s> rho[s, s+2]
            jp2 += raise(s) * raise(s + 1) * rho[(s, s + 2)];
        }
    }
    (2.0 / n) * (jp2.norm() + jz2 - n * n / 4.0)
}
