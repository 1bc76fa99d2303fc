use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::reduce::{ReducedDensityMatrix, Subsystem};
use crate::error::{DickeError, Result};

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weight of the two-qubit triplet `|1, u - 1>` in the branching of `|N/2, s - N/2>`
/// into two qubits plus the remaining `N - 2`.
fn branching(n: usize, s: usize, u: usize) -> f64 {
    if u > s || s - u > n - 2 {
        return 0.0;
    }
    (binomial(2, u) * binomial(n - 2, s - u) / binomial(n, s)).sqrt()
}

/// Reduce the symmetric `N`-qubit density matrix (in the `|j, m>` basis) to
/// any two of its qubits.
///
/// Output basis order: `|up up>, |up down>, |down up>, |down down>`. The
/// singlet never appears because the state is permutation symmetric.
pub fn two_qubit_reduced_dm(rho_q: &ReducedDensityMatrix) -> Result<ReducedDensityMatrix> {
    let ds = rho_q.dim();
    if ds < 3 {
        return Err(DickeError::param("n_qubits", "two-qubit reduction needs N >= 2"));
    }
    let n = ds - 1;
    let rho = &rho_q.matrix;

    // triplet block, indexed by u = number of up spins in the pair
    let mut tri = [[C64::new(0.0, 0.0); 3]; 3];
    for (u, row) in tri.iter_mut().enumerate() {
        for (v, entry) in row.iter_mut().enumerate() {
            for s in u..ds {
                let rest = s - u;
                if rest > n - 2 {
                    break;
                }
                let s2 = rest + v;
                if s2 >= ds {
                    continue;
                }
                *entry += branching(n, s, u) * branching(n, s2, v) * rho[(s, s2)];
            }
        }
    }
    let tr_tri = tri[0][0] + tri[1][1] + tri[2][2];
    let lost = (rho_q.trace() - tr_tri).norm();
    if lost > 1e-10 {
        return Err(DickeError::OutsideDickeManifold(lost));
    }

    // computational basis: 0 = up up (u = 2), 1 = up down, 2 = down up, 3 = down down (u = 0)
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let embed = |u: usize| -> [f64; 4] {
        match u {
            2 => [1.0, 0.0, 0.0, 0.0],
            1 => [0.0, h, h, 0.0],
            _ => [0.0, 0.0, 0.0, 1.0],
        }
    };
    let mut out = DMatrix::zeros(4, 4);
    for u in 0..3 {
        let a = embed(u);
        for v in 0..3 {
            let b = embed(v);
            for i in 0..4 {
                for k in 0..4 {
                    out[(i, k)] += a[i] * b[k] * tri[u][v];
                }
            }
        }
    }
    Ok(ReducedDensityMatrix::new(Subsystem::QubitPair, out))
}

/// Wootters concurrence `max(0, mu1 - mu2 - mu3 - mu4)` with `mu_i` the
/// descending square roots of the spectrum of `rho (sy sy) rho* (sy sy)`.
pub fn wootters_concurrence(rho2: &DMatrix<C64>) -> f64 {
    assert_eq!(rho2.shape(), (4, 4), "concurrence needs a 4x4 density matrix");
    let rho = (rho2 + rho2.adjoint()) * C64::new(0.5, 0.0);

    // (sy (x) sy) has entries -1 at (0,3), (3,0) and +1 at (1,2), (2,1)
    let mut flip = DMatrix::<C64>::zeros(4, 4);
    flip[(0, 3)] = C64::new(-1.0, 0.0);
    flip[(3, 0)] = C64::new(-1.0, 0.0);
    flip[(1, 2)] = C64::new(1.0, 0.0);
    flip[(2, 1)] = C64::new(1.0, 0.0);
    let tilde = &flip * rho.conjugate() * &flip;

    // the spectrum of rho tilde equals that of sqrt(rho) tilde sqrt(rho), which is Hermitian
    let eig = SymmetricEigen::new(rho.clone());
    let sqrt_vals = eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let sqrt_rho = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint();
    let m = &sqrt_rho * tilde * &sqrt_rho;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut mu: Vec<f64> = m.symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    (mu[0] - mu[1] - mu[2] - mu[3]).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HilbertSpace, QuantumState};
    use crate::observables::{reduce_to_qubits, spin_squeezing_even};
    use nalgebra::DVector;
    use std::sync::Arc;

    fn projector(v: &[C64]) -> DMatrix<C64> {
        let v = DVector::from_column_slice(v);
        &v * v.adjoint()
    }

    #[test]
    fn bell_and_product_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let bell = projector(&[C64::new(h, 0.0), z, z, C64::new(h, 0.0)]);
        assert!((wootters_concurrence(&bell) - 1.0).abs() < 1e-12);
        let down = projector(&[z, z, z, C64::new(1.0, 0.0)]);
        assert!(wootters_concurrence(&down).abs() < 1e-12);
        let mixed = DMatrix::<C64>::identity(4, 4) * C64::new(0.25, 0.0);
        assert_eq!(wootters_concurrence(&mixed), 0.0);
    }

    #[test]
    fn pair_reduction_of_two_qubits_is_identity_map() {
        let sp = Arc::new(HilbertSpace::full(2, 1).unwrap());
        let v = DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.64, 0.0)]);
        let st = QuantumState::pure(sp, v.clone()).unwrap();
        let r2 = two_qubit_reduced_dm(&reduce_to_qubits(&st)).unwrap();
        // |1,-1> = dd, |1,0> = (ud + du)/sqrt2, |1,1> = uu
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [v[2], v[1] * h, v[1] * h, v[0]];
        assert!((r2.matrix - projector(&psi)).norm() < 1e-14);
    }

    #[test]
    fn fully_polarized_state_reduces_to_down_down() {
        let sp = Arc::new(HilbertSpace::full(7, 1).unwrap());
        let st = QuantumState::basis(sp, 0, 0).unwrap();
        let r2 = two_qubit_reduced_dm(&reduce_to_qubits(&st)).unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        expected[(3, 3)] = C64::new(1.0, 0.0);
        assert_eq!(r2.matrix, expected);
    }

    /// Brute-force partial trace of the N = 4 Dicke state |2, 0> in the 2^4 space.
    #[test]
    fn dicke_state_matches_brute_force() {
        let n = 4;
        let mut full = vec![0.0f64; 1 << n];
        let mut count = 0;
        for b in 0..(1usize << n) {
            if b.count_ones() == 2 {
                full[b] = 1.0;
                count += 1;
            }
        }
        for x in full.iter_mut() {
            *x /= (count as f64).sqrt();
        }
        // keep qubits 3 and 2 (most significant bits), bit value 1 = up
        // brute-force basis index 0 = up up, so map bit pattern (1,1) -> 0
        let mut brute = DMatrix::<C64>::zeros(4, 4);
        let idx = |hi: usize| 3 - hi;
        for rest in 0..4usize {
            for a in 0..4usize {
                for b in 0..4usize {
                    let va = full[(a << 2) | rest];
                    let vb = full[(b << 2) | rest];
                    brute[(idx(a), idx(b))] += C64::new(va * vb, 0.0);
                }
            }
        }
        let sp = Arc::new(HilbertSpace::full(n, 1).unwrap());
        let st = QuantumState::basis(sp, 2, 0).unwrap();
        let r2 = two_qubit_reduced_dm(&reduce_to_qubits(&st)).unwrap();
        assert!((r2.matrix - brute).norm() < 1e-14);
    }

    #[test]
    fn squeezing_identity_on_a_twisted_state() {
        // even-parity one-axis twisted state of N = 6
        let n = 6;
        let sp = Arc::new(HilbertSpace::full(n, 1).unwrap());
        let ops = crate::model::build_spin_operators(&sp);
        let jx = ops.jx.to_dense();
        let u = ((&jx * &jx) * C64::new(0.0, -0.2)).exp();
        let mut psi0 = DVector::zeros(n + 1);
        psi0[0] = C64::new(1.0, 0.0);
        let st = QuantumState::pure(sp, &u * psi0).unwrap();
        let c = wootters_concurrence(&two_qubit_reduced_dm(&reduce_to_qubits(&st)).unwrap().matrix);
        let xi = spin_squeezing_even(&st);
        assert!(c > 1e-3);
        // sqrt of near-zero spin-flip eigenvalues limits this to ~1e-8
        assert!(((n as f64 - 1.0) * c - xi).abs() < 1e-7, "{c} {xi}");
    }
}
