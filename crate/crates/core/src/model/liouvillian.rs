//! Explicit superoperator of the master equation.
//!
//! Density matrices are vectorized by stacking columns:
//! `vec(rho)[i + j d] = rho[i, j]`, so `vec(A rho B) = (B^T (x) A) vec(rho)`.

use num_complex::Complex64 as C64;

use super::operators::{build_field_operators, check_shape, HamiltonianParts};
use super::{HilbertSpace, ModelParams};
use crate::error::{DickeError, Result};
use crate::sparse::SparseOperator;

/// Column-stacking position of `rho[row, col]`.
pub fn vec_index(row: usize, col: usize, dim: usize) -> usize {
    row + col * dim
}

/// Append the triplets of `rho -> coeff * A rho B`.
fn push_sandwich(
    trip: &mut Vec<(usize, usize, C64)>,
    dim: usize,
    coeff: C64,
    left: &SparseOperator,
    right: &SparseOperator,
) {
    // vec(A rho B)[i + j d] = sum_{l,k} A[i,l] B[k,j] rho[l,k]
    for (i, l, a) in left.triplets() {
        for (k, j, b) in right.triplets() {
            trip.push((vec_index(i, j, dim), vec_index(l, k, dim), coeff * a * b));
        }
    }
}

/// Generator `L` with `d vec(rho)/dt = L vec(rho)` for
/// `-i[H, rho] + kappa (nbar + 1) D[a] rho + kappa nbar D[a^dag] rho`,
/// where `D[c] rho = 2 c rho c^dag - {c^dag c, rho}`.
///
/// Parity sectors are accepted only when `kappa == 0`.
pub fn build_liouvillian(space: &HilbertSpace, params: &ModelParams, lambda: f64) -> Result<SparseOperator> {
    check_shape(space, params)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(DickeError::param("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    if params.kappa > 0.0 && !space.is_full() {
        return Err(DickeError::SectorRestricted(space.sector().name()));
    }
    let d = space.dim();
    let id = SparseOperator::identity(d);
    let h = HamiltonianParts::new(space, params).at(lambda);
    let i = C64::new(0.0, 1.0);
    let mut trip = Vec::new();
    push_sandwich(&mut trip, d, -i, &h, &id);
    push_sandwich(&mut trip, d, i, &id, &h);

    if params.kappa > 0.0 {
        let f = build_field_operators(space);
        let a_dag_a = f.number.clone();
        let a_a_dag = f.a.matmul(&f.adag);
        let down = params.kappa * (params.nbar + 1.0);
        let up = params.kappa * params.nbar;
        for (rate, jump, jump_dag, occ) in [(down, &f.a, &f.adag, &a_dag_a), (up, &f.adag, &f.a, &a_a_dag)] {
            if rate == 0.0 {
                continue;
            }
            let r = C64::new(rate, 0.0);
            push_sandwich(&mut trip, d, 2.0 * r, jump, jump_dag);
            push_sandwich(&mut trip, d, -r, occ, &id);
            push_sandwich(&mut trip, d, -r, &id, occ);
        }
    }
    Ok(SparseOperator::from_triplets(d * d, d * d, trip))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ParitySector;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vectorize(m: &DMatrix<C64>) -> Vec<C64> {
        m.as_slice().to_vec()
    }

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let a = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn unitary_limit_is_the_commutator() {
        let p = ModelParams::new(2, 4);
        let sp = HilbertSpace::full(2, 4).unwrap();
        let l = build_liouvillian(&sp, &p, 0.8).unwrap();
        let h = build_hamiltonian_dense(&sp, &p, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let rho = random_hermitian(sp.dim(), &mut rng);
            let expected = (&h * &rho - &rho * &h) * C64::new(0.0, -1.0);
            let got = l.matvec(&vectorize(&rho));
            let err = got.iter().zip(expected.as_slice()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-11, "{err}");
        }
    }

    fn build_hamiltonian_dense(sp: &HilbertSpace, p: &ModelParams, lambda: f64) -> DMatrix<C64> {
        crate::model::build_hamiltonian(sp, p, lambda).unwrap().to_dense()
    }

    #[test]
    fn single_photon_decay_rate() {
        // H = 0 is not reachable directly; subtract the Hamiltonian part.
        let p = ModelParams::new(1, 3).with_kappa(1.0);
        let sp = HilbertSpace::full(1, 3).unwrap();
        let l = build_liouvillian(&sp, &p, 0.0).unwrap();
        let lh = build_liouvillian(&sp, &ModelParams::new(1, 3), 0.0).unwrap();
        let dissipator = l.sub(&lh);
        let d = sp.dim();
        let one = sp.index_of(0, 1).unwrap();
        let zero = sp.index_of(0, 0).unwrap();
        let mut rho = DMatrix::zeros(d, d);
        rho[(one, one)] = C64::new(1.0, 0.0);
        let out = dissipator.matvec(&vectorize(&rho));
        for (k, v) in out.iter().enumerate() {
            let expected = if k == vec_index(zero, zero, d) {
                2.0
            } else if k == vec_index(one, one, d) {
                -2.0
            } else {
                0.0
            };
            assert!((v - C64::new(expected, 0.0)).norm() < 1e-15, "entry {k}: {v}");
        }
    }

    #[test]
    fn generator_is_traceless() {
        let p = ModelParams::new(2, 5).with_kappa(0.7).with_nbar(0.3);
        let sp = HilbertSpace::full(2, 5).unwrap();
        let l = build_liouvillian(&sp, &p, 1.3).unwrap();
        let d = sp.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let rho = random_hermitian(d, &mut rng);
            let out = l.matvec(&vectorize(&rho));
            let tr: C64 = (0..d).map(|i| out[vec_index(i, i, d)]).sum();
            assert!(tr.norm() < 1e-12);
        }
    }

    #[test]
    fn dissipative_generator_rejects_sectors() {
        let p = ModelParams::new(2, 4).with_kappa(0.1);
        let sp = HilbertSpace::new(2, 4, ParitySector::Even).unwrap();
        assert!(matches!(build_liouvillian(&sp, &p, 0.5), Err(DickeError::SectorRestricted(_))));
        let lossless = ModelParams::new(2, 4);
        assert!(build_liouvillian(&sp, &lossless, 0.5).is_ok());
    }
}
