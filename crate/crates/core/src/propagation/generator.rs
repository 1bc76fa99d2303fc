//! Time-dependent generators of the form `A(lambda) = A0 + lambda A1`.
//!
//! Both the Schrodinger right-hand side `-i H(lambda) psi` and the master
//! equation are affine in the coupling, which lets the integrators evaluate
//! any stage or Magnus combination through one `apply(w0, w1, ..)` call.

use num_complex::Complex64 as C64;

use crate::model::{HamiltonianParts, HilbertSpace, ModelParams};
use crate::sparse::SparseOperator;

pub(crate) trait AffineGenerator {
    /// Length of the flattened state.
    fn len(&self) -> usize;

    /// `y = (w0 A0 + w1 A1) x`
    fn apply(&mut self, w0: f64, w1: f64, x: &[C64], y: &mut [C64]);

    /// True when `A0` and `A1` are both `-i` times a Hermitian operator.
    fn is_skew_hermitian(&self) -> bool;

    /// Rough bound on `||A0||` and `||A1||`, used to pick a first step.
    fn norm_bounds(&self) -> (f64, f64);
}

/// `-i (bare + lambda coupling)` acting on state vectors.
pub(crate) struct SchrodingerGenerator {
    bare: Vec<f64>,
    coupling: SparseOperator,
    norms: (f64, f64),
}

impl SchrodingerGenerator {
    pub(crate) fn new(space: &HilbertSpace, params: &ModelParams) -> Self {
        let parts = HamiltonianParts::new(space, params);
        let bare: Vec<f64> = parts.bare.diagonal().iter().map(|z| z.re).collect();
        let norms = (bare.iter().fold(0.0f64, |m, x| m.max(x.abs())), parts.coupling.norm_bound());
        Self { bare, coupling: parts.coupling, norms }
    }
}

impl AffineGenerator for SchrodingerGenerator {
    fn len(&self) -> usize {
        self.bare.len()
    }

    fn apply(&mut self, w0: f64, w1: f64, x: &[C64], y: &mut [C64]) {
        // y = -i (w0 bare x + w1 coupling x)
        for r in 0..self.bare.len() {
            let mut acc = x[r] * (w0 * self.bare[r]);
            for (c, v) in self.coupling.row(r) {
                acc += v * x[c] * w1;
            }
            y[r] = C64::new(acc.im, -acc.re);
        }
    }

    fn is_skew_hermitian(&self) -> bool {
        true
    }

    fn norm_bounds(&self) -> (f64, f64) {
        self.norms
    }
}

/// Master-equation generator acting on column-major flattened density
/// matrices. `A0` holds the bare commutator and the dissipator, `A1` the
/// coupling commutator.
pub(crate) struct LindbladGenerator {
    dim: usize,
    bare: Vec<f64>,
    coupling: SparseOperator,
    fock: Vec<usize>,
    // index of (s, n + 1) and (s, n - 1) for every basis state
    up: Vec<Option<usize>>,
    down: Vec<Option<usize>>,
    fock_dim: usize,
    decay: f64,
    pump: f64,
    scratch: Vec<C64>,
    norms: (f64, f64),
}

impl LindbladGenerator {
    pub(crate) fn new(space: &HilbertSpace, params: &ModelParams) -> Self {
        let parts = HamiltonianParts::new(space, params);
        let bare: Vec<f64> = parts.bare.diagonal().iter().map(|z| z.re).collect();
        let dim = space.dim();
        let labels = space.labels();
        let fock: Vec<usize> = labels.iter().map(|&(_, n)| n).collect();
        let up = labels.iter().map(|&(s, n)| space.index_of(s, n + 1)).collect();
        let down = labels.iter().map(|&(s, n)| if n == 0 { None } else { space.index_of(s, n - 1) }).collect();
        let decay = params.kappa * (params.nbar + 1.0);
        let pump = params.kappa * params.nbar;
        let spread = bare.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x))
            - bare.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        let nmax = space.fock_dim() as f64;
        let norms = (spread + 2.0 * (decay + pump) * nmax, 2.0 * parts.coupling.norm_bound());
        Self {
            dim,
            bare,
            coupling: parts.coupling,
            fock,
            up,
            down,
            fock_dim: space.fock_dim(),
            decay,
            pump,
            scratch: vec![C64::new(0.0, 0.0); dim * dim],
            norms,
        }
    }
}

impl AffineGenerator for LindbladGenerator {
    fn len(&self) -> usize {
        self.dim * self.dim
    }

    fn apply(&mut self, w0: f64, w1: f64, x: &[C64], y: &mut [C64]) {
        let d = self.dim;
        let hx = &mut self.scratch;
        // hx = H x with H = w0 bare + w1 coupling, column by column
        for c in 0..d {
            let col = &x[c * d..(c + 1) * d];
            let out = &mut hx[c * d..(c + 1) * d];
            for r in 0..d {
                let mut acc = col[r] * (w0 * self.bare[r]);
                for (k, v) in self.coupling.row(r) {
                    acc += v * col[k] * w1;
                }
                out[r] = acc;
            }
        }
        // x H: column c is sum_k conj(H_ck) x[:, k], since H is Hermitian
        for c in 0..d {
            let out = &mut y[c * d..(c + 1) * d];
            let diag = w0 * self.bare[c];
            for r in 0..d {
                out[r] = x[r + c * d] * diag;
            }
            for (k, v) in self.coupling.row(c) {
                let coef = v.conj() * w1;
                let col = &x[k * d..(k + 1) * d];
                for r in 0..d {
                    out[r] += coef * col[r];
                }
            }
        }
        // -i [H, x]; valid for any x, not only Hermitian ones
        for (yi, &hi) in y.iter_mut().zip(hx.iter()) {
            let z = hi - *yi;
            *yi = C64::new(z.im, -z.re);
        }
        if w0 == 0.0 || (self.decay == 0.0 && self.pump == 0.0) {
            return;
        }
        let top = self.fock_dim - 1;
        for c in 0..d {
            let nc = self.fock[c] as f64;
            for r in 0..d {
                let nr = self.fock[r] as f64;
                let rho = x[r + c * d];
                let mut acc = C64::new(0.0, 0.0);
                if self.decay != 0.0 {
                    let mut term = -(nr + nc) * rho;
                    if let (Some(ru), Some(cu)) = (self.up[r], self.up[c]) {
                        term += 2.0 * ((nr + 1.0) * (nc + 1.0)).sqrt() * x[ru + cu * d];
                    }
                    acc += self.decay * term;
                }
                if self.pump != 0.0 {
                    // truncated a a^dag is diag(n + 1) with zero on the last level
                    let occ = |i: usize, n: f64| if self.fock[i] == top { 0.0 } else { n + 1.0 };
                    let mut term = -(occ(r, nr) + occ(c, nc)) * rho;
                    if let (Some(rd), Some(cd)) = (self.down[r], self.down[c]) {
                        term += 2.0 * (nr * nc).sqrt() * x[rd + cd * d];
                    }
                    acc += self.pump * term;
                }
                y[r + c * d] += w0 * acc;
            }
        }
    }

    fn is_skew_hermitian(&self) -> bool {
        self.decay == 0.0 && self.pump == 0.0
    }

    fn norm_bounds(&self) -> (f64, f64) {
        self.norms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_liouvillian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matrix_form_matches_explicit_superoperator() {
        let p = ModelParams::new(2, 5).with_kappa(0.3).with_nbar(0.4);
        let sp = HilbertSpace::full(2, 5).unwrap();
        let mut gen = LindbladGenerator::new(&sp, &p);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = sp.dim();
        let x: Vec<C64> =
            (0..d * d).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        for lambda in [0.0, 0.45, 1.7] {
            let l = build_liouvillian(&sp, &p, lambda).unwrap();
            let expected = l.matvec(&x);
            let mut y = vec![C64::new(0.0, 0.0); d * d];
            gen.apply(1.0, lambda, &x, &mut y);
            let err = y.iter().zip(&expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "lambda {lambda}: {err}");
        }
    }

    #[test]
    fn schrodinger_generator_matches_hamiltonian() {
        let p = ModelParams::new(3, 6);
        let sp = HilbertSpace::full(3, 6).unwrap();
        let mut gen = SchrodingerGenerator::new(&sp, &p);
        let h = crate::model::build_hamiltonian(&sp, &p, 0.8).unwrap();
        let x: Vec<C64> = (0..sp.dim()).map(|i| C64::new(i as f64, 1.0 - i as f64 * 0.1)).collect();
        let mut y = vec![C64::new(0.0, 0.0); sp.dim()];
        gen.apply(1.0, 0.8, &x, &mut y);
        let hx = h.matvec(&x);
        for (a, b) in y.iter().zip(hx) {
            assert!((a - b * C64::new(0.0, -1.0)).norm() < 1e-13);
        }
    }
}
