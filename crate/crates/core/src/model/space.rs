use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParitySector {
    Full,
    Even,
    Odd,
}

impl ParitySector {
    pub fn name(self) -> &'static str {
        match self {
            ParitySector::Full => "full",
            ParitySector::Even => "even",
            ParitySector::Odd => "odd",
        }
    }

    fn admits(self, parity: i32) -> bool {
        match self {
            ParitySector::Full => true,
            ParitySector::Even => parity == 1,
            ParitySector::Odd => parity == -1,
        }
    }
}

impl fmt::Display for ParitySector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Maximal Dicke manifold `j = N/2` tensored with a truncated Fock space.
///
/// Basis states are labelled by `(s, n)` with `s = m + N/2` in `0..=N` and
/// `n` in `0..fock_dim`. In the full space the composite index is
/// `s * fock_dim + n` (spin-major, Fock-minor). A parity sector keeps the same
/// ordering but drops the states of the other parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertSpace {
    n_qubits: usize,
    fock_dim: usize,
    sector: ParitySector,
    basis: Vec<(usize, usize)>,
    // full composite index -> sector index
    lookup: Vec<Option<usize>>,
}

impl HilbertSpace {
    pub fn new(n_qubits: usize, fock_dim: usize, sector: ParitySector) -> Result<Self> {
        if n_qubits == 0 {
            return Err(DickeError::param("n_qubits", "must be positive"));
        }
        if fock_dim == 0 {
            return Err(DickeError::param("fock_cutoff", "must be positive"));
        }
        let mut basis = Vec::new();
        let mut lookup = vec![None; (n_qubits + 1) * fock_dim];
        for s in 0..=n_qubits {
            for n in 0..fock_dim {
                if sector.admits(parity_of(s, n)) {
                    lookup[s * fock_dim + n] = Some(basis.len());
                    basis.push((s, n));
                }
            }
        }
        Ok(Self { n_qubits, fock_dim, sector, basis, lookup })
    }

    pub fn full(n_qubits: usize, fock_dim: usize) -> Result<Self> {
        Self::new(n_qubits, fock_dim, ParitySector::Full)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn j(&self) -> f64 {
        self.n_qubits as f64 / 2.0
    }

    pub fn spin_dim(&self) -> usize {
        self.n_qubits + 1
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn sector(&self) -> ParitySector {
        self.sector
    }

    pub fn is_full(&self) -> bool {
        self.sector == ParitySector::Full
    }

    /// Number of retained basis states.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Dimension of the unrestricted product space.
    pub fn full_dim(&self) -> usize {
        (self.n_qubits + 1) * self.fock_dim
    }

    /// `(s, n)` labels of basis state `i`.
    pub fn label(&self, i: usize) -> (usize, usize) {
        self.basis[i]
    }

    pub fn labels(&self) -> &[(usize, usize)] {
        &self.basis
    }

    /// Index of `(s, n)` if the state is retained.
    pub fn index_of(&self, s: usize, n: usize) -> Option<usize> {
        if s > self.n_qubits || n >= self.fock_dim {
            return None;
        }
        self.lookup[s * self.fock_dim + n]
    }

    /// Spin projection `m = s - N/2`.
    pub fn m_of(&self, s: usize) -> f64 {
        s as f64 - self.j()
    }

    /// `(-1)^(m + N/2 + n)`.
    pub fn parity(&self, i: usize) -> i32 {
        let (s, n) = self.basis[i];
        parity_of(s, n)
    }

    pub fn full_space(&self) -> HilbertSpace {
        Self::new(self.n_qubits, self.fock_dim, ParitySector::Full).expect("validated at construction")
    }

    pub fn same_shape(&self, other: &HilbertSpace) -> bool {
        self.n_qubits == other.n_qubits && self.fock_dim == other.fock_dim
    }

    /// Embed a sector vector into the full product space.
    pub fn embed_vector(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(self.full_dim());
        for (i, &(s, n)) in self.basis.iter().enumerate() {
            out[s * self.fock_dim + n] = v[i];
        }
        out
    }

    pub fn embed_matrix(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let full = self.full_dim();
        let mut out = DMatrix::zeros(full, full);
        let idx: Vec<usize> = self.basis.iter().map(|&(s, n)| s * self.fock_dim + n).collect();
        for (b, &jb) in idx.iter().enumerate() {
            for (a, &ia) in idx.iter().enumerate() {
                out[(ia, jb)] = m[(a, b)];
            }
        }
        out
    }

    /// Project a full-space vector onto this sector; returns the dropped weight too.
    pub fn restrict_vector(&self, full: &DVector<C64>) -> (DVector<C64>, f64) {
        let mut out = DVector::zeros(self.dim());
        let mut kept = 0.0;
        for (i, &(s, n)) in self.basis.iter().enumerate() {
            out[i] = full[s * self.fock_dim + n];
            kept += out[i].norm_sqr();
        }
        let total: f64 = full.iter().map(|z| z.norm_sqr()).sum();
        (out, total - kept)
    }
}

pub(crate) fn parity_of(s: usize, n: usize) -> i32 {
    if (s + n) % 2 == 0 {
        1
    } else {
        -1
    }
}
