use num_complex::Complex64 as C64;

use super::{HilbertSpace, ModelParams};
use crate::error::{DickeError, Result};
use crate::sparse::SparseOperator;

/// Collective spin operators, acting as identity on the Fock factor.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub jx: SparseOperator,
    pub jz: SparseOperator,
    pub jplus: SparseOperator,
    pub jminus: SparseOperator,
}

/// Field-mode operators, acting as identity on the spin factor.
#[derive(Clone, Debug)]
pub struct FieldOperators {
    pub a: SparseOperator,
    pub adag: SparseOperator,
    pub number: SparseOperator,
}

/// `H(lambda) = bare + lambda * coupling`, with `bare = eps Jz + omega a^dag a`
/// and `coupling = (2 / sqrt N) Jx (a^dag + a)`.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub bare: SparseOperator,
    pub coupling: SparseOperator,
}

impl HamiltonianParts {
    pub fn new(space: &HilbertSpace, params: &ModelParams) -> Self {
        let n = space.n_qubits() as f64;
        let bare = assemble(space, |s, k| {
            vec![(s, k, params.epsilon * space.m_of(s) + params.omega * k as f64)]
        });
        let g = 2.0 / n.sqrt();
        let coupling = assemble(space, |s, k| {
            let mut out = Vec::with_capacity(4);
            let up = 0.5 * raise(space, s);
            let down = if s > 0 { 0.5 * raise(space, s - 1) } else { 0.0 };
            let kf = k as f64;
            for (s2, js) in [(s + 1, up), (s.wrapping_sub(1), down)] {
                if js == 0.0 || s2 > space.n_qubits() {
                    continue;
                }
                out.push((s2, k + 1, g * js * (kf + 1.0).sqrt()));
                if k > 0 {
                    out.push((s2, k - 1, g * js * kf.sqrt()));
                }
            }
            out
        });
        Self { bare, coupling }
    }

    pub fn at(&self, lambda: f64) -> SparseOperator {
        self.bare.add_scaled(C64::new(1.0, 0.0), &self.coupling, C64::new(lambda, 0.0))
    }

    /// `y = H(lambda) x`
    pub fn apply(&self, lambda: f64, x: &[C64], y: &mut [C64]) {
        self.bare.matvec_into(x, y);
        self.coupling.matvec_add(C64::new(lambda, 0.0), x, y);
    }
}

/// `<m+1| J+ |m>` for `m = s - j`, or zero at the top of the ladder.
fn raise(space: &HilbertSpace, s: usize) -> f64 {
    if s >= space.n_qubits() {
        return 0.0;
    }
    let j = space.j();
    let m = space.m_of(s);
    (j * (j + 1.0) - m * (m + 1.0)).sqrt()
}

/// Build `P O P` from matrix elements `<s', n'| O |s, n> = value` listed per
/// source state. Targets outside the space (Fock overflow or the other parity
/// sector) are dropped.
fn assemble<F>(space: &HilbertSpace, elements: F) -> SparseOperator
where
    F: Fn(usize, usize) -> Vec<(usize, usize, f64)>,
{
    let mut trip = Vec::new();
    for (col, &(s, n)) in space.labels().iter().enumerate() {
        for (s2, n2, v) in elements(s, n) {
            if let Some(row) = space.index_of(s2, n2) {
                trip.push((row, col, C64::new(v, 0.0)));
            }
        }
    }
    SparseOperator::from_triplets(space.dim(), space.dim(), trip)
}

/// Collective spin operators on `space`.
///
/// On a parity sector these are the compressions `P O P`; parity-odd operators
/// such as `Jx` compress to zero there.
pub fn build_spin_operators(space: &HilbertSpace) -> SpinOperators {
    let jz = assemble(space, |s, n| vec![(s, n, space.m_of(s))]);
    let jplus = assemble(space, |s, n| {
        let v = raise(space, s);
        if v == 0.0 {
            vec![]
        } else {
            vec![(s + 1, n, v)]
        }
    });
    let jminus = assemble(space, |s, n| {
        if s == 0 {
            vec![]
        } else {
            vec![(s - 1, n, raise(space, s - 1))]
        }
    });
    let half = C64::new(0.5, 0.0);
    let jx = jplus.add_scaled(half, &jminus, half);
    SpinOperators { jx, jz, jplus, jminus }
}

/// Truncated ladder operators `a`, `a^dag` and `a^dag a`.
pub fn build_field_operators(space: &HilbertSpace) -> FieldOperators {
    let a = assemble(space, |s, n| if n == 0 { vec![] } else { vec![(s, n - 1, (n as f64).sqrt())] });
    let adag = assemble(space, |s, n| vec![(s, n + 1, (n as f64 + 1.0).sqrt())]);
    let number = assemble(space, |s, n| vec![(s, n, n as f64)]);
    FieldOperators { a, adag, number }
}

/// `H = eps Jz + omega a^dag a + (2 lambda / sqrt N) Jx (a^dag + a)`.
pub fn build_hamiltonian(space: &HilbertSpace, params: &ModelParams, lambda: f64) -> Result<SparseOperator> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(DickeError::param("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    check_shape(space, params)?;
    Ok(HamiltonianParts::new(space, params).at(lambda))
}

/// Diagonal parity `(-1)^(m + N/2 + n)`.
pub fn build_parity_operator(space: &HilbertSpace) -> SparseOperator {
    let diag: Vec<C64> = (0..space.dim()).map(|i| C64::new(space.parity(i) as f64, 0.0)).collect();
    SparseOperator::from_diagonal(&diag)
}

pub(crate) fn check_shape(space: &HilbertSpace, params: &ModelParams) -> Result<()> {
    params.validate()?;
    if space.n_qubits() != params.n_qubits {
        return Err(DickeError::DimensionMismatch { expected: params.n_qubits, got: space.n_qubits() });
    }
    if space.fock_dim() != params.fock_cutoff {
        return Err(DickeError::DimensionMismatch { expected: params.fock_cutoff, got: space.fock_dim() });
    }
    Ok(())
}
