use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::operators::check_shape;
use super::{HilbertSpace, ModelParams, ParitySector};
use crate::error::{DickeError, Result};
use crate::sparse::SparseOperator;

#[derive(Clone, Debug, PartialEq)]
pub enum StateData {
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
}

/// A pure state or density matrix over a [`HilbertSpace`], stamped with the
/// time and coupling at which it was taken.
#[derive(Clone, Debug)]
pub struct QuantumState {
    space: Arc<HilbertSpace>,
    data: StateData,
    pub time: f64,
    pub lambda: f64,
}

impl QuantumState {
    pub fn pure(space: Arc<HilbertSpace>, psi: DVector<C64>) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(DickeError::DimensionMismatch { expected: space.dim(), got: psi.len() });
        }
        Ok(Self { space, data: StateData::Pure(psi), time: 0.0, lambda: 0.0 })
    }

    pub fn density(space: Arc<HilbertSpace>, rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != space.dim() || rho.ncols() != space.dim() {
            return Err(DickeError::DimensionMismatch { expected: space.dim(), got: rho.nrows() });
        }
        Ok(Self { space, data: StateData::Density(rho), time: 0.0, lambda: 0.0 })
    }

    /// Basis state `|m = s - N/2> (x) |n>`.
    pub fn basis(space: Arc<HilbertSpace>, s: usize, n: usize) -> Result<Self> {
        let idx = space
            .index_of(s, n)
            .ok_or_else(|| DickeError::InvalidState(format!("|s={s}, n={n}> is not in the space")))?;
        let mut psi = DVector::zeros(space.dim());
        psi[idx] = C64::new(1.0, 0.0);
        Self::pure(space, psi)
    }

    pub fn at(mut self, time: f64, lambda: f64) -> Self {
        self.time = time;
        self.lambda = lambda;
        self
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<HilbertSpace> {
        &self.space
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut StateData {
        &mut self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn kind(&self) -> &'static str {
        match self.data {
            StateData::Pure(_) => "pure",
            StateData::Density(_) => "density",
        }
    }

    pub fn as_pure(&self) -> Option<&DVector<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    pub fn as_density(&self) -> Option<&DMatrix<C64>> {
        match &self.data {
            StateData::Pure(_) => None,
            StateData::Density(m) => Some(m),
        }
    }

    /// Density matrix over the same space (`|psi><psi|` for pure states).
    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        }
    }

    pub fn to_density(&self) -> QuantumState {
        Self { space: self.space.clone(), data: StateData::Density(self.density_matrix()), ..*self }
    }

    /// Same state expressed on the unrestricted product space.
    pub fn to_full_space(&self) -> QuantumState {
        if self.space.is_full() {
            return self.clone();
        }
        let full = Arc::new(self.space.full_space());
        let data = match &self.data {
            StateData::Pure(v) => StateData::Pure(self.space.embed_vector(v)),
            StateData::Density(m) => StateData::Density(self.space.embed_matrix(m)),
        };
        Self { space: full, data, time: self.time, lambda: self.lambda }
    }

    /// `||psi||^2` or `tr rho`.
    pub fn norm_or_trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared(),
            StateData::Density(m) => m.trace().re,
        }
    }

    pub fn expectation(&self, op: &SparseOperator) -> C64 {
        match &self.data {
            StateData::Pure(v) => op.expectation(v.as_slice()),
            StateData::Density(m) => op.trace_product(m),
        }
    }

    /// `|<a|b>|^2` for pure states, `<psi|rho|psi>` for mixed pairs.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        if self.space.dim() != other.space.dim() {
            return Err(DickeError::DimensionMismatch { expected: self.space.dim(), got: other.space.dim() });
        }
        match (&self.data, &other.data) {
            (StateData::Pure(a), StateData::Pure(b)) => Ok(a.dotc(b).norm_sqr()),
            (StateData::Pure(a), StateData::Density(r)) | (StateData::Density(r), StateData::Pure(a)) => {
                Ok(a.dotc(&(r * a)).re)
            }
            (StateData::Density(_), StateData::Density(_)) => Err(DickeError::InvalidState(
                "fidelity between two mixed states is not supported".into(),
            )),
        }
    }

    /// Replace `rho` by `(rho + rho^dag) / 2`. No-op for pure states.
    pub fn symmetrize(&mut self) {
        if let StateData::Density(m) = &mut self.data {
            let h = (&*m + m.adjoint()) * C64::new(0.5, 0.0);
            *m = h;
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.data {
            StateData::Pure(_) => 0.0,
            StateData::Density(m) => {
                let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
                h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Check the normalization, Hermiticity and positivity invariants.
    pub fn validate(&self) -> Result<()> {
        match &self.data {
            StateData::Pure(v) => {
                let n = v.norm();
                if (n - 1.0).abs() > 1e-9 {
                    return Err(DickeError::InvalidState(format!("norm {n} differs from 1")));
                }
            }
            StateData::Density(m) => {
                let tr = m.trace();
                if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
                    return Err(DickeError::InvalidState(format!("trace {tr} differs from 1")));
                }
                let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
                if herm > 1e-12 {
                    return Err(DickeError::InvalidState(format!("Hermiticity error {herm:.3e}")));
                }
                let min = self.min_eigenvalue();
                if min < -1e-8 {
                    return Err(DickeError::InvalidState(format!("negative eigenvalue {min:.3e}")));
                }
            }
        }
        Ok(())
    }

    /// Text snapshot: a `kind dims time lambda` header line, then one
    /// `re,im` pair per line (column-major for density matrices).
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        let (dims, values): (String, &[C64]) = match &self.data {
            StateData::Pure(v) => (format!("{}", v.len()), v.as_slice()),
            StateData::Density(m) => (format!("{}x{}", m.nrows(), m.ncols()), m.as_slice()),
        };
        writeln!(w, "{} {} {:.16e} {:.16e}", self.kind(), dims, self.time, self.lambda)?;
        for z in values {
            writeln!(w, "{:.16e},{:.16e}", z.re, z.im)?;
        }
        Ok(())
    }

    pub fn read_snapshot<R: BufRead>(space: Arc<HilbertSpace>, r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| DickeError::Parse("empty snapshot".into()))??;
        let tok: Vec<&str> = header.split_whitespace().collect();
        if tok.len() != 4 {
            return Err(DickeError::Parse(format!("bad snapshot header `{header}`")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| DickeError::Parse(format!("`{s}`: {e}")));
        let (time, lambda) = (num(tok[2])?, num(tok[3])?);
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (re, im) = line
                .split_once(',')
                .ok_or_else(|| DickeError::Parse(format!("bad amplitude line `{line}`")))?;
            values.push(C64::new(num(re.trim())?, num(im.trim())?));
        }
        let d = space.dim();
        let state = match tok[0] {
            "pure" => {
                if values.len() != d {
                    return Err(DickeError::DimensionMismatch { expected: d, got: values.len() });
                }
                Self::pure(space, DVector::from_vec(values))?
            }
            "density" => {
                if values.len() != d * d {
                    return Err(DickeError::DimensionMismatch { expected: d * d, got: values.len() });
                }
                Self::density(space, DMatrix::from_vec(d, d, values))?
            }
            other => return Err(DickeError::Parse(format!("unknown state kind `{other}`"))),
        };
        Ok(state.at(time, lambda))
    }
}

/// Thermal occupation weights `(1 - q) q^n` with `q = nbar / (nbar + 1)`,
/// renormalized over `0..cutoff`.
pub fn thermal_weights(nbar: f64, cutoff: usize) -> Vec<f64> {
    if nbar == 0.0 {
        let mut w = vec![0.0; cutoff];
        w[0] = 1.0;
        return w;
    }
    let q = nbar / (nbar + 1.0);
    let raw: Vec<f64> = (0..cutoff).map(|n| q.powi(n as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Weight of the untruncated thermal distribution on levels `>= cutoff`.
pub fn thermal_tail_weight(nbar: f64, cutoff: usize) -> f64 {
    if nbar == 0.0 {
        return 0.0;
    }
    (nbar / (nbar + 1.0)).powi(cutoff as i32)
}

/// `|m = -N/2> (x) thermal(nbar)`: pure when `nbar = 0`, otherwise a density
/// matrix normalized over the truncated Fock space.
pub fn initial_state(space: &Arc<HilbertSpace>, params: &ModelParams) -> Result<QuantumState> {
    check_shape(space, params)?;
    if params.nbar == 0.0 {
        return QuantumState::basis(space.clone(), 0, 0);
    }
    if space.sector() != ParitySector::Full {
        return Err(DickeError::SectorRestricted(space.sector().name()));
    }
    let tail = thermal_tail_weight(params.nbar, params.fock_cutoff);
    if tail > 1e-10 {
        log::warn!(
            "thermal weight {tail:.3e} beyond fock_cutoff = {} is dropped; consider a larger cutoff",
            params.fock_cutoff
        );
    }
    let weights = thermal_weights(params.nbar, params.fock_cutoff);
    let d = space.dim();
    let mut rho = DMatrix::zeros(d, d);
    for (n, w) in weights.into_iter().enumerate() {
        let i = space.index_of(0, n).expect("full space");
        rho[(i, i)] = C64::new(w, 0.0);
    }
    QuantumState::density(space.clone(), rho)
}
