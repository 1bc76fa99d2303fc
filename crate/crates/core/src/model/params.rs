use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};

/// Physical constants of one run.
///
/// `fock_cutoff` is exclusive: Fock levels `0..fock_cutoff` are kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n_qubits: usize,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub nbar: f64,
    pub fock_cutoff: usize,
}

fn one() -> f64 {
    1.0
}

impl ModelParams {
    /// Resonant (`epsilon = omega = 1`), lossless, zero-temperature parameters.
    pub fn new(n_qubits: usize, fock_cutoff: usize) -> Self {
        Self { n_qubits, epsilon: 1.0, omega: 1.0, kappa: 0.0, nbar: 0.0, fock_cutoff }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_nbar(mut self, nbar: f64) -> Self {
        self.nbar = nbar;
        self
    }

    pub fn with_fock_cutoff(mut self, fock_cutoff: usize) -> Self {
        self.fock_cutoff = fock_cutoff;
        self
    }

    /// Thermodynamic-limit critical coupling `sqrt(epsilon omega) / 2`.
    pub fn lambda_c(&self) -> f64 {
        (self.epsilon * self.omega).sqrt() / 2.0
    }

    /// Collective spin length `N / 2`.
    pub fn j(&self) -> f64 {
        self.n_qubits as f64 / 2.0
    }

    /// Unitary dynamics from a pure state: both parity-preserving conditions hold.
    pub fn is_parity_conserving(&self) -> bool {
        self.kappa == 0.0 && self.nbar == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(DickeError::param("n_qubits", "must be positive"));
        }
        if self.fock_cutoff == 0 {
            return Err(DickeError::param("fock_cutoff", "must be positive"));
        }
        for (name, v) in [("epsilon", self.epsilon), ("omega", self.omega)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DickeError::param(name, format!("must be finite and positive, got {v}")));
            }
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(DickeError::param("kappa", format!("must be >= 0, got {}", self.kappa)));
        }
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return Err(DickeError::param("nbar", format!("must be >= 0, got {}", self.nbar)));
        }
        Ok(())
    }
}
