use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};

/// Linear coupling ramp `lambda(t) = lambda_start + upsilon t`, sampled at
/// `sample_count` points uniformly spaced in `lambda`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSchedule {
    pub upsilon: f64,
    #[serde(default)]
    pub lambda_start: f64,
    #[serde(default = "default_lambda_end")]
    pub lambda_end: f64,
    #[serde(default = "default_samples")]
    pub sample_count: usize,
}

fn default_lambda_end() -> f64 {
    2.0
}

fn default_samples() -> usize {
    201
}

impl RampSchedule {
    pub fn new(upsilon: f64, lambda_start: f64, lambda_end: f64, sample_count: usize) -> Result<Self> {
        let s = Self { upsilon, lambda_start, lambda_end, sample_count };
        s.validate()?;
        Ok(s)
    }

    /// Ramp over `[0, 2]` with `upsilon = 2^log2_upsilon`.
    pub fn from_log2(log2_upsilon: f64, sample_count: usize) -> Result<Self> {
        Self::new(log2_upsilon.exp2(), 0.0, 2.0, sample_count)
    }

    pub fn with_range(mut self, lambda_start: f64, lambda_end: f64) -> Result<Self> {
        self.lambda_start = lambda_start;
        self.lambda_end = lambda_end;
        self.validate()?;
        Ok(self)
    }

    pub fn log2_upsilon(&self) -> f64 {
        self.upsilon.log2()
    }

    /// `lambda_end == lambda_start` is accepted and means no evolution at all.
    pub fn validate(&self) -> Result<()> {
        if !(self.upsilon.is_finite() && self.upsilon > 0.0) {
            return Err(DickeError::param("upsilon", format!("must be finite and > 0, got {}", self.upsilon)));
        }
        if !(self.lambda_start.is_finite() && self.lambda_start >= 0.0) {
            return Err(DickeError::param("lambda_start", format!("must be >= 0, got {}", self.lambda_start)));
        }
        if !(self.lambda_end.is_finite() && self.lambda_end >= self.lambda_start) {
            return Err(DickeError::param(
                "lambda_end",
                format!("must be >= lambda_start = {}, got {}", self.lambda_start, self.lambda_end),
            ));
        }
        if self.sample_count < 2 && self.lambda_end > self.lambda_start {
            return Err(DickeError::param("sample_count", "a ramp needs at least 2 samples"));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        (self.lambda_end - self.lambda_start) / self.upsilon
    }

    pub fn lambda_at(&self, t: f64) -> f64 {
        self.lambda_start + self.upsilon * t
    }

    /// `(t, lambda)` sample points; the first is at `lambda_start`, the last
    /// at `lambda_end`.
    pub fn sample_points(&self) -> Vec<(f64, f64)> {
        if self.lambda_end == self.lambda_start {
            return vec![(0.0, self.lambda_start)];
        }
        let n = self.sample_count;
        let span = self.lambda_end - self.lambda_start;
        (0..n)
            .map(|k| {
                let frac = k as f64 / (n - 1) as f64;
                let lambda = if k + 1 == n { self.lambda_end } else { self.lambda_start + frac * span };
                let t = if k + 1 == n { self.duration() } else { frac * span / self.upsilon };
                (t, lambda)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Dormand-Prince 5(4) with the coupling evaluated at every stage time.
    AdaptiveRk,
    /// Fourth-order commutator-free Magnus steps, each exponential applied
    /// with a Krylov projection.
    KrylovExpm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    /// Krylov subspace dimension cap.
    #[serde(default = "default_krylov_dim")]
    pub krylov_dim: usize,
    /// Full-state positivity is checked at every `positivity_stride`-th
    /// sample (and always at the last one).
    #[serde(default = "default_stride")]
    pub positivity_stride: usize,
}

fn default_rel_tol() -> f64 {
    1e-9
}
fn default_abs_tol() -> f64 {
    1e-11
}
fn default_max_step() -> f64 {
    1.0
}
fn default_method() -> Method {
    Method::KrylovExpm
}
fn default_krylov_dim() -> usize {
    30
}
fn default_stride() -> usize {
    1
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_step: default_max_step(),
            method: default_method(),
            krylov_dim: default_krylov_dim(),
            positivity_stride: default_stride(),
        }
    }
}

impl IntegratorConfig {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol), ("max_step", self.max_step)] {
            if !(v > 0.0) {
                return Err(DickeError::param(name, format!("must be > 0, got {v}")));
            }
        }
        if self.krylov_dim < 4 {
            return Err(DickeError::param("krylov_dim", "must be at least 4"));
        }
        if self.positivity_stride == 0 {
            return Err(DickeError::param("positivity_stride", "must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_uniform_in_lambda() {
        let s = RampSchedule::new(0.25, 0.0, 2.0, 5).unwrap();
        assert_eq!(s.duration(), 8.0);
        let pts = s.sample_points();
        assert_eq!(pts, vec![(0.0, 0.0), (2.0, 0.5), (4.0, 1.0), (6.0, 1.5), (8.0, 2.0)]);
    }

    #[test]
    fn zero_length_ramp_has_one_sample() {
        let s = RampSchedule::new(1.0, 0.0, 0.0, 10).unwrap();
        assert_eq!(s.sample_points(), vec![(0.0, 0.0)]);
    }

    #[test]
    fn rejects_bad_ramps() {
        assert!(RampSchedule::new(0.0, 0.0, 2.0, 10).is_err());
        assert!(RampSchedule::new(1.0, 1.0, 0.5, 10).is_err());
        assert!(RampSchedule::new(1.0, 0.0, 2.0, 1).is_err());
    }
}
