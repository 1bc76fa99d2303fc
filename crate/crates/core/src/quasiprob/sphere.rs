//! Qubit phase space: multipole moments and the Agarwal-Wigner function.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::angular::{normalized_legendre, wigner_3j};
use crate::error::{DickeError, Result};
use crate::observables::{ReducedDensityMatrix, Subsystem};

/// Imaginary parts below this are discarded silently.
pub const IMAG_DISCARD: f64 = 1e-9;
/// Imaginary parts above this mean the multipole table is inconsistent.
pub const IMAG_FAIL: f64 = 1e-6;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 0 { 0.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Product grid on the unit sphere: Gauss-Legendre in `cos theta`, uniform
/// in `phi`. Integrates band-limited functions exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SphereGridSpec", into = "SphereGridSpec")]
pub struct SphereGrid {
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    phi: Vec<f64>,
    theta_weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SphereGridSpec {
    n_theta: usize,
    n_phi: usize,
}

impl TryFrom<SphereGridSpec> for SphereGrid {
    type Error = DickeError;
    fn try_from(s: SphereGridSpec) -> Result<Self> {
        SphereGrid::new(s.n_theta, s.n_phi)
    }
}

impl From<SphereGrid> for SphereGridSpec {
    fn from(g: SphereGrid) -> Self {
        SphereGridSpec { n_theta: g.n_theta, n_phi: g.n_phi }
    }
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 {
            return Err(DickeError::param("n_theta", "need at least 2 polar nodes"));
        }
        if n_phi < 2 {
            return Err(DickeError::param("n_phi", "need at least 2 azimuthal nodes"));
        }
        let (x, w) = gauss_legendre(n_theta);
        // theta ascending from the north pole
        let theta: Vec<f64> = x.iter().rev().map(|c| c.acos()).collect();
        let theta_weights: Vec<f64> = w.into_iter().rev().collect();
        let phi = (0..n_phi).map(|k| 2.0 * PI * k as f64 / n_phi as f64).collect();
        Ok(Self { n_theta, n_phi, theta, phi, theta_weights })
    }

    /// Grid that resolves every harmonic up to degree `lmax` exactly.
    pub fn for_degree(lmax: usize) -> Self {
        Self::new(lmax + 2, 2 * lmax + 2).expect("counts are at least 2")
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Surface weight of node `(i_theta, i_phi)`.
    pub fn weight(&self, i_theta: usize) -> f64 {
        self.theta_weights[i_theta] * 2.0 * PI / self.n_phi as f64
    }

    pub fn total_weight(&self) -> f64 {
        (0..self.n_theta).map(|i| self.weight(i)).sum::<f64>() * self.n_phi as f64
    }
}

/// `T[l][m + l]` for `0 <= l <= N`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipoleTable {
    n_qubits: usize,
    values: Vec<Vec<C64>>,
}

impl MultipoleTable {
    pub fn lmax(&self) -> usize {
        self.n_qubits
    }

    pub fn get(&self, l: usize, m: i64) -> C64 {
        assert!(l <= self.n_qubits && m.unsigned_abs() as usize <= l, "(l, m) out of range");
        self.values[l][(m + l as i64) as usize]
    }
}

fn check_qubit_matrix(rho_q: &ReducedDensityMatrix) -> Result<usize> {
    if rho_q.subsystem != Subsystem::QubitsAll {
        return Err(DickeError::param("rho_q", "expected the reduced state of all qubits"));
    }
    if rho_q.matrix.nrows() != rho_q.matrix.ncols() || rho_q.dim() < 2 {
        return Err(DickeError::param("rho_q", "expected a square matrix of dimension N + 1 >= 2"));
    }
    Ok(rho_q.dim() - 1)
}

/// Expectation values `tr(rho T_lm)` of the multipole operators
/// `T_lm = sum (-1)^(j-M) sqrt(2l+1) (j l j; -M m M') |jM><jM'|`.
pub fn multipole_expectations(rho_q: &ReducedDensityMatrix) -> Result<MultipoleTable> {
    let n = check_qubit_matrix(rho_q)?;
    let j = n as f64 / 2.0;
    let rho = &rho_q.matrix;
    let values = (0..=n)
        .into_par_iter()
        .map(|l| {
            let lf = l as f64;
            let norm = (2.0 * lf + 1.0).sqrt();
            (-(l as i64)..=l as i64)
                .map(|m| {
                    let mut acc = C64::new(0.0, 0.0);
                    // the 3j symbol vanishes unless M = M' + m
                    for sp in 0..=n {
                        let s = sp as i64 + m;
                        if s < 0 || s > n as i64 {
                            continue;
                        }
                        let s = s as usize;
                        let big_m = s as f64 - j;
                        let big_mp = sp as f64 - j;
                        let c = wigner_3j(j, lf, j, -big_m, m as f64, big_mp);
                        // j - M = N - s is an integer
                        let sign = if (n - s) % 2 == 0 { 1.0 } else { -1.0 };
                        acc += rho[(sp, s)] * (sign * norm * c);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(MultipoleTable { n_qubits: n, values })
}

/// Agarwal-Wigner function sampled on a [`SphereGrid`], stored theta-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereField {
    pub grid: SphereGrid,
    pub values: Vec<f64>,
    /// Largest imaginary part discarded while summing the harmonics.
    pub max_imag_residual: f64,
}

impl SphereField {
    pub fn at(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[i_theta * self.grid.n_phi() + i_phi]
    }

    /// Surface integral over the sphere.
    pub fn integral(&self) -> f64 {
        (0..self.grid.n_theta())
            .map(|i| self.grid.weight(i) * (0..self.grid.n_phi()).map(|k| self.at(i, k)).sum::<f64>())
            .sum()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "theta,phi,W")?;
        for (i, t) in self.grid.theta().iter().enumerate() {
            for (k, p) in self.grid.phi().iter().enumerate() {
                writeln!(w, "{t:.16e},{p:.16e},{:.16e}", self.at(i, k))?;
            }
        }
        Ok(())
    }
}

/// `W(theta, phi) = sum_lm T_lm Y_lm(theta, phi)` on the grid.
pub fn agarwal_wigner(rho_q: &ReducedDensityMatrix, grid: &SphereGrid) -> Result<SphereField> {
    let table = multipole_expectations(rho_q)?;
    agarwal_wigner_from_table(&table, grid)
}

pub fn agarwal_wigner_from_table(table: &MultipoleTable, grid: &SphereGrid) -> Result<SphereField> {
    let lmax = table.lmax();
    let n_phi = grid.n_phi();
    let rows: Vec<(Vec<f64>, f64)> = grid
        .theta()
        .par_iter()
        .map(|&theta| {
            let p = normalized_legendre(lmax, theta.cos());
            // radial sums per m >= 0, with Y_{l,-m} = (-1)^m conj(Y_lm)
            let mut pos = vec![C64::new(0.0, 0.0); lmax + 1];
            let mut neg = vec![C64::new(0.0, 0.0); lmax + 1];
            for l in 0..=lmax {
                for m in 0..=l {
                    pos[m] += table.get(l, m as i64) * p[l][m];
                    if m > 0 {
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        neg[m] += table.get(l, -(m as i64)) * (sign * p[l][m]);
                    }
                }
            }
            let mut out = Vec::with_capacity(n_phi);
            let mut worst = 0.0f64;
            for &phi in grid.phi() {
                let mut w = pos[0];
                for m in 1..=lmax {
                    let e = C64::from_polar(1.0, m as f64 * phi);
                    w += pos[m] * e + neg[m] * e.conj();
                }
                worst = worst.max(w.im.abs());
                out.push(w.re);
            }
            (out, worst)
        })
        .collect();
    let mut values = Vec::with_capacity(grid.n_theta() * n_phi);
    let mut max_imag_residual = 0.0f64;
    for (row, worst) in rows {
        values.extend(row);
        max_imag_residual = max_imag_residual.max(worst);
    }
    if max_imag_residual > IMAG_FAIL {
        return Err(DickeError::ImaginaryResidual(max_imag_residual));
    }
    if max_imag_residual > IMAG_DISCARD {
        log::warn!("discarding imaginary residual {max_imag_residual:.3e} in the spin Wigner function");
    }
    Ok(SphereField { grid: grid.clone(), values, max_imag_residual })
}
