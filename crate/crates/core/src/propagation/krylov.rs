//! Fourth-order commutator-free Magnus steps with Krylov exponentials.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::dopri::StepStats;
use super::generator::AffineGenerator;
use super::schedule::IntegratorConfig;
use crate::error::{DickeError, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;
const C1: f64 = 0.5 - SQRT3 / 6.0;
const C2: f64 = 0.5 + SQRT3 / 6.0;
const A1: f64 = 0.25 - SQRT3 / 6.0;
const A2: f64 = 0.25 + SQRT3 / 6.0;

const ZERO: C64 = C64::new(0.0, 0.0);

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Krylov approximation of `exp(tau (w0 A0 + w1 A1)) v`.
pub(crate) struct Expv {
    max_dim: usize,
    basis: Vec<Vec<C64>>,
    w: Vec<C64>,
    tol: f64,
    pub(crate) matvecs: usize,
}

impl Expv {
    pub(crate) fn new(len: usize, max_dim: usize, tol: f64) -> Self {
        Self { max_dim, basis: vec![vec![ZERO; len]; max_dim + 1], w: vec![ZERO; len], tol, matvecs: 0 }
    }

    /// One projection; returns `false` when the subspace cap is reached
    /// before the residual estimate drops below tolerance.
    fn attempt<G: AffineGenerator>(
        &mut self,
        gen: &mut G,
        tau: f64,
        w0: f64,
        w1: f64,
        v: &[C64],
        out: &mut [C64],
    ) -> bool {
        let beta = norm(v);
        if beta == 0.0 {
            out.fill(ZERO);
            return true;
        }
        let lanczos = gen.is_skew_hermitian();
        let m = self.max_dim;
        for (b, x) in self.basis[0].iter_mut().zip(v) {
            *b = x / beta;
        }
        let mut h = DMatrix::<C64>::zeros(m + 1, m);
        for j in 0..m {
            gen.apply(w0, w1, &self.basis[j], &mut self.w);
            self.matvecs += 1;
            if lanczos {
                let alpha = dot(&self.basis[j], &self.w);
                h[(j, j)] = alpha;
                for (wi, bi) in self.w.iter_mut().zip(&self.basis[j]) {
                    *wi -= alpha * bi;
                }
                if j > 0 {
                    let off = h[(j - 1, j)];
                    for (wi, bi) in self.w.iter_mut().zip(&self.basis[j - 1]) {
                        *wi -= off * bi;
                    }
                }
            } else {
                for i in 0..=j {
                    let hij = dot(&self.basis[i], &self.w);
                    h[(i, j)] = hij;
                    for (wi, bi) in self.w.iter_mut().zip(&self.basis[i]) {
                        *wi -= hij * bi;
                    }
                }
            }
            let b = norm(&self.w);
            h[(j + 1, j)] = C64::new(b, 0.0);
            if lanczos && j + 1 < m {
                h[(j, j + 1)] = C64::new(-b, 0.0);
            }
            let dim = j + 1;
            // invariant subspace reached
            let happy = b < 1e-12;
            if happy || dim % 4 == 0 || dim == m {
                let small = h.view((0, 0), (dim, dim)) * C64::new(tau, 0.0);
                let e = small.exp();
                let est = beta * b * tau.abs() * e[(dim - 1, 0)].norm();
                if happy || est <= self.tol {
                    out.fill(ZERO);
                    for i in 0..dim {
                        let c = e[(i, 0)] * beta;
                        for (o, bi) in out.iter_mut().zip(&self.basis[i]) {
                            *o += c * bi;
                        }
                    }
                    return true;
                }
            }
            if j + 1 < m {
                for (t, wi) in self.basis[j + 1].iter_mut().zip(&self.w) {
                    *t = wi / b;
                }
            }
        }
        false
    }

    /// `out = exp(tau (w0 A0 + w1 A1)) v`, splitting `tau` when the subspace
    /// is too small for one projection.
    pub(crate) fn apply<G: AffineGenerator>(
        &mut self,
        gen: &mut G,
        tau: f64,
        w0: f64,
        w1: f64,
        v: &[C64],
        out: &mut [C64],
    ) -> Result<()> {
        let mut pieces = 1usize;
        loop {
            let sub = tau / pieces as f64;
            let mut cur = v.to_vec();
            let mut ok = true;
            for _ in 0..pieces {
                if !self.attempt(gen, sub, w0, w1, &cur, out) {
                    ok = false;
                    break;
                }
                cur.copy_from_slice(out);
            }
            if ok {
                return Ok(());
            }
            pieces *= 2;
            if pieces > 1 << 20 {
                return Err(DickeError::StepSizeUnderflow { t: f64::NAN, h: sub });
            }
        }
    }
}

pub(crate) struct KrylovCfm4<'g, G: AffineGenerator, L: Fn(f64) -> f64> {
    gen: &'g mut G,
    lambda: L,
    expv: Expv,
    h: f64,
    rtol: f64,
    atol: f64,
    max_step: f64,
    tmp: Vec<C64>,
    half: Vec<C64>,
    full: Vec<C64>,
    pub stats: StepStats,
}

impl<'g, G: AffineGenerator, L: Fn(f64) -> f64> KrylovCfm4<'g, G, L> {
    pub(crate) fn new(gen: &'g mut G, lambda: L, config: &IntegratorConfig, lambda_max: f64) -> Self {
        let n = gen.len();
        let (n0, n1) = gen.norm_bounds();
        let scale = n0 + lambda_max.abs() * n1;
        let h = if scale > 0.0 { (2.0 / scale).min(config.max_step) } else { config.max_step };
        let tol = 0.1 * config.abs_tol.min(config.rel_tol);
        Self {
            gen,
            lambda,
            expv: Expv::new(n, config.krylov_dim, tol),
            h,
            rtol: config.rel_tol,
            atol: config.abs_tol,
            max_step: config.max_step,
            tmp: vec![ZERO; n],
            half: vec![ZERO; n],
            full: vec![ZERO; n],
            stats: StepStats::default(),
        }
    }

    fn cfm4(&mut self, t: f64, h: f64, y: &[C64], out: &mut [C64]) -> Result<()> {
        let l1 = (self.lambda)(t + C1 * h);
        let l2 = (self.lambda)(t + C2 * h);
        // the weights of each exponent sum to 1/2, so A0 enters with 1/2
        self.expv.apply(self.gen, h, 0.5, A2 * l1 + A1 * l2, y, &mut self.tmp)?;
        let first = std::mem::take(&mut self.tmp);
        let r = self.expv.apply(self.gen, h, 0.5, A1 * l1 + A2 * l2, &first, out);
        self.tmp = first;
        self.stats.rhs_evals = self.expv.matvecs;
        r
    }

    /// Advance `y` from `t0` to exactly `t1`, controlling the local error by
    /// comparing one step against two half steps.
    pub(crate) fn advance(&mut self, y: &mut [C64], t0: f64, t1: f64) -> Result<()> {
        let mut t = t0;
        while t < t1 {
            let remaining = t1 - t;
            let mut h = self.h.min(self.max_step);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            if h < 1e-14 * t1.abs().max(1.0) {
                return Err(DickeError::StepSizeUnderflow { t, h });
            }
            let mut full = std::mem::take(&mut self.full);
            let mut half = std::mem::take(&mut self.half);
            self.cfm4(t, h, y, &mut full)?;
            self.cfm4(t, 0.5 * h, y, &mut half)?;
            let mid = half.clone();
            self.cfm4(t + 0.5 * h, 0.5 * h, &mid, &mut half)?;

            let mut err_sq = 0.0;
            for i in 0..y.len() {
                let sc = self.atol + self.rtol * y[i].norm().max(half[i].norm());
                err_sq += ((half[i] - full[i]) / 15.0).norm_sqr() / (sc * sc);
            }
            let err = (err_sq / y.len() as f64).sqrt();
            let factor = if err == 0.0 { 4.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 4.0) };
            if err <= 1.0 {
                y.copy_from_slice(&half);
                t = if last { t1 } else { t + h };
                self.stats.accepted += 1;
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.stats.rejected += 1;
                self.h = h * factor.min(1.0);
            }
            self.full = full;
            self.half = half;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, HilbertSpace, ModelParams, ParitySector};
    use crate::propagation::generator::{LindbladGenerator, SchrodingerGenerator};
    use crate::model::build_liouvillian;
    use nalgebra::DVector;

    #[test]
    fn krylov_exponential_matches_dense() {
        let p = ModelParams::new(4, 12);
        let sp = HilbertSpace::new(4, 12, ParitySector::Even).unwrap();
        let mut gen = SchrodingerGenerator::new(&sp, &p);
        let d = sp.dim();
        let v: Vec<C64> = (0..d).map(|i| C64::new(1.0 / (1.0 + i as f64), (i % 3) as f64 * 0.1)).collect();
        let mut out = vec![ZERO; d];
        let mut e = Expv::new(d, 30, 1e-13);
        e.apply(&mut gen, 1.3, 1.0, 0.7, &v, &mut out).unwrap();
        let h = build_hamiltonian(&sp, &p, 0.7).unwrap().to_dense();
        let exact = (h * C64::new(0.0, -1.3)).exp() * DVector::from_column_slice(&v);
        let err = out.iter().zip(exact.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn arnoldi_branch_matches_dense_liouvillian() {
        let p = ModelParams::new(1, 4).with_kappa(0.4).with_nbar(0.2);
        let sp = HilbertSpace::full(1, 4).unwrap();
        let mut gen = LindbladGenerator::new(&sp, &p);
        let n = gen.len();
        let v: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut out = vec![ZERO; n];
        let mut e = Expv::new(n, 30, 1e-13);
        e.apply(&mut gen, 2.0, 1.0, 0.9, &v, &mut out).unwrap();
        let l = build_liouvillian(&sp, &p, 0.9).unwrap().to_dense();
        let exact = (l * C64::new(2.0, 0.0)).exp() * DVector::from_column_slice(&v);
        let err = out.iter().zip(exact.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }
}
