//! Dormand-Prince 5(4) with local extrapolation and FSAL.

use num_complex::Complex64 as C64;

use super::generator::AffineGenerator;
use super::schedule::IntegratorConfig;
use crate::error::{DickeError, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

pub(crate) struct Dopri5<'g, G: AffineGenerator, L: Fn(f64) -> f64> {
    gen: &'g mut G,
    lambda: L,
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    y_new: Vec<C64>,
    fsal: bool,
    h: f64,
    rtol: f64,
    atol: f64,
    max_step: f64,
    pub stats: StepStats,
}

impl<'g, G: AffineGenerator, L: Fn(f64) -> f64> Dopri5<'g, G, L> {
    pub(crate) fn new(gen: &'g mut G, lambda: L, config: &IntegratorConfig, lambda_max: f64) -> Self {
        let n = gen.len();
        let (n0, n1) = gen.norm_bounds();
        let scale = n0 + lambda_max.abs() * n1;
        let h = if scale > 0.0 { (0.5 / scale).min(config.max_step) } else { config.max_step };
        Self {
            gen,
            lambda,
            k: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]),
            stage: vec![C64::new(0.0, 0.0); n],
            y_new: vec![C64::new(0.0, 0.0); n],
            fsal: false,
            h,
            rtol: config.rel_tol,
            atol: config.abs_tol,
            max_step: config.max_step,
            stats: StepStats::default(),
        }
    }

    /// Forget the cached derivative after the state was modified externally.
    pub(crate) fn invalidate(&mut self) {
        self.fsal = false;
    }

    fn rhs(&mut self, t: f64, stage_index: usize) {
        let lam = (self.lambda)(t);
        let (k, stage) = (&mut self.k, &self.stage);
        self.gen.apply(1.0, lam, stage, &mut k[stage_index]);
        self.stats.rhs_evals += 1;
    }

    /// Advance `y` from `t0` to exactly `t1`.
    pub(crate) fn advance(&mut self, y: &mut [C64], t0: f64, t1: f64) -> Result<()> {
        let n = y.len();
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

            if !self.fsal {
                self.stage.copy_from_slice(y);
                self.rhs(t, 0);
                self.fsal = true;
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, &a) in A[s][..s].iter().enumerate() {
                        if a != 0.0 {
                            acc += self.k[j][i] * a;
                        }
                    }
                    self.stage[i] = y[i] + acc * h;
                }
                if s == 6 {
                    self.y_new.copy_from_slice(&self.stage);
                }
                self.rhs(t + C[s] * h, s);
            }

            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = C64::new(0.0, 0.0);
                for (j, &ej) in E.iter().enumerate() {
                    if ej != 0.0 {
                        e += self.k[j][i] * ej;
                    }
                }
                let sc = self.atol + self.rtol * y[i].norm().max(self.y_new[i].norm());
                err_sq += (e * h).norm_sqr() / (sc * sc);
            }
            let err = (err_sq / n as f64).sqrt();

            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                t = if last { t1 } else { t + h };
                self.stats.accepted += 1;
                // keep the proposed step rather than the truncated last one
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.stats.rejected += 1;
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }
}
