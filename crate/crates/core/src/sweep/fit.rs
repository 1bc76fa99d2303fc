use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::model::{spectral_gap, ModelParams};

/// Least-squares fit of `log y = exponent log x + log_prefactor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub log_prefactor: f64,
    pub r_squared: f64,
    pub points_used: usize,
    /// Smallest and largest abscissa used (`upsilon` for onset fits,
    /// `lambda - lambda_c` for gap fits).
    pub x_range: (f64, f64),
}

fn fit_log_log(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(DickeError::InsufficientPoints { needed: 3, got: points.len() });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(DickeError::param("points", "all abscissae are equal"));
    }
    let exponent = sxy / sxx;
    let log_prefactor = my - exponent * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - log_prefactor - exponent * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(PowerLawFit { exponent, log_prefactor, r_squared, points_used: points.len(), x_range: (lo, hi) })
}

/// Fit `lambda_d - lambda_c = A upsilon^exponent` over `(upsilon, lambda_d)`
/// pairs. Points with `lambda_d <= lambda_c` lie outside the law and are
/// dropped with a warning.
pub fn fit_power_law(events: &[(f64, f64)], lambda_c: f64) -> Result<PowerLawFit> {
    let mut used = Vec::with_capacity(events.len());
    for &(upsilon, lambda_d) in events {
        if !(upsilon > 0.0) {
            return Err(DickeError::param("upsilon", format!("must be > 0, got {upsilon}")));
        }
        if lambda_d <= lambda_c {
            log::warn!("lambda_d = {lambda_d} at upsilon = {upsilon} is not above lambda_c = {lambda_c}; excluded");
            continue;
        }
        used.push((upsilon, lambda_d - lambda_c));
    }
    fit_log_log(&used)
}

/// Fit `delta ~ (lambda - lambda_c)^exponent` for the even-sector gap of
/// `params` at each coupling in `lambdas` above `lambda_c`.
pub fn gap_scaling_check(params: &ModelParams, lambdas: &[f64]) -> Result<PowerLawFit> {
    let lc = params.lambda_c();
    let mut pts = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        if l <= lc {
            log::warn!("lambda = {l} is not above lambda_c = {lc}; excluded");
            continue;
        }
        pts.push((l - lc, spectral_gap(params, l)?));
    }
    fit_log_log(&pts)
}

/// `count` evenly spaced couplings over `[lo, hi]`.
pub fn lambda_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
}
