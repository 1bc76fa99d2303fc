//! Field phase space: the Wigner function on a quadrature grid.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{DickeError, Result};
use crate::observables::{field_quadrature_stats, ReducedDensityMatrix, Subsystem};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for PlaneGrid {
    fn default() -> Self {
        Self::square(5.0, 201)
    }
}

impl PlaneGrid {
    /// `[-half_width, half_width]^2` with `count` points per axis.
    pub fn square(half_width: f64, count: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, p_min: -half_width, p_max: half_width, nx: count, np: count }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("x_min", self.x_min), ("x_max", self.x_max), ("p_min", self.p_min), ("p_max", self.p_max)] {
            if !v.is_finite() {
                return Err(DickeError::param(name, "must be finite"));
            }
        }
        if self.x_max <= self.x_min {
            return Err(DickeError::param("x_max", "must exceed x_min"));
        }
        if self.p_max <= self.p_min {
            return Err(DickeError::param("p_max", "must exceed p_min"));
        }
        if self.nx < 2 {
            return Err(DickeError::param("nx", "need at least 2 points"));
        }
        if self.np < 2 {
            return Err(DickeError::param("np", "need at least 2 points"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, k: usize) -> f64 {
        self.p_min + k as f64 * self.dp()
    }

    /// Same box with `2 n - 1` points per axis, so every old node is kept.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx - 1, np: 2 * self.np - 1, ..*self }
    }

    fn contains_box(&self, x0: f64, x1: f64, p0: f64, p1: f64) -> bool {
        self.x_min <= x0 && self.x_max >= x1 && self.p_min <= p0 && self.p_max >= p1
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerMode {
    /// The bare parity sum, equal to 1 for the vacuum at the origin.
    Raw,
    /// Raw divided by pi, integrating to one over the `x-p` plane.
    #[default]
    Normalized,
}

impl WignerMode {
    pub fn name(self) -> &'static str {
        match self {
            WignerMode::Raw => "raw",
            WignerMode::Normalized => "normalized",
        }
    }
}

/// `values[(ix, ip)]` holds `W(x_ix, p_ip)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerField {
    pub grid: PlaneGrid,
    pub values: DMatrix<f64>,
    pub mode: WignerMode,
}

/// Trapezoid weight of node `i` of `n`.
fn trap(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

#[derive(Serialize)]
struct DenseHeader<'a> {
    #[serde(flatten)]
    grid: &'a PlaneGrid,
    mode: WignerMode,
    layout: &'static str,
}

impl WignerField {
    /// Trapezoid-rule integral of `f(W)` over the grid.
    fn quadrature(&self, f: impl Fn(f64) -> f64) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for ip in 0..g.np {
            for ix in 0..g.nx {
                acc += trap(ix, g.nx) * trap(ip, g.np) * f(self.values[(ix, ip)]);
            }
        }
        acc * g.dx() * g.dp()
    }

    pub fn integral(&self) -> f64 {
        self.quadrature(|w| w)
    }

    /// Rows `x,p,W` with `p` varying fastest.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,p,W")?;
        for ix in 0..self.grid.nx {
            let x = self.grid.x(ix);
            for ip in 0..self.grid.np {
                writeln!(w, "{x:.16e},{:.16e},{:.16e}", self.grid.p(ip), self.values[(ix, ip)])?;
            }
        }
        Ok(())
    }

    /// A `# {json}` header line followed by one line per `x` holding the
    /// `np` values along `p`.
    pub fn write_dense<W: Write>(&self, mut w: W) -> Result<()> {
        let header = DenseHeader { grid: &self.grid, mode: self.mode, layout: "rows=x,cols=p" };
        let json = serde_json::to_string(&header).map_err(|e| DickeError::Parse(e.to_string()))?;
        writeln!(w, "# {json}")?;
        for ix in 0..self.grid.nx {
            let row: Vec<String> = (0..self.grid.np).map(|ip| format!("{:.16e}", self.values[(ix, ip)])).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

fn check_field_matrix(rho_b: &ReducedDensityMatrix) -> Result<()> {
    if rho_b.subsystem != Subsystem::Field {
        return Err(DickeError::param("rho_b", "expected the reduced field state"));
    }
    if rho_b.matrix.nrows() != rho_b.matrix.ncols() || rho_b.dim() == 0 {
        return Err(DickeError::param("rho_b", "expected a non-empty square matrix"));
    }
    Ok(())
}

/// Fills `e[(k, m)] = <k|D(beta)|m>` for `k, m < d`. Along each diagonal
/// `k = m + q` the element is `u^q e^{-x/2} sqrt(m!/k!) |beta|^q L_m^(q)(x)`
/// with `x = |beta|^2` and `u = beta / |beta|`; the scaled Laguerre values
/// obey a three-term recurrence in `m` that is stable going forward.
fn displacement_elements(beta: C64, sqrt_n: &[f64], e: &mut DMatrix<C64>) {
    let d = e.nrows();
    let x = beta.norm_sqr();
    let r = x.sqrt();
    let u = if r > 0.0 { beta / r } else { C64::new(1.0, 0.0) };
    let mut log_fact = 0.0;
    let mut upper = C64::new(1.0, 0.0);
    let mut lower = C64::new(1.0, 0.0);
    for q in 0..d {
        if q > 0 {
            log_fact += (q as f64).ln();
            upper *= u;
            lower *= -u.conj();
        }
        let qf = q as f64;
        let mut h_prev = 0.0;
        let mut h = if r > 0.0 {
            (-0.5 * x + qf * r.ln() - 0.5 * log_fact).exp()
        } else if q == 0 {
            1.0
        } else {
            0.0
        };
        for m in 0..d - q {
            e[(m + q, m)] = upper * h;
            e[(m, m + q)] = lower * h;
            let mf = m as f64;
            let next = ((2.0 * mf + 1.0 + qf - x) * h - sqrt_n[m] * (mf + qf).sqrt() * h_prev)
                / ((mf + 1.0) * (mf + qf + 1.0)).sqrt();
            h_prev = h;
            h = next;
        }
    }
}

/// Raw Wigner value at `alpha` through `W = tr(rho D(2 alpha) P)`, where `P`
/// is the photon-number parity.
fn raw_value(rho: &DMatrix<C64>, alpha: C64, sqrt_n: &[f64], e: &mut DMatrix<C64>) -> f64 {
    displacement_elements(alpha * 2.0, sqrt_n, e);
    let d = rho.nrows();
    let mut acc = 0.0;
    for m in 0..d {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let mut col = C64::new(0.0, 0.0);
        for k in 0..d {
            col += rho[(m, k)] * e[(k, m)];
        }
        acc += sign * col.re;
    }
    acc
}

/// Smallest square box around the field's centroid that holds it, or `None`
/// when `grid` already does.
pub fn support_check(rho_b: &ReducedDensityMatrix, grid: &PlaneGrid) -> Option<PlaneGrid> {
    let stats = field_quadrature_stats(rho_b);
    let n_mean: f64 = (0..rho_b.dim()).map(|k| k as f64 * rho_b.matrix[(k, k)].re).sum();
    // Fock-like states spread to about sqrt(2n + 1); wide mixtures show up in the variances
    let radius = (4.0 * stats.var_x.max(stats.var_p).max(0.0).sqrt()).max((2.0 * n_mean + 1.0).sqrt() + 2.0);
    let (x0, x1) = (stats.mean_x - radius, stats.mean_x + radius);
    let (p0, p1) = (stats.mean_p - radius, stats.mean_p + radius);
    if grid.contains_box(x0, x1, p0, p1) {
        return None;
    }
    let half = x0.abs().max(x1.abs()).max(p0.abs()).max(p1.abs()).ceil();
    let count = grid.nx.max(grid.np).max((half * 20.0) as usize + 1);
    Some(PlaneGrid::square(half, count))
}

/// Field Wigner function with `sqrt2 alpha = x + i p`.
pub fn field_wigner(rho_b: &ReducedDensityMatrix, grid: &PlaneGrid, mode: WignerMode) -> Result<WignerField> {
    check_field_matrix(rho_b)?;
    grid.validate()?;
    warn_on_support(rho_b, grid);
    Ok(evaluate(rho_b, grid, mode))
}

fn warn_on_support(rho_b: &ReducedDensityMatrix, grid: &PlaneGrid) {
    if let Some(rec) = support_check(rho_b, grid) {
        log::warn!(
            "Wigner grid may not cover the state; recommended [{}, {}]^2 with {} points per axis",
            rec.x_min,
            rec.x_max,
            rec.nx
        );
    }
}

fn evaluate(rho_b: &ReducedDensityMatrix, grid: &PlaneGrid, mode: WignerMode) -> WignerField {
    let d = rho_b.dim();
    let rho = &rho_b.matrix;
    let sqrt_n: Vec<f64> = (0..d.max(1)).map(|k| (k as f64).sqrt()).collect();
    let scale = match mode {
        WignerMode::Raw => 1.0,
        WignerMode::Normalized => std::f64::consts::FRAC_1_PI,
    };
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let total = grid.nx * grid.np;
    // column-major order matches DMatrix storage
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map_init(
            || DMatrix::<C64>::zeros(d, d),
            |e, idx| {
                let (ix, ip) = (idx % grid.nx, idx / grid.nx);
                let alpha = C64::new(grid.x(ix), grid.p(ip)) * inv_sqrt2;
                scale * raw_value(rho, alpha, &sqrt_n, e)
            },
        )
        .collect();
    WignerField { grid: *grid, values: DMatrix::from_vec(grid.nx, grid.np, values), mode }
}

/// `integral of max(0, -W) dx dp`; needs a normalized field.
pub fn negativity_volume(w: &WignerField) -> Result<f64> {
    if w.mode != WignerMode::Normalized {
        return Err(DickeError::param("mode", "negativity volume needs a normalized Wigner field"));
    }
    Ok(w.quadrature(|v| (-v).max(0.0)))
}

/// Negativity volume of `rho_b` on the grid of `coarse` (a normalized field
/// of the same state) and on its refinement; the difference serves as the
/// quadrature error bar. Returns `(refined value, error)`.
pub fn negativity_with_error(rho_b: &ReducedDensityMatrix, coarse: &WignerField) -> Result<(f64, f64)> {
    check_field_matrix(rho_b)?;
    let fine = negativity_volume(&evaluate(rho_b, &coarse.grid.refined(), WignerMode::Normalized))?;
    let coarse = negativity_volume(coarse)?;
    Ok((fine, (fine - coarse).abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutAxis {
    /// Vary `x` at fixed `p`.
    X,
    /// Vary `p` at fixed `x`.
    P,
}

/// Dominant interference period along a straight cut through the field,
/// from the peak of the zero-padded FFT (mean removed). `None` when the cut
/// carries no oscillation.
pub fn fringe_wavelength(w: &WignerField, axis: CutAxis, at: f64) -> Option<f64> {
    let g = &w.grid;
    let (cut, step): (Vec<f64>, f64) = match axis {
        CutAxis::X => {
            let k = (((at - g.p_min) / g.dp()).round().max(0.0) as usize).min(g.np - 1);
            ((0..g.nx).map(|i| w.values[(i, k)]).collect(), g.dx())
        }
        CutAxis::P => {
            let i = (((at - g.x_min) / g.dx()).round().max(0.0) as usize).min(g.nx - 1);
            ((0..g.np).map(|k| w.values[(i, k)]).collect(), g.dp())
        }
    };
    let mean = cut.iter().sum::<f64>() / cut.len() as f64;
    let len = (cut.len() * 16).next_power_of_two();
    let mut buf: Vec<C64> = cut.iter().map(|v| C64::new(v - mean, 0.0)).collect();
    buf.resize(len, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..len / 2].iter().map(|z| z.norm()).collect();
    let peak = mag.iter().fold(0.0f64, |m, &v| m.max(v));
    if peak <= 1e-12 * cut.iter().map(|v| v.abs()).sum::<f64>().max(1e-300) {
        return None;
    }
    // skip the low-frequency lobe left by the envelope
    let mut start = 1;
    while start + 1 < mag.len() && mag[start + 1] < mag[start] {
        start += 1;
    }
    let (k, _) = mag.iter().enumerate().skip(start).fold((0, 0.0), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    if k == 0 || k + 1 >= mag.len() {
        return None;
    }
    // parabolic interpolation of the peak position
    let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let freq = (k as f64 + shift) / (len as f64 * step);
    Some(1.0 / freq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(m: DMatrix<C64>) -> ReducedDensityMatrix {
        ReducedDensityMatrix::new(Subsystem::Field, m)
    }

    fn fock(n: usize, d: usize) -> ReducedDensityMatrix {
        let mut m = DMatrix::zeros(d, d);
        m[(n, n)] = C64::new(1.0, 0.0);
        field(m)
    }

    /// `|c> ~ |a> + s |-a>` built from Fock amplitudes.
    fn cat(a: f64, s: f64, d: usize) -> ReducedDensityMatrix {
        let mut amp = vec![0.0; d];
        let mut coh = (-0.5 * a * a).exp();
        for (n, v) in amp.iter_mut().enumerate() {
            if n > 0 {
                coh *= a / (n as f64).sqrt();
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            *v = coh * (1.0 + s * sign);
        }
        let norm: f64 = amp.iter().map(|v| v * v).sum();
        let m = DMatrix::from_fn(d, d, |i, j| C64::new(amp[i] * amp[j] / norm, 0.0));
        field(m)
    }

    fn laguerre(n: usize, x: f64) -> f64 {
        let (mut l0, mut l1) = (1.0, 1.0 - x);
        if n == 0 {
            return l0;
        }
        for k in 1..n {
            let kf = k as f64;
            let l2 = ((2.0 * kf + 1.0 - x) * l1 - kf * l0) / (kf + 1.0);
            l0 = l1;
            l1 = l2;
        }
        l1
    }

    #[test]
    fn vacuum_and_single_photon_at_the_origin() {
        let g = PlaneGrid { x_min: -1.0, x_max: 1.0, p_min: -1.0, p_max: 1.0, nx: 3, np: 3 };
        let w0 = field_wigner(&fock(0, 10), &g, WignerMode::Raw).unwrap();
        let w1 = field_wigner(&fock(1, 10), &g, WignerMode::Raw).unwrap();
        assert!((w0.values[(1, 1)] - 1.0).abs() < 1e-12);
        assert!((w1.values[(1, 1)] + 1.0).abs() < 1e-12);
        // raw vacuum is exp(-2|alpha|^2) = exp(-(x^2 + p^2))
        assert!((w0.values[(2, 0)] - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn high_fock_states_match_laguerre_form() {
        let g = PlaneGrid { x_min: -6.0, x_max: 6.0, p_min: -2.0, p_max: 3.0, nx: 13, np: 6 };
        for n in [5usize, 20, 45] {
            let w = field_wigner(&fock(n, n + 5), &g, WignerMode::Raw).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for ix in 0..g.nx {
                for ip in 0..g.np {
                    let r2 = g.x(ix).powi(2) + g.p(ip).powi(2);
                    let expected = sign * (-r2).exp() * laguerre(n, 2.0 * r2);
                    assert!((w.values[(ix, ip)] - expected).abs() < 1e-9, "n {n}: {} vs {expected}", w.values[(ix, ip)]);
                }
            }
        }
    }

    #[test]
    fn displacement_elements_are_unitary_columns() {
        // a column of D restricted to low k loses little weight when beta is small
        let d = 60;
        let sqrt_n: Vec<f64> = (0..d).map(|k| (k as f64).sqrt()).collect();
        let mut e = DMatrix::zeros(d, d);
        displacement_elements(C64::new(0.8, -0.5), &sqrt_n, &mut e);
        for m in 0..10 {
            let w: f64 = (0..d).map(|k| e[(k, m)].norm_sqr()).sum();
            assert!((w - 1.0).abs() < 1e-12, "column {m}: {w}");
        }
    }

    #[test]
    fn normalized_vacuum_integrates_to_one() {
        let w = field_wigner(&fock(0, 8), &PlaneGrid::default(), WignerMode::Normalized).unwrap();
        assert!((w.integral() - 1.0).abs() < 1e-6);
        assert!(negativity_volume(&w).unwrap() < 1e-15);
    }

    #[test]
    fn single_photon_negativity_volume() {
        let w = field_wigner(&fock(1, 6), &PlaneGrid::square(4.0, 101), WignerMode::Normalized).unwrap();
        let (v, err) = negativity_with_error(&fock(1, 6), &w).unwrap();
        let exact = 2.0 * (-0.5f64).exp() - 1.0;
        assert!((v - exact).abs() < 1e-3, "{v} vs {exact}");
        assert!(err < 5e-3);
        let raw = field_wigner(&fock(1, 6), &PlaneGrid::square(4.0, 11), WignerMode::Raw).unwrap();
        assert!(negativity_volume(&raw).is_err());
    }

    #[test]
    fn mixtures_give_mixed_fields() {
        let g = PlaneGrid::square(4.0, 31);
        let a = cat(1.5, 1.0, 30);
        let b = fock(3, 30);
        let mix = field(&a.matrix * C64::new(0.3, 0.0) + &b.matrix * C64::new(0.7, 0.0));
        let wa = field_wigner(&a, &g, WignerMode::Raw).unwrap();
        let wb = field_wigner(&b, &g, WignerMode::Raw).unwrap();
        let wm = field_wigner(&mix, &g, WignerMode::Raw).unwrap();
        let err = (&wm.values - (&wa.values * 0.3 + &wb.values * 0.7)).amax();
        assert!(err < 1e-10);
    }

    #[test]
    fn even_cat_is_inversion_symmetric() {
        let g = PlaneGrid::square(5.0, 41);
        let w = field_wigner(&cat(2.0, 1.0, 40), &g, WignerMode::Normalized).unwrap();
        for ix in 0..g.nx {
            for ip in 0..g.np {
                assert!((w.values[(ix, ip)] - w.values[(g.nx - 1 - ix, g.np - 1 - ip)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cat_fringes_have_the_expected_period() {
        // W ~ cos(2 sqrt2 a p) near x = 0
        let a = 3.0;
        let g = PlaneGrid::square(6.0, 241);
        let w = field_wigner(&cat(a, 1.0, 60), &g, WignerMode::Normalized).unwrap();
        let lam = fringe_wavelength(&w, CutAxis::P, 0.0).unwrap();
        let expected = std::f64::consts::PI / (std::f64::consts::SQRT_2 * a);
        assert!((lam - expected).abs() < 0.02 * expected, "{lam} vs {expected}");
        let vac = field_wigner(&fock(0, 4), &g, WignerMode::Normalized).unwrap();
        assert!(fringe_wavelength(&vac, CutAxis::P, 0.0).map_or(true, |l| l > 5.0));
    }

    #[test]
    fn support_check_recommends_a_larger_box() {
        assert!(support_check(&fock(0, 4), &PlaneGrid::default()).is_none());
        let rec = support_check(&fock(30, 40), &PlaneGrid::square(3.0, 61)).unwrap();
        assert!(rec.x_max >= (61.0f64).sqrt() + 2.0);
    }

    #[test]
    fn exports() {
        let g = PlaneGrid::square(1.0, 3);
        let w = field_wigner(&fock(0, 3), &g, WignerMode::Raw).unwrap();
        let mut csv = Vec::new();
        w.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 1 + 9);
        let mut dense = Vec::new();
        w.write_dense(&mut dense).unwrap();
        let text = String::from_utf8(dense).unwrap();
        let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap().trim_start_matches("# ")).unwrap();
        assert_eq!(header["nx"], 3);
        assert_eq!(header["mode"], "raw");
        assert_eq!(text.lines().nth(2).unwrap().split(' ').count(), 3);
    }

    #[test]
    fn bad_grids_are_rejected() {
        let mut g = PlaneGrid::default();
        g.nx = 1;
        assert!(g.validate().is_err());
        g = PlaneGrid::default();
        g.p_max = g.p_min;
        assert!(matches!(g.validate(), Err(DickeError::InvalidParameter { name: "p_max", .. })));
    }
}
