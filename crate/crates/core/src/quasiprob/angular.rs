//! Wigner 3j symbols and spherical harmonics.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

const LOG_FACT_LEN: usize = 1024;

fn log_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; LOG_FACT_LEN];
        for k in 1..LOG_FACT_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

fn lf(n: i64) -> f64 {
    log_factorials()[n as usize]
}

/// Twice `x` when `x` is a half-integer.
fn doubled(x: f64) -> Option<i64> {
    let d = 2.0 * x;
    let r = d.round();
    ((d - r).abs() < 1e-9).then_some(r as i64)
}

/// `(j1 j2 j3; m1 m2 m3)` together with a flag that is false when the
/// arguments are not valid angular momenta (non-half-integers, `|m| > j`,
/// `j + m` not an integer). Selection-rule zeros (triangle, `m` sum) are
/// valid and return `(0, true)`.
pub fn wigner_3j_checked(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> (f64, bool) {
    let args = [j1, j2, j3, m1, m2, m3].map(doubled);
    let [Some(tj1), Some(tj2), Some(tj3), Some(tm1), Some(tm2), Some(tm3)] = args else {
        return (0.0, false);
    };
    for (tj, tm) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)] {
        if tj < 0 || tm.abs() > tj || (tj + tm) % 2 != 0 {
            return (0.0, false);
        }
    }
    if tm1 + tm2 + tm3 != 0 {
        return (0.0, true);
    }
    if tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() || (tj1 + tj2 + tj3) % 2 != 0 {
        return (0.0, true);
    }
    if (tj1 + tj2 + tj3) / 2 + 1 >= LOG_FACT_LEN as i64 {
        return (0.0, false);
    }
    (racah(tj1, tj2, tj3, tm1, tm2, tm3), true)
}

/// 3j symbol; zero (by convention) for invalid or forbidden arguments.
pub fn wigner_3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> f64 {
    wigner_3j_checked(j1, j2, j3, m1, m2, m3).0
}

/// Racah's single-sum formula on doubled arguments.
fn racah(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    // every combination below is an integer
    let a = (tj1 + tj2 - tj3) / 2;
    let b = (tj1 - tj2 + tj3) / 2;
    let c = (-tj1 + tj2 + tj3) / 2;
    let total = (tj1 + tj2 + tj3) / 2;
    let j1pm = (tj1 + tm1) / 2;
    let j1mm = (tj1 - tm1) / 2;
    let j2pm = (tj2 + tm2) / 2;
    let j2mm = (tj2 - tm2) / 2;
    let j3pm = (tj3 + tm3) / 2;
    let j3mm = (tj3 - tm3) / 2;
    let log_pre = 0.5
        * (lf(a) + lf(b) + lf(c) - lf(total + 1) + lf(j1pm) + lf(j1mm) + lf(j2pm) + lf(j2mm) + lf(j3pm) + lf(j3mm));

    let d1 = (tj3 - tj2 + tm1) / 2; // j3 - j2 + m1
    let d2 = (tj3 - tj1 - tm2) / 2; // j3 - j1 - m2
    let kmin = 0.max(-d1).max(-d2);
    let kmax = a.min(j1mm).min(j2pm);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let log_den = lf(k) + lf(d1 + k) + lf(d2 + k) + lf(a - k) + lf(j1mm - k) + lf(j2pm - k);
        let term = (log_pre - log_den).exp();
        sum += if k % 2 == 0 { term } else { -term };
    }
    // phase (-1)^(j1 - j2 - m3)
    let phase_exp = (tj1 - tj2 - tm3) / 2;
    if phase_exp.rem_euclid(2) == 0 {
        sum
    } else {
        -sum
    }
}

/// Fully normalized associated Legendre values `Pbar_l^m(x)` for
/// `0 <= m <= l <= lmax`, laid out as `table[l][m]`, such that
/// `Y_lm = Pbar_l^m(cos theta) e^{i m phi}` (Condon-Shortley phase included).
pub fn normalized_legendre(lmax: usize, x: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut p: Vec<Vec<f64>> = (0..=lmax).map(|l| vec![0.0; l + 1]).collect();
    p[0][0] = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for m in 1..=lmax {
        let mf = m as f64;
        p[m][m] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..lmax {
        let mf = m as f64;
        p[m + 1][m] = (2.0 * mf + 3.0).sqrt() * x * p[m][m];
        for l in m + 2..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[l][m] = a * (x * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    p
}

/// `Y_lm(theta, phi)` for `-l <= m <= l`.
pub fn spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> C64 {
    assert!(m.unsigned_abs() as usize <= l, "|m| must not exceed l");
    let p = normalized_legendre(l, theta.cos());
    let am = m.unsigned_abs() as usize;
    let y = p[l][am] * C64::from_polar(1.0, am as f64 * phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}
