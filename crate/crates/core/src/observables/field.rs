use num_complex::Complex64 as C64;

use super::reduce::ReducedDensityMatrix;

/// Moments of the quadratures `x = (a + a^dag)/sqrt2`, `p = i(a^dag - a)/sqrt2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureStats {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// Symmetrized covariance `<(xp + px)/2> - <x><p>`.
    pub cov_xp: f64,
}

/// Quadrature moments of a field density matrix.
///
/// Second moments use `a a^dag = a^dag a + 1`, i.e. the untruncated algebra;
/// the two differ only through population of the last Fock level.
pub fn field_quadrature_stats(rho_b: &ReducedDensityMatrix) -> QuadratureStats {
    let rho = &rho_b.matrix;
    let d = rho.nrows();
    let mut a = C64::new(0.0, 0.0);
    let mut a2 = C64::new(0.0, 0.0);
    let mut num = 0.0;
    for k in 0..d {
        let kf = k as f64;
        num += kf * rho[(k, k)].re;
        if k >= 1 {
            // tr(rho a) = sum_k sqrt(k) <k|rho|k-1>
            a += kf.sqrt() * rho[(k, k - 1)];
        }
        if k >= 2 {
            a2 += (kf * (kf - 1.0)).sqrt() * rho[(k, k - 2)];
        }
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let mean_x = sqrt2 * a.re;
    let mean_p = sqrt2 * a.im;
    let x2 = a2.re + num + 0.5;
    let p2 = -a2.re + num + 0.5;
    let sym_xp = a2.im;
    QuadratureStats {
        mean_x,
        mean_p,
        var_x: x2 - mean_x * mean_x,
        var_p: p2 - mean_p * mean_p,
        cov_xp: sym_xp - mean_x * mean_p,
    }
}

/// Reported field squeezing `1 - xi_b^2`, with
/// `xi_b^2 = Vx + Vp - sqrt((Vx - Vp)^2 + 4 Cov^2)`.
pub fn field_squeezing(stats: &QuadratureStats) -> f64 {
    let diff = stats.var_x - stats.var_p;
    let xi2 = stats.var_x + stats.var_p - (diff * diff + 4.0 * stats.cov_xp * stats.cov_xp).sqrt();
    1.0 - xi2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_field_operators, HilbertSpace, QuantumState};
    use crate::observables::{reduce_to_field, Subsystem};
    use nalgebra::DVector;
    use std::sync::Arc;

    fn field_state(psi: DVector<C64>) -> ReducedDensityMatrix {
        ReducedDensityMatrix::new(Subsystem::Field, &psi * psi.adjoint())
    }

    fn coherent(alpha: C64, cutoff: usize) -> DVector<C64> {
        let mut v = DVector::zeros(cutoff);
        let mut term = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..cutoff {
            v[n] = term;
            term = term * alpha / ((n + 1) as f64).sqrt();
        }
        v
    }

    /// `S(r e^{i theta}) |0>` via the dense exponential of the truncated generator.
    fn squeezed_vacuum(r: f64, theta: f64, cutoff: usize) -> DVector<C64> {
        let sp = HilbertSpace::full(1, cutoff).unwrap();
        let f = build_field_operators(&sp);
        // work on the spin-down block only
        let a = f.a.to_dense().view((0, 0), (cutoff, cutoff)).into_owned();
        let ad = a.adjoint();
        let xi = C64::from_polar(r, theta);
        let gen = (&a * &a * xi.conj() - &ad * &ad * xi) * C64::new(0.5, 0.0);
        let mut v = DVector::zeros(cutoff);
        v[0] = C64::new(1.0, 0.0);
        gen.exp() * v
    }

    #[test]
    fn vacuum_moments() {
        let mut v = DVector::zeros(5);
        v[0] = C64::new(1.0, 0.0);
        let s = field_quadrature_stats(&field_state(v));
        assert_eq!((s.var_x, s.var_p, s.cov_xp), (0.5, 0.5, 0.0));
        assert_eq!(field_squeezing(&s), 0.0);
    }

    #[test]
    fn coherent_state_displacement() {
        let s = field_quadrature_stats(&field_state(coherent(C64::new(2.0, 0.0), 60)));
        assert!((s.mean_x - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-8);
        assert!(s.mean_p.abs() < 1e-12);
        assert!((s.var_x - 0.5).abs() < 1e-8 && (s.var_p - 0.5).abs() < 1e-8);
    }

    #[test]
    fn squeezed_vacuum_variances() {
        let r = 0.5;
        let s = field_quadrature_stats(&field_state(squeezed_vacuum(r, 0.0, 80)));
        assert!((s.var_x - (-2.0 * r).exp() / 2.0).abs() < 1e-8, "{}", s.var_x);
        assert!((s.var_p - (2.0 * r).exp() / 2.0).abs() < 1e-8);
        let xi2 = 1.0 - field_squeezing(&s);
        assert!((xi2 - (-1.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn squeezing_is_rotation_invariant() {
        let plain = field_squeezing(&field_quadrature_stats(&field_state(squeezed_vacuum(0.5, 0.0, 80))));
        // phase rotation e^{-i phi n} rotates the squeezing axis by phi
        let phi = std::f64::consts::FRAC_PI_4;
        let v = squeezed_vacuum(0.5, 0.0, 80);
        let rotated = DVector::from_fn(80, |n, _| v[n] * C64::from_polar(1.0, -phi * n as f64));
        let s = field_quadrature_stats(&field_state(rotated));
        assert!(s.cov_xp.abs() > 0.1);
        assert!((field_squeezing(&s) - plain).abs() < 1e-8);
    }

    #[test]
    fn agrees_with_full_state_expectations() {
        let sp = Arc::new(HilbertSpace::full(2, 12).unwrap());
        let coh = coherent(C64::new(0.3, -0.7), 12);
        let mut psi = DVector::zeros(sp.dim());
        for n in 0..12 {
            psi[sp.index_of(1, n).unwrap()] = coh[n];
        }
        let st = QuantumState::pure(sp.clone(), psi.normalize()).unwrap();
        let rb = reduce_to_field(&st);
        let s = field_quadrature_stats(&rb);
        let a = st.expectation(&build_field_operators(&sp).a);
        assert!((s.mean_x - std::f64::consts::SQRT_2 * a.re).abs() < 1e-12);
        assert!((s.mean_p - std::f64::consts::SQRT_2 * a.im).abs() < 1e-12);
    }
}
