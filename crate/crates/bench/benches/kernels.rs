use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use dicke_core::model::{build_hamiltonian, initial_state};
use dicke_core::observables::{ReducedDensityMatrix, Subsystem};
use dicke_core::propagation::{propagate_unitary, IntegratorConfig, Method, RampSchedule, StorageMode};
use dicke_core::quasiprob::{agarwal_wigner, field_wigner, wigner_3j, PlaneGrid, SphereGrid, WignerMode};
use dicke_core::{HilbertSpace, ModelParams, ParitySector};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

fn sparse_matvec(c: &mut Criterion) {
    let params = ModelParams::new(16, 80);
    let space = HilbertSpace::new(16, 80, ParitySector::Even).unwrap();
    let h = build_hamiltonian(&space, &params, 0.7).unwrap();
    let x: Vec<C64> = (0..space.dim()).map(|i| C64::new((i as f64).sin(), 0.1)).collect();
    c.bench_function("hamiltonian_matvec_n16_fock80", |b| b.iter(|| black_box(h.matvec(black_box(&x)))));
}

fn ramp_segment(c: &mut Criterion) {
    let params = ModelParams::new(8, 40);
    let space = Arc::new(HilbertSpace::new(8, 40, ParitySector::Even).unwrap());
    let psi0 = initial_state(&space, &params).unwrap();
    let schedule = RampSchedule::new(0.5, 0.4, 0.6, 2).unwrap();
    let mut group = c.benchmark_group("ramp_segment_n8_fock40");
    for method in [Method::AdaptiveRk, Method::KrylovExpm] {
        let cfg = IntegratorConfig::default().with_method(method);
        group.bench_function(format!("{method:?}"), |b| {
            b.iter(|| propagate_unitary(&psi0, &params, &schedule, &cfg, StorageMode::ObservablesOnly).unwrap())
        });
    }
    group.finish();
}

fn wigner_grids(c: &mut Criterion) {
    let d = 60;
    // a mixture of Fock states with some coherences
    let rho = DMatrix::from_fn(d, d, |i, j| {
        let w = (-0.1 * (i + j) as f64).exp();
        C64::new(w * if i == j { 1.0 } else { 0.2 }, 0.0)
    });
    let tr = rho.trace();
    let field = ReducedDensityMatrix::new(Subsystem::Field, rho / tr);
    let grid = PlaneGrid::square(5.0, 101);
    c.bench_function("field_wigner_fock60_101x101", |b| {
        b.iter(|| field_wigner(&field, &grid, WignerMode::Normalized).unwrap())
    });

    let n = 16;
    let q = DMatrix::from_fn(n + 1, n + 1, |i, j| C64::new(if (i + j) % 2 == 0 { 1.0 } else { 0.0 }, 0.0));
    let tr = q.trace();
    let qubits = ReducedDensityMatrix::new(Subsystem::QubitsAll, q / tr);
    let sphere = SphereGrid::new(64, 128).unwrap();
    c.bench_function("agarwal_wigner_n16_64x128", |b| b.iter(|| agarwal_wigner(&qubits, &sphere).unwrap()));
}

fn three_j(c: &mut Criterion) {
    c.bench_function("wigner_3j_j20", |b| {
        b.iter(|| wigner_3j(black_box(20.0), black_box(17.0), black_box(20.0), -3.0, 2.0, 1.0))
    });
}

criterion_group!(benches, sparse_matvec, ramp_segment, wigner_grids, three_j);
criterion_main!(benches);
