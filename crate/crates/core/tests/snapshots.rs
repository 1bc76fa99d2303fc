//! Phase-space properties of states taken from an actual ramp.

use std::io::BufReader;

use dicke_core::observables::{reduce_to_field, reduce_to_qubits, ObservableRecord};
use dicke_core::propagation::{simulate, IntegratorConfig, RampSchedule, StorageMode, Trajectory};
use dicke_core::quasiprob::{agarwal_wigner, field_wigner, PlaneGrid, SphereGrid, WignerMode};
use dicke_core::{ModelParams, QuantumState};

fn ramp_states() -> Trajectory {
    let params = ModelParams::new(6, 40);
    let schedule = RampSchedule::new(0.25, 0.0, 1.6, 9).unwrap();
    simulate(&params, &schedule, &IntegratorConfig::default(), StorageMode::States).unwrap()
}

#[test]
fn field_wigner_is_inversion_symmetric_on_even_states() {
    let traj = ramp_states();
    let grid = PlaneGrid::square(4.0, 21);
    for s in &traj.samples {
        let w = field_wigner(&reduce_to_field(s.state.as_ref().unwrap()), &grid, WignerMode::Normalized).unwrap();
        let n = grid.nx;
        for i in 0..n {
            for k in 0..n {
                let d = (w.values[(i, k)] - w.values[(n - 1 - i, n - 1 - k)]).abs();
                assert!(d < 1e-10, "lambda {}: W(a) - W(-a) = {d}", s.lambda);
            }
        }
    }
}

#[test]
fn agarwal_wigner_has_period_pi_on_even_states() {
    let traj = ramp_states();
    let grid = SphereGrid::new(16, 32).unwrap();
    let half = grid.n_phi() / 2;
    // only T00 survives the sphere integral
    let expected = (4.0 * std::f64::consts::PI / 7.0).sqrt();
    for s in &traj.samples {
        let w = agarwal_wigner(&reduce_to_qubits(s.state.as_ref().unwrap()), &grid).unwrap();
        for i in 0..grid.n_theta() {
            for k in 0..half {
                assert!((w.at(i, k) - w.at(i, k + half)).abs() < 1e-9);
            }
        }
        assert!((w.integral() - expected).abs() < 1e-9, "integral {}", w.integral());
    }
}

#[test]
fn snapshot_round_trip_preserves_observables() {
    let traj = ramp_states();
    let state = traj.samples.last().unwrap().state.clone().unwrap();
    let mut buf = Vec::new();
    state.write_snapshot(&mut buf).unwrap();
    let back = QuantumState::read_snapshot(state.space_arc().clone(), BufReader::new(&buf[..])).unwrap();
    assert_eq!(back.lambda, state.lambda);
    let a = ObservableRecord::from_state(&state).values();
    let b = ObservableRecord::from_state(&back).values();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12, "{x} vs {y}");
    }
}
