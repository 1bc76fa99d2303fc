//! Acceptance checks for the ramped Dicke simulator.
//!
//! Runs as a plain binary (`harness = false`) so that every check prints its
//! own PASS/FAIL line even when the surrounding `cargo test` is quiet. A
//! failing check is reported, not asserted; the process only exits non-zero
//! when a check panics.

use std::time::Instant;

use dicke_core::observables::{reduce_to_field, reduce_to_qubits, ObservableRecord, ReducedDensityMatrix, Subsystem};
use dicke_core::propagation::{
    dense_oracle_propagate, default_initial_state, evolve_fixed_lambda, propagate_lindblad, propagate_unitary,
    simulate, IntegratorConfig, RampSchedule, StorageMode, Trajectory,
};
use dicke_core::quasiprob::{
    agarwal_wigner, field_wigner, multipole_expectations, PlaneGrid, SphereGrid, WignerMode,
};
use dicke_core::sweep::{
    detect, fit_power_law, gap_scaling_check, lambda_grid, run_sweep, OnsetCriterion, SweepConfig,
};
use dicke_core::{HilbertSpace, ModelParams, QuantumState, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::sync::Arc;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn ramp(log2_upsilon: f64, lambda_end: f64, step: f64) -> Result<RampSchedule> {
    let samples = (lambda_end / step).round() as usize + 1;
    RampSchedule::new(log2_upsilon.exp2(), 0.0, lambda_end, samples)
}

fn run(params: &ModelParams, schedule: &RampSchedule, storage: StorageMode) -> Result<Trajectory> {
    simulate(params, schedule, &IntegratorConfig::default(), storage)
}

/// Population of the top four Fock levels in the final state.
fn final_tail(traj: &Trajectory) -> f64 {
    let rho_b = reduce_to_field(&traj.final_state);
    let d = rho_b.dim();
    (d.saturating_sub(4).max(1)..d).map(|k| rho_b.matrix[(k, k)].re).sum()
}

fn oracle_equivalence() -> Result<Outcome> {
    let params = ModelParams::new(2, 8);
    let schedule = RampSchedule::new(1.0, 0.0, 2.0, 2)?;
    let initial = default_initial_state(&params)?;
    let config = IntegratorConfig::default();
    let traj = propagate_unitary(&initial, &params, &schedule, &config, StorageMode::ObservablesOnly)?;
    let reference = dense_oracle_propagate(&initial, &params, &schedule, 4096)?;
    let fidelity = traj.final_state.fidelity(&reference)?;
    Ok(Outcome::new(fidelity >= 1.0 - 1e-8, format!("fidelity = 1 - {:.3e}", 1.0 - fidelity)))
}

fn n8_ramp() -> Result<Trajectory> {
    run(&ModelParams::new(8, 48), &ramp(-3.0, 2.0, 0.01)?, StorageMode::ObservablesOnly)
}

fn concurrence_identity(traj: &Trajectory) -> Outcome {
    let n = traj.params.n_qubits as f64;
    let mut worst: f64 = 0.0;
    let mut squeezed_worst: f64 = 0.0;
    let mut used = 0;
    let mut unsqueezed = Vec::new();
    for r in traj.records().filter(|r| r.concurrence > 1e-8) {
        let dev = ((n - 1.0) * r.concurrence - r.spin_sq).abs();
        worst = worst.max(dev);
        used += 1;
        if r.spin_sq >= 0.0 {
            squeezed_worst = squeezed_worst.max(dev);
        } else {
            unsqueezed.push(format!("{:.2}", r.lambda));
        }
    }
    Outcome::new(
        used > 0 && worst < 1e-6,
        format!(
            "max deviation {worst:.3e} over {used} entangled samples; {squeezed_worst:.1e} where spin_sq >= 0; \
             unsqueezed entangled samples at lambda [{}]",
            unsqueezed.join(", ")
        ),
    )
}

fn parity_conservation(traj: &Trajectory) -> Outcome {
    let worst = traj.records().map(|r| (r.parity - 1.0).abs()).fold(0.0, f64::max);
    Outcome::new(worst < 1e-8, format!("max |<P> - 1| = {worst:.3e} over {} samples", traj.samples.len()))
}

fn scaling_law() -> Result<Outcome> {
    // the ramp has to reach past the onset, which moves out fast with upsilon
    let lambda_end = [2.4, 3.2, 4.4, 6.0, 8.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [12usize, 16] {
        let params = ModelParams::new(n, 100);
        let mut qubit = Vec::new();
        let mut field = Vec::new();
        let mut tail: f64 = 0.0;
        for (k, &end) in lambda_end.iter().enumerate() {
            let log2_upsilon = k as f64;
            let traj = run(&params, &ramp(log2_upsilon, end, 0.002)?, StorageMode::ObservablesOnly)?;
            tail = tail.max(final_tail(&traj));
            let upsilon = log2_upsilon.exp2();
            if let Some(l) = detect(&traj, OnsetCriterion::QubitOpThreshold, 0.1, 0.0123).lambda_d {
                qubit.push((upsilon, l));
            }
            if let Some(l) = detect(&traj, OnsetCriterion::FieldOpThreshold, 0.1, 0.0123).lambda_d {
                field.push((upsilon, l));
            }
        }
        let q = fit_power_law(&qubit, 0.5)?;
        let f = fit_power_law(&field, 0.5)?;
        let ok = (0.57..=0.77).contains(&q.exponent)
            && q.r_squared >= 0.98
            && q.points_used == lambda_end.len()
            && (f.exponent - q.exponent).abs() <= 0.05;
        pass &= ok;
        parts.push(format!(
            "N={n}: qubit {:.3} (r2 {:.4}, {} pts), field {:.3} (r2 {:.4}), tail {tail:.1e}",
            q.exponent, q.r_squared, q.points_used, f.exponent, f.r_squared
        ));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn squeezing_magnification() -> Result<Outcome> {
    let params = ModelParams::new(16, 110);
    // the fast ramp leaves many more photons behind by lambda = 2
    let fast = run(&params.clone().with_fock_cutoff(170), &ramp(-2.0, 2.0, 0.005)?, StorageMode::ObservablesOnly)?;
    let slow = run(&params, &ramp(-7.0, 2.0, 0.005)?, StorageMode::ObservablesOnly)?;
    let peak_fast = fast.max_of(|r| r.spin_sq);
    let peak_slow = slow.max_of(|r| r.spin_sq);
    let ratio = peak_fast / peak_slow;
    Ok(Outcome::new(
        ratio >= 2.0,
        format!(
            "peak {peak_fast:.4} vs adiabatic {peak_slow:.4}, ratio {ratio:.3}; tails {:.1e}, {:.1e}",
            final_tail(&fast),
            final_tail(&slow)
        ),
    ))
}

fn size_collapse() -> Result<Outcome> {
    let schedule = ramp(-3.86, 2.0, 0.005)?;
    let mut curves = Vec::new();
    let mut tail: f64 = 0.0;
    for (n, fock) in [(8usize, 110usize), (12, 140), (16, 170)] {
        let traj = run(&ModelParams::new(n, fock), &schedule, StorageMode::ObservablesOnly)?;
        tail = tail.max(final_tail(&traj));
        curves.push(traj.records().map(|r| r.qubit_op).collect::<Vec<_>>());
    }
    let lambdas: Vec<f64> = schedule.sample_points().iter().map(|p| p.1).collect();
    let mut sup: f64 = 0.0;
    let mut sup_normal: f64 = 0.0;
    let mut pairs = Vec::new();
    for (a, b, label) in [(0, 1, "8/12"), (1, 2, "12/16"), (0, 2, "8/16")] {
        let (k, d) = curves[a]
            .iter()
            .zip(&curves[b])
            .map(|(x, y)| (x - y).abs())
            .enumerate()
            .fold((0, 0.0), |best, (k, d)| if d > best.1 { (k, d) } else { best });
        sup = sup.max(d);
        for (k, (x, y)) in curves[a].iter().zip(&curves[b]).enumerate() {
            if lambdas[k] <= 1.0 {
                sup_normal = sup_normal.max((x - y).abs());
            }
        }
        pairs.push(format!("{label} {d:.4} at lambda {:.2}", lambdas[k]));
    }
    Ok(Outcome::new(sup <= 0.05, format!(
            "sup distance {sup:.4} ({}); {sup_normal:.4} over lambda <= 1; tail {tail:.1e}",
            pairs.join(", ")
        )))
}

fn lindblad_correctness() -> Result<Outcome> {
    let config = IntegratorConfig::default();

    // one photon decaying with the spin idle
    let params = ModelParams::new(1, 8).with_kappa(1.0);
    let space = Arc::new(HilbertSpace::full(1, 8)?);
    let initial = QuantumState::basis(space, 0, 1)?.to_density();
    let times = [0.25, 0.5, 1.0, 2.0, 3.0];
    let states = evolve_fixed_lambda(&initial, &params, 0.0, &times, &config)?;
    let decay_err = times
        .iter()
        .zip(&states)
        .map(|(&t, s)| (reduce_to_field(s).matrix[(1, 1)].re - (-2.0 * t).exp()).abs())
        .fold(0.0, f64::max);

    let damped = simulate(
        &ModelParams::new(8, 24).with_kappa(0.1),
        &ramp(0.0, 2.0, 0.01)?,
        &config,
        StorageMode::ObservablesOnly,
    )?;
    let drift = damped.diagnostics.max_norm_drift;

    let params = ModelParams::new(4, 16);
    let schedule = ramp(0.0, 2.0, 0.02)?;
    let initial = default_initial_state(&params)?;
    let pure = propagate_unitary(&initial, &params, &schedule, &config, StorageMode::ObservablesOnly)?;
    let mixed = propagate_lindblad(&initial, &params, &schedule, &config, StorageMode::ObservablesOnly)?;
    let path_err = pure
        .records()
        .zip(mixed.records())
        .flat_map(|(a, b)| a.values().into_iter().zip(b.values()).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);

    Ok(Outcome::new(
        decay_err < 1e-6 && drift < 1e-7 && path_err < 1e-6,
        format!("decay error {decay_err:.2e}, trace drift {drift:.2e}, path mismatch {path_err:.2e}"),
    ))
}

fn dissipative_robustness() -> Result<Outcome> {
    // both squeezing peaks sit near lambda = 0.7, so the ramp stops at 1
    let schedule = ramp(-3.86, 1.0, 0.005)?;
    let config = IntegratorConfig { positivity_stride: 20, ..IntegratorConfig::default() };
    let closed = run(&ModelParams::new(12, 24), &schedule, StorageMode::ObservablesOnly)?;
    let weak = simulate(&ModelParams::new(12, 24).with_kappa(0.01), &schedule, &config, StorageMode::ObservablesOnly)?;
    let strong = simulate(&ModelParams::new(12, 24).with_kappa(0.1), &schedule, &config, StorageMode::ObservablesOnly)?;
    let peak = |t: &Trajectory, f: fn(&ObservableRecord) -> f64| t.max_of(f);
    let q0 = peak(&closed, |r| r.spin_sq);
    let q1 = peak(&weak, |r| r.spin_sq);
    let q2 = peak(&strong, |r| r.spin_sq);
    let b0 = peak(&closed, |r| r.field_sq);
    let b2 = peak(&strong, |r| r.field_sq);
    let rel = (q1 - q0).abs() / q0;
    Ok(Outcome::new(
        rel <= 0.2 && q2 > 0.0 && b2 > 0.0,
        format!(
            "qubit peak {q0:.4} -> {q1:.4} (kappa 0.01, {:.1}%) -> {q2:.4} (kappa 0.1); field peak {b0:.4} -> {b2:.4}",
            100.0 * rel
        ),
    ))
}

fn quasiprob_goldens() -> Result<Outcome> {
    let fock = |n: usize| {
        let mut m = DMatrix::zeros(12, 12);
        m[(n, n)] = C64::new(1.0, 0.0);
        ReducedDensityMatrix::new(Subsystem::Field, m)
    };
    let origin = PlaneGrid { x_min: -1.0, x_max: 1.0, p_min: -1.0, p_max: 1.0, nx: 3, np: 3 };
    let w0 = field_wigner(&fock(0), &origin, WignerMode::Raw)?.values[(1, 1)];
    let w1 = field_wigner(&fock(1), &origin, WignerMode::Raw)?.values[(1, 1)];
    let origin_err = (w0 - 1.0).abs().max((w1 + 1.0).abs());
    let integral = field_wigner(&fock(0), &PlaneGrid::square(5.0, 201), WignerMode::Normalized)?.integral();

    // even-parity snapshots along an N = 8 ramp
    let params = ModelParams::new(8, 48);
    let traj = run(&params, &ramp(-3.0, 2.0, 0.25)?, StorageMode::States)?;
    let grid = SphereGrid::new(24, 64)?;
    let half = grid.n_phi() / 2;
    let mut periodic: f64 = 0.0;
    let mut t00: f64 = 0.0;
    let expected = 1.0 / ((params.n_qubits + 1) as f64).sqrt();
    for state in traj.samples.iter().filter_map(|s| s.state.as_ref()) {
        let rho_q = reduce_to_qubits(state);
        t00 = t00.max((multipole_expectations(&rho_q)?.get(0, 0) - expected).norm());
        let w = agarwal_wigner(&rho_q, &grid)?;
        for i in 0..grid.n_theta() {
            for k in 0..half {
                periodic = periodic.max((w.at(i, k) - w.at(i, k + half)).abs());
            }
        }
    }
    Ok(Outcome::new(
        origin_err < 1e-8 && (integral - 1.0).abs() < 1e-3 && periodic < 1e-9 && t00 < 1e-12,
        format!(
            "origin error {origin_err:.1e}, vacuum integral {integral:.6}, phi shift by pi {periodic:.1e}, T00 error {t00:.1e}"
        ),
    ))
}

fn gap_exponent() -> Result<Outcome> {
    let lambdas = lambda_grid(0.7, 1.5, 17);
    let small = gap_scaling_check(&ModelParams::new(8, 80), &lambdas)?;
    let large = gap_scaling_check(&ModelParams::new(16, 120), &lambdas)?;
    let toward_half = (large.exponent - 0.5).abs() < (small.exponent - 0.5).abs();
    Ok(Outcome::new(
        (0.35..=0.65).contains(&large.exponent) && toward_half,
        format!(
            "exponent N=8 {:.3} (r2 {:.3}), N=16 {:.3} (r2 {:.3})",
            small.exponent, small.r_squared, large.exponent, large.r_squared
        ),
    ))
}

fn determinism() -> Result<Outcome> {
    let mut config = SweepConfig::new(vec![4, 6], vec![-2.0, -1.0, 0.0, 1.0]);
    config.fock_cutoff = 24;
    config.lambda_end = 3.0;
    let csv = |workers: usize| -> Result<Vec<u8>> {
        let mut out = Vec::new();
        run_sweep(&config, workers)?.write_csv(&mut out)?;
        Ok(out)
    };
    let a = csv(1)?;
    let b = csv(4)?;
    let c = csv(4)?;
    Ok(Outcome::new(a == b && b == c, format!("{} bytes, workers 1/4/4", a.len())))
}

fn main() {
    // cargo passes harness flags such as --list; there are no named tests to list
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    // numeric arguments select a subset of checks: `cargo test --test acceptance -- 4 6`
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |id: usize| only.is_empty() || only.contains(&id);
    let start = Instant::now();
    let mut failed = 0;
    let mut ran = 0;
    let mut report = |id: usize, name: &str, t0: Instant, outcome: Result<Outcome>| {
        let secs = t0.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        ran += 1;
        if !pass {
            failed += 1;
        }
        println!("{} {id:>2} {name}: {detail} [{secs:.1}s]", if pass { "PASS" } else { "FAIL" });
    };

    let t = Instant::now();
    if wanted(1) {
        report(1, "oracle equivalence", t, oracle_equivalence());
    }
    let t = Instant::now();
    if wanted(2) || wanted(3) {
        match n8_ramp() {
            Ok(traj) => {
                report(2, "concurrence-squeezing identity", t, Ok(concurrence_identity(&traj)));
                report(3, "parity conservation", t, Ok(parity_conservation(&traj)));
            }
            Err(e) => {
                let msg = e.to_string();
                report(2, "concurrence-squeezing identity", t, Err(e));
                report(3, "parity conservation", t, Ok(Outcome::new(false, format!("error: {msg}"))));
            }
        }
    }
    let t = Instant::now();
    if wanted(4) {
        report(4, "onset scaling law", t, scaling_law());
    }
    let t = Instant::now();
    if wanted(5) {
        report(5, "dynamic squeezing magnification", t, squeezing_magnification());
    }
    let t = Instant::now();
    if wanted(6) {
        report(6, "size collapse", t, size_collapse());
    }
    let t = Instant::now();
    if wanted(7) {
        report(7, "lindblad correctness", t, lindblad_correctness());
    }
    let t = Instant::now();
    if wanted(8) {
        report(8, "dissipative robustness", t, dissipative_robustness());
    }
    let t = Instant::now();
    if wanted(9) {
        report(9, "quasi-probability goldens", t, quasiprob_goldens());
    }
    let t = Instant::now();
    if wanted(10) {
        report(10, "gap exponent", t, gap_exponent());
    }
    let t = Instant::now();
    if wanted(11) {
        report(11, "determinism", t, determinism());
    }

    println!("acceptance: {} of {ran} passed in {:.1}s", ran - failed, start.elapsed().as_secs_f64());
}
