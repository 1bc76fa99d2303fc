//! Time integration of the ramped Schrodinger and master equations.

mod dopri;
mod generator;
mod krylov;
mod oracle;
mod schedule;
mod trajectory;
mod truncation;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub use dopri::StepStats;
pub use oracle::{dense_oracle_propagate, ORACLE_DENSITY_LIMIT, ORACLE_PURE_LIMIT};
pub use schedule::{IntegratorConfig, Method, RampSchedule};
pub use trajectory::{Sample, StorageMode, Trajectory, TrajectoryDiagnostics};
pub use truncation::{check_truncation_convergence, TruncationReport, TRUNCATION_STEP};

use crate::error::{DickeError, Result};
use crate::model::{check_shape, initial_state, HilbertSpace, ModelParams, ParitySector, QuantumState, StateData};
use crate::observables::ObservableRecord;
use dopri::Dopri5;
use generator::{AffineGenerator, LindbladGenerator, SchrodingerGenerator};
use krylov::KrylovCfm4;

/// Norm or trace drift beyond which a run is aborted.
pub const DRIFT_LIMIT: f64 = 1e-6;
/// Most negative eigenvalue tolerated at a sample of a density run.
pub const POSITIVITY_TOLERANCE: f64 = 1e-6;

enum Stepper<'g, G: AffineGenerator, L: Fn(f64) -> f64> {
    Rk(Dopri5<'g, G, L>),
    Krylov(KrylovCfm4<'g, G, L>),
}

impl<G: AffineGenerator, L: Fn(f64) -> f64> Stepper<'_, G, L> {
    fn advance(&mut self, y: &mut [C64], t0: f64, t1: f64) -> Result<()> {
        match self {
            Stepper::Rk(s) => s.advance(y, t0, t1),
            Stepper::Krylov(s) => s.advance(y, t0, t1),
        }
    }

    fn invalidate(&mut self) {
        if let Stepper::Rk(s) = self {
            s.invalidate();
        }
    }

    fn stats(&self) -> StepStats {
        match self {
            Stepper::Rk(s) => s.stats,
            Stepper::Krylov(s) => s.stats,
        }
    }
}

/// Integrate `y` through the sample times, calling `at_sample` at each one
/// (including the first). `at_sample` returns true if it modified `y`.
fn drive<G, L, F>(
    gen: &mut G,
    y: &mut [C64],
    lambda: L,
    lambda_max: f64,
    points: &[(f64, f64)],
    config: &IntegratorConfig,
    mut at_sample: F,
) -> Result<StepStats>
where
    G: AffineGenerator,
    L: Fn(f64) -> f64,
    F: FnMut(usize, f64, f64, &mut [C64]) -> Result<bool>,
{
    config.validate()?;
    let mut stepper = match config.method {
        Method::AdaptiveRk => Stepper::Rk(Dopri5::new(gen, lambda, config, lambda_max)),
        Method::KrylovExpm => Stepper::Krylov(KrylovCfm4::new(gen, lambda, config, lambda_max)),
    };
    let mut prev = points.first().map_or(0.0, |p| p.0);
    for (k, &(t, l)) in points.iter().enumerate() {
        if k > 0 {
            stepper.advance(y, prev, t)?;
        }
        if at_sample(k, t, l, y)? {
            stepper.invalidate();
        }
        prev = t;
    }
    Ok(stepper.stats())
}

fn record_sample(
    samples: &mut Vec<Sample>,
    state: QuantumState,
    keep: bool,
) -> QuantumState {
    let record = ObservableRecord::from_state(&state);
    samples.push(Sample { t: state.time, lambda: state.lambda, record, state: keep.then(|| state.clone()) });
    state
}

/// Ramp a pure state with `kappa = 0`.
pub fn propagate_unitary(
    initial: &QuantumState,
    params: &ModelParams,
    schedule: &RampSchedule,
    config: &IntegratorConfig,
    storage: StorageMode,
) -> Result<Trajectory> {
    schedule.validate()?;
    let space = initial.space_arc().clone();
    check_shape(&space, params)?;
    if params.kappa != 0.0 {
        return Err(DickeError::param("kappa", "unitary propagation needs kappa = 0"));
    }
    let psi0 = initial
        .as_pure()
        .ok_or_else(|| DickeError::InvalidState("unitary propagation needs a pure state".into()))?;
    initial.validate()?;

    let mut gen = SchrodingerGenerator::new(&space, params);
    let mut y: Vec<C64> = psi0.iter().copied().collect();
    let points = schedule.sample_points();
    let last = points.len() - 1;
    let mut samples = Vec::with_capacity(points.len());
    let mut final_state = None;
    let mut max_drift: f64 = 0.0;
    let keep = storage == StorageMode::States;
    let sched = schedule.clone();
    let stats = drive(
        &mut gen,
        &mut y,
        move |t| sched.lambda_at(t),
        schedule.lambda_end,
        &points,
        config,
        |k, t, l, y| {
            let drift = (y.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs();
            max_drift = max_drift.max(drift);
            if drift > DRIFT_LIMIT {
                return Err(DickeError::NormDrift { t, drift, limit: DRIFT_LIMIT });
            }
            let st = QuantumState::pure(space.clone(), DVector::from_column_slice(y))?.at(t, l);
            let st = record_sample(&mut samples, st, keep);
            if k == last {
                final_state = Some(st);
            }
            Ok(false)
        },
    )?;
    Ok(Trajectory {
        schedule: schedule.clone(),
        params: params.clone(),
        storage_mode: storage,
        samples,
        final_state: final_state.expect("at least one sample"),
        diagnostics: TrajectoryDiagnostics {
            max_norm_drift: max_drift,
            positivity_checks: 0,
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            generator_applications: stats.rhs_evals,
        },
    })
}

/// `(rho + rho^dag) / 2` in place on a column-major buffer.
fn symmetrize_flat(y: &mut [C64], d: usize) {
    for c in 0..d {
        y[c + c * d].im = 0.0;
        for r in c + 1..d {
            let avg = (y[r + c * d] + y[c + r * d].conj()) * 0.5;
            y[r + c * d] = avg;
            y[c + r * d] = avg.conj();
        }
    }
}

/// Fails when `rho` has an eigenvalue below `-POSITIVITY_TOLERANCE`.
fn check_positivity(rho: &DMatrix<C64>, t: f64) -> Result<()> {
    let d = rho.nrows();
    let shifted = rho + DMatrix::<C64>::identity(d, d) * C64::new(POSITIVITY_TOLERANCE, 0.0);
    if shifted.cholesky().is_some() {
        return Ok(());
    }
    let min_eig = rho.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -POSITIVITY_TOLERANCE {
        return Err(DickeError::Positivity { t, min_eig });
    }
    Ok(())
}

/// Ramp a density matrix under the master equation. Pure initial states are
/// converted to `|psi><psi|`.
pub fn propagate_lindblad(
    initial: &QuantumState,
    params: &ModelParams,
    schedule: &RampSchedule,
    config: &IntegratorConfig,
    storage: StorageMode,
) -> Result<Trajectory> {
    schedule.validate()?;
    let space = initial.space_arc().clone();
    check_shape(&space, params)?;
    if params.kappa > 0.0 && !space.is_full() {
        return Err(DickeError::SectorRestricted(space.sector().name()));
    }
    initial.validate()?;
    let d = space.dim();
    let rho0 = initial.density_matrix();

    let mut gen = LindbladGenerator::new(&space, params);
    let mut y: Vec<C64> = rho0.as_slice().to_vec();
    let points = schedule.sample_points();
    let last = points.len() - 1;
    let mut samples = Vec::with_capacity(points.len());
    let mut final_state = None;
    let mut max_drift: f64 = 0.0;
    let mut checks = 0;
    let keep = storage == StorageMode::States;
    let stride = config.positivity_stride;
    let sched = schedule.clone();
    let stats = drive(
        &mut gen,
        &mut y,
        move |t| sched.lambda_at(t),
        schedule.lambda_end,
        &points,
        config,
        |k, t, l, y| {
            symmetrize_flat(y, d);
            let trace: f64 = (0..d).map(|i| y[i + i * d].re).sum();
            let drift = (trace - 1.0).abs();
            max_drift = max_drift.max(drift);
            if drift > DRIFT_LIMIT {
                return Err(DickeError::NormDrift { t, drift, limit: DRIFT_LIMIT });
            }
            let rho = DMatrix::from_column_slice(d, d, y);
            if k % stride == 0 || k == last {
                check_positivity(&rho, t)?;
                checks += 1;
            }
            let st = QuantumState::density(space.clone(), rho)?.at(t, l);
            let st = record_sample(&mut samples, st, keep);
            if k == last {
                final_state = Some(st);
            }
            Ok(true)
        },
    )?;
    Ok(Trajectory {
        schedule: schedule.clone(),
        params: params.clone(),
        storage_mode: storage,
        samples,
        final_state: final_state.expect("at least one sample"),
        diagnostics: TrajectoryDiagnostics {
            max_norm_drift: max_drift,
            positivity_checks: checks,
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
            generator_applications: stats.rhs_evals,
        },
    })
}

/// Space and initial state appropriate for `params`: the even-parity sector
/// with a pure state when parity is conserved and the field starts in vacuum,
/// otherwise the full space.
pub fn default_initial_state(params: &ModelParams) -> Result<QuantumState> {
    params.validate()?;
    let sector = if params.kappa == 0.0 && params.nbar == 0.0 { ParitySector::Even } else { ParitySector::Full };
    let space = Arc::new(HilbertSpace::new(params.n_qubits, params.fock_cutoff, sector)?);
    initial_state(&space, params)
}

/// Build the initial state and run the ramp on the appropriate path.
pub fn simulate(
    params: &ModelParams,
    schedule: &RampSchedule,
    config: &IntegratorConfig,
    storage: StorageMode,
) -> Result<Trajectory> {
    let initial = default_initial_state(params)?;
    if initial.is_pure() && params.kappa == 0.0 {
        propagate_unitary(&initial, params, schedule, config, storage)
    } else {
        propagate_lindblad(&initial, params, schedule, config, storage)
    }
}

/// Evolve for `duration` at a fixed coupling, returning the state at each of
/// the `times` (which must be ascending and start at or after zero).
pub fn evolve_fixed_lambda(
    initial: &QuantumState,
    params: &ModelParams,
    lambda: f64,
    times: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<QuantumState>> {
    let space = initial.space_arc().clone();
    check_shape(&space, params)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(DickeError::param("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(DickeError::param("times", "must be ascending and non-negative"));
    }
    let mut points = vec![(0.0, lambda)];
    points.extend(times.iter().map(|&t| (t, lambda)));
    let mut out = Vec::with_capacity(times.len());
    match initial.data() {
        StateData::Pure(psi) if params.kappa == 0.0 => {
            let mut gen = SchrodingerGenerator::new(&space, params);
            let mut y: Vec<C64> = psi.iter().copied().collect();
            drive(&mut gen, &mut y, |_| lambda, lambda, &points, config, |k, t, l, y| {
                if k > 0 {
                    out.push(QuantumState::pure(space.clone(), DVector::from_column_slice(y))?.at(t, l));
                }
                Ok(false)
            })?;
        }
        _ => {
            if params.kappa > 0.0 && !space.is_full() {
                return Err(DickeError::SectorRestricted(space.sector().name()));
            }
            let d = space.dim();
            let mut gen = LindbladGenerator::new(&space, params);
            let mut y: Vec<C64> = initial.density_matrix().as_slice().to_vec();
            drive(&mut gen, &mut y, |_| lambda, lambda, &points, config, |k, t, l, y| {
                if k > 0 {
                    let rho = DMatrix::from_column_slice(d, d, y);
                    out.push(QuantumState::density(space.clone(), rho)?.at(t, l));
                }
                Ok(false)
            })?;
        }
    }
    Ok(out)
}
