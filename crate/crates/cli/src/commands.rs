use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use dicke_core::model::spectral_gap;
use dicke_core::observables::{reduce_to_field, reduce_to_qubits};
use dicke_core::propagation::{
    check_truncation_convergence, default_initial_state, simulate, StorageMode, Trajectory,
};
use dicke_core::quasiprob::{
    agarwal_wigner, field_wigner, fringe_wavelength, multipole_expectations, negativity_with_error, support_check,
    CutAxis, WignerMode,
};
use dicke_core::sweep::{gap_scaling_check, lambda_grid, run_sweep, SweepResult};
use dicke_core::QuantumState;
use serde_json::{json, Value};

use crate::config::{Command, GridFormat, RunConfig};
use crate::error::CliError;
use crate::output::{sibling, OutputSet, RunManifest};

struct Report {
    tolerances: Value,
    truncation: Value,
    summary: Value,
}

impl Default for Report {
    fn default() -> Self {
        Self { tolerances: Value::Null, truncation: Value::Null, summary: Value::Null }
    }
}

fn io_err(what: &str) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io { context: format!("cannot write {what}"), source: e }
}

/// Run one configured command; returns the files it wrote.
pub fn execute(cfg: &RunConfig, workers: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut set = OutputSet::default();
    let result = (|| {
        let report = match cfg.command {
            Command::Simulate => run_simulate(cfg, &mut set)?,
            Command::Sweep => run_sweep_cmd(cfg, &mut set, workers)?,
            Command::Wigner => run_wigner(cfg, &mut set)?,
            Command::Awf => run_awf(cfg, &mut set)?,
            Command::Gap => run_gap(cfg, &mut set)?,
            Command::Fit => run_fit(cfg, &mut set)?,
        };
        let manifest = RunManifest {
            config: cfg,
            code_version: env!("CARGO_PKG_VERSION"),
            started_unix,
            wall_time_s: started.elapsed().as_secs_f64(),
            outputs: set.files().iter().map(|p| p.display().to_string()).collect(),
            tolerances: report.tolerances,
            truncation: report.truncation,
            summary: report.summary,
        };
        manifest.write(&mut set, &cfg.output)
    })();
    match result {
        Ok(()) => Ok(set.files().to_vec()),
        Err(e) => {
            set.rollback();
            Err(e)
        }
    }
}

fn tolerances(cfg: &RunConfig, traj: Option<&Trajectory>) -> Value {
    json!({
        "method": cfg.integrator.method,
        "rel_tol": cfg.integrator.rel_tol,
        "abs_tol": cfg.integrator.abs_tol,
        "max_norm_drift": traj.map(|t| t.diagnostics.max_norm_drift),
        "accepted_steps": traj.map(|t| t.diagnostics.accepted_steps),
        "rejected_steps": traj.map(|t| t.diagnostics.rejected_steps),
    })
}

/// Population of the top four Fock levels (vacuum excluded).
fn tail_weight(state: &QuantumState) -> f64 {
    let rho = reduce_to_field(state);
    let d = rho.dim();
    (d.saturating_sub(4).max(1)..d).map(|k| rho.matrix[(k, k)].re).sum()
}

fn truncation(cfg: &RunConfig, state: &QuantumState) -> Result<Value, CliError> {
    let tail = tail_weight(state);
    if tail > 1e-6 {
        log::warn!("final population {tail:.3e} in the top Fock levels; consider a larger fock cutoff");
    }
    if cfg.check_truncation {
        let report = check_truncation_convergence(&cfg.model()?.params(), &cfg.ramp()?.schedule()?, &cfg.integrator)?;
        Ok(json!({ "checked": true, "final_tail_weight": tail, "report": report }))
    } else {
        Ok(json!({ "checked": false, "final_tail_weight": tail }))
    }
}

fn run_simulate(cfg: &RunConfig, set: &mut OutputSet) -> Result<Report, CliError> {
    let params = cfg.model()?.params();
    let schedule = cfg.ramp()?.schedule()?;
    let storage = if cfg.emit_states { StorageMode::States } else { StorageMode::ObservablesOnly };
    let traj = simulate(&params, &schedule, &cfg.integrator, storage)?;
    set.write(&cfg.output, |w| Ok(traj.write_csv(w)?))?;
    if cfg.emit_states {
        let dir = sibling(&cfg.output, "_states");
        for (k, s) in traj.samples.iter().enumerate() {
            if let Some(state) = &s.state {
                set.write(&dir.join(format!("state_{k:04}.txt")), |w| Ok(state.write_snapshot(w)?))?;
            }
        }
    }
    Ok(Report {
        tolerances: tolerances(cfg, Some(&traj)),
        truncation: truncation(cfg, &traj.final_state)?,
        summary: json!({
            "samples": traj.samples.len(),
            "space": traj.final_state.space().sector().name(),
            "dimension": traj.final_state.space().dim(),
            "peak_spin_sq": traj.max_of(|r| r.spin_sq),
            "peak_field_sq": traj.max_of(|r| r.field_sq),
            "max_qubit_op": traj.max_of(|r| r.qubit_op),
            "max_field_op": traj.max_of(|r| r.field_op),
        }),
    })
}

/// State at the end of the configured ramp, or the snapshot given by `state`.
fn final_state(cfg: &RunConfig) -> Result<(QuantumState, Option<Trajectory>), CliError> {
    let params = cfg.model()?.params();
    if let Some(path) = &cfg.state {
        let space = default_initial_state(&params)?.space_arc().clone();
        let file = File::open(path).map_err(CliError::io(format!("cannot read `{}`", path.display())))?;
        let state = QuantumState::read_snapshot(space, BufReader::new(file))?;
        state.validate()?;
        return Ok((state, None));
    }
    let traj = simulate(&params, &cfg.ramp()?.schedule()?, &cfg.integrator, StorageMode::ObservablesOnly)?;
    Ok((traj.final_state.clone(), Some(traj)))
}

fn run_wigner(cfg: &RunConfig, set: &mut OutputSet) -> Result<Report, CliError> {
    let (state, traj) = final_state(cfg)?;
    let rho_b = reduce_to_field(&state);
    let grid = cfg.wigner.grid();
    let w = field_wigner(&rho_b, &grid, cfg.wigner.mode)?;
    set.write(&cfg.output, |out| match cfg.wigner.format {
        GridFormat::Csv => Ok(w.write_csv(out)?),
        GridFormat::Dense => Ok(w.write_dense(out)?),
    })?;
    let negativity = if cfg.wigner.mode == WignerMode::Normalized {
        let (value, error) = negativity_with_error(&rho_b, &w)?;
        json!({ "value": value, "refinement_error": error })
    } else {
        Value::Null
    };
    Ok(Report {
        tolerances: tolerances(cfg, traj.as_ref()),
        truncation: json!({ "final_tail_weight": tail_weight(&state), "recommended_grid": support_check(&rho_b, &grid) }),
        summary: json!({
            "lambda": state.lambda,
            "time": state.time,
            "mode": w.mode,
            "integral": w.integral(),
            "negativity_volume": negativity,
            "fringe_wavelength_x": fringe_wavelength(&w, CutAxis::X, 0.0),
            "fringe_wavelength_p": fringe_wavelength(&w, CutAxis::P, 0.0),
        }),
    })
}

fn run_awf(cfg: &RunConfig, set: &mut OutputSet) -> Result<Report, CliError> {
    let (state, traj) = final_state(cfg)?;
    let rho_q = reduce_to_qubits(&state);
    let grid = cfg.awf.grid()?;
    let table = multipole_expectations(&rho_q)?;
    let field = agarwal_wigner(&rho_q, &grid)?;
    set.write(&cfg.output, |w| Ok(field.write_csv(w)?))?;
    Ok(Report {
        tolerances: tolerances(cfg, traj.as_ref()),
        truncation: json!({ "final_tail_weight": tail_weight(&state) }),
        summary: json!({
            "lambda": state.lambda,
            "time": state.time,
            "t00": table.get(0, 0).re,
            "integral": field.integral(),
            "max_imag_residual": field.max_imag_residual,
        }),
    })
}

fn run_gap(cfg: &RunConfig, set: &mut OutputSet) -> Result<Report, CliError> {
    let params = cfg.model()?.params();
    let g = &cfg.gap;
    let lambdas = lambda_grid(g.lambda_min, g.lambda_max, g.count);
    let gaps = lambdas.iter().map(|&l| spectral_gap(&params, l)).collect::<Result<Vec<_>, _>>()?;
    set.write(&cfg.output, |w| {
        writeln!(w, "lambda,gap").map_err(io_err("gap table"))?;
        for (l, d) in lambdas.iter().zip(&gaps) {
            writeln!(w, "{l:.16e},{d:.16e}").map_err(io_err("gap table"))?;
        }
        Ok(())
    })?;
    let fit = gap_scaling_check(&params, &lambdas);
    Ok(Report {
        summary: json!({
            "lambda_c": params.lambda_c(),
            "fit": fit.as_ref().ok(),
            "fit_error": fit.as_ref().err().map(|e| e.to_string()),
        }),
        ..Report::default()
    })
}

fn write_fit_report(set: &mut OutputSet, path: &std::path::Path, report: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Config(e.to_string()))?;
    set.write(path, |w| writeln!(w, "{text}").map_err(io_err("fit report")))
}

fn run_sweep_cmd(cfg: &RunConfig, set: &mut OutputSet, workers: Option<usize>) -> Result<Report, CliError> {
    let sweep = cfg.sweep()?;
    let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = run_sweep(sweep, workers)?;
    set.write(&cfg.output, |w| Ok(result.write_csv(w)?))?;
    let fits = result.fit_report(sweep.fit_min_log2_upsilon, sweep.fit_lambda_c());
    let fit_report = json!({ "fits": fits });
    write_fit_report(set, &sibling(&cfg.output, "_fit.json"), &fit_report)?;
    let failed = result.rows.iter().filter(|r| matches!(r.status, dicke_core::sweep::RowStatus::Failed(_))).count();
    Ok(Report {
        tolerances: json!({
            "method": sweep.integrator.method,
            "rel_tol": sweep.integrator.rel_tol,
            "abs_tol": sweep.integrator.abs_tol,
        }),
        summary: json!({ "rows": result.rows.len(), "failed_rows": failed, "workers": workers }),
        ..Report::default()
    })
}

fn run_fit(cfg: &RunConfig, set: &mut OutputSet) -> Result<Report, CliError> {
    let fit = cfg.fit()?;
    let file = File::open(&fit.input).map_err(CliError::io(format!("cannot read `{}`", fit.input.display())))?;
    let table = SweepResult::read_csv(BufReader::new(file))?;
    let lambda_c = fit.lambda_c.unwrap_or(0.5);
    let fits = table.fit_report(fit.min_log2_upsilon, lambda_c);
    write_fit_report(set, &cfg.output, &json!({ "fits": fits }))?;
    Ok(Report { summary: json!({ "rows_read": table.rows.len(), "fits": fits.len() }), ..Report::default() })
}
