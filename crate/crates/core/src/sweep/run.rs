use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_power_law, PowerLawFit};
use super::onset::{detect, OnsetCriterion, OnsetStatus};
use crate::error::{DickeError, Result};
use crate::model::ModelParams;
use crate::propagation::{simulate, IntegratorConfig, RampSchedule, StorageMode, Trajectory};

pub const SWEEP_COLUMNS: [&str; 11] = [
    "N",
    "log2_upsilon",
    "kappa",
    "criterion",
    "lambda_d",
    "censored",
    "peak_spin_sq",
    "peak_field_sq",
    "max_qubit_op",
    "max_field_op",
    "status",
];

fn default_log2_upsilons() -> Vec<f64> {
    (0..=26).map(|k| -7.0 + 0.5 * k as f64).collect()
}
fn default_criteria() -> Vec<OnsetCriterion> {
    OnsetCriterion::ALL.to_vec()
}
fn default_qubit_thresh() -> f64 {
    0.1
}
fn default_field_thresh() -> f64 {
    0.0123
}
fn default_fock() -> usize {
    60
}
fn default_lambda_end() -> f64 {
    2.0
}
fn default_lambda_step() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    #[serde(default = "default_log2_upsilons")]
    pub log2_upsilon_list: Vec<f64>,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub nbar: f64,
    #[serde(default = "default_criteria")]
    pub onset_criteria: Vec<OnsetCriterion>,
    #[serde(default = "default_qubit_thresh")]
    pub qubit_op_thresh: f64,
    #[serde(default = "default_field_thresh")]
    pub field_op_thresh: f64,
    #[serde(default = "default_fock")]
    pub fock_cutoff: usize,
    /// Ramps run over `[0, lambda_end]`. Fast ramps need more than 2 for the
    /// onset to happen at all.
    #[serde(default = "default_lambda_end")]
    pub lambda_end: f64,
    /// Spacing of observable samples in `lambda`.
    #[serde(default = "default_lambda_step")]
    pub lambda_step: f64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    /// Only points with `log2 upsilon` at or above this enter the default fit.
    #[serde(default)]
    pub fit_min_log2_upsilon: f64,
    /// Critical coupling used in fits; the thermodynamic value when absent.
    #[serde(default)]
    pub fit_lambda_c: Option<f64>,
}

impl SweepConfig {
    pub fn new(n_list: Vec<usize>, log2_upsilon_list: Vec<f64>) -> Self {
        Self {
            n_list,
            log2_upsilon_list,
            kappa: 0.0,
            nbar: 0.0,
            onset_criteria: default_criteria(),
            qubit_op_thresh: default_qubit_thresh(),
            field_op_thresh: default_field_thresh(),
            fock_cutoff: default_fock(),
            lambda_end: default_lambda_end(),
            lambda_step: default_lambda_step(),
            integrator: IntegratorConfig::default(),
            fit_min_log2_upsilon: 0.0,
            fit_lambda_c: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("qubit_op_thresh", self.qubit_op_thresh), ("field_op_thresh", self.field_op_thresh)] {
            if !(v > 0.0) {
                return Err(DickeError::param(name, format!("must be > 0, got {v}")));
            }
        }
        if let Some(bad) = self.log2_upsilon_list.iter().find(|x| !x.is_finite()) {
            return Err(DickeError::param("log2_upsilon_list", format!("non-finite entry {bad}")));
        }
        if !(self.lambda_end > 0.0 && self.lambda_end.is_finite()) {
            return Err(DickeError::param("lambda_end", format!("must be > 0, got {}", self.lambda_end)));
        }
        if !(self.lambda_step > 0.0 && self.lambda_step <= self.lambda_end) {
            return Err(DickeError::param("lambda_step", format!("must lie in (0, lambda_end], got {}", self.lambda_step)));
        }
        for &n in &self.n_list {
            self.params(n).validate()?;
        }
        self.integrator.validate()
    }

    pub fn params(&self, n: usize) -> ModelParams {
        ModelParams::new(n, self.fock_cutoff).with_kappa(self.kappa).with_nbar(self.nbar)
    }

    pub fn schedule(&self, log2_upsilon: f64) -> Result<RampSchedule> {
        let samples = (self.lambda_end / self.lambda_step).round() as usize + 1;
        RampSchedule::new(log2_upsilon.exp2(), 0.0, self.lambda_end, samples.max(2))
    }

    pub fn fit_lambda_c(&self) -> f64 {
        self.fit_lambda_c.unwrap_or_else(|| ModelParams::new(1, 1).lambda_c())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "message")]
pub enum RowStatus {
    Detected,
    Censored,
    NoEvent,
    Failed(String),
}

impl RowStatus {
    fn text(&self) -> String {
        match self {
            RowStatus::Detected => "detected".into(),
            RowStatus::Censored => "censored".into(),
            RowStatus::NoEvent => "no_event".into(),
            RowStatus::Failed(msg) => format!("failed: {}", msg.replace([',', '\n'], ";")),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "detected" => Some(RowStatus::Detected),
            "censored" => Some(RowStatus::Censored),
            "no_event" => Some(RowStatus::NoEvent),
            other => other.strip_prefix("failed: ").map(|m| RowStatus::Failed(m.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub log2_upsilon: f64,
    pub kappa: f64,
    pub criterion: OnsetCriterion,
    pub lambda_d: Option<f64>,
    pub status: RowStatus,
    pub peak_spin_sq: f64,
    pub peak_field_sq: f64,
    pub max_qubit_op: f64,
    pub max_field_op: f64,
}

impl SweepRow {
    pub fn censored(&self) -> bool {
        self.status == RowStatus::Censored
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub n: usize,
    pub criterion: OnsetCriterion,
    pub lambda_c: f64,
    pub min_log2_upsilon: f64,
    pub fit: Option<PowerLawFit>,
    pub error: Option<String>,
}

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

impl SweepResult {
    /// `(upsilon, lambda_d)` pairs of detected events for one size and
    /// criterion with `log2 upsilon >= min_log2_upsilon`.
    pub fn events(&self, n: usize, criterion: OnsetCriterion, min_log2_upsilon: f64) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.n == n && r.criterion == criterion && r.log2_upsilon >= min_log2_upsilon)
            .filter_map(|r| r.lambda_d.map(|l| (r.log2_upsilon.exp2(), l)))
            .collect()
    }

    pub fn fit(&self, n: usize, criterion: OnsetCriterion, min_log2_upsilon: f64, lambda_c: f64) -> Result<PowerLawFit> {
        fit_power_law(&self.events(n, criterion, min_log2_upsilon), lambda_c)
    }

    /// One fit per (size, criterion) present in the table.
    pub fn fit_report(&self, min_log2_upsilon: f64, lambda_c: f64) -> Vec<FitEntry> {
        let mut keys: Vec<(usize, OnsetCriterion)> = self.rows.iter().map(|r| (r.n, r.criterion)).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|(n, criterion)| {
                let (fit, error) = match self.fit(n, criterion, min_log2_upsilon, lambda_c) {
                    Ok(f) => (Some(f), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                FitEntry { n, criterion, lambda_c, min_log2_upsilon, fit, error }
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", SWEEP_COLUMNS.join(","))?;
        for r in &self.rows {
            let fields = [
                r.n.to_string(),
                fmt_num(r.log2_upsilon),
                fmt_num(r.kappa),
                r.criterion.name().to_string(),
                r.lambda_d.map_or_else(|| "nan".to_string(), fmt_num),
                r.censored().to_string(),
                fmt_num(r.peak_spin_sq),
                fmt_num(r.peak_field_sq),
                fmt_num(r.max_qubit_op),
                fmt_num(r.max_field_op),
                r.status.text(),
            ];
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    /// Inverse of [`SweepResult::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| DickeError::Parse("empty sweep table".into()))??;
        if header.trim() != SWEEP_COLUMNS.join(",") {
            return Err(DickeError::Parse(format!("unexpected sweep header `{header}`")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |what: &str| DickeError::Parse(format!("sweep row {}: bad {what} in `{line}`", i + 1));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != SWEEP_COLUMNS.len() {
                return Err(bad("column count"));
            }
            let num = |k: usize| f[k].parse::<f64>().map_err(|_| bad(SWEEP_COLUMNS[k]));
            let lambda_d = num(4)?;
            rows.push(SweepRow {
                n: f[0].parse().map_err(|_| bad("N"))?,
                log2_upsilon: num(1)?,
                kappa: num(2)?,
                criterion: OnsetCriterion::parse(f[3]).ok_or_else(|| bad("criterion"))?,
                lambda_d: (!lambda_d.is_nan()).then_some(lambda_d),
                status: RowStatus::parse(f[10]).ok_or_else(|| bad("status"))?,
                peak_spin_sq: num(6)?,
                peak_field_sq: num(7)?,
                max_qubit_op: num(8)?,
                max_field_op: num(9)?,
            });
        }
        Ok(Self { rows })
    }
}

fn rows_for_point(config: &SweepConfig, n: usize, log2_upsilon: f64) -> Vec<SweepRow> {
    let run = || -> Result<Trajectory> {
        simulate(&config.params(n), &config.schedule(log2_upsilon)?, &config.integrator, StorageMode::ObservablesOnly)
    };
    let row = |criterion, lambda_d, status, traj: Option<&Trajectory>| {
        let peak = |f: fn(&crate::observables::ObservableRecord) -> f64| traj.map_or(f64::NAN, |t| t.max_of(f));
        SweepRow {
            n,
            log2_upsilon,
            kappa: config.kappa,
            criterion,
            lambda_d,
            status,
            peak_spin_sq: peak(|r| r.spin_sq),
            peak_field_sq: peak(|r| r.field_sq),
            max_qubit_op: peak(|r| r.qubit_op),
            max_field_op: peak(|r| r.field_op),
        }
    };
    match run() {
        Ok(traj) => config
            .onset_criteria
            .iter()
            .map(|&c| {
                let ev = detect(&traj, c, config.qubit_op_thresh, config.field_op_thresh);
                let status = match ev.status {
                    OnsetStatus::Detected => RowStatus::Detected,
                    OnsetStatus::Censored => RowStatus::Censored,
                    OnsetStatus::NoEvent => RowStatus::NoEvent,
                };
                row(c, ev.lambda_d, status, Some(&traj))
            })
            .collect(),
        Err(e) => {
            log::warn!("N = {n}, log2 upsilon = {log2_upsilon}: {e}");
            config.onset_criteria.iter().map(|&c| row(c, None, RowStatus::Failed(e.to_string()), None)).collect()
        }
    }
}

/// Run every `(N, upsilon)` point on a pool of `workers` threads. The table
/// is sorted by `(N, log2 upsilon, criterion)`, so the output does not
/// depend on scheduling.
pub fn run_sweep(config: &SweepConfig, workers: usize) -> Result<SweepResult> {
    config.validate()?;
    let mut points: Vec<(usize, f64)> = Vec::new();
    for &n in &config.n_list {
        for &l in &config.log2_upsilon_list {
            points.push((n, l));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| DickeError::param("workers", e.to_string()))?;
    let mut rows: Vec<SweepRow> =
        pool.install(|| points.par_iter().flat_map_iter(|&(n, l)| rows_for_point(config, n, l)).collect());
    rows.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.log2_upsilon.total_cmp(&b.log2_upsilon))
            .then(a.kappa.total_cmp(&b.kappa))
            .then(a.criterion.cmp(&b.criterion))
    });
    Ok(SweepResult { rows })
}
