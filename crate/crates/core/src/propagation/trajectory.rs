use std::io::Write;

use serde::{Deserialize, Serialize};

use super::schedule::RampSchedule;
use crate::error::Result;
use crate::model::{ModelParams, QuantumState};
use crate::observables::{ObservableRecord, RECORD_COLUMNS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageMode {
    /// Keep the full state at every sample.
    States,
    ObservablesOnly,
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub t: f64,
    pub lambda: f64,
    pub record: ObservableRecord,
    pub state: Option<QuantumState>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDiagnostics {
    /// Largest `| ||psi||^2 - 1 |` or `| tr rho - 1 |` seen at a sample.
    pub max_norm_drift: f64,
    /// Samples at which positivity was verified (density runs only).
    pub positivity_checks: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub generator_applications: usize,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub schedule: RampSchedule,
    pub params: ModelParams,
    pub storage_mode: StorageMode,
    pub samples: Vec<Sample>,
    /// State at the end of the ramp, kept in every storage mode.
    pub final_state: QuantumState,
    pub diagnostics: TrajectoryDiagnostics,
}

impl Trajectory {
    pub fn records(&self) -> impl Iterator<Item = &ObservableRecord> {
        self.samples.iter().map(|s| &s.record)
    }

    /// Largest value of one observable column over the trajectory.
    pub fn max_of(&self, column: impl Fn(&ObservableRecord) -> f64) -> f64 {
        self.records().map(column).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", RECORD_COLUMNS.join(","))?;
        for s in &self.samples {
            let line: Vec<String> = s.record.values().iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}
