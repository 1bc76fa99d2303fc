//! Annealing-velocity sweeps, onset detection and power-law fits.

mod fit;
mod onset;
mod run;

pub use fit::{fit_power_law, gap_scaling_check, lambda_grid, PowerLawFit};
pub use onset::{
    detect, detect_op_threshold, detect_squeezing_death, Component, OnsetCriterion, OnsetEvent, OnsetStatus,
    MIN_SQUEEZING_PEAK,
};
pub use run::{run_sweep, FitEntry, RowStatus, SweepConfig, SweepResult, SweepRow, SWEEP_COLUMNS};
