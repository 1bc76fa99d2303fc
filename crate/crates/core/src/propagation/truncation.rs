use serde::{Deserialize, Serialize};

use super::schedule::{IntegratorConfig, RampSchedule};
use super::trajectory::{StorageMode, Trajectory};
use super::simulate;
use crate::error::Result;
use crate::model::ModelParams;
use crate::observables::reduce_to_field;

/// Cutoff increment between compared runs.
pub const TRUNCATION_STEP: usize = 8;
const PHOTON_TOLERANCE: f64 = 1e-4;
const TAIL_TOLERANCE: f64 = 1e-6;
const TAIL_LEVELS: usize = 4;
const MAX_ATTEMPTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub n_max: usize,
    pub converged: bool,
    /// Smallest tested cutoff that passes, or the largest tested one if none did.
    pub recommended_n_max: usize,
    /// Final population of the top four Fock levels at `n_max` (never
    /// counting the vacuum, so tiny cutoffs are judged on excited levels only).
    pub tail_weight: f64,
    /// Largest `|<a^dag a>|` difference between `n_max` and `n_max + 8`.
    pub max_photon_diff: f64,
}

fn run(params: &ModelParams, fock: usize, schedule: &RampSchedule, config: &IntegratorConfig) -> Result<Trajectory> {
    simulate(&params.clone().with_fock_cutoff(fock), schedule, config, StorageMode::ObservablesOnly)
}

fn compare(lo: &Trajectory, hi: &Trajectory) -> (f64, f64) {
    let n = lo.params.n_qubits as f64;
    let diff = lo
        .records()
        .zip(hi.records())
        .map(|(a, b)| ((a.field_op - b.field_op) * n).abs())
        .fold(0.0, f64::max);
    let field = reduce_to_field(&lo.final_state);
    let d = field.dim();
    let tail = (d.saturating_sub(TAIL_LEVELS).max(1)..d).map(|k| field.matrix[(k, k)].re).sum();
    (diff, tail)
}

/// Compare the ramp at `params.fock_cutoff` against `fock_cutoff + 8`. When
/// that fails, keep raising the cutoff in steps of 8 (up to eight times) to
/// find a recommendation.
pub fn check_truncation_convergence(
    params: &ModelParams,
    schedule: &RampSchedule,
    config: &IntegratorConfig,
) -> Result<TruncationReport> {
    let n_max = params.fock_cutoff;
    let mut lo = run(params, n_max, schedule, config)?;
    let mut hi = run(params, n_max + TRUNCATION_STEP, schedule, config)?;
    let (max_photon_diff, tail_weight) = compare(&lo, &hi);
    let passes = |diff: f64, tail: f64| diff < PHOTON_TOLERANCE && tail < TAIL_TOLERANCE;
    let converged = passes(max_photon_diff, tail_weight);

    let mut recommended = n_max;
    if !converged {
        let mut cut = n_max;
        for _ in 0..MAX_ATTEMPTS {
            cut += TRUNCATION_STEP;
            lo = hi;
            hi = run(params, cut + TRUNCATION_STEP, schedule, config)?;
            let (diff, tail) = compare(&lo, &hi);
            recommended = cut;
            if passes(diff, tail) {
                break;
            }
            log::debug!("cutoff {cut}: photon difference {diff:.3e}, tail {tail:.3e}");
        }
    }
    Ok(TruncationReport { n_max, converged, recommended_n_max: recommended, tail_weight, max_photon_diff })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_ramp_is_always_converged() {
        let sched = RampSchedule::new(1.0, 0.0, 0.0, 2).unwrap();
        for fock in [1, 2, 5] {
            let r = check_truncation_convergence(&ModelParams::new(4, fock), &sched, &IntegratorConfig::default())
                .unwrap();
            assert!(r.converged);
            assert_eq!(r.recommended_n_max, fock);
        }
    }
}
