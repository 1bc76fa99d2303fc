use serde::{Deserialize, Serialize};

use crate::observables::ObservableRecord;
use crate::propagation::Trajectory;

/// Peaks below this are treated as "never squeezed".
pub const MIN_SQUEEZING_PEAK: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Qubits,
    Field,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnsetCriterion {
    QubitSqueezingDeath,
    FieldSqueezingDeath,
    QubitOpThreshold,
    FieldOpThreshold,
}

impl OnsetCriterion {
    pub const ALL: [OnsetCriterion; 4] = [
        OnsetCriterion::QubitSqueezingDeath,
        OnsetCriterion::FieldSqueezingDeath,
        OnsetCriterion::QubitOpThreshold,
        OnsetCriterion::FieldOpThreshold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OnsetCriterion::QubitSqueezingDeath => "qubit_squeezing_death",
            OnsetCriterion::FieldSqueezingDeath => "field_squeezing_death",
            OnsetCriterion::QubitOpThreshold => "qubit_op_threshold",
            OnsetCriterion::FieldOpThreshold => "field_op_threshold",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl std::fmt::Display for OnsetCriterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnsetStatus {
    Detected,
    /// The signal was there but never crossed before the end of the ramp.
    Censored,
    /// Squeezing never exceeded [`MIN_SQUEEZING_PEAK`].
    NoEvent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnsetEvent {
    pub criterion: OnsetCriterion,
    pub status: OnsetStatus,
    pub lambda_d: Option<f64>,
    /// True when `lambda_d` lies strictly between two samples.
    pub interpolated: bool,
}

impl OnsetEvent {
    fn detected(criterion: OnsetCriterion, lambda_d: f64, interpolated: bool) -> Self {
        Self { criterion, status: OnsetStatus::Detected, lambda_d: Some(lambda_d), interpolated }
    }

    fn missing(criterion: OnsetCriterion, status: OnsetStatus) -> Self {
        Self { criterion, status, lambda_d: None, interpolated: false }
    }
}

/// Linear root of the segment `(l0, v0) -> (l1, v1)` at `level`.
fn crossing(l0: f64, v0: f64, l1: f64, v1: f64, level: f64) -> (f64, bool) {
    if v1 == level {
        return (l1, false);
    }
    let frac = (v0 - level) / (v0 - v1);
    (l0 + frac * (l1 - l0), true)
}

fn series(traj: &Trajectory, f: impl Fn(&ObservableRecord) -> f64) -> Vec<(f64, f64)> {
    traj.records().map(|r| (r.lambda, f(r))).collect()
}

/// First zero crossing of `1 - xi^2` after its global maximum.
pub fn detect_squeezing_death(traj: &Trajectory, component: Component) -> OnsetEvent {
    let (criterion, pts) = match component {
        Component::Qubits => (OnsetCriterion::QubitSqueezingDeath, series(traj, |r| r.spin_sq)),
        Component::Field => (OnsetCriterion::FieldSqueezingDeath, series(traj, |r| r.field_sq)),
    };
    let Some((peak_idx, &(_, peak))) = pts.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1)) else {
        return OnsetEvent::missing(criterion, OnsetStatus::NoEvent);
    };
    if peak < MIN_SQUEEZING_PEAK {
        return OnsetEvent::missing(criterion, OnsetStatus::NoEvent);
    }
    let above_half = pts.iter().filter(|p| p.1 >= 0.5 * peak).count();
    if above_half < 5 {
        log::warn!("{criterion}: only {above_half} samples above half maximum; the peak is poorly resolved");
    }
    for k in peak_idx + 1..pts.len() {
        if pts[k].1 <= 0.0 {
            let (l0, v0) = pts[k - 1];
            let (l1, v1) = pts[k];
            let (lambda_d, interpolated) = crossing(l0, v0, l1, v1, 0.0);
            return OnsetEvent::detected(criterion, lambda_d, interpolated);
        }
    }
    OnsetEvent::missing(criterion, OnsetStatus::Censored)
}

/// First upward crossing of the scaled order parameter through `threshold`.
pub fn detect_op_threshold(traj: &Trajectory, component: Component, threshold: f64) -> OnsetEvent {
    let (criterion, pts) = match component {
        Component::Qubits => (OnsetCriterion::QubitOpThreshold, series(traj, |r| r.qubit_op)),
        Component::Field => (OnsetCriterion::FieldOpThreshold, series(traj, |r| r.field_op)),
    };
    for k in 1..pts.len() {
        let (l0, v0) = pts[k - 1];
        let (l1, v1) = pts[k];
        if v0 < threshold && v1 >= threshold {
            let (lambda_d, interpolated) = crossing(l0, v0, l1, v1, threshold);
            return OnsetEvent::detected(criterion, lambda_d, interpolated);
        }
    }
    OnsetEvent::missing(criterion, OnsetStatus::Censored)
}

pub fn detect(traj: &Trajectory, criterion: OnsetCriterion, qubit_op_thresh: f64, field_op_thresh: f64) -> OnsetEvent {
    match criterion {
        OnsetCriterion::QubitSqueezingDeath => detect_squeezing_death(traj, Component::Qubits),
        OnsetCriterion::FieldSqueezingDeath => detect_squeezing_death(traj, Component::Field),
        OnsetCriterion::QubitOpThreshold => detect_op_threshold(traj, Component::Qubits, qubit_op_thresh),
        OnsetCriterion::FieldOpThreshold => detect_op_threshold(traj, Component::Field, field_op_thresh),
    }
}
