//! Run configuration: a TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use dicke_core::propagation::{IntegratorConfig, RampSchedule};
use dicke_core::quasiprob::{PlaneGrid, SphereGrid, WignerMode};
use dicke_core::sweep::SweepConfig;
use dicke_core::{DickeError, ModelParams};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Sweep,
    Wigner,
    Awf,
    Gap,
    Fit,
}

impl Command {
    pub fn default_output(self) -> &'static str {
        match self {
            Command::Simulate => "traj.csv",
            Command::Sweep => "sweep.csv",
            Command::Wigner => "wigner.csv",
            Command::Awf => "awf.csv",
            Command::Gap => "gap.csv",
            Command::Fit => "fit.json",
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_fock() -> usize {
    60
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub n: usize,
    #[serde(default = "default_fock")]
    pub fock: usize,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub nbar: f64,
}

impl ModelSection {
    pub fn params(&self) -> ModelParams {
        let mut p = ModelParams::new(self.n, self.fock).with_kappa(self.kappa).with_nbar(self.nbar);
        p.epsilon = self.epsilon;
        p.omega = self.omega;
        p
    }
}

fn default_lambda_end() -> f64 {
    2.0
}
fn default_samples() -> usize {
    201
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSection {
    pub log2_upsilon: f64,
    #[serde(default)]
    pub lambda_start: f64,
    #[serde(default = "default_lambda_end")]
    pub lambda_end: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl RampSection {
    pub fn schedule(&self) -> dicke_core::Result<RampSchedule> {
        if !self.log2_upsilon.is_finite() {
            return Err(DickeError::InvalidParameter {
                name: "log2_upsilon",
                reason: format!("must be finite, got {}", self.log2_upsilon),
            });
        }
        RampSchedule::new(self.log2_upsilon.exp2(), self.lambda_start, self.lambda_end, self.samples)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridFormat {
    #[default]
    Csv,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerSection {
    pub mode: WignerMode,
    pub format: GridFormat,
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for WignerSection {
    fn default() -> Self {
        let g = PlaneGrid::default();
        Self {
            mode: WignerMode::default(),
            format: GridFormat::default(),
            x_min: g.x_min,
            x_max: g.x_max,
            p_min: g.p_min,
            p_max: g.p_max,
            nx: g.nx,
            np: g.np,
        }
    }
}

impl WignerSection {
    pub fn grid(&self) -> PlaneGrid {
        PlaneGrid { x_min: self.x_min, x_max: self.x_max, p_min: self.p_min, p_max: self.p_max, nx: self.nx, np: self.np }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AwfSection {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for AwfSection {
    fn default() -> Self {
        Self { n_theta: 64, n_phi: 128 }
    }
}

impl AwfSection {
    pub fn grid(&self) -> dicke_core::Result<SphereGrid> {
        SphereGrid::new(self.n_theta, self.n_phi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapSection {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub count: usize,
}

impl Default for GapSection {
    fn default() -> Self {
        Self { lambda_min: 0.7, lambda_max: 1.5, count: 17 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub input: PathBuf,
    #[serde(default)]
    pub min_log2_upsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_c: Option<f64>,
}

/// Everything one invocation needs. Sections that a subcommand does not use
/// are carried along unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub output: PathBuf,
    #[serde(default)]
    pub emit_states: bool,
    #[serde(default)]
    pub check_truncation: bool,
    /// Snapshot to analyse instead of running a ramp (wigner, awf).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<RampSection>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub wigner: WignerSection,
    #[serde(default)]
    pub awf: AwfSection,
    #[serde(default)]
    pub gap: GapSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
}

fn missing(key: &str, hint: &str) -> CliError {
    CliError::Config(format!("missing required key `{key}` ({hint})"))
}

fn invalid(e: DickeError) -> CliError {
    match e {
        DickeError::InvalidParameter { name, reason } => CliError::Config(format!("invalid value for `{name}`: {reason}")),
        other => CliError::Config(other.to_string()),
    }
}

impl RunConfig {
    pub fn model(&self) -> Result<&ModelSection, CliError> {
        self.model.as_ref().ok_or_else(|| missing("n", "--n or [model] n"))
    }

    pub fn ramp(&self) -> Result<&RampSection, CliError> {
        self.ramp.as_ref().ok_or_else(|| missing("log2_upsilon", "--log2-upsilon or [ramp] log2_upsilon"))
    }

    pub fn sweep(&self) -> Result<&SweepConfig, CliError> {
        self.sweep.as_ref().ok_or_else(|| missing("n", "--n or [sweep] n_list"))
    }

    pub fn fit(&self) -> Result<&FitSection, CliError> {
        self.fit.as_ref().ok_or_else(|| missing("input", "--input or [fit] input"))
    }

    /// Check that the sections the command needs are present and in range.
    pub fn validate(&self) -> Result<(), CliError> {
        let needs_ramp = match self.command {
            Command::Simulate => true,
            Command::Wigner | Command::Awf => self.state.is_none(),
            _ => false,
        };
        match self.command {
            Command::Simulate | Command::Wigner | Command::Awf | Command::Gap => {
                self.model()?.params().validate().map_err(invalid)?;
            }
            Command::Sweep => self.sweep()?.validate().map_err(invalid)?,
            Command::Fit => {
                self.fit()?;
            }
        }
        if needs_ramp {
            self.ramp()?.schedule().map_err(invalid)?;
            self.integrator.validate().map_err(invalid)?;
        }
        match self.command {
            Command::Wigner => self.wigner.grid().validate().map_err(invalid)?,
            Command::Awf => {
                self.awf.grid().map_err(invalid)?;
            }
            Command::Gap => {
                let g = &self.gap;
                if !(g.lambda_min.is_finite() && g.lambda_max > g.lambda_min) {
                    return Err(CliError::Config(format!(
                        "invalid value for `lambda_max`: must exceed lambda_min = {}",
                        g.lambda_min
                    )));
                }
                if g.count < 3 {
                    return Err(CliError::Config("invalid value for `count`: need at least 3 couplings".into()));
                }
            }
            _ => {}
        }
        if self.emit_states && self.command != Command::Simulate {
            log::warn!("emit_states only applies to simulate");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        from_table(table)
    }
}

fn from_table(table: Table) -> Result<RunConfig, CliError> {
    RunConfig::deserialize(Value::Table(table)).map_err(|e| CliError::Config(e.to_string().trim().to_string()))
}

/// Set `a.b.c = value`, creating intermediate tables.
fn set_key(table: &mut Table, dotted: &str, value: Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = dotted.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{p}` must be a table to hold `{dotted}`")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Merge an optional config file with flag overrides; flags win.
pub fn parse_config(
    command: Command,
    file: Option<&Path>,
    overrides: Vec<(String, Value)>,
) -> Result<RunConfig, CliError> {
    let mut table = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config `{}`: {e}", path.display())))?;
            text.parse::<Table>()
                .map_err(|e| CliError::Config(format!("config `{}`: {}", path.display(), e.message())))?
        }
        None => Table::new(),
    };
    table.insert("command".into(), Value::String(serde_plain(command)));
    for (k, v) in overrides {
        set_key(&mut table, &k, v)?;
    }
    if !table.contains_key("output") {
        table.insert("output".into(), Value::String(command.default_output().into()));
    }
    let config = from_table(table)?;
    config.validate()?;
    Ok(config)
}

fn serde_plain(c: Command) -> String {
    match Value::try_from(c) {
        Ok(Value::String(s)) => s,
        _ => unreachable!("unit enum serializes to a string"),
    }
}
