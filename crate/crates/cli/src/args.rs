//! Command-line flags. Every flag maps onto one key of [`RunConfig`] and
//! overrides the config file.
//!
//! [`RunConfig`]: crate::config::RunConfig

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use toml::Value;

#[derive(Debug, Parser)]
#[command(name = "dicke", version, about = "Ramped Dicke-model simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Run one coupling ramp and write the observable trajectory.
    Simulate(SimulateArgs),
    /// Scan sizes and ramp speeds, detect onsets and fit the power law.
    Sweep(SweepArgs),
    /// Field Wigner function of the state at the end of a ramp.
    Wigner(WignerArgs),
    /// Agarwal-Wigner function of the qubits at the end of a ramp.
    Awf(AwfArgs),
    /// Even-sector spectral gap over a range of couplings.
    Gap(GapArgs),
    /// Refit onsets from an existing sweep table.
    Fit(FitArgs),
}

impl Sub {
    pub fn name(&self) -> &'static str {
        match self {
            Sub::Simulate(_) => "simulate",
            Sub::Sweep(_) => "sweep",
            Sub::Wigner(_) => "wigner",
            Sub::Awf(_) => "awf",
            Sub::Gap(_) => "gap",
            Sub::Fit(_) => "fit",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Sub::Simulate(a) => &a.common,
            Sub::Sweep(a) => &a.common,
            Sub::Wigner(a) => &a.common,
            Sub::Awf(a) => &a.common,
            Sub::Gap(a) => &a.common,
            Sub::Fit(a) => &a.common,
        }
    }

    /// `(dotted key, value)` pairs for every flag that was given.
    pub fn overrides(&self) -> Vec<(String, Value)> {
        let mut out = Overrides::default();
        if let Some(p) = &self.common().out {
            out.path("output", p);
        }
        match self {
            Sub::Simulate(a) => {
                a.model.push(&mut out);
                a.ramp.push(&mut out);
                a.integrator.push(&mut out, "integrator");
                out.flag("emit_states", a.emit_states);
                out.flag("check_truncation", a.check_truncation);
            }
            Sub::Wigner(a) => {
                a.model.push(&mut out);
                a.ramp.push(&mut out);
                a.integrator.push(&mut out, "integrator");
                if let Some(p) = &a.state {
                    out.path("state", p);
                }
                if let Some(m) = a.mode {
                    out.str("wigner.mode", m.to_possible_value().unwrap().get_name());
                }
                if let Some(f) = a.format {
                    out.str("wigner.format", f.to_possible_value().unwrap().get_name());
                }
                if let Some(e) = a.extent {
                    for (k, v) in [("wigner.x_min", -e), ("wigner.x_max", e), ("wigner.p_min", -e), ("wigner.p_max", e)] {
                        out.float(k, Some(v));
                    }
                }
                out.int("wigner.nx", a.points);
                out.int("wigner.np", a.points);
            }
            Sub::Awf(a) => {
                a.model.push(&mut out);
                a.ramp.push(&mut out);
                a.integrator.push(&mut out, "integrator");
                if let Some(p) = &a.state {
                    out.path("state", p);
                }
                out.int("awf.n_theta", a.n_theta);
                out.int("awf.n_phi", a.n_phi);
            }
            Sub::Gap(a) => {
                a.model.push(&mut out);
                out.float("gap.lambda_min", a.lambda_min);
                out.float("gap.lambda_max", a.lambda_max);
                out.int("gap.count", a.count);
            }
            Sub::Sweep(a) => {
                if !a.n.is_empty() {
                    out.push("sweep.n_list", Value::Array(a.n.iter().map(|&n| Value::Integer(n as i64)).collect()));
                }
                if !a.log2_upsilon.is_empty() {
                    out.push("sweep.log2_upsilon_list", Value::Array(a.log2_upsilon.iter().map(|&x| Value::Float(x)).collect()));
                }
                if !a.criteria.is_empty() {
                    out.push("sweep.onset_criteria", Value::Array(a.criteria.iter().map(|c| Value::String(c.clone())).collect()));
                }
                out.float("sweep.kappa", a.kappa);
                out.float("sweep.nbar", a.nbar);
                out.int("sweep.fock_cutoff", a.fock);
                out.float("sweep.lambda_end", a.lambda_end);
                out.float("sweep.lambda_step", a.lambda_step);
                out.float("sweep.qubit_op_thresh", a.qubit_op_thresh);
                out.float("sweep.field_op_thresh", a.field_op_thresh);
                out.float("sweep.fit_min_log2_upsilon", a.fit_min_log2_upsilon);
                out.float("sweep.fit_lambda_c", a.lambda_c);
                a.integrator.push(&mut out, "sweep.integrator");
            }
            Sub::Fit(a) => {
                if let Some(p) = &a.input {
                    out.path("fit.input", p);
                }
                out.float("fit.min_log2_upsilon", a.min_log2_upsilon);
                out.float("fit.lambda_c", a.lambda_c);
            }
        }
        out.0
    }
}

#[derive(Default)]
pub(crate) struct Overrides(Vec<(String, Value)>);

impl Overrides {
    fn push(&mut self, key: impl Into<String>, v: Value) {
        self.0.push((key.into(), v));
    }
    fn float(&mut self, key: impl Into<String>, v: Option<f64>) {
        if let Some(v) = v {
            self.push(key, Value::Float(v));
        }
    }
    fn int(&mut self, key: impl Into<String>, v: Option<usize>) {
        if let Some(v) = v {
            self.push(key, Value::Integer(v as i64));
        }
    }
    fn str(&mut self, key: impl Into<String>, v: &str) {
        self.push(key, Value::String(v.to_string()));
    }
    fn path(&mut self, key: impl Into<String>, p: &std::path::Path) {
        self.push(key, Value::String(p.to_string_lossy().into_owned()));
    }
    fn flag(&mut self, key: impl Into<String>, set: bool) {
        if set {
            self.push(key, Value::Boolean(true));
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Main output file. A `.manifest.json` is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Number of qubits.
    #[arg(long)]
    pub n: Option<usize>,
    /// Fock cutoff (levels 0..fock are kept).
    #[arg(long)]
    pub fock: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub nbar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
}

impl ModelArgs {
    fn push(&self, out: &mut Overrides) {
        out.int("model.n", self.n);
        out.int("model.fock", self.fock);
        out.float("model.kappa", self.kappa);
        out.float("model.nbar", self.nbar);
        out.float("model.epsilon", self.epsilon);
        out.float("model.omega", self.omega);
    }
}

#[derive(Debug, Args)]
pub struct RampArgs {
    /// Ramp speed as log2 of upsilon.
    #[arg(long, allow_negative_numbers = true)]
    pub log2_upsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_end: Option<f64>,
    /// Number of observable samples, uniform in lambda.
    #[arg(long)]
    pub samples: Option<usize>,
}

impl RampArgs {
    fn push(&self, out: &mut Overrides) {
        out.float("ramp.log2_upsilon", self.log2_upsilon);
        out.float("ramp.lambda_start", self.lambda_start);
        out.float("ramp.lambda_end", self.lambda_end);
        out.int("ramp.samples", self.samples);
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    AdaptiveRk,
    KrylovExpm,
}

#[derive(Debug, Args)]
pub struct IntegratorArgs {
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
    #[arg(long)]
    pub krylov_dim: Option<usize>,
    #[arg(long)]
    pub positivity_stride: Option<usize>,
}

impl IntegratorArgs {
    fn push(&self, out: &mut Overrides, section: &str) {
        let key = |k: &str| format!("{section}.{k}");
        if let Some(m) = self.method {
            out.str(key("method"), m.to_possible_value().unwrap().get_name());
        }
        out.float(key("rel_tol"), self.rel_tol);
        out.float(key("abs_tol"), self.abs_tol);
        out.float(key("max_step"), self.max_step);
        out.int(key("krylov_dim"), self.krylov_dim);
        out.int(key("positivity_stride"), self.positivity_stride);
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub ramp: RampArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    /// Also write the full state at every sample.
    #[arg(long)]
    pub emit_states: bool,
    /// Rerun with a larger cutoff and report whether results changed.
    #[arg(long)]
    pub check_truncation: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Raw,
    Normalized,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Csv,
    Dense,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub ramp: RampArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    /// Read the state from a snapshot instead of running a ramp.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Square grid `[-extent, extent]^2`.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Points per axis.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AwfArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub ramp: RampArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub n_theta: Option<usize>,
    #[arg(long)]
    pub n_phi: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Qubit numbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// log2 of the ramp speeds, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub log2_upsilon: Vec<f64>,
    /// Onset criteria, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub nbar: Option<f64>,
    #[arg(long)]
    pub fock: Option<usize>,
    #[arg(long)]
    pub lambda_end: Option<f64>,
    #[arg(long)]
    pub lambda_step: Option<f64>,
    #[arg(long)]
    pub qubit_op_thresh: Option<f64>,
    #[arg(long)]
    pub field_op_thresh: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub fit_min_log2_upsilon: Option<f64>,
    #[arg(long)]
    pub lambda_c: Option<f64>,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, env = "DICKE_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Sweep table to fit.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub min_log2_upsilon: Option<f64>,
    #[arg(long)]
    pub lambda_c: Option<f64>,
}
