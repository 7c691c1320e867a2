//! Config document schema.
//!
//! A config is one JSON object:
//!
//! ```json
//! { "command": "distill", "angle_unit": "deg", "seed": 7,
//!   "parameters": { "phi": 30, "gamma": 90 } }
//! ```
//!
//! `command` is optional and must match the command line when present.
//! `angle_unit` is `rad` (default) or `deg` and applies to every angle in
//! `parameters`. `--seed` overrides `seed`, which defaults to 0. Unknown keys
//! are rejected at every level.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use procrustean::ensemble::{SurvivorMode, DEFAULT_BINS};
use procrustean::tdse::{DtPolicy, PhysicalParams, ScenarioConfig, ScenarioKind};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Matched POVM on one qubit of a Schmidt-form pair.
    Distill,
    /// Matched POVM on one qubit of n-qubit GHZ-class states.
    Ghz,
    /// Mean entropy gain over a (S_in, phi) grid of gaussian ensembles.
    Sweep,
    /// One ensemble through the POVM, optionally with calibration.
    Ensemble,
    /// Wavepacket scenario realizing the POVM.
    Tdse,
    /// Resource estimate for a measurement-based computation.
    Mbqc,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Distill => "distill",
            Command::Ghz => "ghz",
            Command::Sweep => "sweep",
            Command::Ensemble => "ensemble",
            Command::Tdse => "tdse",
            Command::Mbqc => "mbqc",
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleUnit {
    #[default]
    Rad,
    Deg,
}

impl AngleUnit {
    pub fn to_rad(self, x: f64) -> f64 {
        match self {
            AngleUnit::Rad => x,
            AngleUnit::Deg => x * PI / 180.0,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    command: Option<Command>,
    #[serde(default)]
    angle_unit: AngleUnit,
    seed: Option<u64>,
    #[serde(default)]
    parameters: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistillConfig {
    pub phi: f64,
    pub gamma: f64,
    /// Qubit the POVM acts on.
    #[serde(default)]
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GhzConfig {
    pub phi: f64,
    pub gamma: f64,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// An explicit list or `count` evenly spaced points from `start` to `stop`
/// inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Linspace(Linspace),
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Values(v) => v.clone(),
            Axis::Linspace(Linspace { count: 1, start, .. }) => vec![*start],
            Axis::Linspace(Linspace { start, stop, count }) => {
                let step = (stop - start) / (*count - 1) as f64;
                (0..*count).map(|i| if i + 1 == *count { *stop } else { start + step * i as f64 }).collect()
            }
        }
    }

    fn to_rad(&self, unit: AngleUnit) -> Axis {
        Axis::Values(self.values().into_iter().map(|x| unit.to_rad(x)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Columns, an angle axis.
    pub phi_axis: Axis,
    /// Rows, mean input entropy in bits.
    pub s_in_axis: Axis,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Pairs per row, shared by every column.
    #[serde(default = "default_size")]
    pub size: usize,
    #[serde(default)]
    pub gamma: f64,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    #[default]
    Gaussian,
    Delta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default)]
    pub family: FamilyName,
    /// Target mean input entropy; exclusive with `mean_alpha2`.
    #[serde(default)]
    pub s_in: Option<f64>,
    #[serde(default)]
    pub mean_alpha2: Option<f64>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_size")]
    pub size: usize,
    /// Defaults to the angle matched to the mean, `arccos √mean`.
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_survivors")]
    pub survivors: SurvivorMode,
    /// Fraction of pairs spent estimating the matched angle.
    #[serde(default)]
    pub calibration_fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TdseConfig {
    #[serde(default = "default_scenario")]
    pub scenario: ScenarioKind,
    pub phi: f64,
    pub gamma: f64,
    #[serde(default)]
    pub physical: PhysicalParams,
    /// Lengths in trap units; `trim` is an angle.
    #[serde(default)]
    pub layout: ScenarioConfig,
    #[serde(default)]
    pub dt: DtPolicy,
    /// Norm and snapshot cadence in steps.
    #[serde(default = "default_record_every")]
    pub record_every: Option<usize>,
    /// Replace `layout.trim` with a calibrated value before the run.
    #[serde(default)]
    pub calibrate_trim: bool,
    /// Write the final field as `snapshot.csv`.
    #[serde(default)]
    pub snapshot: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MbqcConfig {
    pub n_logical: u64,
    pub depth_k: u64,
    pub lattice_l: u64,
    /// Smaller Schmidt amplitude of the raw pairs, not an angle.
    pub alpha: f64,
    #[serde(default = "default_prefactor")]
    pub prefactor: f64,
}

fn default_n_min() -> usize {
    2
}

fn default_n_max() -> usize {
    8
}

fn default_sigma() -> f64 {
    0.01
}

fn default_size() -> usize {
    10_000
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

fn default_survivors() -> SurvivorMode {
    SurvivorMode::Weighted
}

fn default_scenario() -> ScenarioKind {
    ScenarioKind::TrappedPovm
}

fn default_record_every() -> Option<usize> {
    Some(100)
}

fn default_prefactor() -> f64 {
    1.0
}

/// Parameters of one command, with every angle in radians.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Parameters {
    Distill(DistillConfig),
    Ghz(GhzConfig),
    Sweep(SweepConfig),
    Ensemble(EnsembleConfig),
    Tdse(TdseConfig),
    Mbqc(MbqcConfig),
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub parameters: Parameters,
}

/// The rerunnable form of a [`RunConfig`]: a valid config document with
/// `angle_unit = rad`.
#[derive(Clone, Debug, Serialize)]
pub struct ResolvedDocument<'a> {
    pub command: Command,
    pub angle_unit: AngleUnit,
    pub seed: u64,
    pub parameters: &'a Parameters,
}

impl RunConfig {
    pub fn document(&self) -> ResolvedDocument<'_> {
        ResolvedDocument { command: self.command, angle_unit: AngleUnit::Rad, seed: self.seed, parameters: &self.parameters }
    }
}

fn typed<T: DeserializeOwned>(command: Command, value: serde_json::Value) -> CliResult<T> {
    serde_json::from_value(value).map_err(|e| CliError::schema(format!("parameters for `{}`: {e}", command.name())))
}

fn check(ok: bool, message: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::schema(message()))
    }
}

fn check_axis(name: &str, axis: &Axis) -> CliResult<()> {
    match axis {
        Axis::Values(v) => check(!v.is_empty(), || format!("{name}: empty axis")),
        Axis::Linspace(l) => check(l.count >= 1, || format!("{name}: count must be at least 1")),
    }
}

/// Parses and resolves a config document. `seed` overrides the document.
pub fn parse_config(command: Command, text: &str, seed: Option<u64>, output_dir: PathBuf) -> CliResult<RunConfig> {
    let doc: Document = serde_json::from_str(text).map_err(|e| CliError::schema(e.to_string()))?;
    if let Some(c) = doc.command {
        check(c == command, || format!("config is for `{}` but `{}` was requested", c.name(), command.name()))?;
    }
    let unit = doc.angle_unit;
    let raw = doc.parameters.unwrap_or_else(|| serde_json::Value::Object(Default::default()));
    check(raw.is_object(), || "`parameters` must be an object".into())?;
    let rad = |x: f64| unit.to_rad(x);

    let parameters = match command {
        Command::Distill => {
            let p: DistillConfig = typed(command, raw)?;
            check(p.target < 2, || format!("target must be 0 or 1 (got {})", p.target))?;
            Parameters::Distill(DistillConfig { phi: rad(p.phi), gamma: rad(p.gamma), ..p })
        }
        Command::Ghz => {
            let p: GhzConfig = typed(command, raw)?;
            check(p.n_min >= 2 && p.n_min <= p.n_max, || {
                format!("need 2 <= n_min <= n_max (got {}..{})", p.n_min, p.n_max)
            })?;
            Parameters::Ghz(GhzConfig { phi: rad(p.phi), gamma: rad(p.gamma), ..p })
        }
        Command::Sweep => {
            let p: SweepConfig = typed(command, raw)?;
            check_axis("phi_axis", &p.phi_axis)?;
            check_axis("s_in_axis", &p.s_in_axis)?;
            Parameters::Sweep(SweepConfig {
                phi_axis: p.phi_axis.to_rad(unit),
                s_in_axis: Axis::Values(p.s_in_axis.values()),
                gamma: rad(p.gamma),
                ..p
            })
        }
        Command::Ensemble => {
            let p: EnsembleConfig = typed(command, raw)?;
            check(p.s_in.is_some() != p.mean_alpha2.is_some(), || {
                "exactly one of `s_in` and `mean_alpha2` is required".into()
            })?;
            let sigma = if p.family == FamilyName::Delta { 0.0 } else { p.sigma };
            Parameters::Ensemble(EnsembleConfig { phi: p.phi.map(rad), gamma: rad(p.gamma), sigma, ..p })
        }
        Command::Tdse => {
            let p: TdseConfig = typed(command, raw)?;
            let layout = ScenarioConfig { trim: rad(p.layout.trim), ..p.layout };
            Parameters::Tdse(TdseConfig { phi: rad(p.phi), gamma: rad(p.gamma), layout, ..p })
        }
        Command::Mbqc => Parameters::Mbqc(typed(command, raw)?),
    };
    Ok(RunConfig { command, seed: seed.or(doc.seed).unwrap_or(0), output_dir, parameters })
}

pub fn load_config(command: Command, path: &Path, seed: Option<u64>, output_dir: PathBuf) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::schema(format!("cannot read config `{}`: {e}", path.display())))?;
    parse_config(command, &text, seed, output_dir)
}
