//! JSON experiment configurations: strict schemas, path checks, and the
//! builders that turn config records into simulator objects.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use himit_core::densim::PauliString;
use himit_core::noise::{
    ErrorSide, GateErrorModel, InverseBehavior, MixedUnitaryNoise, NoiseSpec, OverRotationNoise,
    OverRotationSampling,
};
use himit_core::transforms::Circuit;
use himit_core::vqe::{h2_hamiltonian, ucc3_ansatz, Mitigation, PauliHamiltonian, ShotMode};

use crate::CliError;

/// Which experiment a config file drives; must match the subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Pulse,
    Fold,
    Qpt,
    Vqe,
    Landscape,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ExperimentKind::Pulse => "pulse",
            ExperimentKind::Fold => "fold",
            ExperimentKind::Qpt => "qpt",
            ExperimentKind::Vqe => "vqe",
            ExperimentKind::Landscape => "landscape",
        };
        f.write_str(name)
    }
}

/// Gate error model for a run. `"none"` means ideal execution; the other
/// variants attach the described channel to every CX.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseConfig {
    None,
    MixedUnitary(MixedUnitaryConfig),
    OverRotation(OverRotationConfig),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixedUnitaryConfig {
    /// Two-qubit Pauli generator of the error, e.g. "IZ" or "ZX".
    pub generator: String,
    pub epsilon: f64,
    pub kappa: f64,
    #[serde(default = "default_side")]
    pub side: ErrorSide,
    #[serde(default = "default_inverse_behavior")]
    pub inverse_behavior: InverseBehavior,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverRotationConfig {
    #[serde(default = "default_overrotation_generator")]
    pub generator: String,
    #[serde(default = "default_base_angle")]
    pub base_angle: f64,
    /// Drift width for quasi-static sampling; must stay 0 for systematic.
    #[serde(default)]
    pub sigma: f64,
    pub sampling: OverRotationSampling,
    #[serde(default = "default_side")]
    pub side: ErrorSide,
    #[serde(default = "default_inverse_behavior")]
    pub inverse_behavior: InverseBehavior,
}

fn default_side() -> ErrorSide {
    ErrorSide::After
}

fn default_inverse_behavior() -> InverseBehavior {
    InverseBehavior::InvertsWithGate
}

fn default_overrotation_generator() -> String {
    "ZX".to_string()
}

fn default_base_angle() -> f64 {
    std::f64::consts::FRAC_PI_2
}

impl NoiseConfig {
    pub fn build(&self) -> Result<GateErrorModel, CliError> {
        match self {
            NoiseConfig::None => Ok(GateErrorModel::noiseless()),
            NoiseConfig::MixedUnitary(c) => {
                let generator = parse_cx_generator(&c.generator)?;
                let spec = MixedUnitaryNoise::from_pauli(&generator, c.epsilon, c.kappa)
                    .map_err(|e| CliError::Config(format!("noise.mixed_unitary: {e}")))?;
                Ok(GateErrorModel::cx_only(
                    NoiseSpec::MixedUnitary(spec),
                    c.side,
                    c.inverse_behavior,
                ))
            }
            NoiseConfig::OverRotation(c) => {
                if matches!(c.sampling, OverRotationSampling::Systematic { .. }) && c.sigma != 0.0
                {
                    return Err(CliError::Config(
                        "noise.over_rotation: sigma is unused with systematic sampling; omit it"
                            .to_string(),
                    ));
                }
                let generator = parse_cx_generator(&c.generator)?;
                let spec = OverRotationNoise::new(generator, c.base_angle, c.sigma, c.sampling)
                    .map_err(|e| CliError::Config(format!("noise.over_rotation: {e}")))?;
                Ok(GateErrorModel::cx_only(
                    NoiseSpec::OverRotation(spec),
                    c.side,
                    c.inverse_behavior,
                ))
            }
        }
    }
}

fn parse_cx_generator(letters: &str) -> Result<PauliString, CliError> {
    let parsed = PauliString::parse(letters)
        .map_err(|e| CliError::Config(format!("noise generator: {e}")))?;
    if parsed.n_qubits() != 2 {
        return Err(CliError::Config(format!(
            "noise generator must act on 2 qubits to attach to CX, got \"{letters}\""
        )));
    }
    Ok(parsed)
}

/// Mitigation arm of a VQE or landscape run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    /// Configured noise switched off entirely.
    Ideal,
    /// Configured noise, no mitigation.
    Default,
    /// Hidden-inverse pass on the ansatz.
    Hi,
    /// Randomized compiling averaged over `rc_instances` twirls.
    Rc,
}

impl Arm {
    pub fn mitigation(self, rc_instances: usize) -> Mitigation {
        match self {
            Arm::Ideal | Arm::Default => Mitigation::None,
            Arm::Hi => Mitigation::HiddenInverse,
            Arm::Rc => Mitigation::RandomizedCompile { instances: rc_instances },
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Arm::Ideal => "ideal",
            Arm::Default => "default",
            Arm::Hi => "hi",
            Arm::Rc => "rc",
        };
        f.write_str(name)
    }
}

impl FromStr for Arm {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "ideal" => Ok(Arm::Ideal),
            "default" => Ok(Arm::Default),
            "hi" => Ok(Arm::Hi),
            "rc" => Ok(Arm::Rc),
            other => Err(CliError::Config(format!(
                "unknown arm \"{other}\"; expected ideal, default, hi, or rc"
            ))),
        }
    }
}

fn default_arm() -> Arm {
    Arm::Default
}

fn default_rc_instances() -> usize {
    20
}

fn default_gate() -> String {
    "CX".to_string()
}

fn default_warn_window() -> f64 {
    5e-3
}

pub fn shot_mode(shots: Option<u64>) -> ShotMode {
    match shots {
        None => ShotMode::Exact,
        Some(n) => ShotMode::Shots(n),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    pub action: PulseAction,
    pub schedule: ScheduleConfig,
    /// Qubit-drive coupling strength entering the RWA Hamiltonian.
    pub epsilon_strength: f64,
    pub out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseAction {
    /// Write the schedule, its propagator fidelities, and phase diagnostics.
    Propagate,
    /// Write the time-reversed, sign-flipped schedule.
    Invert,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleConfig {
    Gaussian(GaussianScheduleConfig),
    File(FileScheduleConfig),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianScheduleConfig {
    pub u_sigma: f64,
    pub t_total: f64,
    pub n_samples: usize,
    /// Peak amplitude; omit to auto-calibrate a pi-area pulse.
    #[serde(default)]
    pub amplitude: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileScheduleConfig {
    pub path: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoldConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_gate")]
    pub gate: String,
    /// Fold counts swept as n = 0..=n_max for both variants.
    pub n_max: usize,
    pub noise: NoiseConfig,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QptConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    pub gate: String,
    pub noise: NoiseConfig,
    /// Shots per measurement setting; omit for exact tomography.
    #[serde(default)]
    pub shots: Option<u64>,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqeConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    /// "builtin:ucc3" or a path to a circuit JSON file.
    pub ansatz: String,
    /// "builtin:h2" or a path to a Pauli-sum text file.
    pub hamiltonian: String,
    pub noise: NoiseConfig,
    /// Shots per measurement group and energy estimate; omit for exact.
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default = "default_arm")]
    pub arm: Arm,
    #[serde(default = "default_rc_instances")]
    pub rc_instances: usize,
    pub initial_params: Vec<f64>,
    pub optimizer: OptimizerConfig,
    /// The run is flagged non-converged when the final iterate sits more
    /// than this far above the best energy seen.
    #[serde(default = "default_warn_window")]
    pub warn_window: f64,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerConfig {
    Adam(AdamConfig),
    ModelBased(ModelBasedConfig),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    pub max_iters: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_adam_epsilon")]
    pub epsilon: f64,
}

fn default_learning_rate() -> f64 {
    himit_core::vqe::AdamParams::default().learning_rate
}

fn default_beta1() -> f64 {
    himit_core::vqe::AdamParams::default().beta1
}

fn default_beta2() -> f64 {
    himit_core::vqe::AdamParams::default().beta2
}

fn default_adam_epsilon() -> f64 {
    himit_core::vqe::AdamParams::default().epsilon
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBasedConfig {
    /// Objective-evaluation budget.
    pub budget: usize,
    #[serde(default = "default_initial_radius")]
    pub initial_radius: f64,
    #[serde(default = "default_final_radius")]
    pub final_radius: f64,
}

fn default_initial_radius() -> f64 {
    himit_core::vqe::TrustRegionParams::default().initial_radius
}

fn default_final_radius() -> f64 {
    himit_core::vqe::TrustRegionParams::default().final_radius
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    pub ansatz: String,
    pub hamiltonian: String,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default = "default_arm")]
    pub arm: Arm,
    #[serde(default = "default_rc_instances")]
    pub rc_instances: usize,
    pub grid: GridConfig,
    pub out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub fixed_slot: usize,
    pub fixed_value: f64,
    pub axis1: AxisConfig,
    pub axis2: AxisConfig,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub slot: usize,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Parse a config file into `T`, reporting schema violations with the JSON
/// path to the offending field. Returns the raw text for provenance hashing.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<(T, String), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let cfg = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        CliError::Config(format!("{} in config {} at {}", e.inner(), path.display(), e.path()))
    })?;
    Ok((cfg, text))
}

pub fn check_experiment(declared: ExperimentKind, subcommand: ExperimentKind) -> Result<(), CliError> {
    if declared != subcommand {
        return Err(CliError::Config(format!(
            "config declares experiment \"{declared}\" but the subcommand is \"{subcommand}\""
        )));
    }
    Ok(())
}

/// Resolve "builtin:h2" or a Pauli-sum text file path.
pub fn load_hamiltonian(source: &str) -> Result<PauliHamiltonian, CliError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return match name {
            "h2" => Ok(h2_hamiltonian()),
            other => Err(CliError::Config(format!(
                "unknown builtin hamiltonian \"{other}\"; available: h2"
            ))),
        };
    }
    let text = fs::read_to_string(source)
        .map_err(|e| CliError::Config(format!("cannot read hamiltonian {source}: {e}")))?;
    PauliHamiltonian::parse(&text)
        .map_err(|e| CliError::Config(format!("hamiltonian {source}: {e}")))
}

/// Resolve "builtin:ucc3" or a circuit JSON file path.
pub fn load_ansatz(source: &str) -> Result<Circuit, CliError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return match name {
            "ucc3" => Ok(ucc3_ansatz()),
            other => Err(CliError::Config(format!(
                "unknown builtin ansatz \"{other}\"; available: ucc3"
            ))),
        };
    }
    let text = fs::read_to_string(source)
        .map_err(|e| CliError::Config(format!("cannot read ansatz {source}: {e}")))?;
    Circuit::load_json(&text).map_err(|e| CliError::Config(format!("ansatz {source}: {e}")))
}
