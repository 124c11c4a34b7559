//! JSON run configuration: parsing, validation, defaults.
//!
//! Every field is optional; omitted fields fall back to the reference-device
//! defaults and each applied default is recorded so the manifest can echo it.
//! Unknown keys are rejected.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::Deserialize;
use squidsim::dynamics::InitialState;
use squidsim::model::{DeviceInputs, TermSet};
use squidsim::operators::FockSpace;
use squidsim::spectroscopy::linspace;

/// Configuration failure distinguishable for the exit-code taxonomy.
#[derive(Debug)]
pub enum ConfigError {
    Parse(String),
    Validation(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Validation(m) => write!(f, "config validation error: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    device: RawDevice,
    #[serde(default)]
    space: RawSpace,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    dynamics: RawDynamics,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    #[serde(rename = "josephson_energy_J")]
    josephson_energy_j: Option<f64>,
    #[serde(rename = "capacitance_F")]
    capacitance_f: Option<f64>,
    #[serde(rename = "inductance_H")]
    inductance_h: Option<f64>,
    damping_rate_ratio: Option<f64>,
    cutoff_ratio: Option<f64>,
    coupling_ratio: Option<f64>,
    external_flux_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    dim: Option<usize>,
    pad: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    phi_min: Option<f64>,
    phi_max: Option<f64>,
    phi_count: Option<usize>,
    g: Option<Vec<f64>>,
    g_min: Option<f64>,
    g_max: Option<f64>,
    g_count: Option<usize>,
    levels: Option<usize>,
    include: Option<Vec<String>>,
    fd_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDynamics {
    dim: Option<usize>,
    pad: Option<usize>,
    dt: Option<f64>,
    steps: Option<usize>,
    stride: Option<usize>,
    initial_state: Option<RawInitialState>,
    snapshots: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawInitialState {
    Ground,
    Fock {
        n: usize,
    },
    Coherent {
        alpha_re: f64,
        #[serde(default)]
        alpha_im: f64,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<String>,
    prefix: Option<String>,
}

/// Sweep grids shared by `spectrum`, `susceptibility` and `lindblads`.
#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub phi_grid: Vec<f64>,
    pub g_grid: Vec<f64>,
    pub levels: usize,
    pub include: TermSet,
    pub fd_step: f64,
}

/// Settings for the `evolve` command.
#[derive(Debug, Clone)]
pub struct DynamicsSettings {
    pub space: FockSpace,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub initial_state: InitialState,
    pub snapshots: bool,
}

#[derive(Debug, Clone)]
pub struct OutputSettings {
    pub directory: PathBuf,
    pub prefix: String,
}

/// Fully resolved run configuration with a record of every applied default.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub device: DeviceInputs,
    pub space: FockSpace,
    pub sweep: SweepSettings,
    pub dynamics: DynamicsSettings,
    pub output: OutputSettings,
    pub defaults_applied: Vec<String>,
}

fn resolve<T: Copy>(
    value: Option<T>,
    default: T,
    name: &str,
    applied: &mut Vec<String>,
) -> T {
    match value {
        Some(v) => v,
        None => {
            applied.push(name.to_string());
            default
        }
    }
}

fn parse_include(names: &[String]) -> Result<TermSet, ConfigError> {
    let mut set = TermSet::NONE;
    for name in names {
        match name.as_str() {
            "XP" => set.xp = true,
            "XS" => set.xs = true,
            "PS" => set.ps = true,
            other => {
                return Err(ConfigError::Validation(format!(
                    "sweep.include entry '{other}' is not one of XP, XS, PS"
                )))
            }
        }
    }
    Ok(set)
}

/// Parse and validate a configuration file; `{}` yields the full default run.
pub fn parse_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// Same as [`parse_config`] on an in-memory JSON document.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    resolve_config(raw)
}

fn resolve_config(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let mut applied = Vec::new();
    let d = DeviceInputs::default();
    let device = DeviceInputs {
        josephson_energy_j: resolve(
            raw.device.josephson_energy_j,
            d.josephson_energy_j,
            "device.josephson_energy_J",
            &mut applied,
        ),
        capacitance_f: resolve(
            raw.device.capacitance_f,
            d.capacitance_f,
            "device.capacitance_F",
            &mut applied,
        ),
        inductance_h: resolve(
            raw.device.inductance_h,
            d.inductance_h,
            "device.inductance_H",
            &mut applied,
        ),
        damping_rate_ratio: resolve(
            raw.device.damping_rate_ratio,
            d.damping_rate_ratio,
            "device.damping_rate_ratio",
            &mut applied,
        ),
        cutoff_ratio: resolve(
            raw.device.cutoff_ratio,
            d.cutoff_ratio,
            "device.cutoff_ratio",
            &mut applied,
        ),
        coupling_ratio: resolve(
            raw.device.coupling_ratio,
            d.coupling_ratio,
            "device.coupling_ratio",
            &mut applied,
        ),
        external_flux_fraction: resolve(
            raw.device.external_flux_fraction,
            d.external_flux_fraction,
            "device.external_flux_fraction",
            &mut applied,
        ),
    };
    if !(device.capacitance_f > 0.0) {
        return Err(ConfigError::Validation("capacitance_F must be > 0".into()));
    }
    if !(device.inductance_h > 0.0) {
        return Err(ConfigError::Validation("inductance_H must be > 0".into()));
    }
    if !(device.josephson_energy_j >= 0.0) {
        return Err(ConfigError::Validation(
            "josephson_energy_J must be >= 0".into(),
        ));
    }
    if !(device.damping_rate_ratio >= 0.0) {
        return Err(ConfigError::Validation(
            "damping_rate_ratio must be >= 0".into(),
        ));
    }
    if !(device.cutoff_ratio > 0.0) {
        return Err(ConfigError::Validation("cutoff_ratio must be > 0".into()));
    }

    let dim = resolve(raw.space.dim, 128, "space.dim", &mut applied);
    let pad = resolve(raw.space.pad, 32, "space.pad", &mut applied);
    let space = FockSpace::new(dim, pad)
        .map_err(|e| ConfigError::Validation(format!("space.dim: {e}")))?;

    let phi_min = resolve(raw.sweep.phi_min, 0.0, "sweep.phi_min", &mut applied);
    let phi_max = resolve(raw.sweep.phi_max, 1.0, "sweep.phi_max", &mut applied);
    let phi_count = resolve(raw.sweep.phi_count, 101, "sweep.phi_count", &mut applied);
    if phi_count == 0 {
        return Err(ConfigError::Validation("sweep.phi_count must be >= 1".into()));
    }
    if phi_count > 1 && !(phi_min < phi_max) {
        return Err(ConfigError::Validation(
            "sweep.phi_min must be < sweep.phi_max".into(),
        ));
    }
    let phi_grid = linspace(phi_min, phi_max, phi_count);

    let g_grid = match (&raw.sweep.g, raw.sweep.g_min, raw.sweep.g_max, raw.sweep.g_count) {
        (Some(values), None, None, None) => {
            if values.is_empty() {
                return Err(ConfigError::Validation("sweep.g must be non-empty".into()));
            }
            if !values.windows(2).all(|w| w[0] < w[1]) {
                return Err(ConfigError::Validation(
                    "sweep.g must be strictly increasing".into(),
                ));
            }
            values.clone()
        }
        (None, Some(lo), Some(hi), Some(count)) => {
            if count == 0 {
                return Err(ConfigError::Validation("sweep.g_count must be >= 1".into()));
            }
            if count > 1 && !(lo < hi) {
                return Err(ConfigError::Validation(
                    "sweep.g_min must be < sweep.g_max".into(),
                ));
            }
            linspace(lo, hi, count)
        }
        (None, None, None, None) => {
            applied.push("sweep.g".into());
            vec![0.3, 1.0, 1.8, 3.0]
        }
        _ => {
            return Err(ConfigError::Validation(
                "specify either sweep.g or the full sweep.g_min/g_max/g_count triple".into(),
            ))
        }
    };

    let levels = resolve(raw.sweep.levels, 5, "sweep.levels", &mut applied);
    if levels == 0 || levels > space.dim {
        return Err(ConfigError::Validation(format!(
            "sweep.levels must be in [1, {}]",
            space.dim
        )));
    }
    let include = match &raw.sweep.include {
        Some(names) => parse_include(names)?,
        None => {
            applied.push("sweep.include".into());
            TermSet::ALL
        }
    };
    let fd_step = resolve(raw.sweep.fd_step, 1.0 / 400.0, "sweep.fd_step", &mut applied);
    if !(fd_step > 0.0 && fd_step <= squidsim::spectroscopy::MAX_FD_STEP) {
        return Err(ConfigError::Validation(format!(
            "sweep.fd_step must be in (0, {}]",
            squidsim::spectroscopy::MAX_FD_STEP
        )));
    }

    let dyn_dim = resolve(raw.dynamics.dim, 32, "dynamics.dim", &mut applied);
    let dyn_pad = resolve(raw.dynamics.pad, 8, "dynamics.pad", &mut applied);
    let dyn_space = FockSpace::new(dyn_dim, dyn_pad)
        .map_err(|e| ConfigError::Validation(format!("dynamics.dim: {e}")))?;
    let dt = resolve(raw.dynamics.dt, 1e-3, "dynamics.dt", &mut applied);
    if !(dt > 0.0) {
        return Err(ConfigError::Validation("dynamics.dt must be > 0".into()));
    }
    let steps = resolve(raw.dynamics.steps, 10_000, "dynamics.steps", &mut applied);
    if steps == 0 {
        return Err(ConfigError::Validation("dynamics.steps must be >= 1".into()));
    }
    let stride = resolve(raw.dynamics.stride, 100, "dynamics.stride", &mut applied);
    let initial_state = match raw.dynamics.initial_state {
        Some(RawInitialState::Ground) => InitialState::Ground,
        Some(RawInitialState::Fock { n }) => InitialState::Fock(n),
        Some(RawInitialState::Coherent { alpha_re, alpha_im }) => {
            InitialState::Coherent(Complex64::new(alpha_re, alpha_im))
        }
        None => {
            applied.push("dynamics.initial_state".into());
            InitialState::Coherent(Complex64::new(1.0, 0.0))
        }
    };
    let snapshots = resolve(raw.dynamics.snapshots, false, "dynamics.snapshots", &mut applied);

    let directory = match raw.output.directory {
        Some(d) => PathBuf::from(d),
        None => {
            applied.push("output.directory".into());
            PathBuf::from("out")
        }
    };
    let prefix = match raw.output.prefix {
        Some(p) => p,
        None => {
            applied.push("output.prefix".into());
            String::new()
        }
    };

    Ok(RunConfig {
        device,
        space,
        sweep: SweepSettings {
            phi_grid,
            g_grid,
            levels,
            include,
            fd_step,
        },
        dynamics: DynamicsSettings {
            space: dyn_space,
            dt,
            steps,
            stride,
            initial_state,
            snapshots,
        },
        output: OutputSettings { directory, prefix },
        defaults_applied: applied,
    })
}
