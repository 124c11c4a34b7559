//! Machine-readable run manifest.
//!
//! One JSON document per run: the resolved configuration (with every applied
//! default named), derived model parameters, warnings, and a SHA-256 checksum
//! for each emitted file. Written atomically next to the outputs. With
//! `--seedless` the timestamps are omitted so repeated runs are byte-identical.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use squidsim::model::SquidParams;

use crate::config::RunConfig;

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let data = std::fs::read(path)?;
    Ok(hex(&Sha256::digest(&data)))
}

fn config_echo(cfg: &RunConfig) -> Value {
    json!({
        "device": {
            "josephson_energy_J": cfg.device.josephson_energy_j,
            "capacitance_F": cfg.device.capacitance_f,
            "inductance_H": cfg.device.inductance_h,
            "damping_rate_ratio": cfg.device.damping_rate_ratio,
            "cutoff_ratio": cfg.device.cutoff_ratio,
            "coupling_ratio": cfg.device.coupling_ratio,
            "external_flux_fraction": cfg.device.external_flux_fraction,
        },
        "space": {"dim": cfg.space.dim, "pad": cfg.space.pad},
        "sweep": {
            "phi_grid_len": cfg.sweep.phi_grid.len(),
            "phi_min": cfg.sweep.phi_grid.first(),
            "phi_max": cfg.sweep.phi_grid.last(),
            "g": cfg.sweep.g_grid,
            "levels": cfg.sweep.levels,
            "include": cfg.sweep.include.label(),
            "fd_step": cfg.sweep.fd_step,
        },
        "dynamics": {
            "dim": cfg.dynamics.space.dim,
            "pad": cfg.dynamics.space.pad,
            "dt": cfg.dynamics.dt,
            "steps": cfg.dynamics.steps,
            "stride": cfg.dynamics.stride,
            "snapshots": cfg.dynamics.snapshots,
        },
        "output": {
            "directory": cfg.output.directory.display().to_string(),
            "prefix": cfg.output.prefix,
        },
    })
}

fn params_echo(params: &SquidParams) -> Value {
    json!({
        "omega0_rad_per_s": params.omega0,
        "nu_ratio": params.nu_ratio,
        "s": params.s,
        "xi": params.xi,
        "gamma_ratio": params.gamma_ratio,
        "g": params.g,
        "phi": params.phi,
        "chi_scale": params.chi_scale,
        "sine_weight": params.sine_weight(),
    })
}

/// Assemble and atomically write `<prefix>manifest.json`.
///
/// `status` is `"ok"` or an error description; `files` are checksummed as
/// they exist on disk at call time.
#[allow(clippy::too_many_arguments)]
pub fn write_manifest(
    cfg: &RunConfig,
    params: Option<&SquidParams>,
    command: &str,
    status: &str,
    partial: bool,
    warnings: &[String],
    notes: Map<String, Value>,
    files: &[PathBuf],
    timestamps: Option<(String, String)>,
) -> std::io::Result<PathBuf> {
    let mut outputs = Vec::new();
    for f in files {
        let checksum = sha256_file(f)?;
        let name = f
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        outputs.push(json!({"file": name, "sha256": checksum}));
    }
    let mut doc = Map::new();
    doc.insert("code_version".into(), json!(env!("CARGO_PKG_VERSION")));
    doc.insert("command".into(), json!(command));
    doc.insert("status".into(), json!(status));
    doc.insert("partial_results".into(), json!(partial));
    if let Some((start, end)) = timestamps {
        doc.insert("started_utc".into(), json!(start));
        doc.insert("finished_utc".into(), json!(end));
    }
    doc.insert("config".into(), config_echo(cfg));
    doc.insert("defaults_applied".into(), json!(cfg.defaults_applied));
    if let Some(p) = params {
        doc.insert("derived_params".into(), params_echo(p));
    }
    doc.insert("warnings".into(), json!(warnings));
    if !notes.is_empty() {
        doc.insert("notes".into(), Value::Object(notes));
    }
    doc.insert("outputs".into(), json!(outputs));

    let path = cfg
        .output
        .directory
        .join(format!("{}manifest.json", cfg.output.prefix));
    let tmp = path.with_extension("json.tmp");
    let mut text = serde_json::to_string_pretty(&Value::Object(doc))?;
    text.push('\n');
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}
