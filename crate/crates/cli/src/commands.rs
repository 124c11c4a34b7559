//! One function per subcommand. Each writes its CSV outputs and returns the
//! files, warnings and manifest notes; numerical failures bubble up as
//! `squidsim::Error`.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use serde_json::{json, Map, Value};
use squidsim::dynamics::{evolve, initial_state, InitialState};
use squidsim::master::{
    bm_rhs, coefficient_matrix, extract_lindblads, lindblad_rhs, GRange, OperatorBasis,
};
use squidsim::model::{derive_params, ModelBuilder, PhysicalConstants, TermSet};
use squidsim::spectroscopy::{spectrum_sweep, spiderweb, susceptibility, SweepSpec};
use squidsim::Result;

use crate::config::RunConfig;

/// What a command produced, for the manifest.
#[derive(Debug, Default)]
pub struct CommandOutcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub notes: Map<String, Value>,
    /// Some grid points failed; outputs are usable but incomplete.
    pub partial: bool,
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output
        .directory
        .join(format!("{}{}", cfg.output.prefix, name))
}

fn create(cfg: &RunConfig, name: &str) -> std::io::Result<(PathBuf, BufWriter<File>)> {
    let path = out_path(cfg, name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<CommandOutcome> {
    let spec = SweepSpec {
        phi_grid: cfg.sweep.phi_grid.clone(),
        g_grid: cfg.sweep.g_grid.clone(),
        levels: cfg.sweep.levels,
        include: cfg.sweep.include,
        space: cfg.space,
    };
    let result = spectrum_sweep(&spec, &cfg.device)?;
    let mut outcome = CommandOutcome::default();
    let (path, mut writer) = create(cfg, "spectrum.csv").map_err(io_err)?;
    result.write_csv(&mut writer).map_err(io_err)?;
    outcome.files.push(path);
    for g in &result.g_range_warnings {
        outcome.warnings.push(format!(
            "coupling ratio g={g} outside the completion window [0.227, 4.40]"
        ));
    }
    for f in &result.failures {
        outcome
            .warnings
            .push(format!("point phi={} g={} failed: {}", f.phi, f.g, f.message));
    }
    outcome.partial = !result.failures.is_empty();
    outcome
        .notes
        .insert("rows".into(), json!(result.rows.len()));
    Ok(outcome)
}

pub fn cmd_spiderweb(cfg: &RunConfig) -> Result<CommandOutcome> {
    let result = spiderweb(&cfg.device, cfg.space)?;
    let mut outcome = CommandOutcome::default();
    let (path, mut writer) = create(cfg, "spiderweb.csv").map_err(io_err)?;
    result.write_csv(&mut writer).map_err(io_err)?;
    outcome.files.push(path);
    outcome.notes.insert(
        "nonadditivity_residuals".into(),
        json!({
            "XP_XS": result.residual_xp_xs,
            "XP_PS": result.residual_xp_ps,
            "PS_XS": result.residual_ps_xs,
        }),
    );
    Ok(outcome)
}

pub fn cmd_susceptibility(cfg: &RunConfig) -> Result<CommandOutcome> {
    let result = susceptibility(
        &cfg.device,
        &cfg.sweep.phi_grid,
        &cfg.sweep.g_grid,
        cfg.sweep.fd_step,
        cfg.space,
    )?;
    let mut outcome = CommandOutcome::default();
    let (path, mut writer) = create(cfg, "susceptibility.csv").map_err(io_err)?;
    result.write_csv(&mut writer).map_err(io_err)?;
    outcome.files.push(path);
    let flagged = result.flagged_points();
    if !flagged.is_empty() {
        outcome.warnings.push(format!(
            "fd step too large for {} point(s) (Richardson estimate > 5% of |chi0|): {:?}",
            flagged.len(),
            flagged
        ));
    }
    Ok(outcome)
}

pub fn cmd_lindblads(cfg: &RunConfig) -> Result<CommandOutcome> {
    let base = derive_params(&cfg.device, &PhysicalConstants::default())?;
    let builder = ModelBuilder::new(cfg.space)?;
    let mut outcome = CommandOutcome::default();
    let (path, mut writer) = create(cfg, "lindblads.csv").map_err(io_err)?;
    use std::io::Write;
    writeln!(
        writer,
        "g,xi,eig1,eig2,eig3,a_ss,cX_re,cX_im,cP_re,cP_im,cS_re,cS_im"
    )
    .map_err(io_err)?;
    let mut completions = Vec::new();
    for &g in &cfg.sweep.g_grid {
        let params = base.with_g(g);
        let matrix = coefficient_matrix(&params, true)?;
        if matrix.g_range == GRange::Outside {
            outcome.warnings.push(format!(
                "g={g} outside the completion window [0.227, 4.40]"
            ));
        }
        completions.push(json!({
            "g": g,
            "completed": matrix.completed,
            "a_ss": matrix.a_ss,
            "min_eigenvalue": matrix.min_eigenvalue,
            "closed_form_a_ss": matrix.closed_form_a_ss,
            "closed_form_discrepancy": matrix.closed_form_discrepancy,
        }));
        if !matrix.completed {
            outcome.warnings.push(format!(
                "completion failed at g={g}: min eigenvalue {:.3e}",
                matrix.min_eigenvalue
            ));
            continue;
        }
        let ops = OperatorBasis::build(&builder, &params);
        let set = extract_lindblads(&matrix, &ops)?;
        for term in &set.items {
            writeln!(
                writer,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                g,
                params.xi,
                matrix.eigenvalues[0],
                matrix.eigenvalues[1],
                matrix.eigenvalues[2],
                matrix.a_ss,
                term.coeffs[0].re,
                term.coeffs[0].im,
                term.coeffs[1].re,
                term.coeffs[1].im,
                term.coeffs[2].re,
                term.coeffs[2].im
            )
            .map_err(io_err)?;
        }
    }
    drop(writer);
    outcome.files.push(path);
    outcome
        .notes
        .insert("completions".into(), Value::Array(completions));
    Ok(outcome)
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<CommandOutcome> {
    let params = derive_params(&cfg.device, &PhysicalConstants::default())?;
    let space = cfg.dynamics.space;
    let builder = ModelBuilder::new(space)?;
    let ops = OperatorBasis::build(&builder, &params);
    let h_s = builder.system_hamiltonian(&params);
    let h_eff = builder.effective_hamiltonian(&params, TermSet::ALL)?;
    let matrix = coefficient_matrix(&params, true)?;
    let mut outcome = CommandOutcome::default();
    if !matrix.completed {
        outcome.warnings.push(format!(
            "completion failed at g={}: min eigenvalue {:.3e}; Lindblad run skipped",
            params.g, matrix.min_eigenvalue
        ));
    }
    let rho0 = initial_state(
        cfg.dynamics.initial_state,
        space,
        match cfg.dynamics.initial_state {
            InitialState::Ground => Some(&h_eff),
            _ => None,
        },
    )?;

    let bm = evolve(
        &rho0,
        |r| bm_rhs(r, &params, &ops, &h_s),
        cfg.dynamics.dt,
        cfg.dynamics.steps,
        cfg.dynamics.stride,
        Some(&h_s),
    )?;
    let (path, mut writer) = create(cfg, "trajectory_bm.csv").map_err(io_err)?;
    bm.write_monitor_csv(&mut writer).map_err(io_err)?;
    outcome.files.push(path);
    if bm.stability_warning {
        outcome
            .warnings
            .push("Born-Markov trajectory trace deviation exceeded 1e-6".into());
    }
    outcome.notes.insert(
        "bm_min_eigenvalue".into(),
        json!(bm.lowest_min_eigenvalue()),
    );
    outcome.notes.insert(
        "bm_dips_below_minus_1e-4".into(),
        json!(bm.lowest_min_eigenvalue() < -1e-4),
    );
    if cfg.dynamics.snapshots {
        let (spath, mut swriter) = create(cfg, "snapshots_bm.csv").map_err(io_err)?;
        bm.write_snapshot_dump(&mut swriter).map_err(io_err)?;
        outcome.files.push(spath);
    }

    if matrix.completed {
        let lindblads = extract_lindblads(&matrix, &ops)?;
        let lind = evolve(
            &rho0,
            |r| lindblad_rhs(r, &h_eff, &lindblads),
            cfg.dynamics.dt,
            cfg.dynamics.steps,
            cfg.dynamics.stride,
            Some(&h_eff),
        )?;
        let (path, mut writer) = create(cfg, "trajectory_lindblad.csv").map_err(io_err)?;
        lind.write_monitor_csv(&mut writer).map_err(io_err)?;
        outcome.files.push(path);
        if lind.stability_warning {
            outcome
                .warnings
                .push("Lindblad trajectory trace deviation exceeded 1e-6".into());
        }
        outcome.notes.insert(
            "lindblad_min_eigenvalue".into(),
            json!(lind.lowest_min_eigenvalue()),
        );
        outcome.notes.insert(
            "lindblad_stays_above_minus_1e-6".into(),
            json!(lind.lowest_min_eigenvalue() >= -1e-6),
        );
        if cfg.dynamics.snapshots {
            let (spath, mut swriter) = create(cfg, "snapshots_lindblad.csv").map_err(io_err)?;
            lind.write_snapshot_dump(&mut swriter).map_err(io_err)?;
            outcome.files.push(spath);
        }
    }
    Ok(outcome)
}

fn io_err(e: std::io::Error) -> squidsim::Error {
    squidsim::Error::InvalidInput(format!("i/o failure: {e}"))
}
