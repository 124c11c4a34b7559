//! Flux/coupling spectroscopy: energy-level sweeps, the eight-branch
//! term-contribution table, ground-state magnetic susceptibility, and
//! basis-convergence audits.
//!
//! Grid points are independent work items evaluated in parallel; results are
//! merged by index so the emitted CSV is byte-identical across runs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eig;
use crate::master::{g_range_check, GRange};
use crate::model::{derive_params, DeviceInputs, ModelBuilder, PhysicalConstants, TermSet};
use crate::operators::FockSpace;

/// Largest admissible finite-difference step in `phi`.
pub const MAX_FD_STEP: f64 = 0.05;
/// Richardson error above this fraction of |chi0| flags the step as too large.
pub const FD_STEP_FLAG_FRACTION: f64 = 0.05;

/// Sweep request: flux and coupling grids, how many levels, which correction
/// terms, and the working space.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub phi_grid: Vec<f64>,
    pub g_grid: Vec<f64>,
    pub levels: usize,
    pub include: TermSet,
    pub space: FockSpace,
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput(format!("{name} grid is empty")));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_grid("phi", &self.phi_grid)?;
        check_grid("g", &self.g_grid)?;
        if self.levels == 0 {
            return Err(Error::InvalidInput("levels must be >= 1".into()));
        }
        if self.levels > self.space.dim {
            return Err(Error::InvalidInput(format!(
                "levels {} exceeds basis dimension {}",
                self.levels, self.space.dim
            )));
        }
        Ok(())
    }
}

/// Run identification embedded in every CSV header.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub device: DeviceInputs,
    pub space: FockSpace,
    pub code_version: &'static str,
}

impl RunInfo {
    fn new(device: &DeviceInputs, space: FockSpace) -> Self {
        Self {
            device: *device,
            space,
            code_version: env!("CARGO_PKG_VERSION"),
        }
    }

    fn write_comments(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "# code_version={}", self.code_version)?;
        writeln!(out, "# dim={} pad={}", self.space.dim, self.space.pad)?;
        writeln!(
            out,
            "# josephson_energy_J={:e} capacitance_F={:e} inductance_H={:e}",
            self.device.josephson_energy_j, self.device.capacitance_f, self.device.inductance_h
        )?;
        writeln!(
            out,
            "# damping_rate_ratio={:e} cutoff_ratio={:e}",
            self.device.damping_rate_ratio, self.device.cutoff_ratio
        )
    }
}

/// One (phi, g, level) energy sample, energy in `hbar omega0`.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub phi: f64,
    pub g: f64,
    pub level: usize,
    pub energy: f64,
}

/// A grid point whose eigensolve failed; the sweep continues past it.
#[derive(Debug, Clone)]
pub struct PointFailure {
    pub phi: f64,
    pub g: f64,
    pub message: String,
}

/// Tabulated lowest-k eigenvalues over the (phi, g) grid.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<PointFailure>,
    pub include: TermSet,
    pub levels: usize,
    pub info: RunInfo,
    /// Grid couplings outside the completion window (informational).
    pub g_range_warnings: Vec<f64>,
}

impl SweepResult {
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        self.info.write_comments(out)?;
        writeln!(out, "# include={}", self.include.label())?;
        writeln!(out, "# levels={}", self.levels)?;
        for f in &self.failures {
            writeln!(out, "# failed phi={:e} g={:e}: {}", f.phi, f.g, f.message)?;
        }
        writeln!(out, "phi,g,level,energy")?;
        for r in &self.rows {
            writeln!(out, "{:e},{:e},{},{:e}", r.phi, r.g, r.level, r.energy)?;
        }
        Ok(())
    }
}

/// Lowest-`levels` eigenvalues of the effective Hamiltonian over the grid.
///
/// Deterministic row order: phi outer, g inner, level innermost. Per-point
/// eigensolver failures are recorded in `failures` without aborting.
pub fn spectrum_sweep(spec: &SweepSpec, inputs: &DeviceInputs) -> Result<SweepResult> {
    spec.validate()?;
    let base = derive_params(inputs, &PhysicalConstants::default())?;
    let builder = ModelBuilder::new(spec.space)?;
    let points: Vec<(f64, f64)> = spec
        .phi_grid
        .iter()
        .flat_map(|&phi| spec.g_grid.iter().map(move |&g| (phi, g)))
        .collect();
    let outcomes: Vec<std::result::Result<Vec<f64>, String>> = points
        .par_iter()
        .map(|&(phi, g)| {
            let params = base.with_phi(phi).with_g(g);
            builder
                .effective_hamiltonian(&params, spec.include)
                .and_then(|h| hermitian_eig(&h))
                .map(|eig| eig.values[..spec.levels].to_vec())
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut rows = Vec::with_capacity(points.len() * spec.levels);
    let mut failures = Vec::new();
    for ((phi, g), outcome) in points.into_iter().zip(outcomes) {
        match outcome {
            Ok(values) => {
                for (level, energy) in values.into_iter().enumerate() {
                    rows.push(SweepRow {
                        phi,
                        g,
                        level,
                        energy,
                    });
                }
            }
            Err(message) => failures.push(PointFailure { phi, g, message }),
        }
    }
    let g_range_warnings = spec
        .g_grid
        .iter()
        .copied()
        .filter(|&g| g_range_check(g) == GRange::Outside)
        .collect();
    Ok(SweepResult {
        rows,
        failures,
        include: spec.include,
        levels: spec.levels,
        info: RunInfo::new(inputs, spec.space),
        g_range_warnings,
    })
}

/// The eight include-sets in the axis order of the reference table.
pub const SPIDERWEB_ORDER: [TermSet; 8] = [
    TermSet::ALL,
    TermSet::NONE,
    TermSet::XS,
    TermSet::XP,
    TermSet::PS,
    TermSet {
        xp: true,
        xs: true,
        ps: false,
    },
    TermSet {
        xp: true,
        xs: false,
        ps: true,
    },
    TermSet {
        xp: false,
        xs: true,
        ps: true,
    },
];

/// Lowest eigenvalue for one include-set.
#[derive(Debug, Clone)]
pub struct SpiderwebRow {
    pub axis: usize,
    pub include: TermSet,
    pub energy: f64,
}

/// Ground-state energies of the eight term combinations, plus the pairwise
/// non-additivity residuals `E(A+B) + E(0) - E(A) - E(B)`.
#[derive(Debug, Clone)]
pub struct SpiderwebResult {
    pub rows: Vec<SpiderwebRow>,
    pub residual_xp_xs: f64,
    pub residual_xp_ps: f64,
    pub residual_ps_xs: f64,
    pub info: RunInfo,
}

impl SpiderwebResult {
    pub fn energy(&self, include: TermSet) -> f64 {
        self.rows
            .iter()
            .find(|r| r.include == include)
            .map(|r| r.energy)
            .expect("all eight include-sets present")
    }

    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        self.info.write_comments(out)?;
        writeln!(out, "# nonadditivity_XP_XS={:e}", self.residual_xp_xs)?;
        writeln!(out, "# nonadditivity_XP_PS={:e}", self.residual_xp_ps)?;
        writeln!(out, "# nonadditivity_PS_XS={:e}", self.residual_ps_xs)?;
        writeln!(out, "axis,include,energy")?;
        for r in &self.rows {
            writeln!(out, "{},{},{:e}", r.axis, r.include.label(), r.energy)?;
        }
        Ok(())
    }
}

/// Lowest eigenvalue of `H_S` plus every combination of correction terms at
/// the device's own flux and coupling.
pub fn spiderweb(inputs: &DeviceInputs, space: FockSpace) -> Result<SpiderwebResult> {
    let params = derive_params(inputs, &PhysicalConstants::default())?;
    let builder = ModelBuilder::new(space)?;
    let energies: Vec<Result<f64>> = SPIDERWEB_ORDER
        .par_iter()
        .map(|&include| {
            let h = builder.effective_hamiltonian(&params, include)?;
            Ok(hermitian_eig(&h)?.values[0])
        })
        .collect();
    let mut rows = Vec::with_capacity(8);
    for (idx, (include, energy)) in SPIDERWEB_ORDER.iter().zip(energies).enumerate() {
        rows.push(SpiderwebRow {
            axis: idx + 1,
            include: *include,
            energy: energy?,
        });
    }
    let result = |a: TermSet, b: TermSet| {
        let e0 = rows[1].energy;
        let ea = rows.iter().find(|r| r.include == a).unwrap().energy;
        let eb = rows.iter().find(|r| r.include == b).unwrap().energy;
        let eab = rows
            .iter()
            .find(|r| r.include == a.union(b))
            .unwrap()
            .energy;
        eab + e0 - ea - eb
    };
    Ok(SpiderwebResult {
        residual_xp_xs: result(TermSet::XP, TermSet::XS),
        residual_xp_ps: result(TermSet::XP, TermSet::PS),
        residual_ps_xs: result(TermSet::PS, TermSet::XS),
        rows,
        info: RunInfo::new(inputs, space),
    })
}

/// One susceptibility sample.
#[derive(Debug, Clone, Copy)]
pub struct SusceptibilityRow {
    pub phi: f64,
    pub g: f64,
    /// Dimensionless `chi0 = -chi_scale d^2 e0 / d phi^2`.
    pub chi0: f64,
    /// `chi0 / L` in 1/H.
    pub chi0_per_inductance: f64,
    pub fd_step: f64,
    /// Step-halving Richardson estimate of the FD error in `chi0`.
    pub richardson_error: f64,
    /// Relative change of the second derivative under h -> h/2.
    pub step_halving_change: f64,
    /// Set when `richardson_error > 5%` of `|chi0|` (step too large for this
    /// point; near the half-flux degeneracy the curvature is genuinely
    /// singular and no step resolves it).
    pub step_too_large: bool,
}

/// Ground-state susceptibility over a (phi, g) grid.
#[derive(Debug, Clone)]
pub struct SusceptibilityResult {
    pub rows: Vec<SusceptibilityRow>,
    pub fd_step: f64,
    pub info: RunInfo,
}

impl SusceptibilityResult {
    pub fn flagged_points(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.step_too_large)
            .map(|r| (r.phi, r.g))
            .collect()
    }

    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        self.info.write_comments(out)?;
        writeln!(out, "# fd_step={:e}", self.fd_step)?;
        writeln!(
            out,
            "phi,g,chi0,chi0_per_L_invH,fd_step,richardson_error,step_too_large"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e},{}",
                r.phi,
                r.g,
                r.chi0,
                r.chi0_per_inductance,
                r.fd_step,
                r.richardson_error,
                r.step_too_large
            )?;
        }
        Ok(())
    }
}

/// `chi0(phi, g) = -chi_scale d^2 e0/d phi^2` by central differences with
/// step `h`, with a step-halving Richardson error estimate per point.
///
/// The reported `chi0` uses the finer (h/2) difference; the error estimate is
/// `|d2(h) - d2(h/2)|/3` scaled by `chi_scale`.
pub fn susceptibility(
    inputs: &DeviceInputs,
    phi_grid: &[f64],
    g_grid: &[f64],
    fd_step: f64,
    space: FockSpace,
) -> Result<SusceptibilityResult> {
    check_grid("phi", phi_grid)?;
    check_grid("g", g_grid)?;
    if !(fd_step > 0.0 && fd_step <= MAX_FD_STEP) {
        return Err(Error::InvalidInput(format!(
            "fd_step must be in (0, {MAX_FD_STEP}], got {fd_step}"
        )));
    }
    let base = derive_params(inputs, &PhysicalConstants::default())?;
    let builder = ModelBuilder::new(space)?;
    let points: Vec<(f64, f64)> = phi_grid
        .iter()
        .flat_map(|&phi| g_grid.iter().map(move |&g| (phi, g)))
        .collect();
    let rows: Vec<Result<SusceptibilityRow>> = points
        .par_iter()
        .map(|&(phi, g)| {
            let e0 = |at: f64| -> Result<f64> {
                let params = base.with_phi(at).with_g(g);
                let h = builder.effective_hamiltonian(&params, TermSet::ALL)?;
                Ok(hermitian_eig(&h)?.values[0])
            };
            let center = e0(phi)?;
            let h = fd_step;
            let d2_h = (e0(phi + h)? - 2.0 * center + e0(phi - h)?) / (h * h);
            let h2 = 0.5 * h;
            let d2_h2 = (e0(phi + h2)? - 2.0 * center + e0(phi - h2)?) / (h2 * h2);
            let chi0 = -base.chi_scale * d2_h2;
            let richardson_error = base.chi_scale * (d2_h - d2_h2).abs() / 3.0;
            let step_halving_change =
                (d2_h - d2_h2).abs() / d2_h2.abs().max(f64::MIN_POSITIVE);
            Ok(SusceptibilityRow {
                phi,
                g,
                chi0,
                chi0_per_inductance: chi0 / inputs.inductance_h,
                fd_step,
                richardson_error,
                step_halving_change,
                step_too_large: richardson_error > FD_STEP_FLAG_FRACTION * chi0.abs(),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SusceptibilityResult {
        rows,
        fd_step,
        info: RunInfo::new(inputs, space),
    })
}

/// Lowest-5 eigenvalues at one grid point for a ladder of truncations.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub dim: usize,
    pub lowest: [f64; 5],
    /// `|E0(dim) - E0(previous dim)|`; `None` for the first row.
    pub delta_e0: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceAudit {
    pub phi: f64,
    pub g: f64,
    pub pad: usize,
    pub rows: Vec<ConvergenceRow>,
    pub info: RunInfo,
}

impl ConvergenceAudit {
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        self.info.write_comments(out)?;
        writeln!(out, "# phi={:e} g={:e} pad={}", self.phi, self.g, self.pad)?;
        writeln!(out, "dim,e0,e1,e2,e3,e4,delta_e0")?;
        for r in &self.rows {
            write!(out, "{}", r.dim)?;
            for e in r.lowest {
                write!(out, ",{:e}", e)?;
            }
            match r.delta_e0 {
                Some(d) => writeln!(out, ",{:e}", d)?,
                None => writeln!(out, ",")?,
            }
        }
        Ok(())
    }
}

/// Lowest-5 eigenvalues per truncation size plus successive ground-level
/// deltas; `pad` is held fixed across sizes.
pub fn convergence_audit(
    inputs: &DeviceInputs,
    dims: &[usize],
    pad: usize,
    phi: f64,
    g: f64,
) -> Result<ConvergenceAudit> {
    if dims.is_empty() || !dims.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput(
            "dimension list must be non-empty and ascending".into(),
        ));
    }
    let base = derive_params(inputs, &PhysicalConstants::default())?;
    let params = base.with_phi(phi).with_g(g);
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(dims.len());
    for &dim in dims {
        let space = FockSpace::new(dim, pad)?;
        let h = ModelBuilder::new(space)?.effective_hamiltonian(&params, TermSet::ALL)?;
        let eig = hermitian_eig(&h)?;
        let mut lowest = [0.0; 5];
        for (slot, value) in lowest.iter_mut().zip(&eig.values) {
            *slot = *value;
        }
        let delta_e0 = rows.last().map(|prev| (lowest[0] - prev.lowest[0]).abs());
        rows.push(ConvergenceRow {
            dim,
            lowest,
            delta_e0,
        });
    }
    Ok(ConvergenceAudit {
        phi,
        g,
        pad,
        rows,
        info: RunInfo::new(inputs, FockSpace::new(dims[dims.len() - 1], pad)?),
    })
}

/// Evenly spaced grid helper: `count` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}
