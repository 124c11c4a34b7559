//! Fixed-step density-matrix evolution with invariant monitors.
//!
//! Classical RK4 on either master-equation right-hand side. The integrator
//! re-symmetrizes the state every step via `(rho + rho^dag)/2` and records
//! the Hermiticity defect *before* the repair; no positivity projection is
//! ever applied, because negative eigenvalues along a Born-Markov trajectory
//! are data, not error. Stability heuristic: `dt <= 0.01 / max|eig(H)|`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator, frobenius_norm, hermitian_eig, hermitian_part, hermiticity_defect, matmul,
    trace, CMatrix,
};
use crate::master::{bm_rhs, coefficient_matrix, extract_lindblads, lindblad_rhs, OperatorBasis};
use crate::model::{ModelBuilder, SquidParams, TermSet};
use crate::operators::FockSpace;

/// Fraction of levels counted as the truncation edge by the basis check.
const EDGE_FRACTION: f64 = 0.1;
/// Maximum admissible weight on the truncation edge at construction.
const EDGE_WEIGHT_TOL: f64 = 1e-6;
/// Trace deviation that raises the stability warning.
const TRACE_WARN: f64 = 1e-6;
/// Frobenius norm beyond which the trajectory counts as diverged.
const DIVERGENCE_NORM: f64 = 10.0;

/// A validated density matrix: unit trace, Hermitian, positive within
/// tolerance at construction.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates trace (1e-10), Hermiticity (1e-12 relative) and spectrum
    /// (eigenvalues >= -1e-8).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let tr = trace(&matrix);
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "density matrix trace {} is not 1",
                tr
            )));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > 1e-12 * frobenius_norm(&matrix).max(1.0) {
            return Err(Error::NotHermitian {
                defect,
                tolerance: 1e-12 * frobenius_norm(&matrix).max(1.0),
            });
        }
        let eig = hermitian_eig(&matrix)?;
        if eig.values[0] < -1e-8 {
            return Err(Error::InvalidInput(format!(
                "density matrix has eigenvalue {} < -1e-8",
                eig.values[0]
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

/// Requested initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// Lowest eigenvector of a supplied Hamiltonian.
    Ground,
    /// Number state `|n>`.
    Fock(usize),
    /// Coherent state with amplitude `alpha` (truncated, renormalized).
    Coherent(Complex64),
}

fn edge_cut(dim: usize) -> usize {
    dim - ((dim as f64 * EDGE_FRACTION).ceil() as usize).max(1)
}

fn check_in_basis(amplitudes_sq: &[f64]) -> Result<()> {
    let dim = amplitudes_sq.len();
    let weight: f64 = amplitudes_sq[edge_cut(dim)..].iter().sum();
    if weight > EDGE_WEIGHT_TOL {
        return Err(Error::OutOfBasis { weight });
    }
    Ok(())
}

fn pure_density(amplitudes: &[Complex64]) -> CMatrix {
    let n = amplitudes.len();
    let mut rho = CMatrix::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            rho[[i, j]] = amplitudes[i] * amplitudes[j].conj();
        }
    }
    rho
}

/// Build a pure initial density matrix of the requested kind.
///
/// `Ground` needs the Hamiltonian whose ground state is wanted; the other
/// kinds only need the space. States concentrated in the top 10% of levels
/// are rejected as out of basis.
pub fn initial_state(
    kind: InitialState,
    space: FockSpace,
    hamiltonian: Option<&CMatrix>,
) -> Result<DensityMatrix> {
    let dim = space.dim;
    let amplitudes: Vec<Complex64> = match kind {
        InitialState::Ground => {
            let h = hamiltonian.ok_or_else(|| {
                Error::InvalidInput("ground state requires a Hamiltonian".into())
            })?;
            let eig = hermitian_eig(h)?;
            (0..dim).map(|i| eig.vectors[[i, 0]]).collect()
        }
        InitialState::Fock(n) => {
            if n >= dim {
                return Err(Error::InvalidInput(format!(
                    "Fock level {n} outside basis of dimension {dim}"
                )));
            }
            (0..dim)
                .map(|i| {
                    if i == n {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        }
        InitialState::Coherent(alpha) => {
            let mut amps = Vec::with_capacity(dim);
            let mut term = Complex64::new(1.0, 0.0); // alpha^k / sqrt(k!)
            amps.push(term);
            for k in 1..dim {
                term *= alpha / (k as f64).sqrt();
                amps.push(term);
            }
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.into_iter().map(|a| a / norm).collect()
        }
    };
    let probs: Vec<f64> = amplitudes.iter().map(|a| a.norm_sqr()).collect();
    check_in_basis(&probs)?;
    DensityMatrix::new(pure_density(&amplitudes))
}

/// Per-step invariant records plus strided snapshots of one integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Time after each step, units 1/omega0.
    pub times: Vec<f64>,
    /// |tr rho - 1| after each step.
    pub trace_deviation: Vec<f64>,
    /// Hermiticity defect before the per-step repair.
    pub hermiticity_defect: Vec<f64>,
    /// Smallest eigenvalue after each step.
    pub min_eigenvalue: Vec<f64>,
    /// `<H>` after each step; empty when no energy operator was supplied.
    pub energy: Vec<f64>,
    /// Times of the strided snapshots (starts with t = 0).
    pub snapshot_times: Vec<f64>,
    /// Snapshot states, same order as `snapshot_times`.
    pub snapshots: Vec<CMatrix>,
    /// Set when the trace deviation exceeded 1e-6 at any step.
    pub stability_warning: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> &CMatrix {
        self.snapshots.last().expect("trajectory holds >= 1 snapshot")
    }

    pub fn worst_trace_deviation(&self) -> f64 {
        self.trace_deviation.iter().cloned().fold(0.0, f64::max)
    }

    pub fn worst_hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect.iter().cloned().fold(0.0, f64::max)
    }

    pub fn lowest_min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Monitor rows as CSV: `t,trace_dev,herm_defect,min_eig,energy`.
    pub fn write_monitor_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "t,trace_dev,herm_defect,min_eig,energy")?;
        for (k, &t) in self.times.iter().enumerate() {
            let energy = self.energy.get(k).copied();
            match energy {
                Some(e) => writeln!(
                    out,
                    "{:e},{:e},{:e},{:e},{:e}",
                    t,
                    self.trace_deviation[k],
                    self.hermiticity_defect[k],
                    self.min_eigenvalue[k],
                    e
                )?,
                None => writeln!(
                    out,
                    "{:e},{:e},{:e},{:e},",
                    t, self.trace_deviation[k], self.hermiticity_defect[k], self.min_eigenvalue[k]
                )?,
            }
        }
        Ok(())
    }

    /// Snapshot dump: one header line `# snapshot t=<time> dim=<N> row-major re,im pairs`
    /// then `dim*dim` lines of `re,im`.
    pub fn write_snapshot_dump(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        for (t, state) in self.snapshot_times.iter().zip(&self.snapshots) {
            let n = state.nrows();
            writeln!(out, "# snapshot t={:e} dim={} row-major re,im pairs", t, n)?;
            for i in 0..n {
                for j in 0..n {
                    let z = state[[i, j]];
                    writeln!(out, "{:e},{:e}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Classical fixed-step RK4 integration of `d rho/dt = rhs(rho)`.
///
/// Monitors are recorded every step; snapshots every `snapshot_stride` steps
/// (0 keeps only the initial and final states). Fails with `Diverged` when
/// `||rho||_F` exceeds 10.
pub fn evolve<F>(
    rho0: &DensityMatrix,
    rhs: F,
    dt: f64,
    steps: usize,
    snapshot_stride: usize,
    energy_op: Option<&CMatrix>,
) -> Result<Trajectory>
where
    F: Fn(&CMatrix) -> Result<CMatrix>,
{
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be >= 1".into()));
    }
    let mut rho = rho0.matrix().clone();
    let n_mon = steps;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n_mon),
        trace_deviation: Vec::with_capacity(n_mon),
        hermiticity_defect: Vec::with_capacity(n_mon),
        min_eigenvalue: Vec::with_capacity(n_mon),
        energy: Vec::with_capacity(if energy_op.is_some() { n_mon } else { 0 }),
        snapshot_times: vec![0.0],
        snapshots: vec![rho.clone()],
        stability_warning: false,
    };
    let half = Complex64::new(0.5 * dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let full = Complex64::new(dt, 0.0);
    for step in 1..=steps {
        let k1 = rhs(&rho)?;
        let k2 = rhs(&(&rho + &(&k1 * half)))?;
        let k3 = rhs(&(&rho + &(&k2 * half)))?;
        let k4 = rhs(&(&rho + &(&k3 * full)))?;
        rho = &rho
            + &((k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
                * sixth);

        let defect = hermiticity_defect(&rho);
        rho = hermitian_part(&rho);

        let t = step as f64 * dt;
        let tr_dev = (trace(&rho) - Complex64::new(1.0, 0.0)).norm();
        let min_eig = hermitian_eig(&rho)?.values[0];
        traj.times.push(t);
        traj.trace_deviation.push(tr_dev);
        traj.hermiticity_defect.push(defect);
        traj.min_eigenvalue.push(min_eig);
        if let Some(h) = energy_op {
            traj.energy.push(trace(&matmul(h, &rho)).re);
        }
        if tr_dev > TRACE_WARN {
            traj.stability_warning = true;
        }
        let norm = frobenius_norm(&rho);
        if norm > DIVERGENCE_NORM {
            return Err(Error::Diverged { step, norm });
        }
        if snapshot_stride > 0 && step % snapshot_stride == 0 {
            traj.snapshot_times.push(t);
            traj.snapshots.push(rho.clone());
        }
    }
    if traj.snapshot_times.last() != traj.times.last() {
        traj.snapshot_times.push(*traj.times.last().unwrap());
        traj.snapshots.push(rho);
    }
    Ok(traj)
}

/// Side-by-side run of the Born-Markov and Lindblad-completed equations from
/// the same parameters and initial state.
#[derive(Debug, Clone)]
pub struct PositivityReport {
    pub times: Vec<f64>,
    pub bm_min_eigenvalue: Vec<f64>,
    pub lindblad_min_eigenvalue: Vec<f64>,
    /// Whether the Born-Markov trajectory dipped below -1e-4.
    pub bm_dips_below_threshold: bool,
    /// Whether the Lindblad trajectory stayed above -1e-6 throughout.
    pub lindblad_stays_positive: bool,
    /// `||rho_bm(t) - rho_lindblad(t)||_F / t` measured a few steps in: the
    /// early-time growth rate of the state difference.
    pub early_slope_measured: f64,
    /// `prefactor * a_SS * ||S rho0 S - 1/2 {S^2, rho0}||_F`: the completion
    /// term's prediction for the same rate.
    pub early_slope_predicted: f64,
}

/// Run both right-hand sides and report the positivity contrast.
pub fn positivity_comparison(
    rho0: &DensityMatrix,
    params: &SquidParams,
    space: FockSpace,
    dt: f64,
    steps: usize,
) -> Result<PositivityReport> {
    let builder = ModelBuilder::new(space)?;
    let ops = OperatorBasis::build(&builder, params);
    let h_s = builder.system_hamiltonian(params);
    let h_eff = builder.effective_hamiltonian(params, TermSet::ALL)?;
    let matrix = coefficient_matrix(params, true)?;
    let lindblads = extract_lindblads(&matrix, &ops)?;

    let bm = evolve(rho0, |r| bm_rhs(r, params, &ops, &h_s), dt, steps, 0, None)?;
    let lind = evolve(
        rho0,
        |r| lindblad_rhs(r, &h_eff, &lindblads),
        dt,
        steps,
        0,
        None,
    )?;

    // Early-time slope of the state difference, measured over a short run.
    let probe_steps = 10.min(steps);
    let bm_probe = evolve(
        rho0,
        |r| bm_rhs(r, params, &ops, &h_s),
        dt,
        probe_steps,
        0,
        None,
    )?;
    let lind_probe = evolve(
        rho0,
        |r| lindblad_rhs(r, &h_eff, &lindblads),
        dt,
        probe_steps,
        0,
        None,
    )?;
    let probe_t = probe_steps as f64 * dt;
    let measured =
        frobenius_norm(&(bm_probe.final_state() - lind_probe.final_state())) / probe_t;
    let s_rho_s = matmul(&matmul(&ops.s, rho0.matrix()), &ops.s);
    let s2 = matmul(&ops.s, &ops.s);
    let anti = anticommutator(&s2, rho0.matrix())?;
    let completion = s_rho_s - anti * Complex64::new(0.5, 0.0);
    let predicted = matrix.prefactor * matrix.a_ss * frobenius_norm(&completion);

    Ok(PositivityReport {
        times: bm.times.clone(),
        bm_dips_below_threshold: bm.lowest_min_eigenvalue() < -1e-4,
        lindblad_stays_positive: lind.lowest_min_eigenvalue() >= -1e-6,
        bm_min_eigenvalue: bm.min_eigenvalue,
        lindblad_min_eigenvalue: lind.min_eigenvalue,
        early_slope_measured: measured,
        early_slope_predicted: predicted,
    })
}
