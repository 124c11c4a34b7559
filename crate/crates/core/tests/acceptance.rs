//! Acceptance suite: one test per numbered criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Reference device throughout: Josephson energy 6.693e-22 J, C = 5e-15 F,
//! L = 3e-10 H, gamma = 0.05 omega0, Omega = 10 omega0; energies in units of
//! hbar omega0.

use std::time::Instant;

use num_complex::Complex64;
use squidsim::linalg::{frobenius_norm, hermitian_eig, matmul, CMatrix};
use squidsim::master::{
    bm_rhs, coefficient_matrix, extract_lindblads, lindblad_rhs, quadratic_dissipator,
    solve_a_ss, OperatorBasis, G_RANGE,
};
use squidsim::model::{
    derive_params, DeviceInputs, ModelBuilder, PhysicalConstants, SquidParams, TermSet,
};
use squidsim::operators::{quadratures, truncated_commutator_identity, FockSpace};
use squidsim::spectroscopy::{linspace, spiderweb, susceptibility, SPIDERWEB_ORDER};
use squidsim::dynamics::{evolve, initial_state, InitialState};
use squidsim::{commutator, trace};

fn reference_inputs() -> DeviceInputs {
    DeviceInputs::default()
}

fn reference_params() -> SquidParams {
    derive_params(&reference_inputs(), &PhysicalConstants::default()).unwrap()
}

fn report(criterion: usize, name: &str, pass: bool, detail: &str, started: Instant) {
    let secs = started.elapsed().as_secs_f64();
    println!(
        "ACCEPTANCE {criterion} ({name}): {} — {detail} [{secs:.1} s]",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_spiderweb_reproduction() {
    let started = Instant::now();
    let result = spiderweb(&reference_inputs(), FockSpace::new(128, 32).unwrap()).unwrap();
    // (include, target) in the reference table's axis order
    let targets = [3.8, 5.6, 5.7, 4.7, 5.4, 4.8, 3.8, 5.5];
    let tol = 0.15;
    let mut detail = String::new();
    let mut worst = 0.0_f64;
    let mut deviations = Vec::new();
    for (row, &target) in result.rows.iter().zip(&targets) {
        let dev = row.energy - target;
        deviations.push(dev);
        worst = worst.max(dev.abs());
        detail.push_str(&format!(
            "{}={:.3} (target {target}, dev {:+.3}); ",
            row.include.label(),
            row.energy,
            dev
        ));
    }
    let uniform_offset = deviations.iter().all(|d| d.abs() > tol)
        && deviations.iter().all(|d| d.signum() == deviations[0].signum());
    if uniform_offset {
        println!(
            "ACCEPTANCE 1 NOTE: uniform systematic offset across all 8 values — \
             argument-scale reading suspect; do not retune"
        );
    }
    let pass = worst <= tol && started.elapsed().as_secs_f64() < 60.0;
    report(
        1,
        "spiderweb reproduction",
        pass,
        &format!("max |deviation| = {worst:.3} (tol {tol}); {detail}"),
        started,
    );
}

#[test]
fn criterion_2_completion_correctness() {
    let started = Instant::now();
    let base = reference_params();
    let grid = linspace(G_RANGE.0, G_RANGE.1, 50);
    let mut max_min_eig_violation = 0.0_f64;
    let mut max_det = 0.0_f64;
    let mut rank_ok = true;
    let mut max_closed_form_disc = 0.0_f64;
    for &g in &grid {
        let p = base.with_g(g);
        let m = coefficient_matrix(&p, true).unwrap();
        let norm = frobenius_norm(&m.entries);
        assert!(m.completed, "completion failed inside the window at g={g}");
        max_min_eig_violation = max_min_eig_violation.max((-m.min_eigenvalue / norm).max(0.0));
        // |det| via the eigenvalue product of the completed matrix
        let det: f64 = m.eigenvalues.iter().product();
        max_det = max_det.max(det.abs() / norm.powi(3));
        let small = m
            .eigenvalues
            .iter()
            .filter(|&&v| v.abs() <= 1e-12 * norm)
            .count();
        rank_ok &= small == 1;
        max_closed_form_disc = max_closed_form_disc.max(m.closed_form_discrepancy);
    }
    // The printed closed form does not match the exact det-solve of the
    // Hermitian sine-weighted matrix; both values are reported per the
    // criterion's mismatch-logging clause.
    let p2 = base.with_g(2.0);
    let m2 = coefficient_matrix(&p2, true).unwrap();
    println!(
        "ACCEPTANCE 2 NOTE: printed closed form is a paper-formula discrepancy: \
         max rel diff {:.3e}; at g=2: linear det-solve a_SS={:.6} vs printed {:.6} \
         (units gamma/omega0)",
        max_closed_form_disc, m2.a_ss, m2.closed_form_a_ss
    );
    let pass = max_min_eig_violation <= 1e-12 && max_det <= 1e-10 && rank_ok;
    report(
        2,
        "completion correctness",
        pass,
        &format!(
            "min-eig violation {max_min_eig_violation:.2e} (tol 1e-12), \
             |det|/||m||^3 {max_det:.2e} (tol 1e-10), rank-2 {rank_ok}, \
             closed-form discrepancy {max_closed_form_disc:.2e} logged"
        ),
        started,
    );
}

#[test]
fn criterion_3_raw_matrix_not_psd() {
    let started = Instant::now();
    let base = reference_params();
    let mut max_min_eig = f64::NEG_INFINITY;
    for &g in &linspace(G_RANGE.0, G_RANGE.1, 50) {
        let m = coefficient_matrix(&base.with_g(g), false).unwrap();
        max_min_eig = max_min_eig.max(m.min_eigenvalue);
    }
    let pass = max_min_eig < 0.0;
    report(
        3,
        "raw matrix not PSD",
        pass,
        &format!("largest min-eigenvalue over the window = {max_min_eig:.3e} (< 0 required)"),
        started,
    );
}

#[test]
fn criterion_4_dissipator_equivalence() {
    let started = Instant::now();
    let p = reference_params();
    let n = 16;
    let builder = ModelBuilder::new(FockSpace::new(n, 4).unwrap()).unwrap();
    let ops = OperatorBasis::build(&builder, &p);
    let h_s = builder.system_hamiltonian(&p);
    let h_eff = builder.effective_hamiltonian(&p, TermSet::ALL).unwrap();
    let completed = coefficient_matrix(&p, true).unwrap();
    let raw = coefficient_matrix(&p, false).unwrap();
    let lindblads = extract_lindblads(&completed, &ops).unwrap();
    let zero_h: CMatrix = CMatrix::zeros((n, n));
    let minus_i = Complex64::new(0.0, -1.0);

    let mut worst_lind = 0.0_f64;
    let mut worst_bm = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let mut unit: CMatrix = CMatrix::zeros((n, n));
            unit[[i, j]] = Complex64::new(1.0, 0.0);
            let via_l = lindblad_rhs(&unit, &zero_h, &lindblads).unwrap();
            let via_q = quadratic_dissipator(&completed, &ops, &unit).unwrap();
            let diff = &via_l - &via_q;
            worst_lind = worst_lind.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));

            let bm = bm_rhs(&unit, &p, &ops, &h_s).unwrap();
            let regrouped = commutator(&h_eff, &unit).unwrap() * minus_i
                + quadratic_dissipator(&raw, &ops, &unit).unwrap();
            let diff2 = &bm - &regrouped;
            worst_bm = worst_bm.max(diff2.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    let pass = worst_lind <= 1e-10 && worst_bm <= 1e-10 && started.elapsed().as_secs_f64() < 30.0;
    report(
        4,
        "dissipator equivalence",
        pass,
        &format!(
            "Lindblad-vs-quadratic entrywise residual {worst_lind:.2e}, \
             bm-vs-regrouped residual {worst_bm:.2e} (tol 1e-10, full matrix-unit basis)"
        ),
        started,
    );
}

#[test]
fn criterion_5_dynamics_invariants() {
    let started = Instant::now();
    let p = reference_params();
    let space = FockSpace::new(32, 8).unwrap();
    let builder = ModelBuilder::new(space).unwrap();
    let ops = OperatorBasis::build(&builder, &p);
    let h_eff = builder.effective_hamiltonian(&p, TermSet::ALL).unwrap();
    let matrix = coefficient_matrix(&p, true).unwrap();
    let lindblads = extract_lindblads(&matrix, &ops).unwrap();
    let rho0 = initial_state(InitialState::Coherent(Complex64::new(1.0, 0.0)), space, None)
        .unwrap();

    let traj = evolve(
        &rho0,
        |r| lindblad_rhs(r, &h_eff, &lindblads),
        1e-3,
        10_000,
        0,
        None,
    )
    .unwrap();
    let trace_dev = traj.worst_trace_deviation();
    let herm = traj.worst_hermiticity_defect();
    let min_eig = traj.lowest_min_eigenvalue();

    // unitary limit: gamma = 0
    let mut free_inputs = reference_inputs();
    free_inputs.damping_rate_ratio = 0.0;
    let p_free = derive_params(&free_inputs, &PhysicalConstants::default()).unwrap();
    let h_free = builder.system_hamiltonian(&p_free);
    let ops_free = OperatorBasis::build(&builder, &p_free);
    let traj_free = evolve(
        &rho0,
        |r| bm_rhs(r, &p_free, &ops_free, &h_free),
        1e-3,
        10_000,
        0,
        Some(&h_free),
    )
    .unwrap();
    let e0 = traj_free.energy[0];
    let drift = traj_free
        .energy
        .iter()
        .map(|e| (e - e0).abs())
        .fold(0.0, f64::max)
        / e0.abs();

    // fourth-order step halving against a dt/4 reference
    let rhs = |r: &CMatrix| lindblad_rhs(r, &h_eff, &lindblads);
    let run = |dt: f64, steps: usize| {
        evolve(&rho0, rhs, dt, steps, 0, None)
            .unwrap()
            .final_state()
            .clone()
    };
    let dt = 4e-3;
    let coarse = run(dt, 50);
    let medium = run(dt / 2.0, 100);
    let fine = run(dt / 4.0, 200);
    let ratio = frobenius_norm(&(&coarse - &fine)) / frobenius_norm(&(&medium - &fine));

    let pass = trace_dev <= 1e-8
        && herm <= 1e-10
        && min_eig >= -1e-6
        && drift <= 1e-9
        && (8.0..=32.0).contains(&ratio)
        && started.elapsed().as_secs_f64() < 300.0;
    report(
        5,
        "dynamics invariants",
        pass,
        &format!(
            "trace dev {trace_dev:.2e} (tol 1e-8), herm defect {herm:.2e} (tol 1e-10), \
             min eig {min_eig:.2e} (floor -1e-6), unitary energy drift {drift:.2e} \
             (tol 1e-9), halving ratio {ratio:.1} (in [8, 32])"
        ),
        started,
    );
}

#[test]
fn criterion_6_truncation_identity() {
    let started = Instant::now();
    let mut worst = 0.0_f64;
    for &n in &[2usize, 8, 64, 128] {
        let (x, p) = quadratures(FockSpace::new(n, 0).unwrap());
        let comm = commutator(&x, &p).unwrap();
        let expect = truncated_commutator_identity(n);
        worst = worst.max(frobenius_norm(&(&comm - &expect)));
    }
    let pass = worst <= 1e-12;
    report(
        6,
        "truncation identity",
        pass,
        &format!("max ||[X,P] - i(I - N E)||_F = {worst:.2e} (tol 1e-12)"),
        started,
    );
}

#[test]
fn criterion_7_spectral_symmetry_and_periodicity() {
    let started = Instant::now();
    let base = reference_params();
    let builder = ModelBuilder::new(FockSpace::new(128, 32).unwrap()).unwrap();
    let lowest5 = |phi: f64| -> Vec<f64> {
        let h = builder
            .effective_hamiltonian(&base.with_phi(phi), TermSet::ALL)
            .unwrap();
        hermitian_eig(&h).unwrap().values[..5].to_vec()
    };
    let mut worst_sym = 0.0_f64;
    let mut worst_per = 0.0_f64;
    for &phi in &linspace(0.0, 1.0, 21) {
        let here = lowest5(phi);
        let mirrored = lowest5(1.0 - phi);
        let shifted = lowest5(phi + 1.0);
        for k in 0..5 {
            let scale = here[k].abs().max(1.0);
            worst_sym = worst_sym.max((here[k] - mirrored[k]).abs() / scale);
            worst_per = worst_per.max((here[k] - shifted[k]).abs() / scale);
        }
    }
    let pass =
        worst_sym <= 1e-9 && worst_per <= 1e-9 && started.elapsed().as_secs_f64() < 120.0;
    report(
        7,
        "spectral symmetry/periodicity",
        pass,
        &format!(
            "max rel |E(phi)-E(1-phi)| = {worst_sym:.2e}, \
             max rel |E(phi)-E(phi+1)| = {worst_per:.2e} (tol 1e-9, 21-point grid)"
        ),
        started,
    );
}

#[test]
fn criterion_8_susceptibility_properties() {
    let started = Instant::now();
    let space = FockSpace::new(128, 32).unwrap();
    let fd = 1.0 / 400.0;

    // harmonic limit: no flux dependence at all
    let mut harmonic = reference_inputs();
    harmonic.josephson_energy_j = 0.0;
    let flat = susceptibility(&harmonic, &[0.3, 0.45, 0.6], &[1.0, 1.8], fd, space).unwrap();
    let worst_flat = flat.rows.iter().map(|r| r.chi0.abs()).fold(0.0, f64::max);

    // reference device on a grid symmetric about phi = 0.5 (the half-flux
    // point itself is a genuine degeneracy and is excluded; see ledger)
    let phis = [0.30, 0.35, 0.40, 0.45, 0.55, 0.60, 0.65, 0.70];
    let result = susceptibility(&reference_inputs(), &phis, &[1.0, 1.8], fd, space).unwrap();
    let worst_halving = result
        .rows
        .iter()
        .map(|r| r.step_halving_change)
        .fold(0.0, f64::max);
    let mut worst_sym = 0.0_f64;
    let mut fd_floor = 0.0_f64;
    for r in &result.rows {
        fd_floor = fd_floor.max(r.richardson_error);
        if r.phi < 0.5 {
            let partner = result
                .rows
                .iter()
                .find(|q| (q.phi - (1.0 - r.phi)).abs() < 1e-12 && q.g == r.g)
                .unwrap();
            let tol = 3.0 * (r.richardson_error + partner.richardson_error) + 1e-9;
            worst_sym = worst_sym.max(((r.chi0 - partner.chi0).abs() - tol).max(0.0));
        }
    }
    let chi = |phi: f64, g: f64| {
        result
            .rows
            .iter()
            .find(|r| r.phi == phi && r.g == g)
            .unwrap()
            .chi0
    };
    let flux_span = (chi(0.30, 1.8) - chi(0.45, 1.8)).abs();
    let coupling_span = (chi(0.30, 1.0) - chi(0.30, 1.8)).abs();
    let floor = fd_floor.max(1e-12);

    let pass = worst_flat <= 1e-10
        && worst_halving <= 0.01
        && worst_sym == 0.0
        && flux_span > 10.0 * floor
        && coupling_span > 10.0 * floor
        && started.elapsed().as_secs_f64() < 300.0;
    report(
        8,
        "susceptibility properties",
        pass,
        &format!(
            "harmonic |chi0| max {worst_flat:.2e} (tol 1e-10), step-halving change max \
             {worst_halving:.2e} (tol 1e-2), symmetry excess {worst_sym:.2e}, \
             flux span {flux_span:.2e} and coupling span {coupling_span:.2e} \
             vs 10x FD floor {:.2e}",
            10.0 * floor
        ),
        started,
    );
}

#[test]
fn criterion_9_basis_convergence() {
    let started = Instant::now();
    let p = reference_params();
    let e0 = |dim: usize| -> f64 {
        let builder = ModelBuilder::new(FockSpace::new(dim, 32).unwrap()).unwrap();
        let h = builder.effective_hamiltonian(&p, TermSet::ALL).unwrap();
        hermitian_eig(&h).unwrap().values[0]
    };
    let delta = (e0(192) - e0(128)).abs();
    let pass = delta < 1e-6 && started.elapsed().as_secs_f64() < 60.0;
    report(
        9,
        "basis convergence",
        pass,
        &format!("|E0(192) - E0(128)| = {delta:.2e} (tol 1e-6)"),
        started,
    );
}

// Cross-check used by criterion 2's determinant bound: the spectral product
// must agree with the direct 3x3 determinant of the completed entries.
#[test]
fn determinant_routes_agree() {
    let base = reference_params();
    for &g in &[0.5, 1.8, 3.9] {
        let p = base.with_g(g);
        let m = coefficient_matrix(&p, true).unwrap();
        let spectral: f64 = m.eigenvalues.iter().product();
        // det via explicit a_SS solve: by construction the solved entry
        // zeroes the determinant, so both routes must sit at the same scale
        let solved = solve_a_ss(&{
            let mut e = m.entries.clone();
            e[[2, 2]] = Complex64::new(0.0, 0.0);
            e
        })
        .unwrap();
        assert!((solved - m.a_ss).abs() <= 1e-12 * m.a_ss.abs().max(1.0));
        let norm = frobenius_norm(&m.entries);
        assert!(spectral.abs() <= 1e-10 * norm.powi(3));
        // trace consistency between eigenvalues and entries
        let tr: f64 = m.eigenvalues.iter().sum();
        assert!((tr - trace(&m.entries).re).abs() <= 1e-10 * norm);
        // ops built once to keep the basis path exercised
        let builder = ModelBuilder::new(FockSpace::new(8, 2).unwrap()).unwrap();
        let ops = OperatorBasis::build(&builder, &p);
        let set = extract_lindblads(&m, &ops).unwrap();
        let rebuilt: f64 = set.items.iter().map(|t| t.weight / m.prefactor).sum();
        assert!((rebuilt - tr).abs() <= 1e-10 * norm.max(1.0));
        let _ = matmul(&ops.x, &ops.p);
    }
}
