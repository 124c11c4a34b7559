//! Born-Markov master equation, its dissipator coefficient matrix over the
//! operator basis (X, P, S), the minimally invasive positive-semidefinite
//! completion, and Lindblad extraction.
//!
//! The non-rotating-wave right-hand side regroups exactly as
//!
//! ```text
//! bm_rhs(rho) = -i[H', rho] + sum_ij a_ij (A_i rho A_j - 1/2 {A_j A_i, rho})
//! ```
//!
//! with `(A_1, A_2, A_3) = (X, P, S)`, `H'` the effective Hamiltonian from
//! [`crate::model::ModelBuilder::correction_terms`], and `a` the coefficient
//! matrix of [`coefficient_matrix`] with `a_SS = 0`. That index convention
//! (first index left of `rho`) is fixed by the regrouping identity; Lindblad
//! operators come from the eigendecomposition `a = sum_k w_k u_k u_k^dag` as
//! `L_k = sqrt(w_k) (u_k[0] X + u_k[1] P + u_k[2] S)`.
//!
//! `a` is not positive semidefinite, so the equation does not generate CPTP
//! evolution. Raising `a_SS` until `det(a) = 0` is the smallest change to a
//! single entry that makes `a` PSD (rank 2); the completed matrix feeds
//! [`extract_lindblads`] and the Lindblad-form right-hand side.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator, check_same_dim, commutator, dagger, frobenius_norm, hermitian_eig, matmul,
    CMatrix,
};
use crate::model::{ModelBuilder, SquidParams};

/// Inclusive coupling-ratio window within which the det(a) = 0 completion is
/// reported valid.
pub const G_RANGE: (f64, f64) = (0.227, 4.40);

/// Relative eigenvalue cutoff deciding which Lindblads are "non-zero".
pub const LINDBLAD_CUTOFF: f64 = 1e-12;

/// The Hermitian operator triple (X, P, S) the dissipator is written over.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    pub x: CMatrix,
    pub p: CMatrix,
    pub s: CMatrix,
}

impl OperatorBasis {
    pub fn build(builder: &ModelBuilder, params: &SquidParams) -> Self {
        Self {
            x: builder.x().clone(),
            p: builder.p().clone(),
            s: builder.sine_operator(params),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    fn by_index(&self, i: usize) -> &CMatrix {
        match i {
            0 => &self.x,
            1 => &self.p,
            _ => &self.s,
        }
    }
}

/// Classification against the completion window [`G_RANGE`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GRange {
    Inside,
    Outside,
}

/// Inclusive range check on the coupling ratio.
pub fn g_range_check(g: f64) -> GRange {
    if (G_RANGE.0..=G_RANGE.1).contains(&g) {
        GRange::Inside
    } else {
        GRange::Outside
    }
}

/// 3x3 dissipator coefficient matrix over (X, P, S).
///
/// `entries` are in units of `gamma/omega0`; the overall `prefactor` is kept
/// separately. After completion `a_ss` holds the solved (S,S) entry and
/// `eigenvalues` the spectrum of `entries` (ascending, same units).
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub entries: CMatrix,
    pub prefactor: f64,
    pub a_ss: f64,
    pub completed: bool,
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub g_range: GRange,
    /// The printed closed-form value for the completed (S,S) entry, same
    /// units as `entries`.
    pub closed_form_a_ss: f64,
    /// Relative difference between the authoritative linear det-solve and
    /// the printed closed form.
    pub closed_form_discrepancy: f64,
}

fn raw_entries(params: &SquidParams) -> CMatrix {
    let g = params.g;
    let xi = params.xi;
    let sigma = params.sine_weight();
    let q = 1.0 + g * g - g;
    let p = xi * (1.0 - g * g);
    let mut m = CMatrix::zeros((3, 3));
    m[[0, 0]] = Complex64::new(2.0 * g + 1.0, 0.0);
    m[[0, 1]] = Complex64::new(-p, -q);
    m[[1, 0]] = Complex64::new(-p, q);
    m[[1, 1]] = Complex64::new(2.0 * g + g * g, 0.0);
    m[[0, 2]] = Complex64::new(g * sigma, g * sigma * xi);
    m[[2, 0]] = Complex64::new(g * sigma, -g * sigma * xi);
    m[[1, 2]] = Complex64::new(g * g * sigma * xi, g * g * sigma);
    m[[2, 1]] = Complex64::new(g * g * sigma * xi, -g * g * sigma);
    m[[2, 2]] = Complex64::new(0.0, 0.0);
    m
}

fn det3(m: &CMatrix) -> Complex64 {
    m[[0, 0]] * (m[[1, 1]] * m[[2, 2]] - m[[1, 2]] * m[[2, 1]])
        - m[[0, 1]] * (m[[1, 0]] * m[[2, 2]] - m[[1, 2]] * m[[2, 0]])
        + m[[0, 2]] * (m[[1, 0]] * m[[2, 1]] - m[[1, 1]] * m[[2, 0]])
}

/// Solve for the (S,S) entry that makes `det(a) = 0`.
///
/// The determinant is affine in `a_SS`, so the solve is linear and exact.
/// This is the authoritative completion; the printed closed form is only a
/// recorded cross-check (see [`closed_form_a_ss`]).
pub fn solve_a_ss(entries_without_ss: &CMatrix) -> Result<f64> {
    let mut m0 = entries_without_ss.clone();
    m0[[2, 2]] = Complex64::new(0.0, 0.0);
    let det0 = det3(&m0);
    m0[[2, 2]] = Complex64::new(1.0, 0.0);
    let det1 = det3(&m0);
    let cofactor = det1 - det0;
    let scale = frobenius_norm(entries_without_ss).max(1.0);
    if cofactor.norm() <= 1e-10 * scale * scale {
        return Err(Error::DegenerateMinor {
            cofactor: cofactor.norm(),
        });
    }
    let a_ss = -det0 / cofactor;
    Ok(a_ss.re)
}

/// The closed-form (S,S) completion as printed:
/// `(beta nu / omega0) (-xi^2 g^5 + 4 g^4 + 8 xi^2 g^3) /
///  ((-g^4 + 2 g^2 - 1)(1 + xi^2) + 4 g (g^2 + 1))`,
/// in the same `gamma/omega0` units as the matrix entries.
///
/// It disagrees with the exact det-solve for the Hermitian matrix actually
/// used here (both in the `-xi^2 g^5` numerator term, which belongs to the
/// non-Hermitian pre-repair entries, and in the overall sine-weight factor);
/// [`coefficient_matrix`] records the relative discrepancy.
pub fn closed_form_a_ss(params: &SquidParams) -> f64 {
    let g = params.g;
    let xi2 = params.xi * params.xi;
    let num = -xi2 * g.powi(5) + 4.0 * g.powi(4) + 8.0 * xi2 * g.powi(3);
    let den = (-g.powi(4) + 2.0 * g * g - 1.0) * (1.0 + xi2) + 4.0 * g * (g * g + 1.0);
    params.s * params.s * num / den
}

/// Build the coefficient matrix; when `complete` is set, solve the
/// minimally invasive det(a) = 0 completion and record its eigendata.
///
/// An out-of-window coupling ratio (or any PSD failure) is surfaced through
/// `g_range`/`completed = false` together with the offending eigenvalue; the
/// det-solve result is still returned rather than clamped.
pub fn coefficient_matrix(params: &SquidParams, complete: bool) -> Result<CoefficientMatrix> {
    let mut entries = raw_entries(params);
    let g_range = g_range_check(params.g);
    let closed_form = closed_form_a_ss(params);
    let mut a_ss = 0.0;
    let mut discrepancy = 0.0;
    if complete {
        a_ss = solve_a_ss(&entries)?;
        entries[[2, 2]] = Complex64::new(a_ss, 0.0);
        discrepancy = (a_ss - closed_form).abs() / a_ss.abs().max(f64::MIN_POSITIVE);
    }
    let eig = hermitian_eig(&entries)?;
    let norm = frobenius_norm(&entries);
    let min_eigenvalue = eig.values[0];
    let det = det3(&entries).norm();
    let completed =
        complete && min_eigenvalue >= -1e-12 * norm && det <= 1e-10 * norm.powi(3);
    Ok(CoefficientMatrix {
        entries,
        prefactor: params.gamma_ratio,
        a_ss,
        completed,
        eigenvalues: eig.values,
        min_eigenvalue,
        g_range,
        closed_form_a_ss: closed_form,
        closed_form_discrepancy: discrepancy,
    })
}

/// One extracted Lindblad operator: `L = sqrt(weight) (c_X X + c_P P + c_S S)`
/// with a unit-norm coefficient triple.
#[derive(Debug, Clone)]
pub struct LindbladTerm {
    pub weight: f64,
    pub coeffs: [Complex64; 3],
}

/// The extracted Lindblad operators, dominant weight first.
#[derive(Debug, Clone)]
pub struct LindbladSet {
    pub items: Vec<LindbladTerm>,
    /// Materialized operators, same order as `items`.
    pub operators: Vec<CMatrix>,
    ldag_l: Vec<CMatrix>,
}

impl LindbladSet {
    /// An empty set (purely unitary evolution).
    pub fn empty() -> Self {
        Self {
            items: vec![],
            operators: vec![],
            ldag_l: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Diagonalize a completed coefficient matrix into Lindblad operators.
///
/// One operator per eigenvalue above `LINDBLAD_CUTOFF * ||entries||_F`; the
/// determinant-zero completion leaves exactly two. Weights carry the
/// `gamma/omega0` prefactor.
pub fn extract_lindblads(matrix: &CoefficientMatrix, ops: &OperatorBasis) -> Result<LindbladSet> {
    if !matrix.completed {
        return Err(Error::NotCompleted {
            min_eigenvalue: matrix.min_eigenvalue,
        });
    }
    let eig = hermitian_eig(&matrix.entries)?;
    let cutoff = LINDBLAD_CUTOFF * frobenius_norm(&matrix.entries);
    let mut items = Vec::new();
    let mut operators = Vec::new();
    let mut ldag_l = Vec::new();
    for k in (0..3).rev() {
        let value = eig.values[k];
        if value <= cutoff {
            continue;
        }
        let coeffs = [
            eig.vectors[[0, k]],
            eig.vectors[[1, k]],
            eig.vectors[[2, k]],
        ];
        let weight = value * matrix.prefactor;
        let root = weight.sqrt();
        let mut l = CMatrix::zeros((ops.dim(), ops.dim()));
        for (i, c) in coeffs.iter().enumerate() {
            l = l + ops.by_index(i) * (c * root);
        }
        let ll = matmul(&dagger(&l), &l);
        items.push(LindbladTerm { weight, coeffs });
        operators.push(l);
        ldag_l.push(ll);
    }
    Ok(LindbladSet {
        items,
        operators,
        ldag_l,
    })
}

fn minus_i_comm(h: &CMatrix, rho: &CMatrix) -> CMatrix {
    (matmul(h, rho) - matmul(rho, h)) * Complex64::new(0.0, -1.0)
}

/// Full non-rotating-wave Born-Markov right-hand side:
///
/// ```text
/// drho/dt = -i[H_S, rho]
///           - i (g/w)(1+g^2-g) [X, {P, rho}] - i (g/w) g(g-1/2) [{X,P}, rho]
///           - (g/w)(g+1/2) [X,[X,rho]] + (g/w) xi (1-g^2) [X,[P,rho]]
///           - (g/w) g(1+g/2) [P,[P,rho]]
///           + i (g/w) g sigma [xi X + g P, {S, rho}]
///           - (g/w) g sigma [X + g xi P, [S, rho]]
/// ```
///
/// with `(g/w) = gamma/omega0` and `sigma` the sine weight. The two
/// quadratic renormalization terms are absent (canceled against the Lamb
/// shift). Every term is an outer commutator, so the output is exactly
/// traceless.
pub fn bm_rhs(
    rho: &CMatrix,
    params: &SquidParams,
    ops: &OperatorBasis,
    h_s: &CMatrix,
) -> Result<CMatrix> {
    check_same_dim(rho, &ops.x)?;
    check_same_dim(rho, h_s)?;
    let gr = params.gamma_ratio;
    let g = params.g;
    let xi = params.xi;
    let sigma = params.sine_weight();
    let i = Complex64::new(0.0, 1.0);

    let mut out = minus_i_comm(h_s, rho);
    if gr == 0.0 {
        return Ok(out);
    }

    let p_acomm = anticommutator(&ops.p, rho)?;
    out = out + commutator(&ops.x, &p_acomm)? * (-i * (gr * (1.0 + g * g - g)));

    let xp_anti = anticommutator(&ops.x, &ops.p)?;
    out = out + commutator(&xp_anti, rho)? * (-i * (gr * g * (g - 0.5)));

    let x_comm = commutator(&ops.x, rho)?;
    out = out + commutator(&ops.x, &x_comm)? * Complex64::new(-gr * (g + 0.5), 0.0);

    let p_comm = commutator(&ops.p, rho)?;
    out = out + commutator(&ops.x, &p_comm)? * Complex64::new(gr * xi * (1.0 - g * g), 0.0);
    out = out + commutator(&ops.p, &p_comm)? * Complex64::new(-gr * g * (1.0 + 0.5 * g), 0.0);

    let s_acomm = anticommutator(&ops.s, rho)?;
    let mix1 = &ops.x * Complex64::new(xi, 0.0) + &ops.p * Complex64::new(g, 0.0);
    out = out + commutator(&mix1, &s_acomm)? * (i * (gr * g * sigma));

    let s_comm = commutator(&ops.s, rho)?;
    let mix2 = &ops.x + &ops.p * Complex64::new(g * xi, 0.0);
    out = out + commutator(&mix2, &s_comm)? * Complex64::new(-gr * g * sigma, 0.0);

    Ok(out)
}

/// Quadratic-form dissipator
/// `prefactor * sum_ij a_ij (A_i rho A_j - 1/2 {A_j A_i, rho})`.
pub fn quadratic_dissipator(
    matrix: &CoefficientMatrix,
    ops: &OperatorBasis,
    rho: &CMatrix,
) -> Result<CMatrix> {
    check_same_dim(rho, &ops.x)?;
    let n = ops.dim();
    let mut out = CMatrix::zeros((n, n));
    let half = Complex64::new(0.5, 0.0);
    for i in 0..3 {
        let ai = ops.by_index(i);
        let ai_rho = matmul(ai, rho);
        for j in 0..3 {
            let aij = matrix.entries[[i, j]] * matrix.prefactor;
            if aij.norm() == 0.0 {
                continue;
            }
            let aj = ops.by_index(j);
            let sandwich = matmul(&ai_rho, aj);
            let aj_ai = matmul(aj, ai);
            let anti = anticommutator(&aj_ai, rho)?;
            out = out + (sandwich - anti * half) * aij;
        }
    }
    Ok(out)
}

/// Lindblad-form right-hand side
/// `-i[H_eff, rho] + sum_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho})`.
pub fn lindblad_rhs(rho: &CMatrix, h_eff: &CMatrix, lindblads: &LindbladSet) -> Result<CMatrix> {
    check_same_dim(rho, h_eff)?;
    let mut out = minus_i_comm(h_eff, rho);
    let half = Complex64::new(0.5, 0.0);
    for (l, ll) in lindblads.operators.iter().zip(&lindblads.ldag_l) {
        check_same_dim(rho, l)?;
        let sandwich = matmul(&matmul(l, rho), &dagger(l));
        let anti = anticommutator(ll, rho)?;
        out = out + sandwich - anti * half;
    }
    Ok(out)
}
