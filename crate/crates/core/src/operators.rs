//! Truncated Fock-space operator algebra.
//!
//! Ladder operators and quadratures in the number basis:
//!
//! ```text
//! a|n>   = sqrt(n) |n-1>
//! X = (a + a^dag)/sqrt(2),   P = i(a^dag - a)/sqrt(2),   [X, P] = i
//! ```
//!
//! Truncation to `N` levels deforms the canonical commutator into
//! `[X, P] = i(I - N E_{N-1,N-1})`; trigonometric operator functions are
//! therefore evaluated on a padded space and cut back to suppress the corner
//! artifacts (see [`FockSpace::pad`]).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    check_square, hermitian_eig, hermitian_part, identity, CMatrix, EigenDecomposition,
};

/// Working truncation of the bosonic Hilbert space.
///
/// `dim` is the size every operator is delivered at; `pad` extra levels are
/// used internally when evaluating matrix functions, then discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    pub dim: usize,
    pub pad: usize,
}

impl FockSpace {
    pub fn new(dim: usize, pad: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!(
                "Fock space dimension must be >= 2, got {dim}"
            )));
        }
        Ok(Self { dim, pad })
    }

    /// Default padding of `dim/4` for trig functions destined for Hamiltonians.
    pub fn with_default_pad(dim: usize) -> Result<Self> {
        Self::new(dim, dim / 4)
    }

    pub fn padded_dim(&self) -> usize {
        self.dim + self.pad
    }
}

/// Annihilation operator: `a[m, m+1] = sqrt(m+1)`.
pub fn annihilator(space: FockSpace) -> CMatrix {
    ladder(space.dim)
}

fn ladder(dim: usize) -> CMatrix {
    let mut a: CMatrix = CMatrix::zeros((dim, dim));
    for m in 0..dim - 1 {
        a[[m, m + 1]] = Complex64::new(((m + 1) as f64).sqrt(), 0.0);
    }
    a
}

/// Quadratures `X = (a + a^dag)/sqrt(2)` and `P = i(a^dag - a)/sqrt(2)`.
pub fn quadratures(space: FockSpace) -> (CMatrix, CMatrix) {
    quadratures_dim(space.dim)
}

fn quadratures_dim(dim: usize) -> (CMatrix, CMatrix) {
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    let mut x: CMatrix = CMatrix::zeros((dim, dim));
    let mut p: CMatrix = CMatrix::zeros((dim, dim));
    for m in 0..dim - 1 {
        let t = ((m + 1) as f64).sqrt() * inv_sqrt2;
        x[[m, m + 1]] = Complex64::new(t, 0.0);
        x[[m + 1, m]] = Complex64::new(t, 0.0);
        p[[m, m + 1]] = Complex64::new(0.0, -t);
        p[[m + 1, m]] = Complex64::new(0.0, t);
    }
    (x, p)
}

/// Parity operator `diag((-1)^n)`; conjugation sends `X -> -X`, `P -> -P`.
pub fn parity(space: FockSpace) -> CMatrix {
    let mut pi = identity(space.dim);
    for n in 0..space.dim {
        if n % 2 == 1 {
            pi[[n, n]] = Complex64::new(-1.0, 0.0);
        }
    }
    pi
}

/// Which trigonometric function [`operator_trig`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigKind {
    Sin,
    Cos,
}

impl TrigKind {
    fn eval(self, x: f64) -> f64 {
        match self {
            TrigKind::Sin => x.sin(),
            TrigKind::Cos => x.cos(),
        }
    }
}

/// `f(scale A + phase I)` for Hermitian `A` by spectral calculus:
/// `V f(scale lambda + phase) V^dag`.
pub fn operator_trig(a: &CMatrix, scale: f64, phase: f64, kind: TrigKind) -> Result<CMatrix> {
    check_square(a)?;
    let eig = hermitian_eig(a)?;
    Ok(trig_from_eig(&eig, scale, phase, kind))
}

/// Same as [`operator_trig`] with the eigendecomposition of `A` precomputed.
///
/// The eigenvectors do not depend on `scale` or `phase`, so sweeps over the
/// external flux reuse one decomposition for every grid point.
pub fn trig_from_eig(
    eig: &EigenDecomposition,
    scale: f64,
    phase: f64,
    kind: TrigKind,
) -> CMatrix {
    eig.apply(|lam| kind.eval(scale * lam + phase))
}

/// Evaluates `f(scale X + phase I)` for the quadrature `X` of `space` on the
/// padded space, then truncates back to `dim x dim`.
pub fn quadrature_trig(space: FockSpace, scale: f64, phase: f64, kind: TrigKind) -> Result<CMatrix> {
    let (x_big, _) = quadratures_dim(space.padded_dim());
    let big = operator_trig(&x_big, scale, phase, kind)?;
    Ok(truncate(&big, space.dim))
}

/// Top-left `dim x dim` block.
pub fn truncate(m: &CMatrix, dim: usize) -> CMatrix {
    let mut out = CMatrix::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            out[[i, j]] = m[[i, j]];
        }
    }
    out
}

/// Shared spectral data for repeated trig evaluations on one Fock space:
/// the eigendecomposition of the padded `X` quadrature.
#[derive(Debug, Clone)]
pub struct QuadratureCalculus {
    space: FockSpace,
    x_eig: EigenDecomposition,
}

impl QuadratureCalculus {
    pub fn new(space: FockSpace) -> Result<Self> {
        let (x_big, _) = quadratures_dim(space.padded_dim());
        let x_eig = hermitian_eig(&x_big)?;
        Ok(Self { space, x_eig })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    /// `f(scale X + phase I)`, padded evaluation truncated to the working dim.
    pub fn trig(&self, scale: f64, phase: f64, kind: TrigKind) -> CMatrix {
        let big = trig_from_eig(&self.x_eig, scale, phase, kind);
        let cut = truncate(&big, self.space.dim);
        hermitian_part(&cut)
    }
}

/// `i (I - N E_{N-1,N-1})`: the exact commutator `[X, P]` at truncation `N`.
pub fn truncated_commutator_identity(dim: usize) -> CMatrix {
    let mut m = identity(dim) * Complex64::new(0.0, 1.0);
    m[[dim - 1, dim - 1]] = Complex64::new(0.0, 1.0 - dim as f64);
    m
}
