//! Dense complex matrix helpers and a deterministic Hermitian eigensolver.
//!
//! Everything in the crate runs on [`CMatrix`] (row-major
//! `ndarray::Array2<Complex64>`). The eigensolver reduces a Hermitian matrix
//! to real symmetric tridiagonal form with complex Householder reflectors and
//! then runs implicit-shift QL with eigenvector accumulation. It is plain
//! sequential code with a fixed operation order, so repeated runs are
//! bit-identical — a property the sweep outputs rely on.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square complex matrix on the truncated Fock space.
pub type CMatrix = Array2<Complex64>;

/// Allowed Hermiticity defect, relative to `max(1, ||M||_F)`.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// QL iteration budget per eigenvalue.
const QL_MAX_ITER: usize = 50;

pub(crate) fn check_square(m: &CMatrix) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::DimMismatch { left: r, right: c });
    }
    Ok(r)
}

pub(crate) fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<usize> {
    let n = check_square(a)?;
    let m = check_square(b)?;
    if n != m {
        return Err(Error::DimMismatch { left: n, right: m });
    }
    Ok(n)
}

/// `n`-dimensional identity.
pub fn identity(n: usize) -> CMatrix {
    Array2::from_diag_elem(n, Complex64::new(1.0, 0.0))
}

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

/// Frobenius norm.
pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `||M - M^dag||_F`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = m[[i, j]] - m[[j, i]].conj();
            acc += d.norm_sqr();
        }
    }
    acc.sqrt()
}

/// Sum of the main diagonal.
pub fn trace(m: &CMatrix) -> Complex64 {
    m.diag().iter().sum()
}

/// `(M + M^dag)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] = 0.5 * (m[[i, j]] + m[[j, i]].conj());
        }
    }
    out
}

/// Matrix product `A B`.
///
/// Hand-rolled i-k-j kernel; skips zero `a_ik` entries, which makes products
/// against tridiagonal ladder operators cheap.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, ka) = a.dim();
    let (kb, m) = b.dim();
    assert_eq!(ka, kb, "matmul: inner dimensions differ ({ka} vs {kb})");
    let mut out: CMatrix = Array2::zeros((n, m));
    let zero = Complex64::new(0.0, 0.0);
    match (a.as_slice(), b.as_slice(), out.as_slice_mut()) {
        (Some(av), Some(bv), Some(ov)) => {
            for i in 0..n {
                let arow = &av[i * ka..(i + 1) * ka];
                let orow = &mut ov[i * m..(i + 1) * m];
                for (k, &aik) in arow.iter().enumerate() {
                    if aik == zero {
                        continue;
                    }
                    let brow = &bv[k * m..(k + 1) * m];
                    for (o, &bkj) in orow.iter_mut().zip(brow) {
                        *o += aik * bkj;
                    }
                }
            }
        }
        _ => {
            for i in 0..n {
                for k in 0..ka {
                    let aik = a[[i, k]];
                    if aik == zero {
                        continue;
                    }
                    for j in 0..m {
                        out[[i, j]] += aik * b[[k, j]];
                    }
                }
            }
        }
    }
    out
}

/// Commutator `[A, B] = AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_same_dim(a, b)?;
    Ok(matmul(a, b) - matmul(b, a))
}

/// Anticommutator `{A, B} = AB + BA`.
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_same_dim(a, b)?;
    Ok(matmul(a, b) + matmul(b, a))
}

/// Result of diagonalizing a Hermitian matrix: `M = V diag(values) V^dag`
/// with `values` ascending and the columns of `vectors` orthonormal.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    /// Reassemble `V f(values) V^dag` for a scalar function of the spectrum.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let flam = f(lam);
            for i in 0..n {
                scaled[[i, j]] *= flam;
            }
        }
        let m = matmul(&scaled, &dagger(&self.vectors));
        hermitian_part(&m)
    }
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Rejects inputs whose Hermiticity defect exceeds
/// `HERMITICITY_TOL * ||M||_F` and reports `NoConvergence` if the QL
/// iteration budget runs out.
pub fn hermitian_eig(m: &CMatrix) -> Result<EigenDecomposition> {
    let n = check_square(m)?;
    let scale = frobenius_norm(m);
    let defect = hermiticity_defect(m);
    let tol = HERMITICITY_TOL * scale.max(1.0);
    if !(defect <= tol) {
        return Err(Error::NotHermitian {
            defect,
            tolerance: tol,
        });
    }
    if n == 0 {
        return Ok(EigenDecomposition {
            values: vec![],
            vectors: Array2::zeros((0, 0)),
        });
    }

    // Work on the Hermitian average so tiny input asymmetry cannot leak in.
    let mut a = hermitian_part(m);
    let mut diag = vec![0.0_f64; n];
    let mut sub = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
    let mut reflectors: Vec<(usize, Vec<Complex64>, f64)> = Vec::new();

    // Householder reduction to Hermitian tridiagonal form.
    for k in 0..n.saturating_sub(2) {
        let mlen = n - k - 1;
        let mut x: Vec<Complex64> = (0..mlen).map(|i| a[[k + 1 + i, k]]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            sub[k] = Complex64::new(0.0, 0.0);
            continue;
        }
        let alpha = x[0];
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let beta = -phase * xnorm;
        x[0] -= beta;
        let vnorm_sq: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            sub[k] = beta;
            continue;
        }
        let c = 2.0 / vnorm_sq;

        // Rank-2 update of the trailing block: B -= v q^dag + q v^dag with
        // p = c B v, q = p - (c/2)(v^dag p) v.
        let mut p = vec![Complex64::new(0.0, 0.0); mlen];
        for i in 0..mlen {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..mlen {
                acc += a[[k + 1 + i, k + 1 + j]] * x[j];
            }
            p[i] = c * acc;
        }
        let vdp: Complex64 = x.iter().zip(&p).map(|(v, pi)| v.conj() * pi).sum();
        let kappa = 0.5 * c * vdp.re;
        let q: Vec<Complex64> = p.iter().zip(&x).map(|(pi, vi)| pi - kappa * vi).collect();
        for i in 0..mlen {
            for j in 0..mlen {
                let upd = x[i] * q[j].conj() + q[i] * x[j].conj();
                a[[k + 1 + i, k + 1 + j]] -= upd;
            }
        }

        sub[k] = beta;
        for i in 0..mlen {
            a[[k + 1 + i, k]] = Complex64::new(0.0, 0.0);
            a[[k, k + 1 + i]] = Complex64::new(0.0, 0.0);
        }
        reflectors.push((k, x, c));
    }
    if n >= 2 {
        sub[n - 2] = a[[n - 1, n - 2]];
    }
    for i in 0..n {
        diag[i] = a[[i, i]].re;
    }

    // Accumulate Q = H_0 H_1 ... by applying reflectors to the identity in
    // reverse order.
    let mut vectors = identity(n);
    for (k, v, c) in reflectors.iter().rev() {
        let mlen = v.len();
        for col in 0..n {
            let mut w = Complex64::new(0.0, 0.0);
            for i in 0..mlen {
                w += v[i].conj() * vectors[[k + 1 + i, col]];
            }
            w *= *c;
            for i in 0..mlen {
                let upd = w * v[i];
                vectors[[k + 1 + i, col]] -= upd;
            }
        }
    }

    // Phase transform: make the subdiagonal real non-negative and absorb the
    // phases into the columns of Q.
    let mut off = vec![0.0_f64; n];
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..n.saturating_sub(1) {
        let b = sub[k];
        let babs = b.norm();
        off[k] = babs;
        let next_phase = if babs > 0.0 { phase * (b / babs) } else { phase };
        if k == 0 {
            // column 0 keeps phase 1
        }
        phase = next_phase;
        for i in 0..n {
            vectors[[i, k + 1]] *= phase;
        }
    }

    ql_implicit(&mut diag, &mut off, &mut vectors)?;

    // Ascending sort with a stable column permutation.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut sorted = Array2::zeros((n, n));
    for (newcol, &oldcol) in order.iter().enumerate() {
        for i in 0..n {
            sorted[[i, newcol]] = vectors[[i, oldcol]];
        }
    }
    Ok(EigenDecomposition {
        values,
        vectors: sorted,
    })
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix, rotations
/// accumulated into the complex column matrix `z`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], z: &mut CMatrix) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    // e[k] couples d[k] and d[k+1]; e[n-1] is scratch.
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::NoConvergence {
                    index: l,
                    iterations: QL_MAX_ITER,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut early_deflate = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early_deflate = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[[k, i + 1]].re;
                    let fi = z[[k, i + 1]].im;
                    let zre = z[[k, i]].re;
                    let zim = z[[k, i]].im;
                    z[[k, i + 1]] = Complex64::new(s * zre + c * f, s * zim + c * fi);
                    z[[k, i]] = Complex64::new(c * zre - s * f, c * zim - s * fi);
                }
            }
            if early_deflate {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
