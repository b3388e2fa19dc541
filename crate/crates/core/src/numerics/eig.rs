//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Matrices in this crate stay below ~100 rows, where Jacobi iteration is
//! simple, backward stable and accurate to machine precision; there is no
//! need for a LAPACK backend.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HermitianMatrix};
use super::scalar::{phi_scalar, ScalarFn};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Decompose a Hermitian matrix as a = q diag(eigs) q* with q unitary and
/// real eigenvalues sorted ascending. The input is Hermitized first; feeding
/// a matrix with a large skew part is a caller bug caught by debug assertion.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.require_square()?;
    debug_assert!(
        a.hermitian_residual() <= 1e-8 * (1.0 + a.frobenius_norm()),
        "hermitian_eigen on visibly non-Hermitian input"
    );
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let mut m = (&(a.clone()) + &a.adjoint()).scale(Complex64::new(0.5, 0.0));
    let mut q = ComplexMatrix::identity(n);
    let scale = 1.0 + m.frobenius_norm();
    let tol = 1e-15 * scale;

    let mut sweeps = 0;
    loop {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        s += m[(i, j)].norm_sqr();
                    }
                }
            }
            s.sqrt()
        };
        if off <= tol {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::EigenFailure { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for r in (p + 1)..n {
                rotate(&mut m, &mut q, p, r, tol / (n as f64));
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (m[(i, i)].re, i)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let eigs: Vec<f64> = pairs.iter().map(|&(v, _)| v).collect();
    let qs = ComplexMatrix::from_fn(n, n, |i, j| q[(i, pairs[j].1)]);
    Ok((eigs, qs))
}

/// Zero m[(p,r)] with a unitary rotation in the (p, r) plane; accumulate into q.
fn rotate(m: &mut ComplexMatrix, q: &mut ComplexMatrix, p: usize, r: usize, skip_below: f64) {
    let beta = m[(p, r)];
    let babs = beta.norm();
    if babs <= skip_below {
        m[(p, r)] = Complex64::new(0.0, 0.0);
        m[(r, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = beta / babs; // e^{i theta}
    let alpha = m[(p, p)].re;
    let gamma = m[(r, r)].re;
    let tau = (gamma - alpha) / (2.0 * babs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Unitary 2x2 factor: [c, s; -s e^{-i theta}, c e^{-i theta}] at rows/cols (p, r).
    let upp = Complex64::new(c, 0.0);
    let upr = Complex64::new(s, 0.0);
    let urp = -s * phase.conj();
    let urr = c * phase.conj();

    let n = m.rows();
    // m <- u* m
    for col in 0..n {
        let mp = m[(p, col)];
        let mr = m[(r, col)];
        m[(p, col)] = upp.conj() * mp + urp.conj() * mr;
        m[(r, col)] = upr.conj() * mp + urr.conj() * mr;
    }
    // m <- m u, q <- q u
    for row in 0..n {
        let mp = m[(row, p)];
        let mr = m[(row, r)];
        m[(row, p)] = mp * upp + mr * urp;
        m[(row, r)] = mp * upr + mr * urr;
        let qp = q[(row, p)];
        let qr = q[(row, r)];
        q[(row, p)] = qp * upp + qr * urp;
        q[(row, r)] = qp * upr + qr * urr;
    }
    // Exact zeros on the rotated pair, real diagonal.
    m[(p, r)] = Complex64::new(0.0, 0.0);
    m[(r, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(r, r)] = Complex64::new(m[(r, r)].re, 0.0);
}

/// Apply a scalar spectral function to a Hermitian matrix: q f(diag) q*.
pub fn hermitian_fn(d: &HermitianMatrix, f: ScalarFn) -> Result<ComplexMatrix> {
    let (eigs, q) = hermitian_eigen(d.as_matrix())?;
    let n = eigs.len();
    let mut out = ComplexMatrix::zeros(n, n);
    // q diag(f) q* accumulated column by column
    for k in 0..n {
        let fk = phi_scalar(eigs[k], f);
        for i in 0..n {
            let qik = q[(i, k)] * fk;
            for j in 0..n {
                out[(i, j)] += qik * q[(j, k)].conj();
            }
        }
    }
    Ok(out)
}
