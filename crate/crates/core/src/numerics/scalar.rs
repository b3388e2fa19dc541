//! Scalar spectral functions applied to real eigenvalues.
//!
//! The limit coefficients of the continuous evolution are built from three
//! functions with removable singularities at the origin:
//!
//! ```text
//! phi1(x) = (e^{-ix} - 1) / x            phi1(0) = -i
//! phi2(x) = (e^{-ix} - 1 + ix) / x^2     phi2(0) = -1/2
//! psi(x)  = (sin x - x) / x^2            psi(0)  = 0
//! ```
//!
//! They satisfy phi2 = -i psi - |phi1|^2 / 2 identically on the real line.
//! Near zero the closed forms lose all significant digits, so |x| < 1e-4
//! switches to Taylor expansions carrying seven terms (truncation below
//! 1e-30 there). Above the cutoff the exponential differences are evaluated
//! through half-angle products (e^{-ix} - 1 = -2i sin(x/2) e^{-ix/2}) so no
//! cancellation survives and the three-function identity holds to machine
//! precision right across the switch point.

use num_complex::Complex64;

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);
const TAYLOR_CUT: f64 = 1e-4;
const TAYLOR_TERMS: usize = 7;

/// Scalar functions accepted by `hermitian_fn`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarFn {
    /// x -> e^{-ix}
    ExpMinusI,
    /// x -> sin x
    Sin,
    /// x -> (e^{-ix} - 1)/x
    Phi1,
    /// x -> (e^{-ix} - 1 + ix)/x^2
    Phi2,
    /// x -> (sin x - x)/x^2
    Psi,
    /// x -> x
    Identity,
}

/// Evaluate a spectral scalar function at a real point.
pub fn phi_scalar(x: f64, f: ScalarFn) -> Complex64 {
    match f {
        ScalarFn::ExpMinusI => (MINUS_I * x).exp(),
        ScalarFn::Sin => Complex64::new(x.sin(), 0.0),
        ScalarFn::Identity => Complex64::new(x, 0.0),
        ScalarFn::Phi1 => {
            if x.abs() < TAYLOR_CUT {
                // sum_{k>=0} (-i)^{k+1} x^k / (k+1)!
                let mut acc = Complex64::new(0.0, 0.0);
                let mut coeff = MINUS_I; // (-i)^{k+1} / (k+1)! at k = 0
                for k in 0..TAYLOR_TERMS {
                    acc += coeff * x.powi(k as i32);
                    coeff = coeff * MINUS_I / (k as f64 + 2.0);
                }
                acc
            } else {
                let sinc_half = (0.5 * x).sin() / (0.5 * x);
                MINUS_I * sinc_half * (MINUS_I * (0.5 * x)).exp()
            }
        }
        ScalarFn::Phi2 => {
            if x.abs() < TAYLOR_CUT {
                // sum_{k>=0} (-i)^{k+2} x^k / (k+2)!
                let mut acc = Complex64::new(0.0, 0.0);
                let mut coeff = Complex64::new(-0.5, 0.0); // (-i)^2 / 2!
                for k in 0..TAYLOR_TERMS {
                    acc += coeff * x.powi(k as i32);
                    coeff = coeff * MINUS_I / (k as f64 + 3.0);
                }
                acc
            } else {
                let sinc_half = (0.5 * x).sin() / (0.5 * x);
                Complex64::new(-0.5 * sinc_half * sinc_half, 0.0)
                    + MINUS_I * phi_scalar(x, ScalarFn::Psi)
            }
        }
        ScalarFn::Psi => {
            if x.abs() < TAYLOR_CUT {
                // sum_{k>=1} (-1)^k x^{2k-1} / (2k+1)!
                let mut acc = 0.0;
                let mut coeff = -1.0 / 6.0; // k = 1 term / x
                for k in 1..=TAYLOR_TERMS {
                    acc += coeff * x.powi(2 * k as i32 - 1);
                    coeff *= -1.0 / ((2.0 * k as f64 + 2.0) * (2.0 * k as f64 + 3.0));
                }
                Complex64::new(acc, 0.0)
            } else {
                Complex64::new((x.sin() - x) / (x * x), 0.0)
            }
        }
    }
}
