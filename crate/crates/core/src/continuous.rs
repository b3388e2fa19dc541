//! Continuous-time limit evolution.
//!
//! Between exponential vectors of locally constant functions the limit
//! unitary U_t has matrix elements <a ⊗ e(phi), U_t b ⊗ e(psi)> =
//! e^{∫ <phi,psi>} <a, Theta_t b> where Theta solves the ordinary
//! differential equation
//!
//! ```text
//! Theta'(s) = G(s) Theta(s),   G(s) = sum_{j,i} conj(phi_j(s)) psi_i(s) L_j^i
//! Theta_0   = exp(∫_0^∞ <phi(s), psi(s)> ds) I      (phi_0 = psi_0 = 1)
//! ```
//!
//! On the vacuum (phi = psi = 0) this collapses to Theta_t = e^{t L_0^0},
//! and system observables evolve under the Lindblad generator
//!
//! ```text
//! L(X) = (L_0^0)* X + X L_0^0 + sum_i (L_i^0)* X L_i^0.
//! ```

use num_complex::Complex64;

use crate::discrete::CoherentFunction;
use crate::error::{Error, Result};
use crate::hamiltonian::QsdeCoefficients;
use crate::numerics::expm::expm;
use crate::numerics::matrix::{ComplexMatrix, ONE, ZERO};
use crate::numerics::ode::ode_solve_linear;
use crate::superop::Superoperator;

/// Matrix element Theta_t of the limit evolution between exponential vectors,
/// integrated segment by segment so RK4 never steps across a discontinuity
/// of the driving functions.
pub fn qsde_matrix_element(
    c: &QsdeCoefficients,
    phi: &CoherentFunction,
    psi: &CoherentFunction,
    t: f64,
    step: f64,
) -> Result<ComplexMatrix> {
    let dims = c.dims();
    if phi.n_levels() != dims.n_env || psi.n_levels() != dims.n_env {
        return Err(Error::DimensionMismatch(format!(
            "coherent functions must have {} levels",
            dims.n_env
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidStep(format!("invalid end time {t}")));
    }
    let n0 = dims.n0;
    let overlap = phi.overlap_integral(psi);
    let mut theta = ComplexMatrix::identity(n0).scale(overlap.exp());

    let generator = |s: f64| -> ComplexMatrix {
        let f = phi.eval(s);
        let g = psi.eval(s);
        let mut acc = ComplexMatrix::zeros(n0, n0);
        for j in 0..dims.env_dim() {
            let fj = if j == 0 { ONE } else { f[j - 1] };
            for i in 0..dims.env_dim() {
                let gi = if i == 0 { ONE } else { g[i - 1] };
                let w = fj.conj() * gi;
                if w != ZERO {
                    acc = &acc + &c.block(j, i).scale(w);
                }
            }
        }
        acc
    };

    // segment boundaries: 0, t, and every breakpoint strictly inside (0, t)
    let mut cuts = vec![0.0, t];
    for &b in phi.breakpoints().iter().chain(psi.breakpoints()) {
        if b > 0.0 && b < t {
            cuts.push(b);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        // the generator is constant on (a, b); sample at the midpoint
        let g = generator(0.5 * (a + b));
        theta = ode_solve_linear(|_| g.clone(), &theta, b - a, step)?;
    }
    Ok(theta)
}

/// Vacuum matrix element: Theta_t = e^{t L_0^0}.
pub fn vacuum_matrix_element(c: &QsdeCoefficients, t: f64) -> Result<ComplexMatrix> {
    expm(&c.block(0, 0).scale(Complex64::new(t, 0.0)))
}

/// Lindblad generator of the vacuum Heisenberg evolution as a superoperator
/// on column-stacked matrices.
pub fn lindblad_generator(c: &QsdeCoefficients) -> Superoperator {
    let dims = c.dims();
    let l00 = c.block(0, 0);
    let mut s = Superoperator::left_mult(&l00.adjoint()).add(&Superoperator::right_mult(l00));
    for i in 1..dims.env_dim() {
        let li = c.block(i, 0);
        s = s.add(&Superoperator::conjugation(&li.adjoint(), li));
    }
    s
}

/// e^{tG} for a superoperator generator.
pub fn semigroup_apply(g: &Superoperator, t: f64) -> Result<Superoperator> {
    let m = expm(&g.matrix().scale(Complex64::new(t, 0.0)))?;
    Superoperator::from_matrix(g.dim(), m)
}

/// Heisenberg vacuum evolution of a system observable: P_t(X) = e^{tL}(X).
pub fn vacuum_heisenberg(c: &QsdeCoefficients, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(semigroup_apply(&lindblad_generator(c), t)?.apply(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{limit_coefficients, InteractionParams};
    use crate::model::SpaceDims;
    use crate::numerics::matrix::{operator_norm, HermitianMatrix, ZERO};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_level_coeffs() -> QsdeCoefficients {
        // spin-boson point: V = i |0><1|, everything else zero
        let dims = SpaceDims::new(2, 1).unwrap();
        let v = ComplexMatrix::from_rows(&[vec![ZERO, c64(0.0, 1.0)], vec![ZERO, ZERO]]);
        let p = InteractionParams::new(
            dims,
            HermitianMatrix::zeros(2),
            HermitianMatrix::zeros(2),
            vec![v],
            HermitianMatrix::zeros(2),
        )
        .unwrap();
        limit_coefficients(&p).unwrap()
    }

    fn generic_coeffs(seed: u64) -> QsdeCoefficients {
        let dims = SpaceDims::new(2, 2).unwrap();
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(11);
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let herm = |n: usize, next: &mut dyn FnMut() -> f64| {
            let raw = ComplexMatrix::from_fn(n, n, |_, _| c64(next(), next()));
            HermitianMatrix::new(&(&raw + &raw.adjoint()).scale(c64(0.5, 0.0))).unwrap()
        };
        let h0 = herm(2, &mut next);
        let hs = herm(3, &mut next);
        let v = vec![
            ComplexMatrix::from_fn(2, 2, |_, _| c64(next(), next())),
            ComplexMatrix::from_fn(2, 2, |_, _| c64(next(), next())),
        ];
        let d = herm(4, &mut next);
        let p = InteractionParams::new(dims, h0, hs, v, d).unwrap();
        limit_coefficients(&p).unwrap()
    }

    #[test]
    fn vacuum_route_matches_general_route() {
        let c = generic_coeffs(5);
        let phi = CoherentFunction::zero(2);
        let t = 0.7;
        let via_ode = qsde_matrix_element(&c, &phi, &phi, t, 1e-3).unwrap();
        let via_exp = vacuum_matrix_element(&c, t).unwrap();
        assert!((&via_ode - &via_exp).max_abs() < 1e-10);
    }

    #[test]
    fn vacuum_theta_is_a_contraction() {
        // L_0^0 = -iK - W*W/2 has dissipative real part: ||e^{tL}|| <= 1
        for seed in [1u64, 2, 3] {
            let c = generic_coeffs(seed);
            for &t in &[0.1, 1.0, 5.0] {
                let m = vacuum_matrix_element(&c, t).unwrap();
                assert!(operator_norm(&m) <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn coherent_bracket_bounded_by_exponential_norms() {
        // |<e(f), U e(g)>| <= ||e(f)|| ||e(g)|| = e^{(||f||^2 + ||g||^2)/2}
        let c = generic_coeffs(7);
        let phi = CoherentFunction::constant(vec![c64(0.4, -0.1), c64(0.2, 0.3)], 1.5).unwrap();
        let psi = CoherentFunction::constant(vec![c64(-0.3, 0.2), c64(0.1, 0.1)], 1.0).unwrap();
        let theta = qsde_matrix_element(&c, &phi, &psi, 1.2, 1e-3).unwrap();
        let bound = (0.5 * phi.overlap_integral(&phi).re).exp()
            * (0.5 * psi.overlap_integral(&psi).re).exp();
        assert!(operator_norm(&theta) <= bound + 1e-8);
    }

    #[test]
    fn segment_splitting_handles_discontinuous_drivers() {
        // the drivers are constant per segment, so the exact solution is a
        // product of segment exponentials — an independent oracle
        let c = generic_coeffs(9);
        let phi = CoherentFunction::new(
            2,
            vec![0.0, 0.5, 1.0],
            vec![vec![c64(0.6, 0.0), ZERO], vec![c64(-0.6, 0.0), ZERO]],
        )
        .unwrap();
        let got = qsde_matrix_element(&c, &phi, &phi, 1.0, 1e-3).unwrap();
        let seg = |s: f64| -> ComplexMatrix {
            let f = phi.eval(s);
            let mut acc = ComplexMatrix::zeros(2, 2);
            for j in 0..3usize {
                let fj = if j == 0 { ONE } else { f[j - 1] };
                for i in 0..3usize {
                    let gi = if i == 0 { ONE } else { f[i - 1] };
                    acc = &acc + &c.block(j, i).scale(fj.conj() * gi);
                }
            }
            acc
        };
        let half = c64(0.5, 0.0);
        let oracle = expm(&seg(0.75).scale(half))
            .unwrap()
            .matmul(&expm(&seg(0.25).scale(half)).unwrap())
            .scale(phi.overlap_integral(&phi).exp());
        assert!((&got - &oracle).max_abs() < 1e-9);
    }

    #[test]
    fn lindblad_semigroup_is_unital_and_hermiticity_preserving() {
        let c = generic_coeffs(4);
        let g = lindblad_generator(&c);
        let p = semigroup_apply(&g, 0.8).unwrap();
        assert!(p.is_unital_within(1e-10));
        let x = ComplexMatrix::from_rows(&[
            vec![c64(0.3, 0.0), c64(0.1, 0.4)],
            vec![c64(0.1, -0.4), c64(-0.2, 0.0)],
        ]);
        let px = p.apply(&x);
        assert!(px.hermitian_residual() < 1e-10);
    }

    #[test]
    fn lindblad_semigroup_is_completely_positive() {
        for seed in [3u64, 8] {
            let c = generic_coeffs(seed);
            let g = lindblad_generator(&c);
            for &t in &[0.2, 1.0, 3.0] {
                let p = semigroup_apply(&g, t).unwrap();
                let lambda = p.choi_min_eigenvalue().unwrap();
                assert!(lambda > -1e-9, "t = {t}: min Choi eigenvalue {lambda}");
            }
        }
    }

    #[test]
    fn semigroup_law_holds() {
        let c = generic_coeffs(6);
        let g = lindblad_generator(&c);
        let p1 = semigroup_apply(&g, 0.4).unwrap();
        let p2 = semigroup_apply(&g, 0.9).unwrap();
        let p12 = semigroup_apply(&g, 1.3).unwrap();
        assert!((p1.compose(&p2).matrix() - p12.matrix()).max_abs() < 1e-11);
    }

    #[test]
    fn two_level_vacuum_population_decays_exponentially() {
        let c = two_level_coeffs();
        let number = ComplexMatrix::from_rows(&[vec![ZERO, ZERO], vec![ZERO, ONE]]);
        for &t in &[0.0, 0.5, 1.0, 2.5] {
            let pt = vacuum_heisenberg(&c, &number, t).unwrap();
            // excited-state population decays at unit rate
            assert!((pt[(1, 1)] - c64((-t).exp(), 0.0)).norm() < 1e-12, "t = {t}");
            assert!(pt[(0, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn vacuum_heisenberg_matches_sandwich_of_theta_plus_noise_term() {
        // for the two-level point L(X) agrees with V*XV - (V*V X + X V*V)/2
        // evaluated through the general machinery
        let c = two_level_coeffs();
        let g = lindblad_generator(&c);
        let x = ComplexMatrix::from_rows(&[
            vec![c64(0.2, 0.0), c64(0.5, -0.1)],
            vec![c64(0.5, 0.1), c64(0.7, 0.0)],
        ]);
        let lx = g.apply(&x);
        let v = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]);
        let vv = v.adjoint().matmul(&v);
        let expect = &v.adjoint().matmul(&x.matmul(&v))
            - &(&vv.matmul(&x) + &x.matmul(&vv)).scale(c64(0.5, 0.0));
        assert!((&lx - &expect).max_abs() < 1e-12);
    }
}
