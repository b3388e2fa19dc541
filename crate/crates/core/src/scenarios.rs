//! Worked interaction models: measurement-type couplings built from
//! projection families, the exactly solvable two-level emission model, a
//! weak-coupling and a low-density instance, and seeded random draws for
//! property checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::InteractionParams;
use crate::model::{BlockOperator, SpaceDims};
use crate::numerics::matrix::{operator_norm, ComplexMatrix, HermitianMatrix, I, ONE, ZERO};

/// A complete family of mutually orthogonal Hermitian projections.
#[derive(Clone, Debug)]
pub struct ProjectionFamily {
    n0: usize,
    projections: Vec<ComplexMatrix>,
}

const PROJ_TOL: f64 = 1e-10;

impl ProjectionFamily {
    pub fn new(n0: usize, projections: Vec<ComplexMatrix>) -> Result<Self> {
        if projections.is_empty() {
            return Err(Error::InvalidProjectionFamily("family is empty".into()));
        }
        for (k, p) in projections.iter().enumerate() {
            if p.rows() != n0 || p.cols() != n0 {
                return Err(Error::InvalidProjectionFamily(format!(
                    "projection {k} is {}x{}, expected {n0}x{n0}",
                    p.rows(),
                    p.cols()
                )));
            }
            if p.hermitian_residual() > PROJ_TOL {
                return Err(Error::InvalidProjectionFamily(format!(
                    "projection {k} is not Hermitian"
                )));
            }
            if (&p.matmul(p) - p).max_abs() > PROJ_TOL {
                return Err(Error::InvalidProjectionFamily(format!(
                    "projection {k} is not idempotent"
                )));
            }
        }
        for k in 0..projections.len() {
            for l in (k + 1)..projections.len() {
                if projections[k].matmul(&projections[l]).max_abs() > PROJ_TOL {
                    return Err(Error::InvalidProjectionFamily(format!(
                        "projections {k} and {l} are not orthogonal"
                    )));
                }
            }
        }
        let mut sum = ComplexMatrix::zeros(n0, n0);
        for p in &projections {
            sum = &sum + p;
        }
        if (&sum - &ComplexMatrix::identity(n0)).max_abs() > PROJ_TOL {
            return Err(Error::InvalidProjectionFamily(
                "projections do not sum to the identity".into(),
            ));
        }
        Ok(ProjectionFamily { n0, projections })
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn projections(&self) -> &[ComplexMatrix] {
        &self.projections
    }

    /// The pinching X -> sum_k P_k X P_k.
    pub fn pinching(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.n0, self.n0);
        for p in &self.projections {
            acc = &acc + &p.matmul(&x.matmul(p));
        }
        acc
    }
}

/// Measurement-type interaction: V_k = i P_k, all Hamiltonian data zero.
/// The vacuum Heisenberg limit is X_t = e^{-t} X + (1 - e^{-t}) sum P_k X P_k.
pub fn von_neumann_params(family: &ProjectionFamily) -> Result<InteractionParams> {
    let n0 = family.n0();
    let n_env = family.len();
    let dims = SpaceDims::new(n0, n_env)?;
    let v = family.projections().iter().map(|p| p.scale(I)).collect();
    InteractionParams::new(
        dims,
        HermitianMatrix::zeros(n0),
        HermitianMatrix::zeros(n_env + 1),
        v,
        HermitianMatrix::zeros(n0 * n_env),
    )
}

/// Closed form of the vacuum Heisenberg evolution for `von_neumann_params`.
pub fn von_neumann_closed_form(family: &ProjectionFamily, x: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let decay = Complex64::new((-t).exp(), 0.0);
    &x.scale(decay) + &family.pinching(x).scale(ONE - decay)
}

/// Coupling-angle policy for the two-level emission step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaPolicy {
    /// alpha = sqrt(h): the scaling under which the step family converges.
    SqrtH,
    /// A fixed angle, independent of h.
    Fixed(f64),
}

impl AlphaPolicy {
    pub fn alpha_for(&self, h: f64) -> f64 {
        match self {
            AlphaPolicy::SqrtH => h.sqrt(),
            AlphaPolicy::Fixed(a) => *a,
        }
    }
}

/// One interaction step of the two-level atom exchanging an excitation with
/// a two-level field site: a rotation by `alpha` in the
/// (excited ⊗ ground, ground ⊗ excited) plane.
pub fn two_level_step(h: f64, policy: AlphaPolicy) -> Result<BlockOperator> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidTimestep(h));
    }
    let alpha = policy.alpha_for(h);
    let (cos, sin) = (alpha.cos(), alpha.sin());
    let dims = SpaceDims::new(2, 1)?;
    let b00 = ComplexMatrix::diagonal(&[ONE, Complex64::new(cos, 0.0)]);
    let b10 = ComplexMatrix::from_rows(&[vec![ZERO, Complex64::new(sin, 0.0)], vec![ZERO, ZERO]]);
    let b01 = ComplexMatrix::from_rows(&[vec![ZERO, ZERO], vec![Complex64::new(-sin, 0.0), ZERO]]);
    let b11 = ComplexMatrix::diagonal(&[Complex64::new(cos, 0.0), ONE]);
    BlockOperator::from_blocks(dims, vec![vec![b00, b01], vec![b10, b11]])
}

/// Interaction data whose exact step reproduces `two_level_step` at
/// alpha = sqrt(h): V = i |ground><excited|, no free Hamiltonians.
pub fn two_level_params() -> InteractionParams {
    let dims = SpaceDims::new(2, 1).unwrap();
    let v = ComplexMatrix::from_rows(&[vec![ZERO, I], vec![ZERO, ZERO]]);
    InteractionParams::new(
        dims,
        HermitianMatrix::zeros(2),
        HermitianMatrix::zeros(2),
        vec![v],
        HermitianMatrix::zeros(2),
    )
    .unwrap()
}

/// Excited-state population after n steps of `two_level_step`, starting from
/// the excited state: cos(alpha)^{2n}.
pub fn two_level_population(n: usize, alpha: f64) -> f64 {
    alpha.cos().powi(2 * n as i32)
}

/// Vacuum limit of the excited-state population at time t: e^{-t}.
pub fn two_level_expected(t: f64) -> f64 {
    (-t).exp()
}

/// A dipole-type instance with nontrivial free Hamiltonians on both sides
/// and no field self-energy.
pub fn weak_coupling_params() -> InteractionParams {
    let dims = SpaceDims::new(2, 2).unwrap();
    let r = |x: f64| Complex64::new(x, 0.0);
    let h0 = HermitianMatrix::new(&ComplexMatrix::diagonal(&[r(0.5), r(-0.5)])).unwrap();
    let hs = HermitianMatrix::new(&ComplexMatrix::from_rows(&[
        vec![ZERO, r(0.1), ZERO],
        vec![r(0.1), r(0.4), r(0.1)],
        vec![ZERO, r(0.1), r(0.8)],
    ]))
    .unwrap();
    let v1 = ComplexMatrix::from_rows(&[vec![ZERO, r(0.8)], vec![ZERO, ZERO]]);
    let v2 = ComplexMatrix::from_rows(&[vec![ZERO, ZERO], vec![r(0.5), ZERO]]);
    let d = HermitianMatrix::zeros(4);
    InteractionParams::new(dims, h0, hs, vec![v1, v2], d).unwrap()
}

/// A scattering-type instance driven purely by the h^{-1} term: V = 0 with a
/// nontrivial exchange generator D.
pub fn low_density_params() -> InteractionParams {
    let dims = SpaceDims::new(2, 2).unwrap();
    let r = |x: f64| Complex64::new(x, 0.0);
    let h0 = HermitianMatrix::new(&ComplexMatrix::diagonal(&[r(0.2), r(-0.2)])).unwrap();
    let hs = HermitianMatrix::new(&ComplexMatrix::from_rows(&[
        vec![ZERO, r(0.1), ZERO],
        vec![r(0.1), r(0.4), r(0.1)],
        vec![ZERO, r(0.1), r(0.8)],
    ]))
    .unwrap();
    let v = vec![ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(2, 2)];
    let d = HermitianMatrix::new(&ComplexMatrix::from_rows(&[
        vec![r(0.4), ZERO, ZERO, r(0.2)],
        vec![ZERO, r(-0.4), r(0.2), ZERO],
        vec![ZERO, r(0.2), r(-0.3), ZERO],
        vec![r(0.2), ZERO, ZERO, r(0.3)],
    ]))
    .unwrap();
    InteractionParams::new(dims, h0, hs, v, d).unwrap()
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
    })
}

fn capped(m: ComplexMatrix) -> ComplexMatrix {
    let norm = operator_norm(&m);
    if norm > 0.9 {
        m.scale(Complex64::new(0.9 / norm, 0.0))
    } else {
        m
    }
}

fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> HermitianMatrix {
    let raw = random_matrix(rng, n, n);
    let herm = (&raw + &raw.adjoint()).scale(Complex64::new(0.5, 0.0));
    HermitianMatrix::new(&capped(herm)).unwrap()
}

/// Seeded random interaction data with every defining operator of norm < 1.
pub fn random_interaction_params(dims: SpaceDims, seed: u64) -> InteractionParams {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let h0 = random_hermitian(&mut rng, dims.n0);
    let hs = random_hermitian(&mut rng, dims.n_env + 1);
    let v = (0..dims.n_env)
        .map(|_| capped(random_matrix(&mut rng, dims.n0, dims.n0)))
        .collect();
    let d = random_hermitian(&mut rng, dims.n0 * dims.n_env);
    InteractionParams::new(dims, h0, hs, v, d).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::{lindblad_generator, semigroup_apply, vacuum_heisenberg};
    use crate::discrete::{iterate_cp, reduced_cp_map, steps_for};
    use crate::hamiltonian::{limit_coefficients, unitary_step};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubit_family() -> ProjectionFamily {
        let p1 = ComplexMatrix::diagonal(&[ONE, ZERO]);
        let p2 = ComplexMatrix::diagonal(&[ZERO, ONE]);
        ProjectionFamily::new(2, vec![p1, p2]).unwrap()
    }

    #[test]
    fn projection_family_rejects_bad_input() {
        let half = ComplexMatrix::diagonal(&[c64(0.5, 0.0), ZERO]);
        let rest = ComplexMatrix::diagonal(&[c64(0.5, 0.0), ONE]);
        assert!(matches!(
            ProjectionFamily::new(2, vec![half, rest]),
            Err(Error::InvalidProjectionFamily(_))
        ));
        // orthogonality failure: overlapping rank-1 projections
        let p = ComplexMatrix::diagonal(&[ONE, ZERO]);
        assert!(ProjectionFamily::new(2, vec![p.clone(), p.clone()]).is_err());
        // incompleteness
        assert!(ProjectionFamily::new(2, vec![p]).is_err());
    }

    #[test]
    fn measurement_limit_coefficients_are_projections() {
        let fam = qubit_family();
        let p = von_neumann_params(&fam).unwrap();
        let c = limit_coefficients(&p).unwrap();
        // L_0^0 = -I/2, L_k^0 = P_k, L_0^k = -P_k, L_k^l = 0
        let half_id = ComplexMatrix::identity(2).scale(c64(-0.5, 0.0));
        assert!((c.block(0, 0) - &half_id).max_abs() < 1e-14);
        for k in 1..=2usize {
            assert!((c.block(k, 0) - &fam.projections()[k - 1]).max_abs() < 1e-14);
            assert!(
                (&(c.block(0, k) + &fam.projections()[k - 1])).max_abs() < 1e-14
            );
            for l in 1..=2usize {
                assert!(c.block(k, l).max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn measurement_lindbladian_squares_to_its_negative() {
        let fam = qubit_family();
        let p = von_neumann_params(&fam).unwrap();
        let c = limit_coefficients(&p).unwrap();
        let g = lindblad_generator(&c);
        let g2 = g.compose(&g);
        assert!((g2.matrix() - &g.matrix().scale(c64(-1.0, 0.0))).max_abs() < 1e-12);
    }

    #[test]
    fn measurement_semigroup_matches_closed_form() {
        let fam = qubit_family();
        let p = von_neumann_params(&fam).unwrap();
        let c = limit_coefficients(&p).unwrap();
        let x = ComplexMatrix::from_rows(&[
            vec![c64(0.3, 0.0), c64(0.7, -0.2)],
            vec![c64(0.7, 0.2), c64(-0.1, 0.0)],
        ]);
        for &t in &[0.0, 0.3, 1.0, 10.0] {
            let via_semigroup = vacuum_heisenberg(&c, &x, t).unwrap();
            let closed = von_neumann_closed_form(&fam, &x, t);
            assert!((&via_semigroup - &closed).max_abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn two_level_step_is_unitary_rotation() {
        for &(h, policy) in &[
            (0.1, AlphaPolicy::SqrtH),
            (0.01, AlphaPolicy::Fixed(0.3)),
        ] {
            let l = two_level_step(h, policy).unwrap();
            assert!(l.unitarity_residual() < 1e-14);
            let alpha = policy.alpha_for(h);
            let flat = l.to_flat();
            assert!((flat[(1, 2)] - c64(-alpha.sin(), 0.0)).norm() < 1e-15);
            assert!((flat[(2, 1)] - c64(alpha.sin(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn two_level_step_matches_exact_interaction_step() {
        let p = two_level_params();
        for &h in &[0.5, 0.01] {
            let closed = two_level_step(h, AlphaPolicy::SqrtH).unwrap();
            let exact = unitary_step(&p, h).unwrap();
            assert!((&closed.to_flat() - &exact.to_flat()).max_abs() < 1e-13, "h = {h}");
        }
    }

    #[test]
    fn two_level_population_is_exact_for_iterated_map() {
        let h = 0.01;
        let l = two_level_step(h, AlphaPolicy::SqrtH).unwrap();
        let number = ComplexMatrix::diagonal(&[ZERO, ONE]);
        let s = reduced_cp_map(&l);
        for &n in &[1usize, 7, 100] {
            let xn = iterate_cp(&s, n).apply(&number);
            let expect = two_level_population(n, h.sqrt());
            assert!((xn[(1, 1)] - c64(expect, 0.0)).norm() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn two_level_iterates_approach_exponential_decay() {
        let h = 1e-3;
        let n = steps_for(1.0, h);
        let got = two_level_population(n, h.sqrt());
        assert!((got - two_level_expected(1.0)).abs() < 1e-2);
    }

    #[test]
    fn named_instances_build_and_admit_limits() {
        for p in [weak_coupling_params(), low_density_params(), two_level_params()] {
            // well inside the series-step admissibility region for any h <= 1
            assert!(p.alpha() < 2.0);
            limit_coefficients(&p).unwrap();
        }
    }

    #[test]
    fn random_params_are_deterministic_and_capped() {
        let dims = SpaceDims::new(2, 2).unwrap();
        let a = random_interaction_params(dims, 42);
        let b = random_interaction_params(dims, 42);
        assert!((a.h0().as_matrix() - b.h0().as_matrix()).max_abs() == 0.0);
        assert!((a.d().as_matrix() - b.d().as_matrix()).max_abs() == 0.0);
        for i in 0..2 {
            assert!((&a.v()[i] - &b.v()[i]).max_abs() == 0.0);
        }
        assert!(a.alpha() <= 1.0);
        let other = random_interaction_params(dims, 43);
        assert!((a.h0().as_matrix() - other.h0().as_matrix()).max_abs() > 1e-6);
    }

    #[test]
    fn random_params_admit_unitary_structure_in_the_limit() {
        let dims = SpaceDims::new(2, 2).unwrap();
        for seed in [7u64, 8, 9] {
            let p = random_interaction_params(dims, seed);
            let c = limit_coefficients(&p).unwrap();
            let diag = crate::hamiltonian::unitarity_structure_check(&c, 1e-10).unwrap();
            assert!(diag.pass, "seed {seed}: {diag:?}");
        }
    }

    #[test]
    fn semigroup_route_agrees_with_pinching_limit_at_long_times() {
        let fam = qubit_family();
        let p = von_neumann_params(&fam).unwrap();
        let c = limit_coefficients(&p).unwrap();
        let g = lindblad_generator(&c);
        let x = ComplexMatrix::from_rows(&[
            vec![c64(0.2, 0.0), c64(0.9, 0.1)],
            vec![c64(0.9, -0.1), c64(0.6, 0.0)],
        ]);
        let pt = semigroup_apply(&g, 30.0).unwrap().apply(&x);
        assert!((&pt - &fam.pinching(&x)).max_abs() < 1e-12);
    }
}
