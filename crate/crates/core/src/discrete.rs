//! Discrete evolution of the repeated-interaction chain.
//!
//! Test vectors are exponential (coherent) vectors of locally constant
//! functions phi: R+ -> C^N. Projecting such a vector onto the chain with
//! time step `h` gives the product vector with site amplitudes
//!
//! ```text
//! phi~_i(n) = h^{-1/2} ∫_{(n-1)h}^{nh} phi_i(s) ds
//! ```
//!
//! Because the n-th interaction touches only site n, the matrix element of
//! the discrete evolution u_n = L_n ... L_1 between two such product vectors
//! collapses to a product of n small system operators (one per consumed
//! site) times a scalar tail over the untouched sites:
//!
//! ```text
//! <a ⊗ e(phi~), u_n b ⊗ e(psi~)> = tail * <a, C(n) ... C(1) b>
//! C(k) = sum_{j,i} conj(phi~_j(k)) psi~_i(k) L_j^i,    phi~_0 = psi~_0 = 1
//! tail = prod_{k > n} (1 + <phi~(k), psi~(k)>)
//! ```
//!
//! The same quantity evaluated literally on the dense chain
//! (`chain_simulate_bracket`) is exponentially more expensive and serves as
//! an independent oracle for the recursion.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BlockOperator, ChainState};
use crate::numerics::matrix::{ComplexMatrix, ONE, ZERO};
use crate::superop::Superoperator;

/// Locally constant C^N-valued function on [0, support_end), zero beyond.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentFunction {
    n_levels: usize,
    breakpoints: Vec<f64>,
    values: Vec<Vec<Complex64>>,
}

impl CoherentFunction {
    /// `breakpoints` = [0 = s_0 < s_1 < ... < s_m], `values[k]` holding the
    /// per-level amplitudes on [s_k, s_{k+1}).
    pub fn new(n_levels: usize, breakpoints: Vec<f64>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        if breakpoints.first() != Some(&0.0) {
            return Err(Error::InvalidStep("breakpoints must start at 0".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidStep("breakpoints must be finite and strictly increasing".into()));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} breakpoints require {} value vectors, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if values.iter().any(|v| v.len() != n_levels) {
            return Err(Error::DimensionMismatch(format!(
                "every value vector must have {n_levels} levels"
            )));
        }
        Ok(CoherentFunction { n_levels, breakpoints, values })
    }

    /// The zero function.
    pub fn zero(n_levels: usize) -> Self {
        CoherentFunction { n_levels, breakpoints: vec![0.0], values: Vec::new() }
    }

    /// Constant amplitudes on [0, t_end), zero afterwards.
    pub fn constant(values: Vec<Complex64>, t_end: f64) -> Result<Self> {
        let n_levels = values.len();
        Self::new(n_levels, vec![0.0, t_end], vec![values])
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Vec<Complex64>] {
        &self.values
    }

    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Value of level `i` at time `s` (right-continuous in s).
    pub fn eval_level(&self, s: f64, i: usize) -> Complex64 {
        if s < 0.0 || s >= self.support_end() {
            return ZERO;
        }
        // partition_point: first breakpoint strictly greater than s
        let seg = self.breakpoints.partition_point(|&b| b <= s) - 1;
        self.values[seg][i]
    }

    pub fn eval(&self, s: f64) -> Vec<Complex64> {
        (0..self.n_levels).map(|i| self.eval_level(s, i)).collect()
    }

    /// ∫ sum_i conj(self_i) other_i over the whole line (finite supports).
    pub fn overlap_integral(&self, other: &CoherentFunction) -> Complex64 {
        assert_eq!(self.n_levels, other.n_levels, "level count mismatch");
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut acc = ZERO;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let dt = w[1] - w[0];
            let dot: Complex64 = (0..self.n_levels)
                .map(|i| self.eval_level(mid, i).conj() * other.eval_level(mid, i))
                .sum();
            acc += dot * dt;
        }
        acc
    }
}

/// Site amplitudes of a coherent function projected on the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCoherent {
    h: f64,
    n_levels: usize,
    sites: Vec<Vec<Complex64>>,
}

/// Exact site integrals of a locally constant function: no quadrature error.
/// Produces at least `n_sites` sites, extended to cover the full support so
/// that tail products over untouched sites can always be evaluated.
pub fn discretize_coherent(f: &CoherentFunction, h: f64, n_sites: usize) -> Result<DiscreteCoherent> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidTimestep(h));
    }
    let needed = (f.support_end() / h).ceil() as usize;
    let total = n_sites.max(needed);
    let scale = 1.0 / h.sqrt();
    let mut sites = Vec::with_capacity(total);
    for n in 1..=total {
        let (a, b) = ((n - 1) as f64 * h, n as f64 * h);
        let mut amps = vec![ZERO; f.n_levels];
        // exact integral of the step function over [a, b]
        for (seg, vals) in f.values.iter().enumerate() {
            let lo = f.breakpoints[seg].max(a);
            let hi = f.breakpoints[seg + 1].min(b);
            if hi > lo {
                let w = (hi - lo) * scale;
                for i in 0..f.n_levels {
                    amps[i] += vals[i] * w;
                }
            }
        }
        sites.push(amps);
    }
    Ok(DiscreteCoherent { h, n_levels: f.n_levels, sites })
}

impl DiscreteCoherent {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Amplitudes of site `n` (1-based); zero beyond the stored support.
    pub fn site(&self, n: usize) -> Option<&[Complex64]> {
        self.sites.get(n - 1).map(Vec::as_slice)
    }

    pub fn sites(&self) -> &[Vec<Complex64>] {
        &self.sites
    }
}

/// Number of whole steps of size `h` in [0, t], robust to the ratio sitting
/// within rounding of an integer.
pub fn steps_for(t: f64, h: f64) -> usize {
    let r = t / h;
    let fl = r.floor();
    let n = if r - fl > 1.0 - 1e-9 { fl + 1.0 } else { fl };
    n as usize
}

/// Matrix element of the discrete evolution between coherent product states.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixElement {
    /// Product C(n) ... C(1) of per-site transfer operators.
    pub m: ComplexMatrix,
    /// Scalar factor collected from sites beyond n.
    pub tail: Complex64,
    /// tail * m: <a, bracket b> = <a ⊗ e(phi~), u_n b ⊗ e(psi~)>.
    pub bracket: ComplexMatrix,
}

fn site_or_zero<'a>(dc: &'a DiscreteCoherent, n: usize, zeros: &'a [Complex64]) -> &'a [Complex64] {
    dc.site(n).unwrap_or(zeros)
}

/// Evaluate the bracket of u_n between coherent vectors by the per-site
/// transfer recursion.
pub fn discrete_matrix_element(
    l: &BlockOperator,
    phi: &DiscreteCoherent,
    psi: &DiscreteCoherent,
    n: usize,
) -> Result<MatrixElement> {
    if phi.h != psi.h {
        return Err(Error::MismatchedTimestep(phi.h, psi.h));
    }
    let dims = l.dims();
    if phi.n_levels != dims.n_env || psi.n_levels != dims.n_env {
        return Err(Error::DimensionMismatch(format!(
            "coherent functions must have {} levels",
            dims.n_env
        )));
    }
    let zeros = vec![ZERO; dims.n_env];
    let mut m = ComplexMatrix::identity(dims.n0);
    for k in 1..=n {
        let f = site_or_zero(phi, k, &zeros);
        let g = site_or_zero(psi, k, &zeros);
        let mut c = ComplexMatrix::zeros(dims.n0, dims.n0);
        for j in 0..dims.env_dim() {
            let fj = if j == 0 { ONE } else { f[j - 1] };
            for i in 0..dims.env_dim() {
                let gi = if i == 0 { ONE } else { g[i - 1] };
                let w = fj.conj() * gi;
                if w != ZERO {
                    c = &c + &l.block(j, i).scale(w);
                }
            }
        }
        m = c.matmul(&m);
    }
    let mut tail = ONE;
    for k in (n + 1)..=phi.n_sites().max(psi.n_sites()) {
        let f = site_or_zero(phi, k, &zeros);
        let g = site_or_zero(psi, k, &zeros);
        let dot: Complex64 = f.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
        tail *= ONE + dot;
    }
    let bracket = m.scale(tail);
    Ok(MatrixElement { m, tail, bracket })
}

/// Reduced step map in the Heisenberg picture: X -> sum_i (L_i^0)* X L_i^0.
/// Completely positive; unital when the step operator is unitary.
pub fn reduced_cp_map(l: &BlockOperator) -> Superoperator {
    let dims = l.dims();
    let mut s = Superoperator::zeros(dims.n0);
    for i in 0..dims.env_dim() {
        let a = l.block(i, 0);
        s = s.add(&Superoperator::conjugation(&a.adjoint(), a));
    }
    s
}

/// n-fold iterate of a superoperator (binary exponentiation).
pub fn iterate_cp(s: &Superoperator, n: usize) -> Superoperator {
    s.pow(n)
}

/// The same coherent bracket evaluated on the dense chain: build
/// b ⊗ e(psi~) on n sites, apply the step operator at sites 1..n, project on
/// a ⊗ e(phi~), and multiply by the analytic tail beyond site n.
pub fn chain_simulate_bracket(
    l: &BlockOperator,
    n: usize,
    a: &[Complex64],
    phi: &DiscreteCoherent,
    b: &[Complex64],
    psi: &DiscreteCoherent,
) -> Result<Complex64> {
    if phi.h != psi.h {
        return Err(Error::MismatchedTimestep(phi.h, psi.h));
    }
    let dims = l.dims();
    let zeros = vec![ZERO; dims.n_env];
    let site_vecs = |dc: &DiscreteCoherent| -> Vec<Vec<Complex64>> {
        (1..=n).map(|k| site_or_zero(dc, k, &zeros).to_vec()).collect()
    };
    let mut ket = ChainState::product(dims, b, &site_vecs(psi))?;
    for site in 1..=n {
        ket = ket.apply_site_op(l, site)?;
    }
    let bra = ChainState::product(dims, a, &site_vecs(phi))?;
    let mut tail = ONE;
    for k in (n + 1)..=phi.n_sites().max(psi.n_sites()) {
        let f = site_or_zero(phi, k, &zeros);
        let g = site_or_zero(psi, k, &zeros);
        let dot: Complex64 = f.iter().zip(g).map(|(x, y)| x.conj() * y).sum();
        tail *= ONE + dot;
    }
    Ok(bra.inner(&ket)? * tail)
}
