//! State space of the repeated-interaction chain.
//!
//! One environment copy has a distinguished ground level Ω plus `n_env`
//! excited levels X^1..X^N; the chain tensor product over sites is spanned by
//! vectors with finitely many excited sites. An operator on
//! (system ⊗ one copy) is stored as an (N+1)x(N+1) table of n0 x n0 blocks:
//! `block(j, i)` maps the X^i sector of the copy to the X^j sector, and the
//! same table read against the elementary site operators a_j^i (which map
//! X^i to X^j at one site, all other sectors to zero) gives the action of
//! the operator on any one site of the chain.
//!
//! Flat indices interleave the system fastest: a (system, level) pair maps
//! to `s + n0 * e`, and a chain state on n sites lives at
//! `s + n0 * (e_1 + (N+1) e_2 + ... + (N+1)^{n-1} e_n)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::matrix::{ComplexMatrix, ZERO};

/// Dimensions of the system space (`n0`) and of one environment copy
/// (`n_env` excited levels plus the ground level).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceDims {
    pub n0: usize,
    pub n_env: usize,
}

impl SpaceDims {
    pub fn new(n0: usize, n_env: usize) -> Result<Self> {
        if n0 < 1 || n_env < 1 {
            return Err(Error::DimensionMismatch(format!(
                "system and environment need at least one level each, got n0 = {n0}, n_env = {n_env}"
            )));
        }
        Ok(SpaceDims { n0, n_env })
    }

    /// Dimension of one environment copy including the ground level.
    pub fn env_dim(&self) -> usize {
        self.n_env + 1
    }

    /// Dimension of system ⊗ one copy.
    pub fn joint_dim(&self) -> usize {
        self.n0 * self.env_dim()
    }
}

/// Operator on (system ⊗ one environment copy), stored sector-wise.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    dims: SpaceDims,
    /// Row-major table of (N+1)^2 blocks, entry j*(N+1)+i holds block(j, i).
    blocks: Vec<ComplexMatrix>,
}

impl BlockOperator {
    pub fn zeros(dims: SpaceDims) -> Self {
        let e = dims.env_dim();
        BlockOperator { dims, blocks: vec![ComplexMatrix::zeros(dims.n0, dims.n0); e * e] }
    }

    pub fn identity(dims: SpaceDims) -> Self {
        let mut op = Self::zeros(dims);
        for j in 0..dims.env_dim() {
            *op.block_mut(j, j) = ComplexMatrix::identity(dims.n0);
        }
        op
    }

    /// Build from a full table `table[j][i]` of n0 x n0 blocks.
    pub fn from_blocks(dims: SpaceDims, table: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        let e = dims.env_dim();
        if table.len() != e || table.iter().any(|row| row.len() != e) {
            return Err(Error::DimensionMismatch(format!(
                "block table must be {e}x{e} for {} environment levels",
                dims.n_env
            )));
        }
        for row in &table {
            for b in row {
                if b.rows() != dims.n0 || b.cols() != dims.n0 {
                    return Err(Error::DimensionMismatch(format!(
                        "every block must be {0}x{0}",
                        dims.n0
                    )));
                }
            }
        }
        Ok(BlockOperator { dims, blocks: table.into_iter().flatten().collect() })
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    /// Block mapping the X^i sector to the X^j sector (0 = ground).
    pub fn block(&self, j: usize, i: usize) -> &ComplexMatrix {
        &self.blocks[j * self.dims.env_dim() + i]
    }

    pub fn block_mut(&mut self, j: usize, i: usize) -> &mut ComplexMatrix {
        &mut self.blocks[j * self.dims.env_dim() + i]
    }

    /// Assemble the flat matrix, entry (s' + n0 j, s + n0 i) = block(j,i)[s',s].
    pub fn to_flat(&self) -> ComplexMatrix {
        let d = self.dims.joint_dim();
        let n0 = self.dims.n0;
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..self.dims.env_dim() {
            for i in 0..self.dims.env_dim() {
                m.set_block(n0 * j, n0 * i, self.block(j, i));
            }
        }
        m
    }

    /// Split a flat matrix on (system ⊗ copy) into sector blocks.
    pub fn from_flat(m: &ComplexMatrix, dims: SpaceDims) -> Result<Self> {
        let d = dims.joint_dim();
        if m.rows() != d || m.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "flat operator must be {d}x{d}, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let n0 = dims.n0;
        let mut op = Self::zeros(dims);
        for j in 0..dims.env_dim() {
            for i in 0..dims.env_dim() {
                *op.block_mut(j, i) = m.block(n0 * j, n0 * i, n0, n0);
            }
        }
        Ok(op)
    }

    /// max(||U*U - I||_F, ||UU* - I||_F) of the flat operator.
    pub fn unitarity_residual(&self) -> f64 {
        self.to_flat().unitarity_residual()
    }
}

/// Default cap on dense chain amplitudes (2^24 complex numbers, 256 MiB).
pub const DEFAULT_AMPLITUDE_CAP: usize = 1 << 24;

/// Dense state of the system plus the first `n_sites` chain sites.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    dims: SpaceDims,
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

fn chain_len(dims: SpaceDims, n_sites: usize, cap: usize) -> Result<usize> {
    let mut len = dims.n0;
    for _ in 0..n_sites {
        len = len
            .checked_mul(dims.env_dim())
            .filter(|&l| l <= cap)
            .ok_or(Error::StateTooLarge { required: usize::MAX, cap })?;
    }
    Ok(len)
}

impl ChainState {
    /// System in `sys` (length n0), every site in the ground level.
    pub fn from_system(dims: SpaceDims, n_sites: usize, sys: &[Complex64]) -> Result<Self> {
        Self::from_system_capped(dims, n_sites, sys, DEFAULT_AMPLITUDE_CAP)
    }

    pub fn from_system_capped(
        dims: SpaceDims,
        n_sites: usize,
        sys: &[Complex64],
        cap: usize,
    ) -> Result<Self> {
        if sys.len() != dims.n0 {
            return Err(Error::DimensionMismatch(format!(
                "system vector must have length {}, got {}",
                dims.n0,
                sys.len()
            )));
        }
        let len = chain_len(dims, n_sites, cap)?;
        let mut amplitudes = vec![ZERO; len];
        amplitudes[..dims.n0].copy_from_slice(sys);
        Ok(ChainState { dims, n_sites, amplitudes })
    }

    /// Product state: system vector tensored with one vector per site, where
    /// site vectors list amplitudes of the excited levels only and every
    /// site carries ground-level amplitude 1 (exponential-vector convention).
    pub fn product(dims: SpaceDims, sys: &[Complex64], site_vectors: &[Vec<Complex64>]) -> Result<Self> {
        Self::product_capped(dims, sys, site_vectors, DEFAULT_AMPLITUDE_CAP)
    }

    pub fn product_capped(
        dims: SpaceDims,
        sys: &[Complex64],
        site_vectors: &[Vec<Complex64>],
        cap: usize,
    ) -> Result<Self> {
        if sys.len() != dims.n0 {
            return Err(Error::DimensionMismatch(format!(
                "system vector must have length {}, got {}",
                dims.n0,
                sys.len()
            )));
        }
        for (k, v) in site_vectors.iter().enumerate() {
            if v.len() != dims.n_env {
                return Err(Error::DimensionMismatch(format!(
                    "site vector {} must list {} excited amplitudes, got {}",
                    k + 1,
                    dims.n_env,
                    v.len()
                )));
            }
        }
        let n_sites = site_vectors.len();
        let len = chain_len(dims, n_sites, cap)?;
        let mut amps = Vec::with_capacity(len);
        amps.extend_from_slice(sys);
        for v in site_vectors {
            let cur = amps.len();
            let mut next = Vec::with_capacity(cur * dims.env_dim());
            next.extend_from_slice(&amps); // ground level, weight 1
            for lvl in 0..dims.n_env {
                let w = v[lvl];
                next.extend(amps.iter().map(|&a| a * w));
            }
            amps = next;
        }
        Ok(ChainState { dims, n_sites, amplitudes: amps })
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Flat index of (system level s, site levels e[0..n_sites]).
    pub fn amp_index(&self, s: usize, env: &[usize]) -> usize {
        assert_eq!(env.len(), self.n_sites);
        let mut idx = 0usize;
        for &e in env.iter().rev() {
            idx = idx * self.dims.env_dim() + e;
        }
        s + self.dims.n0 * idx
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &ChainState) -> Result<Complex64> {
        if self.dims != other.dims || self.n_sites != other.n_sites {
            return Err(Error::DimensionMismatch(
                "inner product of states on different chains".into(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site < 1 || site > self.n_sites {
            return Err(Error::SiteOutOfRange { site, n_sites: self.n_sites });
        }
        Ok(())
    }

    /// Apply the elementary operator a_j^i at `site` (1-based): the site's
    /// X^i component is moved to X^j, every other component is annihilated.
    pub fn apply_toy_op(&self, i: usize, j: usize, site: usize) -> Result<ChainState> {
        self.check_site(site)?;
        let max = self.dims.n_env;
        if i > max {
            return Err(Error::LevelOutOfRange { level: i, max });
        }
        if j > max {
            return Err(Error::LevelOutOfRange { level: j, max });
        }
        let e = self.dims.env_dim();
        let inner = self.dims.n0 * e.pow((site - 1) as u32);
        let outer = self.amplitudes.len() / (inner * e);
        let mut out = vec![ZERO; self.amplitudes.len()];
        for o in 0..outer {
            let base = o * inner * e;
            let src = base + inner * i;
            let dst = base + inner * j;
            out[dst..dst + inner].copy_from_slice(&self.amplitudes[src..src + inner]);
        }
        Ok(ChainState { dims: self.dims, n_sites: self.n_sites, amplitudes: out })
    }

    /// Apply an operator on (system ⊗ site), leaving other sites untouched.
    /// Cost is O(len * n0 * env_dim) via gather/apply/scatter per fiber.
    pub fn apply_site_op(&self, l: &BlockOperator, site: usize) -> Result<ChainState> {
        self.check_site(site)?;
        if l.dims() != self.dims {
            return Err(Error::DimensionMismatch(
                "operator and state have different space dimensions".into(),
            ));
        }
        let n0 = self.dims.n0;
        let e = self.dims.env_dim();
        let before = e.pow((site - 1) as u32);
        let after = self.amplitudes.len() / (n0 * before * e);
        let flat = l.to_flat();
        let d = n0 * e;
        let mut out = vec![ZERO; self.amplitudes.len()];
        let mut fiber = vec![ZERO; d];
        for post in 0..after {
            for pre in 0..before {
                // gather the (system, site level) fiber
                for lvl in 0..e {
                    let base = n0 * (pre + before * (lvl + e * post));
                    for s in 0..n0 {
                        fiber[s + n0 * lvl] = self.amplitudes[base + s];
                    }
                }
                let image = flat.matvec(&fiber);
                for lvl in 0..e {
                    let base = n0 * (pre + before * (lvl + e * post));
                    for s in 0..n0 {
                        out[base + s] = image[s + n0 * lvl];
                    }
                }
            }
        }
        Ok(ChainState { dims: self.dims, n_sites: self.n_sites, amplitudes: out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::kron;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dims22() -> SpaceDims {
        SpaceDims::new(2, 2).unwrap()
    }

    #[test]
    fn flat_round_trip_is_exact() {
        let dims = dims22();
        let mut op = BlockOperator::zeros(dims);
        let mut v = 1.0;
        for j in 0..3 {
            for i in 0..3 {
                *op.block_mut(j, i) = ComplexMatrix::from_fn(2, 2, |r, s| {
                    v += 1.0;
                    c(v, -v / 2.0 + (r * 2 + s) as f64)
                });
            }
        }
        let back = BlockOperator::from_flat(&op.to_flat(), dims).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn flat_index_convention() {
        // block(j, i)[s', s] must land at flat (s' + n0 j, s + n0 i).
        let dims = SpaceDims::new(2, 1).unwrap();
        let mut op = BlockOperator::zeros(dims);
        op.block_mut(1, 0)[(0, 1)] = c(7.0, 0.0);
        let flat = op.to_flat();
        assert_eq!(flat[(0 + 2 * 1, 1 + 2 * 0)], c(7.0, 0.0));
    }

    #[test]
    fn toy_ops_compose_like_matrix_units() {
        // a_j^i a_l^k = delta_{il} a_j^k on one site.
        let dims = dims22();
        for i in 0..3usize {
            for j in 0..3usize {
                for k in 0..3usize {
                    for l in 0..3usize {
                        // start from a site in level k (system basis 0)
                        let mut st = ChainState::from_system(dims, 1, &[c(1.0, 0.0), ZERO]).unwrap();
                        st = st.apply_toy_op(0, k, 1).unwrap();
                        let lhs = st
                            .apply_toy_op(k, l, 1)
                            .unwrap()
                            .apply_toy_op(i, j, 1)
                            .unwrap();
                        let rhs = if i == l {
                            st.apply_toy_op(k, j, 1).unwrap()
                        } else {
                            ChainState::from_system(dims, 1, &[ZERO, ZERO]).unwrap()
                        };
                        assert_eq!(lhs.amplitudes(), rhs.amplitudes(), "i={i} j={j} k={k} l={l}");
                    }
                }
            }
        }
    }

    #[test]
    fn toy_ops_resolve_identity() {
        let dims = dims22();
        let st = ChainState::product(dims, &[c(0.4, 0.1), c(0.0, 0.9)], &[vec![
            c(0.3, 0.0),
            c(0.0, -0.2),
        ]])
        .unwrap();
        let mut acc = vec![ZERO; st.amplitudes().len()];
        for lvl in 0..3 {
            let part = st.apply_toy_op(lvl, lvl, 1).unwrap();
            for (a, b) in acc.iter_mut().zip(part.amplitudes()) {
                *a += b;
            }
        }
        for (a, b) in acc.iter().zip(st.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn toy_ops_commute_on_distinct_sites() {
        let dims = dims22();
        let st = ChainState::product(
            dims,
            &[c(0.7, 0.0), c(0.1, 0.2)],
            &[vec![c(0.5, 0.1), c(0.2, 0.0)], vec![c(0.0, 0.3), c(0.4, -0.1)]],
        )
        .unwrap();
        let ab = st.apply_toy_op(1, 0, 1).unwrap().apply_toy_op(0, 2, 2).unwrap();
        let ba = st.apply_toy_op(0, 2, 2).unwrap().apply_toy_op(1, 0, 1).unwrap();
        assert_eq!(ab.amplitudes(), ba.amplitudes());
    }

    #[test]
    fn site_application_matches_kron_on_two_sites() {
        // Apply at site 2 of a 2-site chain and compare against the explicit
        // permuted Kronecker product on the full space.
        let dims = SpaceDims::new(2, 1).unwrap();
        let mut op = BlockOperator::zeros(dims);
        let mut v = 0.0f64;
        for j in 0..2 {
            for i in 0..2 {
                *op.block_mut(j, i) = ComplexMatrix::from_fn(2, 2, |_, _| {
                    v += 0.25;
                    c(v, -v)
                });
            }
        }
        let st = ChainState::product(
            dims,
            &[c(0.6, 0.0), c(0.0, 0.8)],
            &[vec![c(0.3, -0.2)], vec![c(0.9, 0.4)]],
        )
        .unwrap();
        let by_site = st.apply_site_op(&op, 2).unwrap();

        // Full-space operator: indices are s + 2 e1 + 4 e2; acting on (s, e2)
        // means kron(flat reindexed): amp'[s + 2e1 + 4e2] depends on (s, e2).
        let flat = op.to_flat();
        let full = ComplexMatrix::from_fn(8, 8, |r, ccol| {
            let (s_r, e1_r, e2_r) = (r % 2, (r / 2) % 2, r / 4);
            let (s_c, e1_c, e2_c) = (ccol % 2, (ccol / 2) % 2, ccol / 4);
            if e1_r == e1_c {
                flat[(s_r + 2 * e2_r, s_c + 2 * e2_c)]
            } else {
                ZERO
            }
        });
        let expect = full.matvec(st.amplitudes());
        for (a, b) in by_site.amplitudes().iter().zip(&expect) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn unitary_site_application_preserves_norm() {
        let dims = dims22();
        // Unitary from a random Hermitian via the exponential.
        let mut v = 0.0f64;
        let raw = ComplexMatrix::from_fn(6, 6, |_, _| {
            v += 0.13;
            c(v.sin(), v.cos())
        });
        let herm = (&raw + &raw.adjoint()).scale(c(0.5, 0.0));
        let u = crate::numerics::expm::expm(&herm.scale(c(0.0, -1.0))).unwrap();
        let op = BlockOperator::from_flat(&u, dims).unwrap();
        let st = ChainState::product(
            dims,
            &[c(0.33, 0.1), c(-0.2, 0.5)],
            &[vec![c(0.2, 0.1), c(0.0, 0.4)], vec![c(0.1, 0.0), c(0.3, 0.3)]],
        )
        .unwrap();
        let before = st.norm();
        let after = st.apply_site_op(&op, 1).unwrap().norm();
        assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn product_state_inner_follows_site_factorization() {
        // <u prod(v_k), u' prod(w_k)> = <u,u'> prod_k (1 + <v_k, w_k>)
        let dims = dims22();
        let u = [c(0.2, 0.3), c(0.9, 0.0)];
        let up = [c(0.5, -0.1), c(0.0, 0.7)];
        let v = vec![vec![c(0.1, 0.2), c(0.0, 0.3)], vec![c(0.4, 0.0), c(0.2, -0.2)]];
        let w = vec![vec![c(0.3, 0.0), c(0.1, 0.1)], vec![c(0.0, 0.5), c(0.6, 0.0)]];
        let a = ChainState::product(dims, &u, &v).unwrap();
        let b = ChainState::product(dims, &up, &w).unwrap();
        let got = a.inner(&b).unwrap();
        let sys: Complex64 = u.iter().zip(&up).map(|(x, y)| x.conj() * y).sum();
        let mut expect = sys;
        for k in 0..2 {
            let site: Complex64 =
                v[k].iter().zip(&w[k]).map(|(x, y)| x.conj() * y).sum::<Complex64>() + 1.0;
            expect *= site;
        }
        assert!((got - expect).norm() < 1e-14);
    }

    #[test]
    fn state_cap_enforced() {
        let dims = dims22();
        let r = ChainState::from_system_capped(dims, 30, &[c(1.0, 0.0), ZERO], 1 << 20);
        assert!(matches!(r, Err(Error::StateTooLarge { .. })));
    }

    #[test]
    fn site_bounds_checked() {
        let dims = dims22();
        let st = ChainState::from_system(dims, 2, &[c(1.0, 0.0), ZERO]).unwrap();
        assert!(matches!(st.apply_toy_op(0, 1, 0), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(st.apply_toy_op(0, 1, 3), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(st.apply_toy_op(0, 5, 1), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn two_site_product_matches_explicit_kron() {
        let dims = SpaceDims::new(2, 1).unwrap();
        let sys = [c(0.3, 0.1), c(0.0, 0.9)];
        let s1 = vec![c(0.5, -0.5)];
        let s2 = vec![c(0.2, 0.2)];
        let st = ChainState::product(dims, &sys, &[s1.clone(), s2.clone()]).unwrap();
        let sys_m = ComplexMatrix::from_rows(&[vec![sys[0]], vec![sys[1]]]);
        let v1 = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![s1[0]]]);
        let v2 = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![s2[0]]]);
        // site 2 is the slowest index
        let expect = kron(&v2, &kron(&v1, &sys_m));
        for (k, a) in st.amplitudes().iter().enumerate() {
            assert!((a - expect[(k, 0)]).norm() < 1e-15);
        }
    }
}
