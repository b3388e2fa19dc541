//! Unitary dilation of completely positive maps.
//!
//! A family A_0..A_N with sum_i A_i† A_i = I defines the CP map
//! X -> sum_i A_i† X A_i. Placing the A_i in the first block column of an
//! operator on system ⊗ (N+1)-level environment gives an isometry on
//! system ⊗ ground; completing the remaining columns to a unitary yields a
//! single-step interaction whose reduced map is the given one. Running that
//! step against a chain of fresh environment copies therefore dilates the
//! discrete semigroup of the CP map.

use num_complex::Complex64;

use crate::discrete::{iterate_cp, reduced_cp_map, steps_for};
use crate::error::{Error, Result};
use crate::hamiltonian::QsdeCoefficients;
use crate::model::{BlockOperator, SpaceDims};
use crate::numerics::matrix::{ComplexMatrix, HermitianMatrix, I, ZERO};
use crate::superop::Superoperator;

/// Kraus operators A_0..A_N of a unital-dual CP map, with the isometry
/// normalization sum_i A_i† A_i = I enforced on construction.
#[derive(Clone, Debug)]
pub struct KrausFamily {
    dims: SpaceDims,
    ops: Vec<ComplexMatrix>,
}

const ISOMETRY_TOL: f64 = 1e-10;

impl KrausFamily {
    pub fn new(dims: SpaceDims, ops: Vec<ComplexMatrix>) -> Result<Self> {
        if ops.len() != dims.env_dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} Kraus operators, got {}",
                dims.env_dim(),
                ops.len()
            )));
        }
        for a in &ops {
            if a.rows() != dims.n0 || a.cols() != dims.n0 {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operators must be {0}x{0}",
                    dims.n0
                )));
            }
        }
        let mut gram = ComplexMatrix::zeros(dims.n0, dims.n0);
        for a in &ops {
            gram = &gram + &a.adjoint().matmul(a);
        }
        let residual = (&gram - &ComplexMatrix::identity(dims.n0)).max_abs();
        if residual > ISOMETRY_TOL {
            return Err(Error::NotAnIsometry { residual });
        }
        Ok(KrausFamily { dims, ops })
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// The CP map X -> sum_i A_i† X A_i as a superoperator.
    pub fn cp_map(&self) -> Superoperator {
        let mut s = Superoperator::zeros(self.dims.n0);
        for a in &self.ops {
            s = s.add(&Superoperator::conjugation(&a.adjoint(), a));
        }
        s
    }
}

/// Complete the block column (A_0; ...; A_N) to a unitary step operator.
/// The first block column of the result reproduces the inputs exactly; the
/// remaining columns are produced by Gram–Schmidt over canonical basis
/// vectors (applied twice for orthogonality at working precision).
pub fn kraus_dilate(family: &KrausFamily) -> Result<BlockOperator> {
    let dims = family.dims;
    let d = dims.joint_dim();
    let n0 = dims.n0;
    let mut flat = ComplexMatrix::zeros(d, d);
    for (i, a) in family.ops().iter().enumerate() {
        for r in 0..n0 {
            for s in 0..n0 {
                flat[(r + n0 * i, s)] = a[(r, s)];
            }
        }
    }
    let mut have = n0;
    let mut basis: Vec<Vec<Complex64>> = (0..n0)
        .map(|j| (0..d).map(|r| flat[(r, j)]).collect())
        .collect();
    'candidates: for cand in 0..d {
        if have == d {
            break;
        }
        let mut v = vec![ZERO; d];
        v[cand] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for q in &basis {
                let overlap: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= overlap * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-8 {
            continue 'candidates;
        }
        for z in &mut v {
            *z /= norm;
        }
        for (r, z) in v.iter().enumerate() {
            flat[(r, have)] = *z;
        }
        basis.push(v);
        have += 1;
    }
    if have < d {
        return Err(Error::CompletionFailure(format!(
            "orthogonal complement exhausted with {have} of {d} columns"
        )));
    }
    let residual = flat.unitarity_residual();
    if residual > ISOMETRY_TOL {
        return Err(Error::CompletionFailure(format!(
            "completed operator deviates from unitarity by {residual:.3e}"
        )));
    }
    BlockOperator::from_flat(&flat, dims)
}

/// Effective system Hamiltonian K = i(L_0^0 + 1/2 sum_i (L_i^0)† L_i^0);
/// self-adjoint exactly when the coefficients carry unitary structure.
pub fn effective_hamiltonian(c: &QsdeCoefficients) -> Result<HermitianMatrix> {
    let dims = c.dims();
    let l00 = c.block(0, 0);
    let mut half = ComplexMatrix::zeros(dims.n0, dims.n0);
    for i in 1..dims.env_dim() {
        let li = c.block(i, 0);
        half = &half + &li.adjoint().matmul(li);
    }
    let k = (l00 + &half.scale(Complex64::new(0.5, 0.0))).scale(I);
    let scale = 1.0 + k.frobenius_norm();
    let defect = k.hermitian_residual();
    if defect > 1e-8 * scale {
        return Err(Error::NotSelfAdjoint { defect });
    }
    HermitianMatrix::new(&k)
}

/// One row of a semigroup-limit comparison.
#[derive(Clone, Debug)]
pub struct SemigroupRow {
    pub h: f64,
    pub steps: usize,
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct SemigroupLimitReport {
    pub rows: Vec<SemigroupRow>,
    pub fitted_order: Option<f64>,
}

/// Compare the iterated reduced map of an h-dependent step family against a
/// target semigroup e^{tG} at the same physical time, for each h.
pub fn discrete_semigroup_limit_check(
    step_family: impl Fn(f64) -> Result<BlockOperator>,
    generator: &Superoperator,
    t: f64,
    h_list: &[f64],
) -> Result<SemigroupLimitReport> {
    let target = crate::continuous::semigroup_apply(generator, t)?;
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidTimestep(h));
        }
        let l = step_family(h)?;
        let n = steps_for(t, h);
        let iterated = iterate_cp(&reduced_cp_map(&l), n);
        let distance = iterated.sub(&target).spectral_norm();
        rows.push(SemigroupRow { h, steps: n, distance });
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.distance)).collect();
    let fitted_order = crate::harness::fit_order(&points).ok();
    Ok(SemigroupLimitReport { rows, fitted_order })
}
