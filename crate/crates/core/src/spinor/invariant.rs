use super::{masks_of_degree, ExteriorOp, Letter, LagrangianSplitting, Spinor};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Orthonormal basis of a common kernel, columns indexed by bitmask.
#[derive(Clone, Debug)]
pub struct InvariantForms {
    pub rank: usize,
    pub basis: DMatrix<f64>,
    /// Degree of each column when all operators were homogeneous.
    pub degrees: Option<Vec<usize>>,
    /// `max_k ‖op_k · basis‖`.
    pub residual: f64,
}

impl InvariantForms {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn spinor(&self, j: usize) -> Spinor {
        let v: Vec<f64> = self.basis.column(j).iter().copied().collect();
        Spinor::from_real(self.rank, &v).expect("rank already validated")
    }

    /// Columns of a given degree.
    pub fn of_degree(&self, k: usize) -> Vec<Spinor> {
        match &self.degrees {
            Some(d) => (0..self.dim()).filter(|&j| d[j] == k).map(|j| self.spinor(j)).collect(),
            None => Vec::new(),
        }
    }
}

/// Derivation of `Λ` induced by the endomorphism `x_b ↦ Σ_a M_ab x_a`.
pub fn derivation(m: &DMatrix<f64>) -> ExteriorOp {
    let n = m.nrows();
    let mut op = ExteriorOp::new(n);
    for a in 0..n {
        for b in 0..n {
            op.push(m[(a, b)], vec![Letter::Wedge(a), Letter::Contract(b)]);
        }
    }
    op
}

fn kernel_of_stack(blocks: &[DMatrix<f64>], ncols: usize, tol: f64) -> DMatrix<f64> {
    let nrows: usize = blocks.iter().map(|b| b.nrows()).sum::<usize>().max(ncols);
    let mut stack = DMatrix::zeros(nrows, ncols);
    let mut r = 0;
    for b in blocks {
        stack.rows_mut(r, b.nrows()).copy_from(b);
        r += b.nrows();
    }
    let svd = stack.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let cut = tol * smax.max(1.0);
    let cols: Vec<DVector<f64>> = (0..ncols)
        .filter(|&i| svd.singular_values[i] <= cut)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(ncols, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn apply_real(op: &ExteriorOp, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    let mut buf = Vec::new();
    for (mask, &x) in v.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        op.apply_mask(mask, &mut buf);
        for &(m, s) in &buf {
            out[m] += x * s;
        }
    }
    out
}

/// Common kernel of real operators on `Λ`, found by SVD. Homogeneous
/// operators are treated one degree block at a time.
pub fn invariant_forms(ops: &[ExteriorOp], rank: usize, tol: f64) -> Result<InvariantForms> {
    if rank > super::MAX_RANK {
        return Err(Error::InvalidDimension(format!("rank {rank} exceeds {}", super::MAX_RANK)));
    }
    if let Some(op) = ops.iter().find(|o| o.rank() != rank) {
        return Err(Error::DimensionMismatch { expected: rank, got: op.rank() });
    }
    let n = 1usize << rank;
    let shifts: Option<Vec<i32>> = ops.iter().map(|o| o.degree_shift()).collect();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut degrees = Vec::new();
    match shifts {
        Some(shifts) => {
            for k in 0..=rank {
                let masks = masks_of_degree(rank, k);
                let blocks: Vec<DMatrix<f64>> = ops
                    .iter()
                    .zip(&shifts)
                    .filter_map(|(o, &s)| {
                        let to = k as i32 + s;
                        (0..=rank as i32).contains(&to).then(|| o.materialize_block(k, to as usize))
                    })
                    .collect();
                let ker = kernel_of_stack(&blocks, masks.len(), tol);
                for j in 0..ker.ncols() {
                    let mut v = DVector::zeros(n);
                    for (i, &m) in masks.iter().enumerate() {
                        v[m] = ker[(i, j)];
                    }
                    cols.push(v);
                    degrees.push(k);
                }
            }
        }
        None => {
            let blocks: Vec<DMatrix<f64>> = ops.iter().map(|o| o.materialize()).collect::<Result<_>>()?;
            let ker = kernel_of_stack(&blocks, n, tol);
            cols.extend(ker.column_iter().map(|c| c.into_owned()));
        }
    }
    let homogeneous = degrees.len() == cols.len();
    let residual = cols
        .iter()
        .flat_map(|c| ops.iter().map(move |o| apply_real(o, c).norm()))
        .fold(0.0f64, f64::max);
    let basis = if cols.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&cols) };
    Ok(InvariantForms { rank, basis, degrees: homogeneous.then_some(degrees), residual })
}

/// Spinors killed by every vector of the isotropic subspace spanned by
/// the columns of `j`.
pub fn annihilator_invariants(j: &DMatrix<f64>, split: &LagrangianSplitting, tol: f64) -> Result<InvariantForms> {
    let g = split.metric();
    if j.nrows() != g.nrows() {
        return Err(Error::DimensionMismatch { expected: g.nrows(), got: j.nrows() });
    }
    let iso = (j.transpose() * g * j).amax();
    if iso > 1e-10 * g.amax().max(1.0) {
        return Err(Error::Degenerate(format!("subspace is not isotropic (defect {iso:e})")));
    }
    let ops: Vec<ExteriorOp> = j.column_iter().map(|c| split.vector_op(&c.into_owned())).collect::<Result<_>>()?;
    invariant_forms(&ops, split.rank(), tol)
}
