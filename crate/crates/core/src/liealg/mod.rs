//! Quadratic Lie algebras: a Lie bracket together with an invariant,
//! nondegenerate symmetric pairing. Over a point these are exactly the
//! Courant algebroids.

mod double;
mod matrix_algebras;
pub(crate) mod spec;

pub use double::{double, DoubleAlgebra};
pub use matrix_algebras::{build_abelian, build_so, build_su, involution, Involution};
pub use spec::{AlgebraSpec, BuiltAlgebra};

use crate::error::{Error, Result};
use crate::linalg;
use crate::report::ResidualReport;
use nalgebra::{DMatrix, DVector};

pub const ANTISYMMETRY_TOL: f64 = 1e-10;
pub const JACOBI_TOL: f64 = 1e-9;
pub const GRADING_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct QuadraticLieAlgebra {
    dim: usize,
    metric: DMatrix<f64>,
    /// `gamma[(a*n + b)*n + c]` is the coefficient of `e_c` in `[e_a, e_b]`.
    gamma: Vec<f64>,
    /// `structure[(a*n + b)*n + c] = <e_a, [e_b, e_c]>`.
    structure: Vec<f64>,
    /// Sparse view of `gamma`: for each ordered pair, the nonzero outputs.
    nonzero: Vec<Vec<(usize, f64)>>,
    labels: Vec<String>,
    offsets: Vec<usize>,
}

/// Index partition `a = a0 ⊕ a1` in an adapted basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvolutiveSplitting {
    pub indices0: Vec<usize>,
    pub indices1: Vec<usize>,
}

impl InvolutiveSplitting {
    pub fn new(dim: usize, indices0: Vec<usize>) -> Self {
        let indices1 = (0..dim).filter(|i| !indices0.contains(i)).collect();
        Self { indices0, indices1 }
    }

    pub fn dim(&self) -> usize {
        self.indices0.len() + self.indices1.len()
    }
}

fn check_metric(metric: &DMatrix<f64>) -> Result<()> {
    let n = metric.nrows();
    if n == 0 || metric.ncols() != n {
        return Err(Error::InvalidDimension("metric must be a nonempty square matrix".into()));
    }
    if linalg::max_abs(&(metric - metric.transpose())) > ANTISYMMETRY_TOL * linalg::max_abs(metric).max(1.0) {
        return Err(Error::Degenerate("metric is not symmetric".into()));
    }
    if condition_number(metric) > 1.0 / SINGULAR_TOL {
        return Err(Error::Degenerate("metric is numerically singular".into()));
    }
    Ok(())
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let (vals, _) = linalg::sym_eigen_sorted(m);
    let mx = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mn = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if mn == 0.0 {
        f64::INFINITY
    } else {
        mx / mn
    }
}

fn lower(metric: &DMatrix<f64>, gamma: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n * n];
    for b in 0..n {
        for g in 0..n {
            for d in 0..n {
                let v = gamma[(b * n + g) * n + d];
                if v != 0.0 {
                    for a in 0..n {
                        c[(a * n + b) * n + g] += metric[(a, d)] * v;
                    }
                }
            }
        }
    }
    c
}

fn sparsify(gamma: &[f64], n: usize) -> Vec<Vec<(usize, f64)>> {
    (0..n * n)
        .map(|ab| {
            (0..n)
                .filter_map(|c| {
                    let v = gamma[ab * n + c];
                    (v != 0.0).then_some((c, v))
                })
                .collect()
        })
        .collect()
}

impl QuadraticLieAlgebra {
    /// Builds from raised structure constants `gamma[(a*n+b)*n+c] = Γ^c_ab`.
    pub fn new(metric: DMatrix<f64>, gamma: Vec<f64>) -> Result<Self> {
        check_metric(&metric)?;
        let n = metric.nrows();
        if gamma.len() != n * n * n {
            return Err(Error::DimensionMismatch { expected: n * n * n, got: gamma.len() });
        }
        let structure = lower(&metric, &gamma, n);
        let nonzero = sparsify(&gamma, n);
        Ok(Self {
            dim: n,
            metric,
            gamma,
            structure,
            nonzero,
            labels: (0..n).map(|i| format!("e{i}")).collect(),
            offsets: vec![0],
        })
    }

    /// Builds from the lowered tensor `c[(a*n+b)*n+c] = <e_a,[e_b,e_c]>`.
    /// The tensor is not validated; use [`check`] for that.
    pub fn from_lowered(metric: DMatrix<f64>, structure: Vec<f64>) -> Result<Self> {
        check_metric(&metric)?;
        let n = metric.nrows();
        if structure.len() != n * n * n {
            return Err(Error::DimensionMismatch { expected: n * n * n, got: structure.len() });
        }
        let ginv = linalg::inverse(&metric, "metric")?;
        let mut gamma = vec![0.0; n * n * n];
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = 0.0;
                    for a in 0..n {
                        s += ginv[(d, a)] * structure[(a * n + b) * n + c];
                    }
                    gamma[(b * n + c) * n + d] = s;
                }
            }
        }
        let nonzero = sparsify(&gamma, n);
        Ok(Self {
            dim: n,
            metric,
            gamma,
            structure,
            nonzero,
            labels: (0..n).map(|i| format!("e{i}")).collect(),
            offsets: vec![0],
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.dim);
        self.labels = labels;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Start index of each summand when built by [`direct_sum`].
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Coefficient of `e_c` in `[e_a, e_b]`.
    pub fn gamma(&self, a: usize, b: usize, c: usize) -> f64 {
        self.gamma[(a * self.dim + b) * self.dim + c]
    }

    /// `<e_a, [e_b, e_c]>`.
    pub fn structure(&self, a: usize, b: usize, c: usize) -> f64 {
        self.structure[(a * self.dim + b) * self.dim + c]
    }

    /// Nonzero entries of `[e_a, e_b]`.
    pub fn bracket_terms(&self, a: usize, b: usize) -> &[(usize, f64)] {
        &self.nonzero[a * self.dim + b]
    }

    pub fn pair(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.metric * y)[0]
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                if y[b] == 0.0 {
                    continue;
                }
                let w = x[a] * y[b];
                for &(c, v) in &self.nonzero[a * n + b] {
                    out[c] += w * v;
                }
            }
        }
        out
    }

    /// Matrix of `y ↦ [x, y]`.
    pub fn ad(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            if x[a] == 0.0 {
                continue;
            }
            for b in 0..n {
                for &(c, v) in &self.nonzero[a * n + b] {
                    m[(c, b)] += x[a] * v;
                }
            }
        }
        m
    }

    pub fn ad_basis(&self, a: usize) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for b in 0..n {
            for &(c, v) in &self.nonzero[a * n + b] {
                m[(c, b)] = v;
            }
        }
        m
    }

    pub fn is_abelian(&self) -> bool {
        self.nonzero.iter().all(|v| v.is_empty())
    }

    /// `K(X, Y) = Tr(ad_X ad_Y)`.
    pub fn killing_form(&self) -> DMatrix<f64> {
        let n = self.dim;
        let ads: Vec<DMatrix<f64>> = (0..n).map(|a| self.ad_basis(a)).collect();
        let mut k = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = ads[a].component_mul(&ads[b].transpose()).sum();
                k[(a, b)] = v;
                k[(b, a)] = v;
            }
        }
        k
    }

    /// Replaces the pairing by `Killing / lambda`, keeping the bracket.
    pub fn rescale_metric(&self, lambda: f64) -> Result<Self> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be a nonzero finite number".into()));
        }
        let k = self.killing_form() / lambda;
        let mut out = Self::new(k, self.gamma.clone())?;
        out.labels = self.labels.clone();
        out.offsets = self.offsets.clone();
        Ok(out)
    }

    /// Re-expresses the algebra in the basis given by the columns of `b`.
    pub fn change_basis(&self, b: &DMatrix<f64>) -> Result<Self> {
        let n = self.dim;
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.ncols() });
        }
        let binv = linalg::inverse(b, "basis change")?;
        let cols: Vec<DVector<f64>> = (0..n).map(|i| b.column(i).into_owned()).collect();
        let mut gamma = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let br = &binv * self.bracket(&cols[i], &cols[j]);
                for k in 0..n {
                    let v = br[k];
                    gamma[(i * n + j) * n + k] = if v.abs() < 1e-15 { 0.0 } else { v };
                }
            }
        }
        let metric = linalg::symmetrize(&(b.transpose() * &self.metric * b));
        Self::new(metric, gamma)
    }

    /// Basis change orthonormalizing `a0` and `a1` separately; the index
    /// partition is unchanged.
    pub fn adapted_orthonormal(&self, split: &InvolutiveSplitting) -> Result<Self> {
        let n = self.dim;
        let mut b = DMatrix::<f64>::zeros(n, n);
        for part in [&split.indices0, &split.indices1] {
            if part.is_empty() {
                continue;
            }
            let mut span = DMatrix::zeros(n, part.len());
            for (j, &i) in part.iter().enumerate() {
                span[(i, j)] = 1.0;
            }
            let on = linalg::orthonormalize(&span, &self.metric)?;
            for (j, &i) in part.iter().enumerate() {
                b.set_column(i, &on.column(j));
            }
        }
        let mut out = self.change_basis(&b)?;
        out.labels = self.labels.clone();
        Ok(out)
    }
}

/// Block-diagonal sum; the start offset of each block is recorded.
pub fn direct_sum(blocks: &[&QuadraticLieAlgebra]) -> Result<QuadraticLieAlgebra> {
    if blocks.is_empty() {
        return Err(Error::InvalidDimension("direct sum of an empty list".into()));
    }
    let n: usize = blocks.iter().map(|b| b.dim).sum();
    let mut metric = DMatrix::zeros(n, n);
    let mut gamma = vec![0.0; n * n * n];
    let mut labels = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut off = 0;
    for blk in blocks {
        let m = blk.dim;
        offsets.push(off);
        metric.view_mut((off, off), (m, m)).copy_from(&blk.metric);
        for a in 0..m {
            for b in 0..m {
                for &(c, v) in blk.bracket_terms(a, b) {
                    gamma[((off + a) * n + off + b) * n + off + c] = v;
                }
            }
        }
        labels.extend(blk.labels.iter().cloned());
        off += m;
    }
    let mut out = QuadraticLieAlgebra::new(metric, gamma)?;
    out.labels = labels;
    out.offsets = offsets;
    Ok(out)
}

/// Invariant checks: total antisymmetry of the lowered tensor, Jacobi
/// identity, metric symmetry; condition number reported as info.
pub fn check(a: &QuadraticLieAlgebra) -> ResidualReport {
    let n = a.dim;
    let mut anti = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = a.structure(i, j, k);
                anti = anti
                    .max((c + a.structure(i, k, j)).abs())
                    .max((c + a.structure(j, i, k)).abs())
                    .max((c - a.structure(j, k, i)).abs());
            }
        }
    }
    let mut jac = 0.0f64;
    let mut acc = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                acc.iter_mut().for_each(|v| *v = 0.0);
                for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                    for &(d, v) in a.bracket_terms(x, y) {
                        for &(e, w) in a.bracket_terms(d, z) {
                            acc[e] += v * w;
                        }
                    }
                }
                jac = acc.iter().fold(jac, |m, v| m.max(v.abs()));
            }
        }
    }
    let mut rep = ResidualReport::new(JACOBI_TOL);
    rep.push_with_tol("antisymmetry", anti, ANTISYMMETRY_TOL);
    rep.push("jacobi", jac);
    rep.push_with_tol(
        "metric_symmetry",
        linalg::max_abs(&(a.metric() - a.metric().transpose())),
        ANTISYMMETRY_TOL,
    );
    rep.note("dim", n);
    rep.note("condition_number", condition_number(a.metric()));
    rep
}

/// Verifies `[a0,a0] ⊂ a0`, `[a1,a1] ⊂ a0`, `[a0,a1] ⊂ a1` and `<a0,a1> = 0`.
pub fn grading_check(a: &QuadraticLieAlgebra, split: &InvolutiveSplitting) -> ResidualReport {
    let mut rep = ResidualReport::new(GRADING_TOL);
    let n = a.dim;
    if split.dim() != n {
        rep.push("partition", f64::INFINITY);
        return rep;
    }
    let mut in0 = vec![false; n];
    for &i in &split.indices0 {
        in0[i] = true;
    }
    let mut r00 = 0.0f64;
    let mut r11 = 0.0f64;
    let mut r01 = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            let target_even = in0[x] == in0[y];
            for &(c, v) in a.bracket_terms(x, y) {
                if in0[c] != target_even {
                    match (in0[x], in0[y]) {
                        (true, true) => r00 = r00.max(v.abs()),
                        (false, false) => r11 = r11.max(v.abs()),
                        _ => r01 = r01.max(v.abs()),
                    }
                }
            }
        }
    }
    let mut orth = 0.0f64;
    for &i in &split.indices0 {
        for &j in &split.indices1 {
            orth = orth.max(a.metric()[(i, j)].abs());
        }
    }
    rep.push("even_even", r00);
    rep.push("odd_odd", r11);
    rep.push("even_odd", r01);
    rep.push("orthogonality", orth);
    rep
}
