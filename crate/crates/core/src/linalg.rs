//! Small dense helpers shared across modules.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

pub fn inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Degenerate(format!("{what} is not invertible")))
}

/// Eigenvalues sorted ascending with matching eigenvector columns.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(m.nrows(), n);
    for (j, &i) in idx.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Counts of positive and negative eigenvalues; errors on any eigenvalue
/// below `rel_tol` times the spectral radius.
pub fn signature(m: &DMatrix<f64>, rel_tol: f64) -> Result<(usize, usize)> {
    if m.nrows() == 0 {
        return Ok((0, 0));
    }
    let (vals, _) = sym_eigen_sorted(m);
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut p = 0;
    let mut q = 0;
    for v in vals.iter() {
        if v.abs() <= rel_tol * scale {
            return Err(Error::Degenerate(format!("eigenvalue {v:e} is numerically zero")));
        }
        if *v > 0.0 {
            p += 1;
        } else {
            q += 1;
        }
    }
    Ok((p, q))
}

/// Orthonormal basis (columns) of the kernel of a symmetric positive
/// semidefinite matrix.
pub fn psd_kernel(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let (vals, vecs) = sym_eigen_sorted(m);
    let cols: Vec<usize> = (0..n).filter(|&i| vals[i].abs() <= tol).collect();
    let mut out = DMatrix::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        out.set_column(j, &vecs.column(i));
    }
    out
}

/// Moore-Penrose pseudo-inverse with relative singular value cutoff.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, v| a.max(*v));
    let cut = rel_tol * smax;
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let k = svd.singular_values.len();
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for i in 0..k {
        let s = svd.singular_values[i];
        if s > cut && s > 0.0 {
            out += vt.row(i).transpose() * u.column(i).transpose() / s;
        }
    }
    out
}

/// Gram-Schmidt with respect to an indefinite symmetric form `g`. Columns
/// come out with `<e_a, e_b> = ±δ_ab`, preserving the flag of the input
/// columns when pivots allow it. Falls back to an eigen-decomposition of
/// the Gram matrix when a pivot is close to null.
pub fn orthonormalize(span: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let r = span.ncols();
    let mut out = DMatrix::zeros(span.nrows(), r);
    let mut norms = vec![0.0; r];
    let scale = max_abs(g).max(f64::MIN_POSITIVE);
    let mut ok = true;
    for a in 0..r {
        let mut v = span.column(a).into_owned();
        for b in 0..a {
            let e = out.column(b);
            let proj = (e.transpose() * g * &v)[0] / norms[b];
            v -= e * proj;
        }
        let nn = (v.transpose() * g * &v)[0];
        let len2 = v.norm_squared();
        if nn.abs() < 1e-6 * scale * len2 || len2 == 0.0 {
            ok = false;
            break;
        }
        let s = nn.signum();
        out.set_column(a, &(v / nn.abs().sqrt()));
        norms[a] = s;
    }
    if ok {
        return Ok(out);
    }
    let gram = span.transpose() * g * span;
    let (vals, vecs) = sym_eigen_sorted(&gram);
    let smax = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut t = DMatrix::zeros(r, r);
    for i in 0..r {
        if vals[i].abs() <= 1e-12 * smax.max(f64::MIN_POSITIVE) {
            return Err(Error::Degenerate("frame cannot be orthonormalized".into()));
        }
        t.set_column(i, &(vecs.column(i) / vals[i].abs().sqrt()));
    }
    Ok(span * t)
}

/// Least-squares residual of `v` against the column span of `basis`.
pub fn span_residual(basis: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    if basis.ncols() == 0 {
        return v.norm();
    }
    let p = pinv(basis, 1e-12);
    let coeffs = &p * v;
    (v - basis * coeffs).norm()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}
