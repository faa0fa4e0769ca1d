//! Matrix realizations of so(p,q), su(n) and abelian algebras, plus the
//! adapted involutions shipped with them.

use super::{InvolutiveSplitting, QuadraticLieAlgebra};
use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type CMat = DMatrix<Complex64>;

/// Snaps values within rounding distance of 0, ±1/2 or ±1.
fn snap(v: f64) -> f64 {
    for t in [0.0, 0.5, -0.5, 1.0, -1.0] {
        if (v - t).abs() < 1e-13 {
            return t;
        }
    }
    v
}

/// Structure constants of the real span of `basis`, with the real trace
/// form `Re Tr(XY)` as pairing.
fn from_matrices(basis: &[CMat]) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let n = basis.len();
    let mut trace = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            trace[(i, j)] = snap((&basis[i] * &basis[j]).trace().re);
        }
    }
    let tinv = linalg::inverse(&trace, "trace form")?;
    let mut gamma = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let br = &basis[i] * &basis[j] - &basis[j] * &basis[i];
            let proj: Vec<f64> = (0..n).map(|l| (&br * &basis[l]).trace().re).collect();
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += tinv[(k, l)] * proj[l];
                }
                gamma[(i * n + j) * n + k] = snap(s);
            }
        }
    }
    Ok((trace, gamma))
}

/// so(p,q) on generators `X_ij = E_ij η_j − E_ji η_i` (i<j, lexicographic),
/// `η = diag(+^p, −^q)`, paired by the trace form.
pub fn build_so(p: usize, q: usize) -> Result<QuadraticLieAlgebra> {
    let n = p + q;
    if n < 2 {
        return Err(Error::InvalidDimension(format!("so({p},{q}) needs p+q >= 2")));
    }
    let eta: Vec<f64> = (0..n).map(|i| if i < p { 1.0 } else { -1.0 }).collect();
    let mut basis = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut m = CMat::zeros(n, n);
            m[(i, j)] = Complex64::new(eta[j], 0.0);
            m[(j, i)] = Complex64::new(-eta[i], 0.0);
            basis.push(m);
            labels.push(format!("X{}.{}", i + 1, j + 1));
        }
    }
    let (metric, gamma) = from_matrices(&basis)?;
    Ok(QuadraticLieAlgebra::new(metric, gamma)?.with_labels(labels))
}

/// su(n) on the basis `(E_jk − E_kj)/√2`, `i(E_jk + E_kj)/√2` for each j<k
/// in lexicographic order, followed by the diagonal `i·H_d`. All basis
/// elements satisfy `Tr(X_a X_b) = −δ_ab`.
pub fn build_su(n: usize) -> Result<QuadraticLieAlgebra> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("su({n}) needs n >= 2")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::new();
    let mut labels = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let mut a = CMat::zeros(n, n);
            a[(j, k)] = Complex64::new(s, 0.0);
            a[(k, j)] = Complex64::new(-s, 0.0);
            basis.push(a);
            labels.push(format!("A{}.{}", j + 1, k + 1));
            let mut b = CMat::zeros(n, n);
            b[(j, k)] = Complex64::new(0.0, s);
            b[(k, j)] = Complex64::new(0.0, s);
            basis.push(b);
            labels.push(format!("S{}.{}", j + 1, k + 1));
        }
    }
    for d in 1..n {
        let norm = 1.0 / ((d * (d + 1)) as f64).sqrt();
        let mut h = CMat::zeros(n, n);
        for i in 0..d {
            h[(i, i)] = Complex64::new(0.0, norm);
        }
        h[(d, d)] = Complex64::new(0.0, -(d as f64) * norm);
        basis.push(h);
        labels.push(format!("H{d}"));
    }
    let (metric, gamma) = from_matrices(&basis)?;
    Ok(QuadraticLieAlgebra::new(metric, gamma)?.with_labels(labels))
}

/// Abelian algebra with a positive definite pairing.
pub fn build_abelian(k: usize, metric: &DMatrix<f64>) -> Result<QuadraticLieAlgebra> {
    if k == 0 || metric.nrows() != k || metric.ncols() != k {
        return Err(Error::InvalidDimension(format!("abelian algebra needs a {k}x{k} metric")));
    }
    match linalg::signature(metric, 1e-12) {
        Ok((p, 0)) if p == k => {}
        _ => return Err(Error::Signature("abelian metric must be positive definite".into())),
    }
    let labels = (0..k).map(|i| format!("B{}", i + 1)).collect();
    Ok(QuadraticLieAlgebra::new(metric.clone(), vec![0.0; k * k * k])?.with_labels(labels))
}

/// Named adapted involutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Involution {
    /// so(p,q) ⊃ generators not involving the last index.
    SoLast,
    /// su(n) ⊃ s(u(1) ⊕ u(n−1)); the odd part is spanned by generators
    /// coupling the first index to the others.
    SuBlock,
    /// su(n) ⊃ so(n), the real antisymmetric generators.
    SuReal,
    /// Everything odd (used for abelian factors).
    Trivial,
}

impl Involution {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "so-last" => Ok(Self::SoLast),
            "su-block" => Ok(Self::SuBlock),
            "su-real" => Ok(Self::SuReal),
            "trivial" => Ok(Self::Trivial),
            _ => Err(Error::Config(format!("unknown involution scheme '{s}'"))),
        }
    }
}

/// Index partition of the shipped involution `scheme` on an algebra built by
/// this module; `labels` identifies the generators.
pub fn involution(a: &QuadraticLieAlgebra, scheme: Involution) -> Result<InvolutiveSplitting> {
    let labels = a.labels();
    let n = a.dim();
    let parse_pair = |l: &str| -> Option<(usize, usize)> {
        let (i, j) = l.get(1..)?.split_once('.')?;
        Some((i.parse().ok()?, j.parse().ok()?))
    };
    let even: Vec<usize> = match scheme {
        Involution::Trivial => vec![],
        Involution::SoLast => {
            if !labels.iter().all(|l| l.starts_with('X')) {
                return Err(Error::Config("so-last needs an so(p,q) basis".into()));
            }
            // dimension N(N-1)/2 determines N
            let big_n = (1..).find(|m| m * (m - 1) / 2 >= n).unwrap_or(2);
            (0..n)
                .filter(|&i| parse_pair(&labels[i]).map(|(_, j)| j != big_n).unwrap_or(true))
                .collect()
        }
        Involution::SuBlock => {
            if !labels.iter().any(|l| l.starts_with('H')) {
                return Err(Error::Config("su-block needs an su(n) basis".into()));
            }
            (0..n)
                .filter(|&i| {
                    let l = &labels[i];
                    l.starts_with('H') || parse_pair(l).map(|(j, _)| j != 1).unwrap_or(false)
                })
                .collect()
        }
        Involution::SuReal => {
            if !labels.iter().any(|l| l.starts_with('H')) {
                return Err(Error::Config("su-real needs an su(n) basis".into()));
            }
            (0..n).filter(|&i| labels[i].starts_with('A')).collect()
        }
    };
    Ok(InvolutiveSplitting::new(n, even))
}
