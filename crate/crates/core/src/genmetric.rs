//! Generalized (pseudo)metrics `V+ ⊂ g`: subspaces on which the pairing is
//! nondegenerate, with `V- = V+^⊥`.

use crate::error::{Error, Result};
use crate::liealg::{DoubleAlgebra, QuadraticLieAlgebra};
use crate::linalg;
use crate::report::ResidualReport;
use nalgebra::{DMatrix, DVector};

/// Normalized Gram determinant below this counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;
pub const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GeneralizedMetric {
    metric: DMatrix<f64>,
    span: DMatrix<f64>,
    span_minus: DMatrix<f64>,
    gram_plus_inv: DMatrix<f64>,
    gram_minus_inv: DMatrix<f64>,
    p_plus: DMatrix<f64>,
}

fn normalized_gram_det(span: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
    let r = span.ncols();
    if r == 0 {
        return 1.0;
    }
    let mut s = span.clone();
    for mut c in s.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c /= n;
        }
    }
    let scale = linalg::max_abs(g).max(f64::MIN_POSITIVE);
    let gram = s.transpose() * g * s / scale;
    gram.determinant().abs()
}

impl GeneralizedMetric {
    /// `span` columns span V+; a basis of V- is chosen automatically.
    pub fn new(alg: &QuadraticLieAlgebra, span: DMatrix<f64>) -> Result<Self> {
        Self::from_metric(alg.metric(), span, None)
    }

    /// As [`new`](Self::new) with an explicit V- basis, validated for
    /// orthogonality and completeness.
    pub fn with_minus(
        alg: &QuadraticLieAlgebra,
        span: DMatrix<f64>,
        span_minus: DMatrix<f64>,
    ) -> Result<Self> {
        Self::from_metric(alg.metric(), span, Some(span_minus))
    }

    pub fn from_metric(
        g: &DMatrix<f64>,
        span: DMatrix<f64>,
        span_minus: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let n = g.nrows();
        if span.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: span.nrows() });
        }
        let r = span.ncols();
        if r == 0 || r > n {
            return Err(Error::InvalidDimension(format!("V+ must have rank in 1..={n}, got {r}")));
        }
        let det = normalized_gram_det(&span, g);
        if !(det > DEGENERACY_TOL) {
            return Err(Error::Degenerate(format!("pairing restricted to V+ is degenerate (normalized det {det:e})")));
        }
        let gram_plus = span.transpose() * g * &span;
        let gram_plus_inv = linalg::inverse(&gram_plus, "V+ Gram matrix")?;
        let p_plus = &span * &gram_plus_inv * span.transpose() * g;
        let span_minus = match span_minus {
            Some(m) => {
                if m.nrows() != n || m.ncols() != n - r {
                    return Err(Error::DimensionMismatch { expected: n - r, got: m.ncols() });
                }
                let cross = span.transpose() * g * &m;
                let scale = linalg::max_abs(g).max(1.0) * (1.0 + linalg::max_abs(&span)) * (1.0 + linalg::max_abs(&m));
                if linalg::max_abs(&cross) > PROJECTOR_TOL * scale {
                    return Err(Error::Degenerate("V- basis is not orthogonal to V+".into()));
                }
                m
            }
            None => {
                let sg = span.transpose() * g;
                let m = sg.transpose() * &sg;
                let (_, vecs) = linalg::sym_eigen_sorted(&m);
                vecs.columns(0, n - r).into_owned()
            }
        };
        let gram_minus_inv = if n == r {
            DMatrix::zeros(0, 0)
        } else {
            if normalized_gram_det(&span_minus, g) <= DEGENERACY_TOL {
                return Err(Error::Degenerate("pairing restricted to V- is degenerate".into()));
            }
            linalg::inverse(&(span_minus.transpose() * g * &span_minus), "V- Gram matrix")?
        };
        Ok(Self { metric: g.clone(), span, span_minus, gram_plus_inv, gram_minus_inv, p_plus })
    }

    pub fn ambient_dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn dim_plus(&self) -> usize {
        self.span.ncols()
    }

    pub fn dim_minus(&self) -> usize {
        self.span_minus.ncols()
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn span(&self) -> &DMatrix<f64> {
        &self.span
    }

    pub fn span_minus(&self) -> &DMatrix<f64> {
        &self.span_minus
    }

    pub fn gram_plus(&self) -> DMatrix<f64> {
        self.span.transpose() * &self.metric * &self.span
    }

    pub fn gram_minus(&self) -> DMatrix<f64> {
        self.span_minus.transpose() * &self.metric * &self.span_minus
    }

    pub fn gram_plus_inv(&self) -> &DMatrix<f64> {
        &self.gram_plus_inv
    }

    pub fn gram_minus_inv(&self) -> &DMatrix<f64> {
        &self.gram_minus_inv
    }

    /// Columns `e^a` with `<e^a, e_b> = δ^a_b` inside V+.
    pub fn duals_plus(&self) -> DMatrix<f64> {
        &self.span * &self.gram_plus_inv
    }

    pub fn duals_minus(&self) -> DMatrix<f64> {
        &self.span_minus * &self.gram_minus_inv
    }

    pub fn projector_plus(&self) -> &DMatrix<f64> {
        &self.p_plus
    }

    pub fn projector_minus(&self) -> DMatrix<f64> {
        DMatrix::identity(self.ambient_dim(), self.ambient_dim()) - &self.p_plus
    }

    /// `P+ − P-`.
    pub fn reflection(&self) -> DMatrix<f64> {
        &self.p_plus * 2.0 - DMatrix::identity(self.ambient_dim(), self.ambient_dim())
    }

    pub fn project_plus(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.p_plus * v
    }

    pub fn project_minus(&self, v: &DVector<f64>) -> DVector<f64> {
        v - &self.p_plus * v
    }

    /// Eigenvalue signs of the V+ Gram matrix.
    pub fn signature(&self) -> Result<(usize, usize)> {
        linalg::signature(&self.gram_plus(), 1e-10)
    }

    /// Max violation of idempotence, self-adjointness, completeness and
    /// orthogonality of V-.
    pub fn projector_residual(&self) -> f64 {
        let p = &self.p_plus;
        let g = &self.metric;
        let idem = linalg::max_abs(&(p * p - p));
        let adj = linalg::max_abs(&(p.transpose() * g - g * p));
        let orth = linalg::max_abs(&(self.span.transpose() * g * self.projector_minus()));
        let refl = self.reflection();
        let inv = linalg::max_abs(&(&refl * &refl - DMatrix::identity(g.nrows(), g.nrows())));
        idem.max(adj).max(orth).max(inv)
    }

    /// Moves each `e_a` to `e_a + ε Σ φ[a, ā] e_ā`.
    pub fn deform(&self, phi: &DMatrix<f64>, eps: f64) -> Result<Self> {
        if phi.nrows() != self.dim_plus() || phi.ncols() != self.dim_minus() {
            return Err(Error::DimensionMismatch { expected: self.dim_plus(), got: phi.nrows() });
        }
        let span = &self.span + &self.span_minus * phi.transpose() * eps;
        self.moved_to(span)
    }

    /// New V+ spanned by `span`, carrying the V- frame along by projection.
    pub fn moved_to(&self, span: DMatrix<f64>) -> Result<Self> {
        let det = normalized_gram_det(&span, &self.metric);
        if !(det > DEGENERACY_TOL) {
            return Err(Error::Degenerate(format!("deformed V+ is degenerate (normalized det {det:e})")));
        }
        let gram = span.transpose() * &self.metric * &span;
        let ginv = linalg::inverse(&gram, "V+ Gram matrix")?;
        let p = &span * &ginv * span.transpose() * &self.metric;
        let minus = &self.span_minus - &p * &self.span_minus;
        Self::from_metric(&self.metric, span, Some(minus))
    }

    /// Same subspaces, frames orthonormalized to `<e_a, e_b> = ±δ_ab`.
    pub fn orthonormalized(&self) -> Result<Self> {
        let s = linalg::orthonormalize(&self.span, &self.metric)?;
        let m = if self.dim_minus() > 0 {
            linalg::orthonormalize(&self.span_minus, &self.metric)?
        } else {
            self.span_minus.clone()
        };
        Self::from_metric(&self.metric, s, Some(m))
    }

    /// First-order change of `P+` along [`deform`](Self::deform).
    pub fn projector_derivative(&self, phi: &DMatrix<f64>) -> DMatrix<f64> {
        let d = &self.span_minus * phi.transpose();
        let g = &self.metric;
        &d * &self.gram_plus_inv * self.span.transpose() * g
            + &self.span * &self.gram_plus_inv * d.transpose() * g
    }
}

/// `V+ = (1+t) a1` inside a graded double; V- is framed by `(1−t) a1`,
/// `a0` and `t a0` in that order.
pub fn vplus_of_double(d: &DoubleAlgebra) -> Result<GeneralizedMetric> {
    let split = d
        .grading
        .as_ref()
        .ok_or_else(|| Error::MissingGrading("double carries no involution".into()))?;
    if split.indices1.is_empty() {
        return Err(Error::Degenerate("odd part is zero, V+ would be trivial".into()));
    }
    let n = d.base_dim();
    let cols_plus: Vec<DVector<f64>> = split.indices1.iter().map(|&i| d.embed_basis(1.0, 1.0, i)).collect();
    let mut cols_minus: Vec<DVector<f64>> =
        split.indices1.iter().map(|&i| d.embed_basis(1.0, -1.0, i)).collect();
    cols_minus.extend(split.indices0.iter().map(|&i| d.embed_basis(1.0, 0.0, i)));
    cols_minus.extend(split.indices0.iter().map(|&i| d.embed_basis(0.0, 1.0, i)));
    let plus = DMatrix::from_columns(&cols_plus);
    let minus = if cols_minus.is_empty() { DMatrix::zeros(2 * n, 0) } else { DMatrix::from_columns(&cols_minus) };
    GeneralizedMetric::with_minus(&d.algebra, plus, minus)
}

pub fn signature(v: &GeneralizedMetric) -> Result<(usize, usize)> {
    v.signature()
}

pub fn deform(v: &GeneralizedMetric, phi: &DMatrix<f64>, eps: f64) -> Result<GeneralizedMetric> {
    v.deform(phi, eps)
}

/// An isotropic, unimodular subalgebra `s ⊂ g`.
#[derive(Debug, Clone)]
pub struct IsotropicSubalgebra {
    span: DMatrix<f64>,
}

pub const SUBALGEBRA_TOL: f64 = 1e-9;

impl IsotropicSubalgebra {
    /// Validates isotropy, closure and unimodularity.
    pub fn new(alg: &QuadraticLieAlgebra, span: DMatrix<f64>) -> Result<Self> {
        let s = Self { span };
        let rep = s.report(alg);
        if !rep.passed() {
            return Err(Error::InvalidParameter(format!(
                "not an isotropic unimodular subalgebra: {:?}",
                rep.failed()
            )));
        }
        Ok(s)
    }

    pub fn span(&self) -> &DMatrix<f64> {
        &self.span
    }

    pub fn dim(&self) -> usize {
        self.span.ncols()
    }

    pub fn report(&self, alg: &QuadraticLieAlgebra) -> ResidualReport {
        let mut rep = ResidualReport::new(SUBALGEBRA_TOL);
        let s = &self.span;
        let k = s.ncols();
        if s.nrows() != alg.dim() {
            rep.push("dimension", f64::INFINITY);
            return rep;
        }
        rep.push_with_tol("isotropy", linalg::max_abs(&(s.transpose() * alg.metric() * s)), 1e-10);
        let pinv = linalg::pinv(s, 1e-12);
        let mut closure = 0.0f64;
        let mut trace = 0.0f64;
        let cols: Vec<DVector<f64>> = (0..k).map(|i| s.column(i).into_owned()).collect();
        for i in 0..k {
            let mut tr = 0.0;
            for j in 0..k {
                let b = alg.bracket(&cols[i], &cols[j]);
                let coeffs = &pinv * &b;
                closure = closure.max((&b - s * &coeffs).amax());
                tr += coeffs[j];
            }
            trace = trace.max(tr.abs());
        }
        rep.push("closure", closure);
        rep.push("unimodularity", trace);
        rep
    }
}

pub const ADMISSIBLE_TOL: f64 = 1e-10;

/// `max |<s, V+>|` and `max |P-[s, V+]|`.
pub fn admissible_check(
    alg: &QuadraticLieAlgebra,
    v: &GeneralizedMetric,
    s: &IsotropicSubalgebra,
) -> ResidualReport {
    let mut rep = ResidualReport::new(ADMISSIBLE_TOL);
    let orth = linalg::max_abs(&(s.span().transpose() * alg.metric() * v.span()));
    let pm = v.projector_minus();
    let mut inv = 0.0f64;
    for i in 0..s.dim() {
        let ad = alg.ad(&s.span().column(i).into_owned());
        inv = inv.max(linalg::max_abs(&(&pm * ad * v.span())));
    }
    rep.push("orthogonality", orth);
    rep.push("invariance", inv);
    rep
}
