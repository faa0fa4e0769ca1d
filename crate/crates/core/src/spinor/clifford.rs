use super::{ExteriorOp, Letter, Spinor};
use crate::error::{Error, Result};
use crate::genmetric::GeneralizedMetric;
use crate::liealg::DoubleAlgebra;
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

const ISOTROPY_TOL: f64 = 1e-10;
const ORTHONORMAL_TOL: f64 = 1e-10;

/// `V = L1 ⊕ L2` with both summands lagrangian. Spinors live on `Λ L1`,
/// with `L1` acting by wedge and `L2` by contraction through the pairing.
#[derive(Clone, Debug)]
pub struct LagrangianSplitting {
    metric: DMatrix<f64>,
    l1: DMatrix<f64>,
    l2: DMatrix<f64>,
    pairing: DMatrix<f64>,
    coords: DMatrix<f64>,
}

impl LagrangianSplitting {
    pub fn new(metric: &DMatrix<f64>, l1: DMatrix<f64>, l2: DMatrix<f64>) -> Result<Self> {
        let n = metric.nrows();
        if n % 2 != 0 {
            return Err(Error::InvalidDimension(format!("odd ambient dimension {n} has no lagrangian splitting")));
        }
        let m = n / 2;
        for b in [&l1, &l2] {
            if b.nrows() != n || b.ncols() != m {
                return Err(Error::DimensionMismatch { expected: m, got: b.ncols() });
            }
        }
        let scale = linalg::max_abs(metric).max(1.0);
        let iso1 = linalg::max_abs(&(l1.transpose() * metric * &l1));
        let iso2 = linalg::max_abs(&(l2.transpose() * metric * &l2));
        if iso1.max(iso2) > ISOTROPY_TOL * scale {
            return Err(Error::Degenerate(format!("splitting is not lagrangian (isotropy defect {:e})", iso1.max(iso2))));
        }
        let pairing = l1.transpose() * metric * &l2;
        linalg::inverse(&pairing, "lagrangian pairing block")?;
        let mut both = DMatrix::zeros(n, n);
        both.columns_mut(0, m).copy_from(&l1);
        both.columns_mut(m, m).copy_from(&l2);
        let coords = linalg::inverse(&both, "lagrangian frame")?;
        Ok(LagrangianSplitting { metric: metric.clone(), l1, l2, pairing, coords })
    }

    /// `L1 = t a`, `L2 = a` inside a double.
    pub fn of_double(d: &DoubleAlgebra) -> Result<Self> {
        let n = d.base_dim();
        let l1 = DMatrix::from_columns(&(0..n).map(|i| d.embed_basis(0.0, 1.0, i)).collect::<Vec<_>>());
        let l2 = DMatrix::from_columns(&(0..n).map(|i| d.embed_basis(1.0, 0.0, i)).collect::<Vec<_>>());
        Self::new(d.algebra.metric(), l1, l2)
    }

    pub fn rank(&self) -> usize {
        self.l1.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn l1(&self) -> &DMatrix<f64> {
        &self.l1
    }

    pub fn l2(&self) -> &DMatrix<f64> {
        &self.l2
    }

    pub fn pairing_block(&self) -> &DMatrix<f64> {
        &self.pairing
    }

    /// Coordinates of `u` along the `L1` and `L2` frames.
    pub fn decompose(&self, u: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        if u.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: u.len() });
        }
        let x = &self.coords * u;
        let m = self.rank();
        Ok((x.rows(0, m).into_owned(), x.rows(m, m).into_owned()))
    }

    /// Clifford action of `u` as an exterior operator.
    pub fn vector_op(&self, u: &DVector<f64>) -> Result<ExteriorOp> {
        let (x1, x2) = self.decompose(u)?;
        let y = &self.pairing * x2;
        let mut op = ExteriorOp::new(self.rank());
        for i in 0..self.rank() {
            op.push(x1[i], vec![Letter::Wedge(i)]);
            op.push(y[i], vec![Letter::Contract(i)]);
        }
        Ok(op)
    }
}

/// `u · F`: wedge with the `L1` part plus contraction with the `L2` part.
pub fn clifford_apply(u: &DVector<f64>, f: &Spinor, split: &LagrangianSplitting) -> Result<Spinor> {
    if f.rank() != split.rank() {
        return Err(Error::DimensionMismatch { expected: split.rank(), got: f.rank() });
    }
    split.vector_op(u)?.apply(f)
}

/// `scale · v_1 v_2 … v_k` in the Clifford algebra; `v_k` acts first.
#[derive(Clone, Debug)]
pub struct CliffordOp {
    pub factors: Vec<DVector<f64>>,
    pub scale: Complex64,
}

impl CliffordOp {
    pub fn vector(u: DVector<f64>) -> Self {
        CliffordOp { factors: vec![u], scale: Complex64::new(1.0, 0.0) }
    }

    pub fn word(factors: Vec<DVector<f64>>) -> Self {
        CliffordOp { factors, scale: Complex64::new(1.0, 0.0) }
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn parity(&self) -> usize {
        self.factors.len() % 2
    }

    /// Graded anti-automorphism, `(xy)^T = (−1)^{|x||y|} y^T x^T`, with
    /// `u^T = i u` on vectors.
    pub fn transpose(&self) -> Self {
        let k = self.factors.len();
        let mut f = self.factors.clone();
        f.reverse();
        let sign = if (k * k.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        CliffordOp { factors: f, scale: self.scale * super::i_pow(k) * sign }
    }

    pub fn apply(&self, f: &Spinor, split: &LagrangianSplitting) -> Result<Spinor> {
        let mut out = f.clone();
        for u in self.factors.iter().rev() {
            out = clifford_apply(u, &out, split)?;
        }
        Ok(out.scale(self.scale))
    }
}

/// Oriented frame of `V+` with `<e_a, e_b> = ±δ_ab`, plus the count of
/// negative directions. The given frame is kept if already orthonormal;
/// otherwise it is orthonormalized and the orientation restored.
pub fn r_vplus_frame(v: &GeneralizedMetric) -> Result<(DMatrix<f64>, usize)> {
    let span = v.span();
    let g = v.metric();
    let gram = span.transpose() * g * span;
    let r = span.ncols();
    let is_on = (0..r).all(|a| {
        (0..r).all(|b| {
            let x = gram[(a, b)];
            if a == b {
                (x.abs() - 1.0).abs() < ORTHONORMAL_TOL
            } else {
                x.abs() < ORTHONORMAL_TOL
            }
        })
    });
    let frame = if is_on {
        span.clone()
    } else {
        let mut e = linalg::orthonormalize(span, g)?;
        let t = linalg::pinv(span, 1e-12) * &e;
        if t.determinant() < 0.0 {
            let last = e.column(r - 1).into_owned();
            e.set_column(r - 1, &(-last));
        }
        e
    };
    let q = (0..r).filter(|&a| (frame.column(a).transpose() * g * frame.column(a))[0] < 0.0).count();
    Ok((frame, q))
}

/// Sign of `R²` for rank `n` with `q` negative directions, from squaring
/// the ordered product of generators.
pub fn r_squared_sign(n: usize, q: usize) -> f64 {
    if (n * n.saturating_sub(1) / 2 + q) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `R_{V+} = 2^{n/2} e_1 … e_n`, last generator acting first.
pub fn r_vplus_apply(v: &GeneralizedMetric, split: &LagrangianSplitting, f: &Spinor) -> Result<Spinor> {
    if v.ambient_dim() != split.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: split.ambient_dim(), got: v.ambient_dim() });
    }
    let (frame, _) = r_vplus_frame(v)?;
    let s2 = std::f64::consts::SQRT_2;
    let mut out = f.clone();
    for a in (0..frame.ncols()).rev() {
        let u = frame.column(a).into_owned() * s2;
        out = clifford_apply(&u, &out, split)?;
    }
    Ok(out)
}

/// `F = F̂ + R F̂`; only defined when `R² = 1`.
pub fn self_dual_project(v: &GeneralizedMetric, split: &LagrangianSplitting, fhat: &Spinor) -> Result<Spinor> {
    let (frame, q) = r_vplus_frame(v)?;
    if r_squared_sign(frame.ncols(), q) < 0.0 {
        return Err(Error::Signature(format!(
            "R squares to -1 for rank {} with {q} negative directions; no self-dual spinors",
            frame.ncols()
        )));
    }
    Ok(fhat.add(&r_vplus_apply(v, split, fhat)?))
}
