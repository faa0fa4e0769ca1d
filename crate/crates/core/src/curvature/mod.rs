//! Generalized Ricci tensor, scalar curvature and action over a point.
//!
//! Over a point the anchor vanishes, so a divergence is `a ↦ <ε, a>` and
//! `GRic(a, b) = <ε, [b, a]+> − Tr_{V+}(x ↦ [[x, b]-, a]+)`.

mod flow;

pub use flow::{ricci_flow, FlowState, FlowTrajectory};

use crate::error::{Error, Result};
use crate::genmetric::{GeneralizedMetric, IsotropicSubalgebra};
use crate::liealg::QuadraticLieAlgebra;
use crate::linalg;
use crate::report::ResidualReport;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub eps: DVector<f64>,
}

impl Divergence {
    pub fn zero(n: usize) -> Self {
        Self { eps: DVector::zeros(n) }
    }

    pub fn new(eps: DVector<f64>) -> Self {
        Self { eps }
    }

    pub fn is_zero(&self) -> bool {
        self.eps.iter().all(|v| *v == 0.0)
    }
}

/// Entries `GRic(e_a, e_ā)` in the frames carried by the metric.
#[derive(Debug, Clone, PartialEq)]
pub struct GRicTensor {
    pub matrix: DMatrix<f64>,
}

impl GRicTensor {
    /// Positive-definite auxiliary norm `sqrt(Σ GRic²)`.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

fn check_dims(alg: &QuadraticLieAlgebra, v: &GeneralizedMetric, div: &Divergence) -> Result<()> {
    if v.ambient_dim() != alg.dim() {
        return Err(Error::DimensionMismatch { expected: alg.dim(), got: v.ambient_dim() });
    }
    if div.eps.len() != alg.dim() {
        return Err(Error::DimensionMismatch { expected: alg.dim(), got: div.eps.len() });
    }
    Ok(())
}

/// Shared kernel for both orientations: rows indexed by `input` columns,
/// columns by `output` columns; traces run over `input` using `duals`.
fn gric_kernel(
    alg: &QuadraticLieAlgebra,
    input: &DMatrix<f64>,
    duals: &DMatrix<f64>,
    p_in: &DMatrix<f64>,
    p_out: &DMatrix<f64>,
    output: &DMatrix<f64>,
    eps: &DVector<f64>,
) -> DMatrix<f64> {
    let g = alg.metric();
    let r = input.ncols();
    let mut out = DMatrix::zeros(r, output.ncols());
    // divergence term <ε, P_in [b, a]> = −ε^T G P_in ad(a) b
    if eps.iter().any(|v| *v != 0.0) {
        let row = eps.transpose() * g * p_in;
        for a in 0..r {
            let ad_a = alg.ad(&input.column(a).into_owned());
            let v = -(&row * &ad_a * output);
            out.row_mut(a).copy_from(&v);
        }
    }
    // trace term Σ_c <[e^c, a], P_out [b, e_c]>
    for c in 0..r {
        let ad_dual = alg.ad(&duals.column(c).into_owned());
        let ad_c = alg.ad(&input.column(c).into_owned());
        let u = &ad_dual * input;
        let w = -(p_out * &ad_c * output);
        out -= u.transpose() * g * w;
    }
    out
}

/// Generalized Ricci tensor in the frames of `v`.
pub fn gric(alg: &QuadraticLieAlgebra, v: &GeneralizedMetric, div: &Divergence) -> Result<GRicTensor> {
    check_dims(alg, v, div)?;
    let m = gric_kernel(
        alg,
        v.span(),
        &v.duals_plus(),
        v.projector_plus(),
        &v.projector_minus(),
        v.span_minus(),
        &div.eps,
    );
    Ok(GRicTensor { matrix: m })
}

/// `GRic_{V+}(a, b)` for explicit vectors `a ∈ V+`, `b ∈ V-`.
pub fn gric_pair(
    alg: &QuadraticLieAlgebra,
    v: &GeneralizedMetric,
    div: &Divergence,
    a: &DVector<f64>,
    b: &DVector<f64>,
) -> f64 {
    let am = DMatrix::from_column_slice(a.len(), 1, a.as_slice());
    let bm = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    // GRic is linear in a; expand a in the V+ frame.
    let coeffs = v.gram_plus_inv() * v.span().transpose() * alg.metric() * &am;
    let row = gric_kernel(alg, v.span(), &v.duals_plus(), v.projector_plus(), &v.projector_minus(), &bm, &div.eps);
    (coeffs.transpose() * row)[0]
}

/// The flipped tensor `GRic_{V-}(e_ā, e_a)`, rows indexed by V-.
pub fn gric_flipped(alg: &QuadraticLieAlgebra, v: &GeneralizedMetric, div: &Divergence) -> Result<DMatrix<f64>> {
    check_dims(alg, v, div)?;
    Ok(gric_kernel(
        alg,
        v.span_minus(),
        &v.duals_minus(),
        &v.projector_minus(),
        v.projector_plus(),
        v.span(),
        &div.eps,
    ))
}

pub const IDENTITY_TOL: f64 = 1e-9;

/// Residual of `GRic_{div'} − GRic_{div} + <[e+, a], b>` with `e = ε' − ε`.
pub fn gric_div_shift_check(
    alg: &QuadraticLieAlgebra,
    v: &GeneralizedMetric,
    div: &Divergence,
    div2: &Divergence,
) -> Result<ResidualReport> {
    let r1 = gric(alg, v, div)?.matrix;
    let r2 = gric(alg, v, div2)?.matrix;
    let e_plus = v.project_plus(&(&div2.eps - &div.eps));
    let shift = v.span().transpose() * alg.ad(&e_plus).transpose() * alg.metric() * v.span_minus();
    let mut rep = ResidualReport::new(IDENTITY_TOL);
    rep.push("shift", linalg::max_abs(&(r2 - r1 + shift)));
    Ok(rep)
}

/// Residual of `GRic_{V-}(b, a) − GRic_{V+}(a, b) − <[ε, a], b>`.
pub fn gric_flip_check(alg: &QuadraticLieAlgebra, v: &GeneralizedMetric, div: &Divergence) -> Result<ResidualReport> {
    let plus = gric(alg, v, div)?.matrix;
    let minus = gric_flipped(alg, v, div)?;
    let corr = v.span().transpose() * alg.ad(&div.eps).transpose() * alg.metric() * v.span_minus();
    let mut rep = ResidualReport::new(IDENTITY_TOL);
    rep.push("flip", linalg::max_abs(&(minus.transpose() - plus - corr)));
    Ok(rep)
}

/// `Σ_ab <P[e_a, e_b], [e^a, e^b]>` for the projector `p`.
fn bracket_square(alg: &QuadraticLieAlgebra, v: &GeneralizedMetric, p: &DMatrix<f64>) -> f64 {
    let s = v.span();
    let d = v.duals_plus();
    let g = alg.metric();
    let r = s.ncols();
    let mut acc = 0.0;
    for a in 0..r {
        let ad_a = alg.ad(&s.column(a).into_owned());
        let ad_da = alg.ad(&d.column(a).into_owned());
        let x = p * &ad_a * s;
        let y = &ad_da * &d;
        acc += (x.transpose() * g * y).trace();
    }
    acc
}

/// `<ε+, ε+> − (1/6) c_abc c^abc − (1/2) c_abā c^abā`.
pub fn scalar_curvature(alg: &QuadraticLieAlgebra, v: &GeneralizedMetric, div: &Divergence) -> Result<f64> {
    check_dims(alg, v, div)?;
    let ep = v.project_plus(&div.eps);
    let eps_term = alg.pair(&ep, &ep);
    let plus = bracket_square(alg, v, v.projector_plus());
    let minus = bracket_square(alg, v, &v.projector_minus());
    Ok(eps_term - plus / 6.0 - minus / 2.0)
}

/// `S = −Δ/2` over a point with unit total measure, at zero divergence.
pub fn action_value(alg: &QuadraticLieAlgebra, v: &GeneralizedMetric) -> Result<f64> {
    Ok(-0.5 * scalar_curvature(alg, v, &Divergence::zero(alg.dim()))?)
}

/// `Σ GRic(e_c, e_b̄) g+^{ca} φ[a, b̄]`: the change of the action along
/// [`GeneralizedMetric::deform`] predicted by the Ricci tensor.
pub fn gric_contraction(v: &GeneralizedMetric, r: &GRicTensor, phi: &DMatrix<f64>) -> f64 {
    (v.gram_plus_inv() * &r.matrix).component_mul(phi).sum()
}

pub const GRADIENT_TOL: f64 = 1e-5;

/// Central difference of the action against the Ricci contraction.
pub fn gradient_check(
    alg: &QuadraticLieAlgebra,
    v: &GeneralizedMetric,
    phi: &DMatrix<f64>,
    h: f64,
) -> Result<ResidualReport> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    let sp = action_value(alg, &v.deform(phi, h)?)?;
    let sm = action_value(alg, &v.deform(phi, -h)?)?;
    let fd = (sp - sm) / (2.0 * h);
    let an = gric_contraction(v, &gric(alg, v, &Divergence::zero(alg.dim()))?, phi);
    let denom = fd.abs().max(an.abs()).max(1e-12);
    let mut rep = ResidualReport::new(GRADIENT_TOL);
    rep.push("relative_error", (fd - an).abs() / denom);
    rep.note("finite_difference", fd);
    rep.note("contraction", an);
    Ok(rep)
}

pub const BACKGROUND_TOL: f64 = 1e-8;

/// `GRic = 0` and `R = 0`.
pub fn background_equations(
    alg: &QuadraticLieAlgebra,
    v: &GeneralizedMetric,
    div: &Divergence,
) -> Result<ResidualReport> {
    let r = gric(alg, v, div)?;
    let s = scalar_curvature(alg, v, div)?;
    let mut rep = ResidualReport::new(BACKGROUND_TOL);
    rep.push("gric", linalg::max_abs(&r.matrix));
    rep.push("scalar", s.abs());
    Ok(rep)
}

/// Square of the generating Dirac operator, `−(1/48) c_αβγ c^αβγ`.
pub fn dsquared(alg: &QuadraticLieAlgebra) -> Result<f64> {
    let ginv = linalg::inverse(alg.metric(), "metric")?;
    // c_αβγ c^αβγ = −Tr(G^{-1} Killing)
    let cc = -(ginv * alg.killing_form()).trace();
    Ok(-cc / 48.0)
}

pub const TANGENCY_TOL: f64 = 1e-10;

/// `max |GRic(e_a, s_i)|` over a frame of V+ and a basis of `s`.
pub fn tangency_check(
    alg: &QuadraticLieAlgebra,
    v: &GeneralizedMetric,
    s: &IsotropicSubalgebra,
) -> Result<ResidualReport> {
    let div = Divergence::zero(alg.dim());
    let m = gric_kernel(
        alg,
        v.span(),
        &v.duals_plus(),
        v.projector_plus(),
        &v.projector_minus(),
        s.span(),
        &div.eps,
    );
    let mut rep = ResidualReport::new(TANGENCY_TOL);
    rep.push("gric_on_s", linalg::max_abs(&m));
    Ok(rep)
}
