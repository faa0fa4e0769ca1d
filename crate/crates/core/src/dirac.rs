//! Dirac generating operator over a point. On a double `B_c ⊗ a` with
//! `L1 = t a` the spinors are `Λ a*` and the operator splits as
//! `d_CE − c ι_f`; the generic Clifford form is kept as an oracle.

use crate::error::{Error, Result};
use crate::liealg::{DoubleAlgebra, InvolutiveSplitting, QuadraticLieAlgebra};
use crate::linalg;
use crate::report::ResidualReport;
use crate::spinor::{
    derivation, invariant_forms, sparse_norm, ExteriorOp, InvariantForms, LagrangianSplitting, Letter, SparseForm, Spinor,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub const INVARIANT_TOL: f64 = 1e-9;

fn raised_pair(a: &QuadraticLieAlgebra) -> Result<Vec<f64>> {
    // f^{αβ}_δ = K^{αα'} K^{ββ'} c_{α'β'δ}
    let n = a.dim();
    let kinv = linalg::inverse(a.metric(), "algebra metric")?;
    let mut half = vec![0.0; n * n * n];
    for ap in 0..n {
        for b in 0..n {
            for d in 0..n {
                let c = a.structure(ap, b, d);
                if c == 0.0 {
                    continue;
                }
                for al in 0..n {
                    half[(al * n + b) * n + d] += kinv[(al, ap)] * c;
                }
            }
        }
    }
    let mut out = vec![0.0; n * n * n];
    for al in 0..n {
        for bp in 0..n {
            for d in 0..n {
                let h = half[(al * n + bp) * n + d];
                if h == 0.0 {
                    continue;
                }
                for be in 0..n {
                    out[(al * n + be) * n + d] += kinv[(be, bp)] * h;
                }
            }
        }
    }
    Ok(out)
}

/// Chevalley-Eilenberg differential `−½ f^{αβ}_δ j_α j_β ι_δ` on `Λ a*`.
pub fn d_ce(a: &QuadraticLieAlgebra) -> Result<ExteriorOp> {
    let n = a.dim();
    let f = raised_pair(a)?;
    let mut op = ExteriorOp::new(n);
    for al in 0..n {
        for be in 0..n {
            if al == be {
                continue;
            }
            for d in 0..n {
                let x = f[(al * n + be) * n + d];
                if x.abs() > 1e-15 {
                    op.push(-0.5 * x, vec![Letter::Wedge(al), Letter::Wedge(be), Letter::Contract(d)]);
                }
            }
        }
    }
    Ok(op)
}

/// Triple contraction with the structure 3-form, `(1/6) c_{αβγ} ι_α ι_β ι_γ`.
pub fn iota_f(a: &QuadraticLieAlgebra) -> ExteriorOp {
    let n = a.dim();
    let mut op = ExteriorOp::new(n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let c = a.structure(x, y, z);
                if c.abs() > 1e-15 && x != y && y != z && x != z {
                    op.push(c / 6.0, vec![Letter::Contract(x), Letter::Contract(y), Letter::Contract(z)]);
                }
            }
        }
    }
    op
}

/// `D0 = d_CE − c ι_f` on `Λ a*` for the double `B_c ⊗ a`.
pub fn d0(d: &DoubleAlgebra) -> Result<ExteriorOp> {
    Ok(d_ce(&d.base)?.plus(iota_f(&d.base).scaled(-d.c)))
}

/// Restriction of `ad(s)` for `s` in `a0` to `a1`, as derivations of `Λ a1*`.
pub fn isotropy_action(a: &QuadraticLieAlgebra, split: &InvolutiveSplitting) -> Vec<ExteriorOp> {
    let idx = &split.indices1;
    split
        .indices0
        .iter()
        .map(|&s| {
            let ad = a.ad_basis(s);
            derivation(&DMatrix::from_fn(idx.len(), idx.len(), |i, j| ad[(idx[i], idx[j])]))
        })
        .collect()
}

/// `(Λ a1*)^{a0}`.
pub fn invariant_odd_forms(a: &QuadraticLieAlgebra, split: &InvolutiveSplitting) -> Result<InvariantForms> {
    invariant_forms(&isotropy_action(a, split), split.indices1.len(), INVARIANT_TOL)
}

/// Bitmask over the sub-basis `idx` moved into the ambient basis, with the
/// reordering sign.
pub fn embed_mask(mask: usize, idx: &[usize]) -> (usize, f64) {
    let pos: Vec<usize> = (0..idx.len()).filter(|&i| mask >> i & 1 == 1).map(|i| idx[i]).collect();
    let mut inv = 0;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            if pos[i] > pos[j] {
                inv += 1;
            }
        }
    }
    let out = pos.iter().fold(0usize, |m, &p| m | 1 << p);
    (out, if inv % 2 == 0 { 1.0 } else { -1.0 })
}

/// Spinor on `Λ` of the sub-basis `idx` pushed into rank `n`.
pub fn embed_spinor(f: &Spinor, idx: &[usize], n: usize) -> Result<Spinor> {
    if idx.len() != f.rank() || idx.iter().any(|&i| i >= n) {
        return Err(Error::DimensionMismatch { expected: f.rank(), got: idx.len() });
    }
    let mut out = Spinor::zero(n)?;
    for (mask, &z) in f.coeffs().iter().enumerate() {
        if z.norm_sqr() > 0.0 {
            let (m, s) = embed_mask(mask, idx);
            out.coeffs_mut()[m] += z * s;
        }
    }
    Ok(out)
}

/// Sparse form on `Λ a*` from a spinor on the sub-basis `idx`.
pub fn embed_sparse(f: &Spinor, idx: &[usize]) -> SparseForm {
    let mut out = SparseForm::new();
    for (mask, &z) in f.coeffs().iter().enumerate() {
        if z.norm_sqr() > 0.0 {
            let (m, s) = embed_mask(mask, idx);
            *out.entry(m).or_insert(Complex64::new(0.0, 0.0)) += z * s;
        }
    }
    out
}

/// Both pieces of `D0` on the invariant odd forms, reported separately.
pub fn d0_on_invariants_check(d: &DoubleAlgebra) -> Result<ResidualReport> {
    let split = d.grading.as_ref().ok_or_else(|| Error::MissingGrading("double carries no involution".into()))?;
    let inv = invariant_odd_forms(&d.base, split)?;
    let dce = d_ce(&d.base)?;
    let iof = iota_f(&d.base).scaled(d.c);
    let mut worst = (0.0f64, 0.0f64);
    for j in 0..inv.dim() {
        let f = embed_sparse(&inv.spinor(j), &split.indices1);
        worst.0 = worst.0.max(sparse_norm(&dce.apply_sparse(&f)));
        worst.1 = worst.1.max(sparse_norm(&iof.apply_sparse(&f)));
    }
    let mut rep = ResidualReport::new(INVARIANT_TOL);
    rep.push("d_ce", worst.0);
    rep.push("c_iota_f", worst.1);
    rep.push("invariant_closure", inv.residual);
    rep.note("invariant_dim", inv.dim());
    rep.note("c", d.c);
    Ok(rep)
}

/// Generic generating operator `−(1/6) c_{αβγ} e^α e^β e^γ + ½ ε` as an
/// exterior operator for a lagrangian splitting of the algebra.
pub fn dirac_clifford(alg: &QuadraticLieAlgebra, split: &LagrangianSplitting, eps: Option<&DVector<f64>>) -> Result<ExteriorOp> {
    let n = alg.dim();
    if split.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: split.ambient_dim() });
    }
    let ginv = linalg::inverse(alg.metric(), "algebra metric")?;
    let duals: Vec<ExteriorOp> =
        (0..n).map(|a| split.vector_op(&ginv.column(a).into_owned())).collect::<Result<_>>()?;
    let mut op = ExteriorOp::new(split.rank());
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let xy = duals[x].compose(&duals[y]);
            for z in 0..n {
                let c = alg.structure(x, y, z);
                if c.abs() > 1e-15 && z != x && z != y {
                    op = op.plus(xy.compose(&duals[z]).scaled(-c / 6.0));
                }
            }
        }
    }
    if let Some(e) = eps {
        op = op.plus(split.vector_op(e)?.scaled(0.5));
    }
    Ok(op)
}

/// Max entry of the difference of two operators over all basis spinors.
pub fn operator_distance(a: &ExteriorOp, b: &ExteriorOp) -> Result<f64> {
    if a.rank() != b.rank() {
        return Err(Error::DimensionMismatch { expected: a.rank(), got: b.rank() });
    }
    let mut worst = 0.0f64;
    for mask in 0..1usize << a.rank() {
        let f = Spinor::basis(a.rank(), mask)?;
        worst = worst.max(a.apply(&f)?.sub(&b.apply(&f)?).max_abs());
    }
    Ok(worst)
}

/// `D²` on the spinors of a lagrangian splitting: its scalar value and the
/// distance from a multiple of the identity.
pub fn dirac_square(alg: &QuadraticLieAlgebra, split: &LagrangianSplitting) -> Result<(f64, f64)> {
    let d = dirac_clifford(alg, split, None)?;
    let r = split.rank();
    let one = Spinor::one(r)?;
    let scalar: Complex64 = d.apply(&d.apply(&one)?)?.get(0);
    let mut off = scalar.im.abs();
    for mask in 0..1usize << r {
        let f = Spinor::basis(r, mask)?;
        let sq = d.apply(&d.apply(&f)?)?;
        off = off.max(sq.sub(&f.scale(Complex64::new(scalar.re, 0.0))).max_abs());
    }
    Ok((scalar.re, off))
}
