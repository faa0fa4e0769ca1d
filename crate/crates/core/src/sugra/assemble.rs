//! Building `g = ⊕ B_{c_k} ⊗ a^(k) ⊕ (b ⊕ t b)` with `V+`, `s` and the
//! spinor context on the exterior algebra of the total odd part.

use super::config::{FluxAnsatz, SugraConfig, TARGET_DIM};
use crate::dirac::{d0, embed_mask};
use crate::error::{Error, Result};
use crate::genmetric::{admissible_check, GeneralizedMetric, IsotropicSubalgebra};
use crate::liealg::{
    build_abelian, direct_sum, double, grading_check, spec::matrix_from_rows, DoubleAlgebra, InvolutiveSplitting,
    QuadraticLieAlgebra,
};
use crate::spinor::{derivation, hodge, sparse_norm, ExteriorOp, Letter, Orientation, SparseForm, Spinor};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::ops::Range;

#[derive(Debug, Clone)]
pub struct Block {
    pub double: DoubleAlgebra,
    pub lambda: f64,
    pub c: f64,
    pub abelian: bool,
    /// Offset of this block's double inside `g`.
    pub offset: usize,
    /// Positions of this block's odd generators in the total odd part.
    pub range: Range<usize>,
}

impl Block {
    pub fn split(&self) -> &InvolutiveSplitting {
        self.double.grading.as_ref().expect("assembled blocks are graded")
    }

    pub fn base_dim(&self) -> usize {
        self.double.base_dim()
    }
}

#[derive(Debug, Clone)]
pub struct Assembly {
    pub g: QuadraticLieAlgebra,
    pub vplus: GeneralizedMetric,
    pub s: IsotropicSubalgebra,
    pub blocks: Vec<Block>,
    pub ctx: SpinorContext,
}

/// Forms on the total odd part. Bit `a` stands for `K(E_a, ·)` with `E_a`
/// the `a`-th odd orthonormal generator, so `(1 ± t)E_a` act as
/// `ε_a ι_a ± x_a ∧`.
#[derive(Debug, Clone)]
pub struct SpinorContext {
    pub rank: usize,
    /// `K(E_a, E_a) = ±1`.
    pub signs: Vec<f64>,
    pub ranges: Vec<Range<usize>>,
    /// Isotropy action of every even generator, as derivations.
    pub s_action: Vec<ExteriorOp>,
    metric: DMatrix<f64>,
}

pub fn assemble(cfg: &SugraConfig) -> Result<Assembly> {
    cfg.validate()?;
    let mut blocks = Vec::new();
    let mut cursor = 0;
    for (k, b) in cfg.blocks.iter().enumerate() {
        let built = b.algebra.build()?;
        let split = built
            .splitting
            .ok_or_else(|| Error::MissingGrading(format!("block {k} carries no involution")))?;
        let base = built.algebra.rescale_metric(b.lambda)?.adapted_orthonormal(&split)?;
        let gr = grading_check(&base, &split);
        if !gr.passed() {
            return Err(Error::InvalidParameter(format!("block {k}: grading violation {:?}", gr.failed())));
        }
        let n1 = split.indices1.len();
        let d = double(&base, b.c)?.with_grading(split);
        blocks.push(Block { double: d, lambda: b.lambda, c: b.c, abelian: false, offset: 0, range: cursor..cursor + n1 });
        cursor += n1;
    }
    if let Some(ab) = &cfg.abelian {
        let metric = match &ab.metric {
            Some(rows) => matrix_from_rows(rows)?,
            None => DMatrix::identity(ab.dim, ab.dim),
        };
        if metric.nrows() != ab.dim {
            return Err(Error::Config("abelian dim disagrees with its metric".into()));
        }
        let split = InvolutiveSplitting::new(ab.dim, vec![]);
        let base = build_abelian(ab.dim, &metric)?.adapted_orthonormal(&split)?;
        if (0..ab.dim).any(|i| base.metric()[(i, i)] < 0.0) {
            return Err(Error::Signature("abelian metric must be positive definite".into()));
        }
        let d = double(&base, 0.0)?.with_grading(split);
        blocks.push(Block { double: d, lambda: 0.0, c: 0.0, abelian: true, offset: 0, range: cursor..cursor + ab.dim });
        cursor += ab.dim;
    }
    if cursor != TARGET_DIM {
        return Err(Error::InvalidDimension(format!(
            "odd parts add up to dimension {cursor}, the budget is {TARGET_DIM}"
        )));
    }

    let refs: Vec<&QuadraticLieAlgebra> = blocks.iter().map(|b| &b.double.algebra).collect();
    let g = direct_sum(&refs)?;
    for (b, &off) in blocks.iter_mut().zip(g.offsets()) {
        b.offset = off;
    }
    let n = g.dim();
    let unit = |i: usize, x: f64, j: usize, y: f64| {
        let mut v = DVector::zeros(n);
        v[i] += x;
        v[j] += y;
        v
    };

    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut even = Vec::new();
    let mut signs = Vec::new();
    for b in &blocks {
        let nb = b.base_dim();
        for &i in &b.split().indices1 {
            plus.push(unit(b.offset + i, 1.0, b.offset + nb + i, 1.0));
            minus.push(unit(b.offset + i, 1.0, b.offset + nb + i, -1.0));
            signs.push(b.double.base.metric()[(i, i)]);
        }
    }
    for b in &blocks {
        let nb = b.base_dim();
        for &i in &b.split().indices0 {
            minus.push(unit(b.offset + i, 1.0, b.offset + i, 0.0));
            even.push(unit(b.offset + i, 1.0, b.offset + i, 0.0));
        }
        for &i in &b.split().indices0 {
            minus.push(unit(b.offset + nb + i, 1.0, b.offset + nb + i, 0.0));
        }
    }
    let neg = signs.iter().filter(|&&s| s < 0.0).count();
    if neg != 1 || blocks[0].range.clone().all(|a| signs[a] > 0.0) {
        return Err(Error::Signature(format!(
            "V+ must be Lorentzian with its time direction in block 0; found {neg} negative directions"
        )));
    }
    let vplus = GeneralizedMetric::with_minus(&g, DMatrix::from_columns(&plus), DMatrix::from_columns(&minus))?;
    let s = IsotropicSubalgebra::new(&g, DMatrix::from_columns(&even))?;
    let adm = admissible_check(&g, &vplus, &s);
    if !adm.passed() {
        return Err(Error::InvalidParameter(format!("assembled V+ is not admissible: {:?}", adm.failed())));
    }

    let mut s_action = Vec::new();
    for b in &blocks {
        let idx1 = &b.split().indices1;
        for &e in &b.split().indices0 {
            let ad = b.double.base.ad_basis(e);
            let mut m = DMatrix::zeros(TARGET_DIM, TARGET_DIM);
            for (i, &x) in idx1.iter().enumerate() {
                for (j, &y) in idx1.iter().enumerate() {
                    m[(b.range.start + i, b.range.start + j)] = ad[(x, y)];
                }
            }
            s_action.push(derivation(&m));
        }
    }
    let ctx = SpinorContext {
        rank: TARGET_DIM,
        metric: DMatrix::from_diagonal(&DVector::from_vec(signs.clone())),
        signs,
        ranges: blocks.iter().map(|b| b.range.clone()).collect(),
        s_action,
    };
    Ok(Assembly { g, vplus, s, blocks, ctx })
}

fn range_mask(r: &Range<usize>) -> usize {
    r.clone().fold(0, |m, i| m | 1 << i)
}

impl SpinorContext {
    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// `(1 + t)E_a` as an exterior operator; `minus` gives `(1 − t)E_a`.
    pub fn vector_op(&self, a: usize, minus: bool) -> ExteriorOp {
        let mut op = ExteriorOp::new(self.rank);
        op.push(self.signs[a], vec![Letter::Contract(a)]);
        op.push(if minus { -1.0 } else { 1.0 }, vec![Letter::Wedge(a)]);
        op
    }

    /// `R = Π (1+t)E_a`, last factor first. Each factor is `√2` times a
    /// unit vector of `V+`, since `<(1+t)E_a, (1+t)E_a> = 2ε_a`.
    pub fn r_apply(&self, f: &Spinor) -> Result<Spinor> {
        let mut out = f.clone();
        for a in (0..self.rank).rev() {
            out = self.vector_op(a, false).apply(&out)?;
        }
        Ok(out)
    }

    pub fn hodge(&self, f: &Spinor) -> Result<Spinor> {
        hodge(f, &self.metric, Orientation::Standard)
    }

    /// Metric volume form of block `k`, oriented by the basis order.
    pub fn volume_form(&self, k: usize) -> Result<Spinor> {
        let r = self.ranges.get(k).ok_or_else(|| Error::Config(format!("no block {k}")))?;
        Spinor::basis(self.rank, range_mask(r))
    }

    /// `F̂` for the ansatz, before adding its image under `R`.
    pub fn seed_spinor(&self, flux: &FluxAnsatz) -> Result<Spinor> {
        let mut out = Spinor::zero(self.rank)?;
        match flux {
            FluxAnsatz::VolumeProducts { terms } => {
                for t in terms {
                    if t.h.len() != self.ranges.len() {
                        return Err(Error::Config(format!("term {:?} does not match {} blocks", t.h, self.ranges.len())));
                    }
                    let mask = t.h.iter().zip(&self.ranges).filter(|(&h, _)| h == 1).fold(0, |m, (_, r)| m | range_mask(r));
                    out.coeffs_mut()[mask] += t.f;
                }
            }
            FluxAnsatz::Polynomial { d, block } => {
                let omega = self.pairing_form(*block)?;
                let mut power = Spinor::one(self.rank)?;
                let mut fact = 1.0;
                for (n, &dn) in d.iter().enumerate() {
                    if n > 0 {
                        power = power.wedge_with(&omega)?;
                        fact *= n as f64;
                    }
                    out = out.add(&power.scale(Complex64::new(dn / fact, 0.0)));
                }
            }
            FluxAnsatz::Raw { terms } => {
                for &(mask, re, im) in terms {
                    if mask >= out.len() {
                        return Err(Error::Config(format!("raw mask {mask} exceeds rank {}", self.rank)));
                    }
                    out.coeffs_mut()[mask] += Complex64::new(re, im);
                }
            }
        }
        Ok(out)
    }

    /// `e_1∧e_2 + e_3∧e_4 + …` on the odd part of block `k`.
    pub fn pairing_form(&self, k: usize) -> Result<Spinor> {
        let r = self.ranges.get(k).ok_or_else(|| Error::Config(format!("no block {k}")))?;
        if r.len() % 2 != 0 {
            return Err(Error::InvalidDimension(format!("block {k} has odd dimension {}", r.len())));
        }
        let mut out = Spinor::zero(self.rank)?;
        for p in (r.start..r.end).step_by(2) {
            out.coeffs_mut()[1 << p | 1 << (p + 1)] += 1.0;
        }
        Ok(out)
    }

    pub fn flux(&self, ansatz: &FluxAnsatz) -> Result<Spinor> {
        let fh = self.seed_spinor(ansatz)?;
        Ok(fh.add(&self.r_apply(&fh)?))
    }

    pub fn self_duality_residual(&self, f: &Spinor) -> Result<f64> {
        Ok(self.r_apply(f)?.sub(f).max_abs())
    }

    pub fn invariance_residual(&self, f: &Spinor) -> Result<f64> {
        let mut worst = 0.0f64;
        for op in &self.s_action {
            worst = worst.max(op.apply(f)?.max_abs());
        }
        Ok(worst)
    }

    /// `¼ ([(ι_u + j_u)(ι_v − j_v) F] ∧ *F)^top` on basis pairs.
    pub fn psi_unchecked(&self, f: &Spinor) -> Result<DMatrix<Complex64>> {
        let star = self.hodge(f)?;
        let n = self.rank;
        let minus: Vec<Spinor> = (0..n).map(|b| self.vector_op(b, true).apply(f)).collect::<Result<_>>()?;
        let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for a in 0..n {
            let up = self.vector_op(a, false);
            for b in 0..n {
                out[(a, b)] = up.apply(&minus[b])?.wedge_with(&star)?.top() * 0.25;
            }
        }
        Ok(out)
    }

    /// As [`SpinorContext::psi_unchecked`], rejecting fluxes of mixed parity.
    pub fn psi_f(&self, f: &Spinor) -> Result<DMatrix<Complex64>> {
        if f.parity_tol(1e-12) == crate::spinor::Parity::Mixed {
            return Err(Error::Parity("flux has mixed parity".into()));
        }
        self.psi_unchecked(f)
    }

    /// `max_{a,b} |(ι_a ι_b F ∧ *F)^top|`.
    pub fn double_contraction_residual(&self, f: &Spinor) -> Result<f64> {
        let star = self.hodge(f)?;
        let mut worst = 0.0f64;
        for a in 0..self.rank {
            for b in 0..self.rank {
                let x = f.contract(b).contract(a).scale(Complex64::new(self.signs[a] * self.signs[b], 0.0));
                worst = worst.max(x.wedge_with(&star)?.top().norm());
            }
        }
        Ok(worst)
    }
}

impl Assembly {
    /// `‖D0 F‖` for the non-abelian block `k`, with `F` split into slices
    /// before, inside and after that block's odd range.
    pub fn d0_block_residual(&self, k: usize, f: &Spinor) -> Result<f64> {
        let b = &self.blocks[k];
        let op = d0(&b.double)?;
        let inside = range_mask(&b.range);
        let idx1 = &b.split().indices1;
        let mut groups: std::collections::BTreeMap<usize, SparseForm> = std::collections::BTreeMap::new();
        for (mask, &z) in f.coeffs().iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            let outer = mask & !inside;
            let mid = (mask & inside) >> b.range.start;
            let (m, s) = embed_mask(mid, idx1);
            *groups.entry(outer).or_default().entry(m).or_insert(Complex64::new(0.0, 0.0)) += z * s;
        }
        let total: f64 = groups.values().map(|g| sparse_norm(&op.apply_sparse(g)).powi(2)).sum();
        Ok(total.sqrt())
    }

    pub fn d0_residual(&self, f: &Spinor) -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 0..self.blocks.len() {
            if !self.blocks[k].abelian {
                worst = worst.max(self.d0_block_residual(k, f)?);
            }
        }
        Ok(worst)
    }
}
