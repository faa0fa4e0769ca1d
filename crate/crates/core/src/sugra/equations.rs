//! Residual systems: the block-reduced equations, the generic Clifford
//! evaluation used as an oracle, and the two closed-form ansätze.

use super::assemble::Assembly;
use super::config::{FluxAnsatz, SugraConfig};
use crate::curvature::{gric, scalar_curvature, Divergence};
use crate::error::{Error, Result};
use crate::genmetric::GeneralizedMetric;
use crate::linalg::binomial;
use crate::report::ResidualReport;
use crate::spinor::{clifford_apply, mukai_pairing, r_vplus_apply, LagrangianSplitting, Parity, Spinor};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub const PRECONDITION_TOL: f64 = 1e-9;

fn nu(f: &Spinor) -> Complex64 {
    match f.parity_tol(1e-12) {
        Parity::Odd => Complex64::new(0.0, 1.0),
        _ => Complex64::new(1.0, 0.0),
    }
}

/// `(1+c0) dim a1^(0) + Σ λ_k (1+c_k) dim a1^(k)`; vanishes on solutions.
pub fn scalar_equation(asm: &Assembly) -> f64 {
    asm.blocks
        .iter()
        .filter(|b| !b.abelian)
        .map(|b| b.lambda * (1.0 + b.c) * b.range.len() as f64)
        .sum()
}

/// `(c_k − 1) 𝒦 − ψ_F` on the total odd part, zero target off the blocks
/// and on the abelian block.
pub fn block_residual_matrix(asm: &Assembly, psi: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut out = -psi.clone();
    for b in asm.blocks.iter().filter(|b| !b.abelian) {
        for a in b.range.clone() {
            out[(a, a)] += (b.c - 1.0) * b.lambda * asm.ctx.signs[a];
        }
    }
    out
}

fn frobenius(m: &DMatrix<Complex64>, rows: impl Fn(usize, usize) -> bool) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if rows(i, j) {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Block-reduced residuals plus the preconditions on `F`.
pub fn check_equations(asm: &Assembly, cfg: &SugraConfig, f: &Spinor) -> Result<ResidualReport> {
    let ctx = &asm.ctx;
    if f.rank() != ctx.rank {
        return Err(Error::DimensionMismatch { expected: ctx.rank, got: f.rank() });
    }
    let mut rep = ResidualReport::new(cfg.tolerance);
    let psi = ctx.psi_unchecked(f)?;
    let res = block_residual_matrix(asm, &psi);
    rep.push("scalar", scalar_equation(asm).abs());
    for (k, b) in asm.blocks.iter().enumerate() {
        let r = b.range.clone();
        let name = if b.abelian { "abelian".to_string() } else { format!("block{k}") };
        rep.push(name, frobenius(&res, |i, j| r.contains(&i) && r.contains(&j)));
    }
    let block_of = |i: usize| asm.blocks.iter().position(|b| b.range.contains(&i));
    rep.push("off_block", frobenius(&res, |i, j| block_of(i) != block_of(j)));
    rep.push_with_tol("psi_imag", psi.iter().fold(0.0f64, |m, z| m.max(z.im.abs())), PRECONDITION_TOL);
    rep.push_with_tol("self_duality", ctx.self_duality_residual(f)?, PRECONDITION_TOL);
    rep.push_with_tol("invariance", ctx.invariance_residual(f)?, PRECONDITION_TOL);
    rep.push_with_tol("d0_closure", asm.d0_residual(f)?, PRECONDITION_TOL);
    let parity = f.parity_tol(1e-12);
    rep.push("parity", if parity == Parity::Mixed { 1.0 } else { 0.0 });
    rep.note("parity", format!("{parity:?}").to_lowercase());
    rep.note("flux_norm", f.norm());
    Ok(rep)
}

/// Generic evaluation of `GRic(u+, v−) − (i/8ν)(u+ F, v− F)` through the
/// full algebra and the Clifford action on the 20-dim span of the odd
/// generators and their `t`-multiples.
#[derive(Debug, Clone)]
pub struct GenericResiduals {
    /// Rows `(1+t)E_a`, columns `(1−t)E_b`.
    pub matrix: DMatrix<Complex64>,
    /// Largest GRic entry against the even directions of `V-`.
    pub gric_even: f64,
    pub scalar_curvature: f64,
    /// `‖R F − F‖` with `R` built from a generic frame of `V+`.
    pub self_duality: f64,
}

pub fn generic_residuals(asm: &Assembly, f: &Spinor) -> Result<GenericResiduals> {
    let n = asm.g.dim();
    let r = asm.ctx.rank;
    let mut pick = DMatrix::zeros(n, 2 * r);
    let mut a = 0;
    for b in &asm.blocks {
        let nb = b.base_dim();
        for &i in &b.split().indices1 {
            pick[(b.offset + i, a)] = 1.0;
            pick[(b.offset + nb + i, r + a)] = 1.0;
            a += 1;
        }
    }
    let w = pick.transpose() * asm.g.metric() * &pick;
    let l2 = DMatrix::identity(2 * r, 2 * r).columns(0, r).into_owned();
    let l1 = DMatrix::identity(2 * r, 2 * r).columns(r, r).into_owned();
    let split = LagrangianSplitting::new(&w, l1, l2)?;
    let plus_w = DMatrix::from_fn(2 * r, r, |i, j| if i == j || i == j + r { 1.0 } else { 0.0 });
    let minus_w = DMatrix::from_fn(2 * r, r, |i, j| {
        if i == j {
            1.0
        } else if i == j + r {
            -1.0
        } else {
            0.0
        }
    });
    let vw = GeneralizedMetric::from_metric(&w, plus_w.clone(), Some(minus_w.clone()))?;
    let self_duality = r_vplus_apply(&vw, &split, f)?.sub(f).max_abs();

    let up: Vec<Spinor> =
        (0..r).map(|a| clifford_apply(&plus_w.column(a).into_owned(), f, &split)).collect::<Result<_>>()?;
    let down: Vec<Spinor> =
        (0..r).map(|b| clifford_apply(&minus_w.column(b).into_owned(), f, &split)).collect::<Result<_>>()?;
    let coef = Complex64::new(0.0, 1.0) / (nu(f) * 8.0);

    let div = Divergence::zero(n);
    let ric = gric(&asm.g, &asm.vplus, &div)?.matrix;
    let mut matrix = DMatrix::from_element(r, r, Complex64::new(0.0, 0.0));
    for a in 0..r {
        for b in 0..r {
            matrix[(a, b)] = Complex64::new(ric[(a, b)], 0.0) - coef * mukai_pairing(&up[a], &down[b])?;
        }
    }
    let gric_even = ric.columns(r, ric.ncols() - r).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(GenericResiduals {
        matrix,
        gric_even,
        scalar_curvature: scalar_curvature(&asm.g, &asm.vplus, &div)?,
        self_duality,
    })
}

/// Generic residuals against the block-reduced ones: the reduced matrix is
/// twice the generic one, and the reduced scalar equation is `4𝓡`.
pub fn oracle_equivalence(asm: &Assembly, f: &Spinor) -> Result<ResidualReport> {
    let gen = generic_residuals(asm, f)?;
    let psi = asm.ctx.psi_unchecked(f)?;
    let reduced = block_residual_matrix(asm, &psi);
    let diff = (&gen.matrix * Complex64::new(2.0, 0.0) - &reduced).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let mut rep = ResidualReport::new(1e-8);
    rep.push("matrix", diff);
    rep.push_with_tol("scalar", (4.0 * gen.scalar_curvature - scalar_equation(asm)).abs(), 1e-9);
    rep.push("gric_even", gen.gric_even);
    rep.push_with_tol("self_duality", gen.self_duality, PRECONDITION_TOL);
    Ok(rep)
}

/// The four equations of the polynomial ansatz on `AdS_{10−2M} × CP^M`.
pub fn first_ansatz_vector(m: usize, c0: f64, c1: f64, lambda1: f64, d: &[f64]) -> Result<[f64; 4]> {
    if !(1..=3).contains(&m) {
        return Err(Error::InvalidParameter(format!("M must lie in 1..=3, got {m}")));
    }
    if d.len() != m + 1 {
        return Err(Error::InvalidParameter(format!("expected {} coefficients, got {}", m + 1, d.len())));
    }
    let mf = m as f64;
    let sq: f64 = (0..=m).map(|n| d[n] * d[n] * binomial(m, n)).sum();
    let weighted: f64 = (0..=m).map(|n| d[n] * d[n] * binomial(m, n) * (2.0 * n as f64 - mf)).sum();
    let cross: f64 = (1..=m).map(|n| d[n] * d[n - 1] * binomial(m - 1, n - 1)).sum();
    Ok([
        (5.0 - mf) * (1.0 + c0) + lambda1 * mf * (1.0 + c1),
        2.0 * (1.0 - c0) - sq,
        -lambda1 * 2.0 * mf * (1.0 - c1) - weighted,
        cross,
    ])
}

pub fn first_ansatz_residuals(m: usize, c0: f64, c1: f64, lambda1: f64, d: &[f64]) -> Result<ResidualReport> {
    let v = first_ansatz_vector(m, c0, c1, lambda1, d)?;
    let mut rep = ResidualReport::new(1e-8);
    for (name, x) in ["scalar", "norm", "weighted", "cross"].iter().zip(v) {
        rep.push(*name, x.abs());
    }
    Ok(rep)
}

/// `2(1 − c_k)λ_k − Σ_h (−1)^{h(0)+h(k)} f(h)²` for every block, with
/// `λ = 0` on an abelian block.
pub fn volume_product_vector(c: &[f64], lambda: &[f64], terms: &[(Vec<u8>, f64)]) -> Vec<f64> {
    (0..c.len())
        .map(|k| {
            let src: f64 = terms
                .iter()
                .map(|(h, f)| if (h[0] + h[k]) % 2 == 0 { f * f } else { -f * f })
                .sum();
            2.0 * (1.0 - c[k]) * lambda[k] - src
        })
        .collect()
}

/// Per-block equations of the volume-product ansatz, the scalar equation
/// and the double-contraction hypothesis.
pub fn second_ansatz_residuals(asm: &Assembly, cfg: &SugraConfig) -> Result<ResidualReport> {
    let FluxAnsatz::VolumeProducts { terms } = &cfg.flux else {
        return Err(Error::Config("second ansatz needs volume-product flux".into()));
    };
    let c: Vec<f64> = asm.blocks.iter().map(|b| b.c).collect();
    let lambda: Vec<f64> = asm.blocks.iter().map(|b| if b.abelian { 0.0 } else { b.lambda }).collect();
    let t: Vec<(Vec<u8>, f64)> = terms.iter().map(|t| (t.h.clone(), t.f)).collect();
    let mut rep = ResidualReport::new(cfg.tolerance);
    for (k, r) in volume_product_vector(&c, &lambda, &t).into_iter().enumerate() {
        rep.push(format!("eq{k}"), r.abs());
    }
    rep.push("scalar", scalar_equation(asm).abs());
    let f = asm.ctx.flux(&cfg.flux)?;
    rep.push_with_tol("double_contraction", asm.ctx.double_contraction_residual(&f)?, PRECONDITION_TOL);
    Ok(rep)
}

/// Block-reduced residual matrix, exposed for tests and the CLI.
pub fn residual_matrix(asm: &Assembly, f: &Spinor) -> Result<DMatrix<Complex64>> {
    Ok(block_residual_matrix(asm, &asm.ctx.psi_unchecked(f)?))
}

/// `ψ_F` restricted to one block as a real matrix, failing on imaginary
/// parts above the precondition tolerance.
pub fn psi_block_real(asm: &Assembly, f: &Spinor, k: usize) -> Result<DMatrix<f64>> {
    let psi = asm.ctx.psi_f(f)?;
    let r = asm.blocks[k].range.clone();
    let sub = psi.view((r.start, r.start), (r.len(), r.len())).into_owned();
    if sub.iter().any(|z| z.im.abs() > PRECONDITION_TOL) {
        return Err(Error::Parity("ψ has an imaginary part".into()));
    }
    Ok(sub.map(|z| z.re))
}
