//! Exterior-algebra spinors. A spinor of rank `m` is a complex vector over
//! the `2^m` subsets of a fixed basis of `L1`; bit `j` of the index marks
//! basis vector `j`. Wedge and contraction signs count set bits below the
//! touched position.

mod clifford;
mod invariant;

pub use clifford::{
    clifford_apply, r_squared_sign, r_vplus_apply, r_vplus_frame, self_dual_project, CliffordOp,
    LagrangianSplitting,
};
pub use invariant::{annihilator_invariants, derivation, invariant_forms, InvariantForms};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Dense storage cap (`2^16` coefficients).
pub const MAX_RANK: usize = 16;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub(crate) fn sign_below(mask: usize, i: usize) -> f64 {
    if (mask & ((1usize << i) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `i^k`.
pub fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => I,
        2 => Complex64::new(-1.0, 0.0),
        _ => -I,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "SpinorRepr", try_from = "SpinorRepr")]
pub struct Spinor {
    rank: usize,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct SpinorRepr {
    rank: usize,
    terms: Vec<(usize, f64, f64)>,
}

impl From<Spinor> for SpinorRepr {
    fn from(s: Spinor) -> Self {
        let terms = s
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm_sqr() > 0.0)
            .map(|(k, z)| (k, z.re, z.im))
            .collect();
        SpinorRepr { rank: s.rank, terms }
    }
}

impl TryFrom<SpinorRepr> for Spinor {
    type Error = Error;
    fn try_from(r: SpinorRepr) -> Result<Self> {
        let mut s = Spinor::zero(r.rank)?;
        for (k, re, im) in r.terms {
            if k >= s.coeffs.len() {
                return Err(Error::InvalidParameter(format!("bitmask {k} out of range for rank {}", r.rank)));
            }
            s.coeffs[k] += Complex64::new(re, im);
        }
        Ok(s)
    }
}

impl Spinor {
    pub fn zero(rank: usize) -> Result<Self> {
        if rank > MAX_RANK {
            return Err(Error::InvalidDimension(format!("spinor rank {rank} exceeds {MAX_RANK}")));
        }
        Ok(Spinor { rank, coeffs: vec![Complex64::new(0.0, 0.0); 1 << rank] })
    }

    pub fn from_coeffs(rank: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if rank > MAX_RANK {
            return Err(Error::InvalidDimension(format!("spinor rank {rank} exceeds {MAX_RANK}")));
        }
        if coeffs.len() != 1 << rank {
            return Err(Error::DimensionMismatch { expected: 1 << rank, got: coeffs.len() });
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite spinor coefficient".into()));
        }
        Ok(Spinor { rank, coeffs })
    }

    pub fn from_real(rank: usize, coeffs: &[f64]) -> Result<Self> {
        Self::from_coeffs(rank, coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The basis monomial for `mask`.
    pub fn basis(rank: usize, mask: usize) -> Result<Self> {
        let mut s = Self::zero(rank)?;
        if mask >= s.coeffs.len() {
            return Err(Error::InvalidParameter(format!("bitmask {mask} out of range")));
        }
        s.coeffs[mask] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn one(rank: usize) -> Result<Self> {
        Self::basis(rank, 0)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, mask: usize) -> Complex64 {
        self.coeffs[mask]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    pub fn parity(&self) -> Parity {
        let (mut even, mut odd) = (false, false);
        for (k, z) in self.coeffs.iter().enumerate() {
            if z.norm_sqr() > 0.0 {
                if k.count_ones() % 2 == 0 {
                    even = true
                } else {
                    odd = true
                }
            }
        }
        match (even, odd) {
            (true, true) => Parity::Mixed,
            (true, false) => Parity::Even,
            (false, true) => Parity::Odd,
            _ => Parity::Zero,
        }
    }

    /// Parity ignoring coefficients below `tol`.
    pub fn parity_tol(&self, tol: f64) -> Parity {
        self.map(|_, z| if z.norm() > tol { z } else { Complex64::new(0.0, 0.0) }).parity()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|z| z.im.abs() <= tol)
    }

    /// Degree-`k` component.
    pub fn component(&self, k: usize) -> Spinor {
        self.map(|mask, z| if mask.count_ones() as usize == k { z } else { Complex64::new(0.0, 0.0) })
    }

    pub fn map(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Spinor {
        Spinor { rank: self.rank, coeffs: self.coeffs.iter().enumerate().map(|(k, &z)| f(k, z)).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Spinor {
        self.map(|_, z| z * s)
    }

    pub fn add(&self, other: &Spinor) -> Spinor {
        assert_eq!(self.rank, other.rank, "spinor rank mismatch");
        Spinor { rank: self.rank, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Spinor) -> Spinor {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub(crate) fn check_rank(&self, other: &Spinor) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: other.rank });
        }
        Ok(())
    }

    /// `x_i ∧ F`.
    pub fn wedge(&self, i: usize) -> Spinor {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        let bit = 1usize << i;
        for (k, &z) in self.coeffs.iter().enumerate() {
            if k & bit == 0 && z.norm_sqr() > 0.0 {
                out[k | bit] += z * sign_below(k, i);
            }
        }
        Spinor { rank: self.rank, coeffs: out }
    }

    /// Contraction with the dual of `x_i`.
    pub fn contract(&self, i: usize) -> Spinor {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        let bit = 1usize << i;
        for (k, &z) in self.coeffs.iter().enumerate() {
            if k & bit != 0 && z.norm_sqr() > 0.0 {
                out[k ^ bit] += z * sign_below(k, i);
            }
        }
        Spinor { rank: self.rank, coeffs: out }
    }

    /// Exterior product of two spinors over the same basis.
    pub fn wedge_with(&self, other: &Spinor) -> Result<Spinor> {
        self.check_rank(other)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x.norm_sqr() == 0.0 {
                continue;
            }
            for (b, &y) in other.coeffs.iter().enumerate() {
                if a & b == 0 && y.norm_sqr() > 0.0 {
                    out[a | b] += x * y * merge_sign(a, b);
                }
            }
        }
        Ok(Spinor { rank: self.rank, coeffs: out })
    }

    /// Coefficient of the top monomial.
    pub fn top(&self) -> Complex64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_vec(self.coeffs.clone())
    }

    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Sign of `x^A ∧ x^B = sgn · x^{A∪B}` for disjoint index sets.
pub fn merge_sign(a: usize, b: usize) -> f64 {
    // count pairs (i in A, j in B) with i > j
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inv += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `ϑ`: multiplies the degree-`k` part by `i^k`.
pub fn theta(f: &Spinor) -> Spinor {
    f.map(|k, z| z * i_pow(k.count_ones() as usize))
}

/// `(A, B) = (ϑA ∧ B)^top` with the half-line factor trivialized.
pub fn mukai_pairing(a: &Spinor, b: &Spinor) -> Result<Complex64> {
    a.check_rank(b)?;
    let full = a.coeffs.len() - 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for (ia, &x) in a.coeffs.iter().enumerate() {
        if x.norm_sqr() == 0.0 {
            continue;
        }
        let ib = full ^ ia;
        let y = b.coeffs[ib];
        if y.norm_sqr() > 0.0 {
            acc += i_pow(ia.count_ones() as usize) * x * y * merge_sign(ia, ib);
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Standard,
    Reversed,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Standard => 1.0,
            Orientation::Reversed => -1.0,
        }
    }
}

/// Hodge star for a metric diagonal in the spinor basis, defined by
/// `ξ ∧ *η = <ξ, η> ω` with `ω = sqrt|det K| x^1 ∧ … ∧ x^m` (times the
/// orientation sign). `metric` is the Gram matrix of the degree-1 basis.
pub fn hodge(f: &Spinor, metric: &DMatrix<f64>, orientation: Orientation) -> Result<Spinor> {
    let m = f.rank;
    if metric.nrows() != m || metric.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, got: metric.nrows() });
    }
    let scale = metric.amax().max(f64::MIN_POSITIVE);
    for i in 0..m {
        for j in 0..m {
            if i != j && metric[(i, j)].abs() > 1e-12 * scale {
                return Err(Error::InvalidParameter("hodge star needs a metric diagonal in the spinor basis".into()));
            }
        }
    }
    let k: Vec<f64> = (0..m).map(|i| metric[(i, i)]).collect();
    if k.iter().any(|x| x.abs() <= 1e-12 * scale) {
        return Err(Error::Degenerate("hodge star of a degenerate metric".into()));
    }
    let vol = k.iter().map(|x| x.abs()).product::<f64>().sqrt() * orientation.sign();
    let full = f.coeffs.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); f.coeffs.len()];
    for (mask, &z) in f.coeffs.iter().enumerate() {
        if z.norm_sqr() == 0.0 {
            continue;
        }
        let mut fac = vol * merge_sign(mask, full ^ mask);
        for (i, ki) in k.iter().enumerate() {
            if mask >> i & 1 == 1 {
                fac /= ki;
            }
        }
        out[full ^ mask] += z * fac;
    }
    Ok(Spinor { rank: m, coeffs: out })
}

/// One letter of an exterior word: wedge with or contraction against basis
/// vector `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    Wedge(usize),
    Contract(usize),
}

/// Real linear combination of words in wedges and contractions. Words act
/// right to left, like operator composition.
#[derive(Clone, Debug, Default)]
pub struct ExteriorOp {
    rank: usize,
    terms: Vec<(f64, Vec<Letter>)>,
}

impl ExteriorOp {
    pub fn new(rank: usize) -> Self {
        ExteriorOp { rank, terms: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &[(f64, Vec<Letter>)] {
        &self.terms
    }

    pub fn push(&mut self, coeff: f64, word: Vec<Letter>) {
        if coeff != 0.0 {
            debug_assert!(word.iter().all(|l| match l {
                Letter::Wedge(i) | Letter::Contract(i) => *i < self.rank,
            }));
            self.terms.push((coeff, word));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(mut self, s: f64) -> Self {
        if s == 0.0 {
            self.terms.clear();
        }
        for t in &mut self.terms {
            t.0 *= s;
        }
        self
    }

    pub fn plus(mut self, other: ExteriorOp) -> Self {
        assert_eq!(self.rank, other.rank);
        self.terms.extend(other.terms);
        self
    }

    /// Degree shift if every word has the same one.
    pub fn degree_shift(&self) -> Option<i32> {
        let mut shift = None;
        for (_, w) in &self.terms {
            let s: i32 = w.iter().map(|l| if matches!(l, Letter::Wedge(_)) { 1 } else { -1 }).sum();
            match shift {
                None => shift = Some(s),
                Some(t) if t != s => return None,
                _ => {}
            }
        }
        Some(shift.unwrap_or(0))
    }

    /// Image of one basis monomial as a sparse list.
    pub fn apply_mask(&self, mask: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        'terms: for (c, word) in &self.terms {
            let mut m = mask;
            let mut s = *c;
            for l in word.iter().rev() {
                match *l {
                    Letter::Wedge(i) => {
                        if m >> i & 1 == 1 {
                            continue 'terms;
                        }
                        s *= sign_below(m, i);
                        m |= 1 << i;
                    }
                    Letter::Contract(i) => {
                        if m >> i & 1 == 0 {
                            continue 'terms;
                        }
                        s *= sign_below(m, i);
                        m ^= 1 << i;
                    }
                }
            }
            out.push((m, s));
        }
    }

    pub fn apply(&self, f: &Spinor) -> Result<Spinor> {
        if f.rank != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: f.rank });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); f.coeffs.len()];
        let mut buf = Vec::new();
        for (mask, &z) in f.coeffs.iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            self.apply_mask(mask, &mut buf);
            for &(m, s) in &buf {
                out[m] += z * s;
            }
        }
        Ok(Spinor { rank: self.rank, coeffs: out })
    }

    /// Application to a sparse form; works beyond the dense rank cap.
    pub fn apply_sparse(&self, f: &SparseForm) -> SparseForm {
        let mut out = SparseForm::new();
        let mut buf = Vec::new();
        for (&mask, &z) in f {
            self.apply_mask(mask, &mut buf);
            for &(m, s) in &buf {
                *out.entry(m).or_insert(Complex64::new(0.0, 0.0)) += z * s;
            }
        }
        out
    }

    /// Dense matrix on all of `Λ`; limited to rank 12.
    pub fn materialize(&self) -> Result<DMatrix<f64>> {
        if self.rank > 12 {
            return Err(Error::InvalidDimension(format!("refusing to materialize rank {} operator", self.rank)));
        }
        let n = 1usize << self.rank;
        let mut out = DMatrix::zeros(n, n);
        let mut buf = Vec::new();
        for mask in 0..n {
            self.apply_mask(mask, &mut buf);
            for &(m, s) in &buf {
                out[(m, mask)] += s;
            }
        }
        Ok(out)
    }

    /// Block from degree `from` to degree `to`, rows and columns ordered by
    /// `masks_of_degree`.
    pub fn materialize_block(&self, from: usize, to: usize) -> DMatrix<f64> {
        let cols = masks_of_degree(self.rank, from);
        let rows = masks_of_degree(self.rank, to);
        let pos: std::collections::HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut out = DMatrix::zeros(rows.len(), cols.len());
        let mut buf = Vec::new();
        for (j, &mask) in cols.iter().enumerate() {
            self.apply_mask(mask, &mut buf);
            for &(m, s) in &buf {
                if let Some(&i) = pos.get(&m) {
                    out[(i, j)] += s;
                }
            }
        }
        out
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &ExteriorOp) -> ExteriorOp {
        assert_eq!(self.rank, other.rank);
        let mut out = ExteriorOp::new(self.rank);
        for (a, wa) in &self.terms {
            for (b, wb) in &other.terms {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                out.push(a * b, w);
            }
        }
        out
    }
}

/// Bitmask to coefficient, for forms on bases too large to store densely.
pub type SparseForm = std::collections::BTreeMap<usize, Complex64>;

pub fn sparse_norm(f: &SparseForm) -> f64 {
    f.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// All masks with `k` bits among `rank`, ascending.
pub fn masks_of_degree(rank: usize, k: usize) -> Vec<usize> {
    (0..1usize << rank).filter(|m| m.count_ones() as usize == k).collect()
}
