//! TOML-facing description of an algebra.

use super::{
    build_abelian, build_so, build_su, direct_sum, double, involution, DoubleAlgebra, Involution,
    InvolutiveSplitting, QuadraticLieAlgebra,
};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum AlgebraSpec {
    So {
        p: usize,
        q: usize,
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        involution: Option<Involution>,
    },
    Su {
        n: usize,
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        involution: Option<Involution>,
    },
    Abelian {
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default)]
        metric: Option<Vec<Vec<f64>>>,
    },
    Double {
        c: f64,
        base: Box<AlgebraSpec>,
    },
    Sum {
        blocks: Vec<AlgebraSpec>,
    },
}

#[derive(Debug, Clone)]
pub struct BuiltAlgebra {
    pub algebra: QuadraticLieAlgebra,
    pub splitting: Option<InvolutiveSplitting>,
    /// Present when the spec is a double.
    pub double: Option<DoubleAlgebra>,
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config("metric rows must form a square matrix".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<BuiltAlgebra> {
        match self {
            AlgebraSpec::So { p, q, lambda, involution: inv } => {
                finish(build_so(*p, *q)?, *lambda, *inv)
            }
            AlgebraSpec::Su { n, lambda, involution: inv } => finish(build_su(*n)?, *lambda, *inv),
            AlgebraSpec::Abelian { dim, metric } => {
                let m = match (metric, dim) {
                    (Some(rows), _) => matrix_from_rows(rows)?,
                    (None, Some(k)) => DMatrix::identity(*k, *k),
                    (None, None) => return Err(Error::Config("abelian needs dim or metric".into())),
                };
                if let (Some(k), Some(_)) = (dim, metric) {
                    if *k != m.nrows() {
                        return Err(Error::Config("abelian dim disagrees with metric".into()));
                    }
                }
                let a = build_abelian(m.nrows(), &m)?;
                let split = InvolutiveSplitting::new(a.dim(), vec![]);
                Ok(BuiltAlgebra { algebra: a, splitting: Some(split), double: None })
            }
            AlgebraSpec::Double { c, base } => {
                let b = base.build()?;
                if b.double.is_some() {
                    return Err(Error::Config("nested doubles are not supported".into()));
                }
                let mut d = double(&b.algebra, *c)?;
                if let Some(s) = b.splitting.clone() {
                    d = d.with_grading(s);
                }
                Ok(BuiltAlgebra { algebra: d.algebra.clone(), splitting: None, double: Some(d) })
            }
            AlgebraSpec::Sum { blocks } => {
                let built: Vec<BuiltAlgebra> = blocks.iter().map(|b| b.build()).collect::<Result<_>>()?;
                let refs: Vec<&QuadraticLieAlgebra> = built.iter().map(|b| &b.algebra).collect();
                let sum = direct_sum(&refs)?;
                let splitting = if built.iter().all(|b| b.splitting.is_some()) {
                    let mut even = Vec::new();
                    for (b, &off) in built.iter().zip(sum.offsets()) {
                        even.extend(b.splitting.as_ref().unwrap().indices0.iter().map(|i| i + off));
                    }
                    Some(InvolutiveSplitting::new(sum.dim(), even))
                } else {
                    None
                };
                Ok(BuiltAlgebra { algebra: sum, splitting, double: None })
            }
        }
    }
}

fn finish(
    a: QuadraticLieAlgebra,
    lambda: Option<f64>,
    inv: Option<Involution>,
) -> Result<BuiltAlgebra> {
    let splitting = inv.map(|s| involution(&a, s)).transpose()?;
    let algebra = match lambda {
        Some(l) => a.rescale_metric(l)?,
        None => a,
    };
    Ok(BuiltAlgebra { algebra, splitting, double: None })
}
