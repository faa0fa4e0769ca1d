//! The algebra `R[t]/(t² − c) ⊗ a` with the pairing that reads off the
//! t-linear part.

use super::{InvolutiveSplitting, QuadraticLieAlgebra};
use crate::error::Result;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct DoubleAlgebra {
    /// The base algebra `a` with its inner product `K`.
    pub base: QuadraticLieAlgebra,
    pub c: f64,
    /// Basis `[e_0..e_{n-1}, t e_0..t e_{n-1}]`.
    pub algebra: QuadraticLieAlgebra,
    pub grading: Option<InvolutiveSplitting>,
}

pub fn double(a: &QuadraticLieAlgebra, c: f64) -> Result<DoubleAlgebra> {
    let n = a.dim();
    let m = 2 * n;
    let mut gamma = vec![0.0; m * m * m];
    for x in 0..n {
        for y in 0..n {
            for &(z, v) in a.bracket_terms(x, y) {
                gamma[(x * m + y) * m + z] = v;
                gamma[(x * m + n + y) * m + n + z] = v;
                gamma[((n + x) * m + y) * m + n + z] = v;
                if c != 0.0 {
                    gamma[((n + x) * m + n + y) * m + z] = c * v;
                }
            }
        }
    }
    let mut metric = DMatrix::zeros(m, m);
    metric.view_mut((0, n), (n, n)).copy_from(a.metric());
    metric.view_mut((n, 0), (n, n)).copy_from(a.metric());
    let labels = a
        .labels()
        .iter()
        .cloned()
        .chain(a.labels().iter().map(|l| format!("t{l}")))
        .collect();
    let algebra = QuadraticLieAlgebra::new(metric, gamma)?.with_labels(labels);
    Ok(DoubleAlgebra { base: a.clone(), c, algebra, grading: None })
}

impl DoubleAlgebra {
    pub fn with_grading(mut self, split: InvolutiveSplitting) -> Self {
        self.grading = Some(split);
        self
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    /// Embeds `p + q t` times a base vector `u`.
    pub fn embed(&self, p: f64, q: f64, u: &DVector<f64>) -> DVector<f64> {
        let n = self.base_dim();
        let mut v = DVector::zeros(2 * n);
        for i in 0..n {
            v[i] = p * u[i];
            v[n + i] = q * u[i];
        }
        v
    }

    pub fn embed_basis(&self, p: f64, q: f64, i: usize) -> DVector<f64> {
        let mut u = DVector::zeros(self.base_dim());
        u[i] = 1.0;
        self.embed(p, q, &u)
    }

    /// Max deviation of the pairing from the block form `[[0, K], [K, 0]]`.
    pub fn pairing_block_residual(&self) -> f64 {
        let n = self.base_dim();
        let g = self.algebra.metric();
        let k = self.base.metric();
        let mut r = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                r = r
                    .max(g[(i, j)].abs())
                    .max(g[(n + i, n + j)].abs())
                    .max((g[(i, n + j)] - k[(i, j)]).abs())
                    .max((g[(n + i, j)] - k[(i, j)]).abs());
            }
        }
        r
    }

    /// Max deviation of the bracket from `[u,v]`, `t[u,v]`, `c[u,v]` blocks.
    pub fn bracket_block_residual(&self) -> f64 {
        let n = self.base_dim();
        let g = &self.algebra;
        let a = &self.base;
        let mut r = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let v = a.gamma(x, y, z);
                    r = r
                        .max((g.gamma(x, y, z) - v).abs())
                        .max(g.gamma(x, y, n + z).abs())
                        .max((g.gamma(x, n + y, n + z) - v).abs())
                        .max(g.gamma(x, n + y, z).abs())
                        .max((g.gamma(n + x, n + y, z) - self.c * v).abs())
                        .max(g.gamma(n + x, n + y, n + z).abs());
                }
            }
        }
        r
    }
}
