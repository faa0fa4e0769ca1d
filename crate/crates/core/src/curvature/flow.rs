//! Generalized Ricci flow: each frame vector `e_a` moves along the V- vector
//! dual to `GRic(e_a, ·)`. Fixed-step RK4 on the frame, re-orthonormalized
//! after every step.

use super::{action_value, gric, gric_contraction, Divergence};
use crate::error::{Error, Result};
use crate::genmetric::GeneralizedMetric;
use crate::liealg::QuadraticLieAlgebra;
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub metric: GeneralizedMetric,
    pub action: f64,
    pub gric_norm: f64,
    /// `dS/dt` predicted by contracting GRic with the flow direction.
    pub action_rate: f64,
}

#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub states: Vec<FlowState>,
    /// Set when the flow stopped early.
    pub diagnostic: Option<String>,
}

/// Velocity of the V+ frame and the GRic-by-GRic contraction.
fn velocity(alg: &QuadraticLieAlgebra, v: &GeneralizedMetric, div: &Divergence) -> Result<(DMatrix<f64>, f64, f64)> {
    let r = gric(alg, v, div)?;
    if v.dim_minus() == 0 {
        return Ok((DMatrix::zeros(v.ambient_dim(), v.dim_plus()), 0.0, 0.0));
    }
    let phi = &r.matrix * v.gram_minus_inv();
    let w = v.span_minus() * phi.transpose();
    let rate = gric_contraction(v, &r, &phi);
    Ok((w, r.norm(), rate))
}

fn state(alg: &QuadraticLieAlgebra, v: GeneralizedMetric, div: &Divergence, t: f64) -> Result<FlowState> {
    let (_, norm, rate) = velocity(alg, &v, div)?;
    let action = action_value(alg, &v)?;
    Ok(FlowState { t, metric: v, action, gric_norm: norm, action_rate: rate })
}

pub fn ricci_flow(
    alg: &QuadraticLieAlgebra,
    v0: &GeneralizedMetric,
    div: &Divergence,
    t_end: f64,
    dt: f64,
) -> Result<FlowTrajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter("t_end must be nonnegative".into()));
    }
    let steps = (t_end / dt).round() as usize;
    let mut v = v0.orthonormalized()?;
    let mut states = vec![state(alg, v.clone(), div, 0.0)?];
    let mut diagnostic = None;
    for k in 0..steps {
        let t = (k + 1) as f64 * dt;
        let step = (|| -> Result<GeneralizedMetric> {
            let s = v.span().clone();
            let (k1, _, _) = velocity(alg, &v, div)?;
            let (k2, _, _) = velocity(alg, &v.moved_to(&s + &k1 * (dt / 2.0))?, div)?;
            let (k3, _, _) = velocity(alg, &v.moved_to(&s + &k2 * (dt / 2.0))?, div)?;
            let (k4, _, _) = velocity(alg, &v.moved_to(&s + &k3 * dt)?, div)?;
            let next = &s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            v.moved_to(next)?.orthonormalized()
        })();
        match step.and_then(|nv| state(alg, nv, div, t)) {
            Ok(st) => {
                v = st.metric.clone();
                states.push(st);
            }
            Err(e) => {
                diagnostic = Some(format!("flow halted at t = {t}: {e}"));
                break;
            }
        }
    }
    Ok(FlowTrajectory { states, diagnostic })
}
