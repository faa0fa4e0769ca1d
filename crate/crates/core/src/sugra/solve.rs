//! Damped Gauss-Newton on the closed-form parameter systems, verification
//! of parameter points and parallel grid scans.

use super::assemble::assemble;
use super::config::{first_ansatz_config, term_name, FluxAnsatz, SugraConfig, SugraInput};
use super::equations::{
    check_equations, first_ansatz_residuals, first_ansatz_vector, oracle_equivalence, second_ansatz_residuals,
    volume_product_vector,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::liealg::{AlgebraSpec, Involution};
use crate::report::ResidualReport;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 100, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSolution {
    pub x: DVector<f64>,
    /// Max-norm of the residual at `x`.
    pub residual: f64,
    pub iterations: usize,
}

fn finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Minimum-norm Gauss-Newton steps on the unpinned coordinates with a
/// central-difference Jacobian and step halving.
pub fn newton_solve<F>(f: F, x0: &DVector<f64>, pins: &[bool], opts: &NewtonOptions) -> Result<NewtonSolution>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    if pins.len() != x0.len() {
        return Err(Error::DimensionMismatch { expected: x0.len(), got: pins.len() });
    }
    let free: Vec<usize> = (0..x0.len()).filter(|&i| !pins[i]).collect();
    let mut x = x0.clone();
    let mut r = f(&x);
    if !finite(&r) {
        return Err(Error::InvalidParameter("residual is not finite at the seed".into()));
    }
    for it in 0..opts.max_iterations {
        let norm = r.amax();
        if norm < opts.tolerance {
            return Ok(NewtonSolution { x, residual: norm, iterations: it });
        }
        let mut jac = DMatrix::zeros(r.len(), free.len());
        for (j, &i) in free.iter().enumerate() {
            let h = opts.fd_step * x[i].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            jac.set_column(j, &((f(&xp) - f(&xm)) / (2.0 * h)));
        }
        if free.is_empty() || jac.amax() == 0.0 {
            return Err(Error::SingularJacobian(it));
        }
        let step = -linalg::pinv(&jac, 1e-12) * &r;
        let base = r.norm();
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-8 {
            let mut xn = x.clone();
            for (j, &i) in free.iter().enumerate() {
                xn[i] += t * step[j];
            }
            let rn = f(&xn);
            if finite(&rn) && rn.norm() < base {
                accepted = Some((xn, rn));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, rn)) => {
                x = xn;
                r = rn;
            }
            None => return Err(Error::NotConverged { iterations: it + 1, residual: norm }),
        }
    }
    let norm = r.amax();
    if norm < opts.tolerance {
        Ok(NewtonSolution { x, residual: norm, iterations: opts.max_iterations })
    } else {
        Err(Error::NotConverged { iterations: opts.max_iterations, residual: norm })
    }
}

#[derive(Debug, Clone)]
enum SystemKind {
    First { m: usize },
    Volume { nblocks: usize, abelian: bool, hs: Vec<Vec<u8>>, dims: Vec<usize> },
}

/// The closed-form algebraic system behind an input, as a function of its
/// named parameters.
#[derive(Debug, Clone)]
pub struct AlgebraicSystem {
    pub names: Vec<String>,
    pub x0: DVector<f64>,
    input: SugraInput,
    kind: SystemKind,
}

impl AlgebraicSystem {
    pub fn of(input: &SugraInput) -> Result<Self> {
        let input = match input {
            SugraInput::Eta { .. } => SugraInput::Explicit(input.to_config()?),
            other => other.clone(),
        };
        let kind = match &input {
            SugraInput::FirstAnsatz { m, .. } => SystemKind::First { m: *m },
            SugraInput::Explicit(cfg) => match &cfg.flux {
                FluxAnsatz::VolumeProducts { terms } => {
                    let mut dims = Vec::new();
                    for b in &cfg.blocks {
                        let built = b.algebra.build()?;
                        let split = built.splitting.ok_or_else(|| Error::MissingGrading("block without involution".into()))?;
                        dims.push(split.indices1.len());
                    }
                    SystemKind::Volume {
                        nblocks: cfg.blocks.len(),
                        abelian: cfg.abelian.is_some(),
                        hs: terms.iter().map(|t| t.h.clone()).collect(),
                        dims,
                    }
                }
                FluxAnsatz::Polynomial { d, .. } => match first_ansatz_shape(cfg) {
                    Some(m) if d.len() == m + 1 => {
                        let (c0, c1, lambda1) = (cfg.blocks[0].c, cfg.blocks[1].c, cfg.blocks[1].lambda);
                        return Self::of(&SugraInput::FirstAnsatz {
                            m,
                            c0,
                            c1,
                            lambda1,
                            d: d.clone(),
                            tolerance: cfg.tolerance,
                        });
                    }
                    _ => return Err(Error::Config("no closed-form system for this polynomial flux".into())),
                },
                FluxAnsatz::Raw { .. } => return Err(Error::Config("raw flux has no closed-form system".into())),
            },
            SugraInput::Eta { .. } => unreachable!(),
        };
        let names = match (&input, &kind) {
            (SugraInput::Explicit(cfg), SystemKind::Volume { .. }) => {
                let FluxAnsatz::VolumeProducts { terms } = &cfg.flux else { unreachable!() };
                let mut v: Vec<String> = (0..cfg.blocks.len()).map(|k| format!("c{k}")).collect();
                v.extend((1..cfg.blocks.len()).map(|k| format!("lambda{k}")));
                v.extend(terms.iter().enumerate().map(|(i, t)| term_name(t, i)));
                v
            }
            _ => input.param_names(),
        };
        let x0 = DVector::from_iterator(names.len(), names.iter().map(|n| input.get_param(n).unwrap_or(0.0)));
        Ok(Self { names, x0, input, kind })
    }

    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            SystemKind::First { m } => {
                let d: Vec<f64> = x.iter().skip(3).copied().collect();
                let v = first_ansatz_vector(*m, x[0], x[1], x[2], &d).expect("shape fixed at construction");
                DVector::from_row_slice(&v)
            }
            SystemKind::Volume { nblocks, abelian, hs, dims } => {
                let n = *nblocks;
                let mut c: Vec<f64> = x.iter().take(n).copied().collect();
                let mut lambda = vec![1.0];
                lambda.extend(x.iter().skip(n).take(n - 1));
                if *abelian {
                    c.push(0.0);
                    lambda.push(0.0);
                }
                let terms: Vec<(Vec<u8>, f64)> = hs.iter().cloned().zip(x.iter().skip(2 * n - 1).copied()).collect();
                let mut out = volume_product_vector(&c, &lambda, &terms);
                out.push((0..n).map(|k| lambda[k] * (1.0 + c[k]) * dims[k] as f64).sum());
                DVector::from_vec(out)
            }
        }
    }

    /// The input with parameters set to `x`.
    pub fn input_at(&self, x: &DVector<f64>) -> Result<SugraInput> {
        let mut out = self.input.clone();
        for (n, &v) in self.names.iter().zip(x.iter()) {
            out.set_param(n, v)?;
        }
        Ok(out)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Config(format!("unknown parameter '{name}'; expected one of {:?}", self.names)))
    }
}

fn first_ansatz_shape(cfg: &SugraConfig) -> Option<usize> {
    if cfg.blocks.len() != 2 || cfg.abelian.is_some() {
        return None;
    }
    match &cfg.blocks[1].algebra {
        AlgebraSpec::Su { n, involution: Some(Involution::SuBlock), .. } if (2..=4).contains(n) => {
            let m = n - 1;
            let reference = first_ansatz_config(m, 0.0, 0.0, -1.0, &vec![0.0; m + 1], cfg.tolerance).ok()?;
            (reference.blocks[0].algebra == cfg.blocks[0].algebra).then_some(m)
        }
        _ => None,
    }
}

/// Full verification of an input: block-reduced residuals, the generic
/// oracle and whichever closed-form system applies.
pub fn verify(input: &SugraInput) -> Result<ResidualReport> {
    let cfg = input.to_config()?;
    let asm = assemble(&cfg)?;
    let f = asm.ctx.flux(&cfg.flux)?;
    let mut rep = check_equations(&asm, &cfg, &f)?;
    rep.merge("oracle", &oracle_equivalence(&asm, &f)?);
    if matches!(cfg.flux, FluxAnsatz::VolumeProducts { .. }) {
        rep.merge("volume", &second_ansatz_residuals(&asm, &cfg)?);
    }
    if let SugraInput::FirstAnsatz { m, c0, c1, lambda1, d, .. } = input {
        rep.merge("polynomial", &first_ansatz_residuals(*m, *c0, *c1, *lambda1, d)?);
    }
    rep.note("dim_g", asm.g.dim());
    rep.note("blocks", asm.blocks.len());
    Ok(rep)
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub seed: DVector<f64>,
    pub result: std::result::Result<NewtonSolution, Error>,
    /// Verification of the converged point; `Err` carries the reason.
    pub verification: Option<std::result::Result<ResidualReport, Error>>,
}

/// Newton from every seed (pinned entries overwritten by the pins), in
/// parallel; results keep the seed order.
pub fn solve(
    system: &AlgebraicSystem,
    pins: &[(String, f64)],
    seeds: &[DVector<f64>],
    opts: &NewtonOptions,
) -> Result<Vec<SolveOutcome>> {
    let mut mask = vec![false; system.names.len()];
    let mut pinned = Vec::new();
    for (name, v) in pins {
        let i = system.index_of(name)?;
        mask[i] = true;
        pinned.push((i, *v));
    }
    for s in seeds {
        if s.len() != system.names.len() {
            return Err(Error::DimensionMismatch { expected: system.names.len(), got: s.len() });
        }
    }
    Ok(seeds
        .par_iter()
        .map(|s| {
            let mut seed = s.clone();
            for &(i, v) in &pinned {
                seed[i] = v;
            }
            let result = newton_solve(|x| system.residual(x), &seed, &mask, opts);
            let verification = result.as_ref().ok().map(|sol| system.input_at(&sol.x).and_then(|inp| verify(&inp)));
            SolveOutcome { seed, result, verification }
        })
        .collect())
}

/// One scan axis and its values, in scan order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl GridAxis {
    /// `steps` evenly spaced values from `lo` to `hi` inclusive.
    pub fn linspace(name: &str, lo: f64, hi: f64, steps: usize) -> Self {
        let values = match steps {
            0 => vec![],
            1 => vec![lo],
            n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        };
        Self { name: name.into(), values }
    }

    /// Parses `name=lo:hi:steps` or `name=v1,v2,...`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("grid axis '{s}' is not of the form name=lo:hi:steps or name=v1,v2,..."));
        let (name, rest) = s.split_once('=').ok_or_else(bad)?;
        let name = name.trim();
        if name.is_empty() {
            return Err(bad());
        }
        if rest.contains(':') {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let lo = parts[0].trim().parse().map_err(|_| bad())?;
            let hi = parts[1].trim().parse().map_err(|_| bad())?;
            let steps = parts[2].trim().parse().map_err(|_| bad())?;
            Ok(Self::linspace(name, lo, hi, steps))
        } else {
            let values = rest
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<Vec<f64>>>()?;
            Ok(Self { name: name.into(), values })
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub params: Vec<(String, f64)>,
    pub outcome: std::result::Result<ResidualReport, Error>,
}

/// Verifies every grid point (first axis slowest). Errors at individual
/// points are recorded and the scan continues. No axes means no rows.
pub fn scan(template: &SugraInput, axes: &[GridAxis]) -> Result<Vec<ScanRow>> {
    for a in axes {
        template.get_param(&a.name).or_else(|e| if a.name == "m" { Ok(0.0) } else { Err(e) })?;
    }
    if axes.is_empty() {
        return Ok(vec![]);
    }
    let values: Vec<Vec<f64>> = axes.iter().map(|a| a.values.clone()).collect();
    let total: usize = values.iter().map(|v| v.len()).product();
    let points: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            let mut p = vec![0.0; axes.len()];
            for k in (0..axes.len()).rev() {
                p[k] = values[k][idx % values[k].len()];
                idx /= values[k].len();
            }
            p
        })
        .collect();
    Ok(points
        .par_iter()
        .map(|p| {
            let params: Vec<(String, f64)> = axes.iter().map(|a| a.name.clone()).zip(p.iter().copied()).collect();
            let mut inp = template.clone();
            let outcome = params
                .iter()
                .try_for_each(|(n, v)| inp.set_param(n, *v))
                .and_then(|_| verify(&inp));
            ScanRow { params, outcome }
        })
        .collect())
}
