//! Commands on a single algebra config: `algebra check`, `curvature *`, `dirac check`.

use crate::format::{csv_float, json_string, matrix_rows, num};
use crate::{parse_assignment, read_config, CliError, Common, FlowArgs, Outcome};
use gengeom::curvature::{dsquared, gric, ricci_flow, scalar_curvature, tangency_check, Divergence};
use gengeom::dirac::{d0_on_invariants_check, dirac_square};
use gengeom::genmetric::{admissible_check, vplus_of_double, GeneralizedMetric, IsotropicSubalgebra};
use gengeom::liealg::{check, grading_check, AlgebraSpec, BuiltAlgebra, DoubleAlgebra, QuadraticLieAlgebra};
use gengeom::spinor::LagrangianSplitting;
use gengeom::ResidualReport;
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

/// Largest base algebra whose D² is checked over all basis spinors.
const DSQUARED_MAX_BASE: usize = 8;
const FLOW_ADMISSIBLE_TOL: f64 = 1e-6;
const CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraFile {
    algebra: AlgebraSpec,
    /// Columns spanning V+, in the algebra's basis.
    #[serde(default)]
    vplus: Option<Vec<Vec<f64>>>,
    /// Columns spanning an isotropic subalgebra for admissibility checks.
    #[serde(default)]
    isotropic: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    divergence: Option<Vec<f64>>,
    #[serde(default)]
    flow: FlowConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowConfig {
    t_end: Option<f64>,
    dt: Option<f64>,
}

struct Loaded {
    file: AlgebraFile,
    built: BuiltAlgebra,
}

fn set_param(spec: &mut AlgebraSpec, name: &str, value: f64) -> Result<(), CliError> {
    match (spec, name) {
        (AlgebraSpec::Double { c, .. }, "c") => *c = value,
        (AlgebraSpec::Double { base, .. }, "lambda") => return set_param(base, name, value),
        (AlgebraSpec::So { lambda, .. } | AlgebraSpec::Su { lambda, .. }, "lambda") => *lambda = Some(value),
        _ => return Err(CliError::Usage(format!("parameter '{name}' does not apply to this algebra"))),
    }
    Ok(())
}

fn columns(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>, CliError> {
    if rows.is_empty() || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Core(gengeom::Error::Config(format!(
            "{what} must be a nonempty list of vectors of length {n}"
        ))));
    }
    let cols: Vec<DVector<f64>> = rows.iter().map(|r| DVector::from_row_slice(r)).collect();
    Ok(DMatrix::from_columns(&cols))
}

impl Loaded {
    fn new(c: &Common) -> Result<Self, CliError> {
        let text = read_config(&c.config)?;
        let mut file: AlgebraFile = toml::from_str(&text).map_err(|e| CliError::Toml(e.to_string()))?;
        for p in &c.params {
            let (k, v) = parse_assignment(p)?;
            set_param(&mut file.algebra, &k, v)?;
        }
        let built = file.algebra.build()?;
        Ok(Self { file, built })
    }

    fn alg(&self) -> &QuadraticLieAlgebra {
        &self.built.algebra
    }

    fn graded_double(&self) -> Option<&DoubleAlgebra> {
        self.built.double.as_ref().filter(|d| d.grading.is_some())
    }

    /// The configured V+, or `(1+t) a1` on a graded double; the flag says
    /// whether the default was used.
    fn vplus(&self) -> Result<(GeneralizedMetric, bool), CliError> {
        match (&self.file.vplus, self.graded_double()) {
            (Some(rows), _) => Ok((GeneralizedMetric::new(self.alg(), columns(rows, self.alg().dim(), "vplus")?)?, false)),
            (None, Some(d)) => Ok((vplus_of_double(d)?, true)),
            (None, None) => Err(CliError::Core(gengeom::Error::Config(
                "no [vplus] given and the algebra is not a double with an involution".into(),
            ))),
        }
    }

    /// The configured isotropic subalgebra, or `a0` inside a graded double.
    fn isotropic(&self) -> Result<Option<IsotropicSubalgebra>, CliError> {
        let span = match (&self.file.isotropic, self.graded_double()) {
            (Some(rows), _) => columns(rows, self.alg().dim(), "isotropic")?,
            (None, Some(d)) => {
                let idx0 = &d.grading.as_ref().unwrap().indices0;
                if idx0.is_empty() {
                    return Ok(None);
                }
                DMatrix::from_columns(&idx0.iter().map(|&i| d.embed_basis(1.0, 0.0, i)).collect::<Vec<_>>())
            }
            (None, None) => return Ok(None),
        };
        Ok(Some(IsotropicSubalgebra::new(self.alg(), span)?))
    }

    fn divergence(&self) -> Result<Divergence, CliError> {
        let n = self.alg().dim();
        match &self.file.divergence {
            None => Ok(Divergence::zero(n)),
            Some(v) if v.len() == n => Ok(Divergence::new(DVector::from_row_slice(v))),
            Some(v) => Err(CliError::Core(gengeom::Error::DimensionMismatch { expected: n, got: v.len() })),
        }
    }
}

/// `λ` with `𝒦 = λ K` on the base of a double, when the metric is a
/// multiple of the Killing form.
fn killing_ratio(d: &DoubleAlgebra) -> Option<f64> {
    let k = d.base.metric();
    let kil = d.base.killing_form();
    let i = (0..k.nrows()).max_by(|&a, &b| k[(a, a)].abs().total_cmp(&k[(b, b)].abs()))?;
    if k[(i, i)] == 0.0 {
        return None;
    }
    let lambda = kil[(i, i)] / k[(i, i)];
    ((&kil - k * lambda).amax() < 1e-9 * kil.amax().max(1.0)).then_some(lambda)
}

fn finish(rep: ResidualReport, extra: Vec<(&str, serde_json::Value)>, what: &str) -> Outcome {
    let mut v = rep.to_json();
    for (k, x) in extra {
        v[k] = x;
    }
    let pass = rep.passed();
    let summary = if rep.residuals.is_empty() {
        format!("{what}: no gated residuals")
    } else if pass {
        format!("{what}: {} residuals pass, largest {:.3e}", rep.residuals.len(), rep.max_residual())
    } else {
        format!("{what}: failing {}", rep.failed().join(", "))
    };
    Outcome { body: json_string(v), pass, summary }
}

pub fn algebra_check(c: &Common) -> Result<Outcome, CliError> {
    let l = Loaded::new(c)?;
    let mut rep = check(l.alg());
    if let Some(split) = &l.built.splitting {
        rep.merge("grading", &grading_check(l.alg(), split));
    }
    if let Some(d) = &l.built.double {
        rep.merge("base", &check(&d.base));
        rep.push("double.pairing_block", d.pairing_block_residual());
        rep.push("double.bracket_block", d.bracket_block_residual());
        if let Some(split) = &d.grading {
            rep.merge("grading", &grading_check(&d.base, split));
        }
    }
    let labels = serde_json::to_value(l.alg().labels()).unwrap_or_default();
    Ok(finish(rep, vec![("labels", labels)], "algebra check"))
}

pub fn curvature_gric(c: &Common) -> Result<Outcome, CliError> {
    let l = Loaded::new(c)?;
    let (v, default) = l.vplus()?;
    let div = l.divergence()?;
    let r = gric(l.alg(), &v, &div)?;
    let mut rep = ResidualReport::new(CHECK_TOL);
    let mut extra = vec![("gric", matrix_rows(&r.matrix)), ("norm", num(r.norm()))];
    if let (true, Some(d)) = (default && div.is_zero(), l.graded_double()) {
        // GRic((1+t)u, (1−t)v) = ((c − 1)/2) 𝒦(u, v) on a1
        let idx1 = &d.grading.as_ref().unwrap().indices1;
        let kil = d.base.killing_form();
        let expected = DMatrix::from_fn(idx1.len(), idx1.len(), |i, j| (d.c - 1.0) / 2.0 * kil[(idx1[i], idx1[j])]);
        let got = r.matrix.view((0, 0), (idx1.len(), idx1.len()));
        rep.push("killing_formula", (got - &expected).amax());
        extra.push(("expected", matrix_rows(&expected)));
    }
    if let Some(s) = l.isotropic()? {
        rep.merge("tangency", &tangency_check(l.alg(), &v, &s)?);
    }
    Ok(finish(rep, extra, "curvature gric"))
}

pub fn curvature_scalar(c: &Common) -> Result<Outcome, CliError> {
    let l = Loaded::new(c)?;
    let (v, default) = l.vplus()?;
    let div = l.divergence()?;
    let scalar = scalar_curvature(l.alg(), &v, &div)?;
    let mut rep = ResidualReport::new(CHECK_TOL);
    let mut extra = vec![("scalar", num(scalar))];
    if let (true, Some(d)) = (default && div.is_zero(), l.graded_double()) {
        if let Some(lambda) = killing_ratio(d) {
            let dim1 = d.grading.as_ref().unwrap().indices1.len() as f64;
            let expected = (1.0 + d.c) / 4.0 * lambda * dim1;
            rep.push("killing_formula", (scalar - expected).abs());
            extra.push(("expected", num(expected)));
            extra.push(("lambda", num(lambda)));
        }
    }
    Ok(finish(rep, extra, "curvature scalar"))
}

pub fn curvature_flow(a: &FlowArgs) -> Result<Outcome, CliError> {
    let l = Loaded::new(&a.common)?;
    let (v0, _) = l.vplus()?;
    let div = l.divergence()?;
    let t_end = a.t_end.or(l.file.flow.t_end).unwrap_or(1.0);
    let dt = a.dt.or(l.file.flow.dt).unwrap_or(1e-3);
    let traj = ricci_flow(l.alg(), &v0, &div, t_end, dt).map_err(|e| CliError::Usage(e.to_string()))?;
    let s = l.isotropic()?;

    let (n, k) = (v0.ambient_dim(), v0.dim_plus());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string(), "S".into(), "norm_gric".into()];
    header.extend((0..k).flat_map(|a| (0..n).map(move |i| format!("v{a}_{i}"))));
    header.push("dS_dt".into());
    header.push("admissibility".into());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    let mut worst = 0.0f64;
    for st in &traj.states {
        let adm = s.as_ref().map(|s| admissible_check(l.alg(), &st.metric, s).max_residual());
        worst = worst.max(adm.unwrap_or(0.0));
        let mut row = vec![csv_float(st.t), csv_float(st.action), csv_float(st.gric_norm)];
        row.extend(st.metric.span().iter().map(|&x| csv_float(x)));
        row.push(csv_float(st.action_rate));
        row.push(adm.map(csv_float).unwrap_or_default());
        w.write_record(&row).map_err(io)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("csv is utf-8");
    let first = &traj.states[0];
    let last = traj.states.last().unwrap();
    let mut pass = traj.diagnostic.is_none();
    let mut summary = format!(
        "curvature flow: {} states to t = {}, S {:.6e} -> {:.6e}",
        traj.states.len(),
        last.t,
        first.action,
        last.action
    );
    if s.is_some() {
        pass &= worst < FLOW_ADMISSIBLE_TOL;
        summary.push_str(&format!(", admissibility residual at most {worst:.3e}"));
    }
    if let Some(d) = &traj.diagnostic {
        summary.push_str(&format!("\n{d}"));
    }
    Ok(Outcome { body, pass, summary })
}

pub fn dirac_check(c: &Common) -> Result<Outcome, CliError> {
    let l = Loaded::new(c)?;
    let d = l.graded_double().ok_or_else(|| {
        CliError::Core(gengeom::Error::MissingGrading("dirac check needs a double with an involution".into()))
    })?;
    let mut rep = ResidualReport::new(CHECK_TOL);
    rep.merge("d0", &d0_on_invariants_check(d)?);
    if d.base_dim() <= DSQUARED_MAX_BASE {
        let (value, off) = dirac_square(&d.algebra, &LagrangianSplitting::of_double(d)?)?;
        rep.push("d_squared.identity", off);
        rep.push("d_squared.value", (value - dsquared(&d.algebra)?).abs());
        rep.note("d_squared", value);
    }
    Ok(finish(rep, vec![], "dirac check"))
}
