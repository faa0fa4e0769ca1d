//! `sugra verify | solve | scan`.

use crate::format::{csv_float, json_string, num};
use crate::{parse_assignment, read_config, with_threads, CliError, Common, Outcome, ScanArgs, SolveArgs};
use gengeom::sugra::{self as sg, AlgebraicSystem, GridAxis, NewtonOptions, SugraInput};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::collections::BTreeSet;

fn load(c: &Common) -> Result<SugraInput, CliError> {
    let mut input = SugraInput::from_toml(&read_config(&c.config)?)?;
    for p in &c.params {
        let (k, v) = parse_assignment(p)?;
        input.set_param(&k, v)?;
    }
    Ok(input)
}

fn param_map(input: &SugraInput) -> Value {
    let mut m = Map::new();
    for n in input.param_names() {
        if let Ok(v) = input.get_param(&n) {
            m.insert(n, num(v));
        }
    }
    Value::Object(m)
}

pub fn verify(c: &Common) -> Result<Outcome, CliError> {
    let input = load(c)?;
    let rep = sg::verify(&input)?;
    let mut v = rep.to_json();
    v["parameters"] = param_map(&input);
    let pass = rep.passed();
    let summary = if pass {
        format!("sugra verify: {} residuals pass, largest {:.3e}", rep.residuals.len(), rep.max_residual())
    } else {
        let detail: Vec<String> =
            rep.failed().iter().map(|k| format!("{k} = {:.3e}", rep.get(k).unwrap_or(f64::NAN))).collect();
        format!("sugra verify: failing {}", detail.join(", "))
    };
    Ok(Outcome { body: json_string(v), pass, summary })
}

/// Random starting points: `λ` parameters drawn negative, the rest in [−1, 1].
fn random_seeds(names: &[String], count: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    (0..count)
        .map(|_| {
            DVector::from_iterator(
                names.len(),
                names.iter().map(|n| if n.starts_with("lambda") { rng.gen_range(-2.0..-0.2) } else { rng.gen_range(-1.0..1.0) }),
            )
        })
        .collect()
}

fn parse_seeds(args: &SolveArgs, sys: &AlgebraicSystem) -> Result<Vec<DVector<f64>>, CliError> {
    if args.seeds.is_empty() {
        return Ok(vec![sys.x0.clone()]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.rng_seed);
    let mut out = Vec::new();
    for s in &args.seeds {
        if let Some(n) = s.strip_prefix("random:") {
            let n: usize = n.trim().parse().map_err(|_| CliError::Usage(format!("bad seed count in '{s}'")))?;
            out.extend(random_seeds(&sys.names, n, &mut rng));
        } else {
            let v = s
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|_| CliError::Usage(format!("seed '{s}' is neither random:N nor a list of numbers")))?;
            if v.len() != sys.names.len() {
                return Err(CliError::Usage(format!(
                    "seed '{s}' has {} entries, the parameters are {:?}",
                    v.len(),
                    sys.names
                )));
            }
            out.push(DVector::from_vec(v));
        }
    }
    Ok(out)
}

pub fn solve(args: &SolveArgs) -> Result<Outcome, CliError> {
    let input = load(&args.common)?;
    let sys = AlgebraicSystem::of(&input)?;
    let pins = args.pins.iter().map(|p| parse_assignment(p)).collect::<Result<Vec<_>, _>>()?;
    let seeds = parse_seeds(args, &sys)?;
    let opts = NewtonOptions { tolerance: args.tolerance, max_iterations: args.max_iterations, ..Default::default() };
    let outcomes = with_threads(args.threads, || sg::solve(&sys, &pins, &seeds, &opts))??;

    let named = |x: &DVector<f64>| -> Value {
        Value::Object(sys.names.iter().zip(x.iter()).map(|(n, &v)| (n.clone(), num(v))).collect())
    };
    let mut solutions = Vec::new();
    let (mut converged, mut verified) = (0, 0);
    for o in &outcomes {
        let mut entry = json!({ "seed": named(&o.seed) });
        match &o.result {
            Ok(sol) => {
                converged += 1;
                entry["converged"] = true.into();
                entry["x"] = named(&sol.x);
                entry["residual"] = num(sol.residual);
                entry["iterations"] = sol.iterations.into();
            }
            Err(e) => {
                entry["converged"] = false.into();
                entry["error"] = e.to_string().into();
            }
        }
        match &o.verification {
            Some(Ok(rep)) => {
                verified += rep.passed() as usize;
                entry["verification"] = rep.to_json();
            }
            Some(Err(e)) => entry["verification_error"] = e.to_string().into(),
            None => {}
        }
        solutions.push(entry);
    }
    let pass = verified > 0;
    let body = json!({
        "parameters": sys.names,
        "pins": Value::Object(pins.iter().map(|(k, v)| (k.clone(), num(*v))).collect()),
        "solutions": solutions,
        "converged": converged,
        "verified": verified,
        "pass": pass,
    });
    let summary = format!(
        "sugra solve: {} seeds, {converged} converged, {verified} verified against the full equations",
        outcomes.len()
    );
    Ok(Outcome { body: json_string(body), pass, summary })
}

pub fn scan(args: &ScanArgs) -> Result<Outcome, CliError> {
    let input = load(&args.common)?;
    let axes = args.grid.iter().map(|g| GridAxis::parse(g)).collect::<Result<Vec<_>, _>>()?;
    let rows = with_threads(args.threads, || sg::scan(&input, &axes))??;

    let names: BTreeSet<String> =
        rows.iter().filter_map(|r| r.outcome.as_ref().ok()).flat_map(|rep| rep.residuals.keys().cloned()).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
    header.push("pass".into());
    header.extend(names.iter().cloned());
    header.push("error".into());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&header).map_err(io)?;
    let mut passing = 0;
    for r in &rows {
        let mut rec: Vec<String> = r.params.iter().map(|(_, v)| csv_float(*v)).collect();
        match &r.outcome {
            Ok(rep) => {
                passing += rep.passed() as usize;
                rec.push(rep.passed().to_string());
                rec.extend(names.iter().map(|n| rep.get(n).map(csv_float).unwrap_or_default()));
                rec.push(String::new());
            }
            Err(e) => {
                rec.push("false".into());
                rec.extend(names.iter().map(|_| String::new()));
                rec.push(e.to_string());
            }
        }
        w.write_record(&rec).map_err(io)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("csv is utf-8");
    let pass = !rows.is_empty() && passing == rows.len();
    let summary = format!("sugra scan: {passing}/{} grid points pass", rows.len());
    Ok(Outcome { body, pass, summary })
}
