//! Configuration of symmetric-space supergravity backgrounds and the TOML
//! front end.

use crate::error::{Error, Result};
use crate::liealg::{AlgebraSpec, Involution};
use crate::report::DEFAULT_TOLERANCE;
use serde::{Deserialize, Serialize};

/// Total dimension of `V+`.
pub const TARGET_DIM: usize = 10;

/// One simple factor: algebra with involution, metric scale and the
/// double parameter. Block 0 is the Lorentzian factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockConfig {
    pub algebra: AlgebraSpec,
    pub lambda: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbelianConfig {
    pub dim: usize,
    /// Positive definite; identity when absent.
    #[serde(default)]
    pub metric: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeTerm {
    /// Which block volume forms enter the product (abelian block last).
    pub h: Vec<u8>,
    pub f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// Seed spinor `F̂`; the flux is `F = F̂ + R F̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FluxAnsatz {
    /// `Σ d_n/n! Ω^n` with `Ω` the pairing form on the odd part of `block`.
    Polynomial {
        d: Vec<f64>,
        #[serde(default = "default_poly_block")]
        block: usize,
    },
    VolumeProducts { terms: Vec<VolumeTerm> },
    /// Explicit `(mask, re, im)` coefficients on the 10-dim odd part.
    Raw { terms: Vec<(usize, f64, f64)> },
}

fn default_poly_block() -> usize {
    1
}

fn default_tol() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SugraConfig {
    pub blocks: Vec<BlockConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abelian: Option<AbelianConfig>,
    pub flux: FluxAnsatz,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

impl SugraConfig {
    /// Checks that need no algebra construction.
    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Config("at least the Lorentzian block is required".into()));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if !b.lambda.is_finite() || !b.c.is_finite() {
                return Err(Error::InvalidParameter(format!("block {k}: non-finite lambda or c")));
            }
            if k == 0 && b.lambda != 1.0 {
                return Err(Error::InvalidParameter(format!("block 0 must have lambda = 1, got {}", b.lambda)));
            }
            if k > 0 && b.lambda >= 0.0 {
                return Err(Error::InvalidParameter(format!("block {k}: lambda must be negative, got {}", b.lambda)));
            }
            check_block_algebra(&b.algebra, k)?;
        }
        if let Some(a) = &self.abelian {
            if a.dim == 0 {
                return Err(Error::Config("abelian block of dimension 0; omit it instead".into()));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        let nh = self.blocks.len() + usize::from(self.abelian.is_some());
        match &self.flux {
            FluxAnsatz::VolumeProducts { terms } => {
                for t in terms {
                    if t.h.len() != nh || t.h.iter().any(|&x| x > 1) {
                        return Err(Error::Config(format!(
                            "volume-product term needs {nh} entries in {{0,1}}, got {:?}",
                            t.h
                        )));
                    }
                }
            }
            FluxAnsatz::Polynomial { block, .. } => {
                if *block == 0 || *block >= self.blocks.len() {
                    return Err(Error::Config(format!("polynomial flux block {block} is not a compact block")));
                }
            }
            FluxAnsatz::Raw { .. } => {}
        }
        Ok(())
    }
}

fn check_block_algebra(spec: &AlgebraSpec, k: usize) -> Result<()> {
    match spec {
        AlgebraSpec::So { lambda, involution, .. } | AlgebraSpec::Su { lambda, involution, .. } => {
            if lambda.is_some() {
                return Err(Error::Config(format!("block {k}: set lambda on the block, not inside the algebra")));
            }
            match involution {
                None => Err(Error::Config(format!("block {k}: an involution is required"))),
                Some(Involution::Trivial) => Err(Error::Config(format!("block {k}: trivial involution on a simple block"))),
                Some(_) => Ok(()),
            }
        }
        AlgebraSpec::Sum { blocks } => blocks.iter().try_for_each(|b| check_block_algebra(b, k)),
        _ => Err(Error::Config(format!("block {k}: expected so, su or a sum of them"))),
    }
}

/// Closed-form one-parameter family with flux on the Lorentzian volume form.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaFamily {
    pub config: SugraConfig,
    pub c1: f64,
    pub lambda1: f64,
    pub a: f64,
}

pub fn eta_family(m: usize, block1: &AlgebraSpec, c0: f64) -> Result<EtaFamily> {
    if !(2..=8).contains(&m) {
        return Err(Error::InvalidParameter(format!("m must lie in 2..=8, got {m}")));
    }
    if !c0.is_finite() || c0 >= 1.0 {
        return Err(Error::InvalidParameter(format!("c0 = {c0} gives a² = 2(1 − c0) ≤ 0")));
    }
    let rho = (1.0 + c0) / (1.0 - c0) * m as f64 / (10 - m) as f64;
    let c1 = (rho - 1.0) / (rho + 1.0);
    if !c1.is_finite() || (1.0 - c1.abs()) < 1e-12 {
        return Err(Error::InvalidParameter(format!("c0 = {c0} sends c1 to ±1")));
    }
    let lambda1 = -(1.0 - c0) / (1.0 - c1);
    if !(lambda1 < 0.0) {
        return Err(Error::InvalidParameter(format!("lambda1 = {lambda1} is not negative")));
    }
    let a = (2.0 * (1.0 - c0)).sqrt();
    let config = SugraConfig {
        blocks: vec![
            BlockConfig { algebra: lorentz_block(m)?, lambda: 1.0, c: c0 },
            BlockConfig { algebra: block1.clone(), lambda: lambda1, c: c1 },
        ],
        abelian: None,
        flux: FluxAnsatz::VolumeProducts { terms: vec![VolumeTerm { h: vec![1, 0], f: a, name: Some("a".into()) }] },
        tolerance: DEFAULT_TOLERANCE,
    };
    Ok(EtaFamily { config, c1, lambda1, a })
}

/// `so(m−1, 2)` with the involution fixing `so(m−1, 1)`.
pub fn lorentz_block(m: usize) -> Result<AlgebraSpec> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("Lorentzian factor needs m ≥ 2, got {m}")));
    }
    Ok(AlgebraSpec::So { p: m - 1, q: 2, lambda: None, involution: Some(Involution::SoLast) })
}

/// What a TOML file may describe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SugraInput {
    /// The one-parameter family in closed form.
    Eta {
        m: usize,
        c0: f64,
        compact: AlgebraSpec,
        #[serde(default = "default_tol")]
        tolerance: f64,
    },
    /// `AdS_{10−2M} × CP^M` with polynomial flux in the pairing form.
    FirstAnsatz {
        #[serde(rename = "M")]
        m: usize,
        c0: f64,
        c1: f64,
        lambda1: f64,
        d: Vec<f64>,
        #[serde(default = "default_tol")]
        tolerance: f64,
    },
    Explicit(SugraConfig),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SugraFile {
    sugra: SugraInput,
}

impl SugraInput {
    pub fn from_toml(text: &str) -> Result<Self> {
        let f: SugraFile = toml::from_str(text).map_err(|e| Error::Config(format!("malformed sugra config: {e}")))?;
        Ok(f.sugra)
    }

    pub fn to_config(&self) -> Result<SugraConfig> {
        let cfg = match self {
            SugraInput::Eta { m, c0, compact, tolerance } => {
                let mut cfg = eta_family(*m, compact, *c0)?.config;
                cfg.tolerance = *tolerance;
                cfg
            }
            SugraInput::FirstAnsatz { m, c0, c1, lambda1, d, tolerance } => {
                first_ansatz_config(*m, *c0, *c1, *lambda1, d, *tolerance)?
            }
            SugraInput::Explicit(c) => c.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Names accepted by [`SugraInput::set_param`].
    pub fn param_names(&self) -> Vec<String> {
        match self {
            SugraInput::Eta { .. } => vec!["m".into(), "c0".into()],
            SugraInput::FirstAnsatz { d, .. } => {
                let mut v: Vec<String> = ["c0", "c1", "lambda1"].iter().map(|s| s.to_string()).collect();
                v.extend((0..d.len()).map(|n| format!("d{n}")));
                v
            }
            SugraInput::Explicit(c) => {
                let mut v = Vec::new();
                for k in 0..c.blocks.len() {
                    v.push(format!("c{k}"));
                }
                for k in 1..c.blocks.len() {
                    v.push(format!("lambda{k}"));
                }
                match &c.flux {
                    FluxAnsatz::Polynomial { d, .. } => v.extend((0..d.len()).map(|n| format!("d{n}"))),
                    FluxAnsatz::VolumeProducts { terms } => v.extend(terms.iter().enumerate().map(|(i, t)| term_name(t, i))),
                    FluxAnsatz::Raw { .. } => {}
                }
                v
            }
        }
    }

    pub fn get_param(&self, name: &str) -> Result<f64> {
        let mut probe = self.clone();
        let slot = probe.slot(name)?;
        Ok(*slot)
    }

    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} = {value} is not finite")));
        }
        if let SugraInput::Eta { m, .. } = self {
            if name == "m" {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::InvalidParameter(format!("m must be a non-negative integer, got {value}")));
                }
                *m = value as usize;
                return Ok(());
            }
        }
        *self.slot(name)? = value;
        Ok(())
    }

    fn slot(&mut self, name: &str) -> Result<&mut f64> {
        let unknown = || Error::Config(format!("unknown parameter '{name}'"));
        let index = |prefix: &str| name.strip_prefix(prefix).and_then(|r| r.parse::<usize>().ok());
        match self {
            SugraInput::Eta { c0, .. } => match name {
                "c0" => Ok(c0),
                _ => Err(unknown()),
            },
            SugraInput::FirstAnsatz { c0, c1, lambda1, d, .. } => match name {
                "c0" => Ok(c0),
                "c1" => Ok(c1),
                "lambda1" => Ok(lambda1),
                _ => index("d").and_then(|n| d.get_mut(n)).ok_or_else(unknown),
            },
            SugraInput::Explicit(c) => {
                if let Some(k) = index("lambda") {
                    return c.blocks.get_mut(k).map(|b| &mut b.lambda).ok_or_else(unknown);
                }
                if let Some(k) = index("c") {
                    return c.blocks.get_mut(k).map(|b| &mut b.c).ok_or_else(unknown);
                }
                match &mut c.flux {
                    FluxAnsatz::Polynomial { d, .. } => index("d").and_then(|n| d.get_mut(n)).ok_or_else(unknown),
                    FluxAnsatz::VolumeProducts { terms } => {
                        let pos = terms.iter().enumerate().position(|(i, t)| term_name(t, i) == name);
                        pos.map(move |i| &mut terms[i].f).ok_or_else(unknown)
                    }
                    FluxAnsatz::Raw { .. } => Err(unknown()),
                }
            }
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            SugraInput::Eta { tolerance, .. } | SugraInput::FirstAnsatz { tolerance, .. } => *tolerance,
            SugraInput::Explicit(c) => c.tolerance,
        }
    }
}

/// Display name of a volume-product coefficient.
pub fn term_name(t: &VolumeTerm, i: usize) -> String {
    t.name.clone().unwrap_or_else(|| format!("f{i}"))
}

pub fn first_ansatz_config(m: usize, c0: f64, c1: f64, lambda1: f64, d: &[f64], tolerance: f64) -> Result<SugraConfig> {
    if !(1..=3).contains(&m) {
        return Err(Error::InvalidParameter(format!("M must lie in 1..=3, got {m}")));
    }
    if d.len() != m + 1 {
        return Err(Error::InvalidParameter(format!("expected {} polynomial coefficients, got {}", m + 1, d.len())));
    }
    Ok(SugraConfig {
        blocks: vec![
            BlockConfig { algebra: lorentz_block(10 - 2 * m)?, lambda: 1.0, c: c0 },
            BlockConfig {
                algebra: AlgebraSpec::Su { n: m + 1, lambda: None, involution: Some(Involution::SuBlock) },
                lambda: lambda1,
                c: c1,
            },
        ],
        abelian: None,
        flux: FluxAnsatz::Polynomial { d: d.to_vec(), block: 1 },
        tolerance,
    })
}
