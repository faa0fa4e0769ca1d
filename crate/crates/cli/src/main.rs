use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod format;
mod geometry;
mod sugra;

#[derive(Parser)]
#[command(name = "gengeom", version, about = "Generalized geometry over a point and algebraic supergravity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quadratic Lie algebra checks
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Generalized Ricci tensor, scalar curvature and flow
    #[command(subcommand)]
    Curvature(CurvatureCmd),
    /// Dirac generating operator checks
    #[command(subcommand)]
    Dirac(DiracCmd),
    /// Algebraic supergravity equations
    #[command(subcommand)]
    Sugra(SugraCmd),
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// Jacobi, invariance and grading residuals
    Check(Common),
}

#[derive(Subcommand)]
enum CurvatureCmd {
    /// GRic matrix between the V+ and V- frames
    Gric(Common),
    /// Generalized scalar curvature
    Scalar(Common),
    /// Generalized Ricci flow trajectory as CSV
    Flow(FlowArgs),
}

#[derive(Subcommand)]
enum DiracCmd {
    /// D0 on invariant odd forms and D² on a double
    Check(Common),
}

#[derive(Subcommand)]
enum SugraCmd {
    /// Residuals of one parameter point
    Verify(Common),
    /// Newton on the closed-form parameter system
    Solve(SolveArgs),
    /// Verify every point of a parameter grid, CSV out
    Scan(ScanArgs),
}

#[derive(Args, Clone)]
pub struct Common {
    /// TOML config
    pub config: PathBuf,
    /// Override a config parameter, `name=value` (repeatable)
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Write the machine-readable output here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Hold a parameter fixed, `name=value` (repeatable)
    #[arg(long = "pin", value_name = "NAME=VALUE")]
    pub pins: Vec<String>,
    /// Comma-separated start vector in parameter order, or `random:N`
    #[arg(long = "seed")]
    pub seeds: Vec<String>,
    /// RNG seed for `random:N`
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// `name=lo:hi:steps` or `name=v1,v2,...` (repeatable, first varies slowest)
    #[arg(long = "grid", required = true)]
    pub grid: Vec<String>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Anything that ends in exit code 2.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Toml(String),
    Usage(String),
    Core(gengeom::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use gengeom::Error as E;
        match self {
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Toml(m) => write!(f, "malformed TOML: {m}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e @ E::InvalidDimension(_)) => write!(f, "dimension budget violated: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<gengeom::Error> for CliError {
    fn from(e: gengeom::Error) -> Self {
        match e {
            gengeom::Error::Config(m) if m.starts_with("malformed") => CliError::Toml(m),
            e => CliError::Core(e),
        }
    }
}

/// Machine output plus the verdict and a one-paragraph human summary.
pub struct Outcome {
    pub body: String,
    pub pass: bool,
    pub summary: String,
}

pub fn read_config(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn parse_assignment(s: &str) -> Result<(String, f64), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected name=value, got '{s}'")))?;
    let v = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("'{v}' is not a number in '{s}'")))?;
    Ok((k.trim().to_string(), v))
}

pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Usage(format!("thread pool: {e}"))),
    }
}

fn dispatch(cmd: Command) -> Result<(Outcome, Option<PathBuf>), CliError> {
    Ok(match cmd {
        Command::Algebra(AlgebraCmd::Check(c)) => (geometry::algebra_check(&c)?, c.output),
        Command::Curvature(CurvatureCmd::Gric(c)) => (geometry::curvature_gric(&c)?, c.output),
        Command::Curvature(CurvatureCmd::Scalar(c)) => (geometry::curvature_scalar(&c)?, c.output),
        Command::Curvature(CurvatureCmd::Flow(a)) => (geometry::curvature_flow(&a)?, a.common.output),
        Command::Dirac(DiracCmd::Check(c)) => (geometry::dirac_check(&c)?, c.output),
        Command::Sugra(SugraCmd::Verify(c)) => (sugra::verify(&c)?, c.output),
        Command::Sugra(SugraCmd::Solve(a)) => (sugra::solve(&a)?, a.common.output.clone()),
        Command::Sugra(SugraCmd::Scan(a)) => (sugra::scan(&a)?, a.common.output.clone()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok((out, path)) => {
            match path {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, &out.body) {
                        eprintln!("gengeom: io error: {}: {e}", p.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{}", out.body),
            }
            eprintln!("{}", out.summary);
            eprintln!("{}", if out.pass { "PASS" } else { "FAIL" });
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("gengeom: {e}");
            ExitCode::from(2)
        }
    }
}
