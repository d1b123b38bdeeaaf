//! Batch commands behind the `schro` binary.
//!
//! Every command resolves its settings from an optional JSON config file
//! overlaid with command-line flags, runs, and returns an [`Outcome`]: an exit
//! code, one JSON report for stdout and a few summary lines for stderr.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or the run
//! aborts, 2 on configuration errors.

use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

mod sim;
mod verify;

pub use sim::{BoostConfig, CovarianceConfig, EvolveConfig};
pub use verify::{Check, Relation, Suite, VerifyConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "schro", version, about = "Galilean covariance checks and split-step Schrödinger runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an invariant suite.
    Verify(VerifyArgs),
    /// Evolve an initial wave function and write field snapshots.
    Evolve(EvolveArgs),
    /// Apply a Galilean frame change to a stored field.
    Boost(BoostArgs),
    /// Compare evolve-then-boost with boost-then-evolve.
    Covariance(CovarianceArgs),
}

#[derive(Debug, Default, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Option<Suite>,
    /// JSON file with default settings; flags override it.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replace the upper bound of every "≤" check.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Inject a defect of this size into the object under test.
    #[arg(long)]
    pub perturbation: Option<f64>,
    #[arg(long)]
    pub triples: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub forms: Option<usize>,
}

#[derive(Debug, Default, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct EvolveArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Initial wave function as an expression in `y1..yn, t`.
    #[arg(long)]
    pub initial: Option<String>,
    /// Initial field file, used instead of `--initial`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub norm_tol: Option<f64>,
    #[arg(long)]
    pub allow_complex_potential: bool,
    /// Step with the potential even when it is zero.
    #[arg(long)]
    pub unfused: bool,
}

#[derive(Debug, Default, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct BoostArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Relative velocity, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub v: Option<Vec<f64>>,
    /// Spatial offset, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub w: Option<Vec<f64>>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub norm_tol: Option<f64>,
}

#[derive(Debug, Default, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct CovarianceArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub center: Option<Vec<f64>>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub v: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub w: Option<Vec<f64>>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub analytic_tol: Option<f64>,
    /// Diagnostic: drop the gauge factor and shift coordinates only.
    #[arg(long)]
    pub no_gauge_phase: bool,
}

/// Result of one command.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub summary: Vec<String>,
}

impl Outcome {
    fn config_error(command: &str, message: String) -> Outcome {
        let mut report = Map::new();
        report.insert("command".into(), command.into());
        report.insert("pass".into(), false.into());
        report.insert("error".into(), message.clone().into());
        Outcome { code: EXIT_CONFIG, report: Value::Object(report), summary: vec![format!("config error: {message}")] }
    }

    fn failed(command: &str, message: String) -> Outcome {
        let mut out = Outcome::config_error(command, message.clone());
        out.code = EXIT_FAIL;
        out.summary = vec![format!("error: {message}")];
        out
    }

    pub fn passed(&self) -> bool {
        self.code == EXIT_PASS
    }

    /// The report as one compact JSON line.
    pub fn json(&self) -> String {
        to_json(&self.report)
    }
}

/// Errors that stop a command before or while it runs.
#[derive(Debug)]
pub(crate) enum Failure {
    Config(String),
    Run(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Diverged { .. } | crate::Error::Evaluation(_) => Failure::Run(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let (name, result) = match &cli.command {
        Command::Verify(a) => ("verify", resolve(a.config.as_deref(), a).and_then(|c| verify::run(&c))),
        Command::Evolve(a) => ("evolve", resolve(a.config.as_deref(), a).and_then(|c| sim::evolve(&c))),
        Command::Boost(a) => ("boost", resolve(a.config.as_deref(), a).and_then(|c| sim::boost(&c))),
        Command::Covariance(a) => ("covariance", resolve(a.config.as_deref(), a).and_then(|c| sim::covariance(&c))),
    };
    match result {
        Ok(out) => out,
        Err(Failure::Config(m)) => Outcome::config_error(name, m),
        Err(Failure::Run(m)) => Outcome::failed(name, m),
    }
}

/// Parses `args` (without the program name) and runs the command.
pub fn run_args<I, S>(args: I) -> Result<Outcome, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(std::iter::once("schro".into()).chain(args.into_iter().map(Into::into)))?;
    Ok(run(&cli))
}

fn resolve<C: DeserializeOwned>(file: Option<&Path>, flags: &impl Serialize) -> Result<C, Failure> {
    merge_config(file, flags).map_err(Failure::Config)
}

/// Reads the config file (if any) and overlays every flag that was given.
pub fn merge_config<C: DeserializeOwned>(file: Option<&Path>, flags: &impl Serialize) -> Result<C, String> {
    let mut base = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => Value::Object(Map::new()),
    };
    let Value::Object(obj) = &mut base else {
        return Err("config file must hold a JSON object".into());
    };
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| e.to_string())? else {
        unreachable!("flag structs serialize to objects")
    };
    for (k, v) in given {
        // unset options serialize as null, unset switches as false
        if !(v.is_null() || v == Value::Bool(false)) {
            obj.insert(k, v);
        }
    }
    serde_json::from_value(base).map_err(|e| format!("invalid config: {e}"))
}

/// Sizes the global thread pool from `SCHRO_THREADS` (unset or 0: automatic).
pub fn init_threads() -> Result<usize, String> {
    let n = match std::env::var("SCHRO_THREADS") {
        Ok(s) => s.trim().parse::<usize>().map_err(|_| format!("SCHRO_THREADS = {s:?} is not a thread count"))?,
        Err(_) => 0,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(rayon::current_num_threads())
}

/// Compact JSON with every float printed to 17 significant digits; non-finite values become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("reports serialize");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

pub(crate) fn positive(name: &str, x: f64) -> Result<(), Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Failure::Config(format!("{name} = {x} must be positive")))
    }
}
