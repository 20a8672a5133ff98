//! Command-line front end for the `dqc-core` solvers: single runs, model
//! comparisons, cost predictions and a self-test.
//!
//! Exit status is 0 on success, 2 for configuration errors and 3 for
//! numerical failures (a non-finite loss, or a failed self-test).

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod compare;
pub mod config;
pub mod run;
pub mod selftest;
pub mod svg;

pub use config::{ModelKind, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dqc_core::Error> for CliError {
    fn from(e: dqc_core::Error) -> Self {
        match e {
            dqc_core::Error::Numerical(m) => CliError::Numerical(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dqc", version, about = "Differentiable quantum circuit solvers for differential equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model and write trace, solution and summary files.
    Run(RunArgs),
    /// Train several models on one problem and compare their costs.
    Compare(CompareArgs),
    /// Print the predicted evaluation count without training.
    Count(RunArgs),
    /// Run the invariant suite.
    Selftest(SelftestArgs),
}

/// Flags shared by `run` and `count`. Each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// damped_osc, burgers, coupled or twod.
    #[arg(long)]
    pub problem: Option<String>,
    /// original, to or fs.
    #[arg(long)]
    pub model: Option<String>,
    /// Observable set for TO models: loc1, loc2 or all.
    #[arg(long)]
    pub obs: Option<String>,
    #[arg(long)]
    pub basis_seed: Option<u64>,
    /// FS basis: chebyshev or monomial.
    #[arg(long)]
    pub basis: Option<String>,
    /// FS mode: exact or shadow.
    #[arg(long)]
    pub mode: Option<String>,
    /// Ansatz depth for original and FS models.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Collocation points per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check model derivatives against finite differences before training.
    #[arg(long)]
    pub order_check: bool,
    /// Also write SVG charts.
    #[arg(long)]
    pub chart: bool,
    #[arg(long)]
    pub no_early_stop: bool,
}

impl RunArgs {
    /// The config file (if any) with every given flag applied.
    pub fn table(&self) -> Result<toml::Table, CliError> {
        let mut t = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => toml::Table::new(),
        };
        self.overlay(&mut t)?;
        Ok(t)
    }

    pub fn overlay(&self, t: &mut toml::Table) -> Result<(), CliError> {
        use config::set_key;
        let int = |v: u64| -> Result<toml::Value, CliError> {
            i64::try_from(v).map(toml::Value::Integer).map_err(|_| CliError::Config(format!("{v} is too large")))
        };
        if let Some(v) = &self.problem {
            set_key(t, "problem", v.as_str().into());
        }
        if let Some(v) = &self.model {
            set_key(t, "model", v.as_str().into());
        }
        if let Some(v) = &self.obs {
            set_key(t, "to.observables", v.as_str().into());
        }
        if let Some(v) = self.basis_seed {
            set_key(t, "to.basis_seed", int(v)?);
        }
        for (key, v) in [("fs.basis", &self.basis), ("fs.mode", &self.mode)] {
            if let Some(v) = v {
                set_key(t, key, v.as_str().into());
            }
        }
        for (key, v) in [("fs.epsilon", self.epsilon), ("fs.c0", self.c0), ("fs.exponent", self.exponent)] {
            if let Some(v) = v {
                set_key(t, key, v.into());
            }
        }
        if let Some(d) = self.depth {
            let section = match t.get("model").and_then(|m| m.as_str()) {
                Some("fs") => "fs",
                Some("to") => return Err(CliError::Config("--depth does not apply to model `to`".into())),
                _ => "original",
            };
            set_key(t, &format!("{section}.depth"), int(d as u64)?);
        }
        if let Some(v) = self.epochs {
            set_key(t, "epochs", int(v as u64)?);
        }
        if let Some(v) = self.lr {
            set_key(t, "adam.lr", v.into());
        }
        if let Some(v) = self.seed {
            set_key(t, "seed", int(v)?);
        }
        if let Some(g) = &self.grid {
            let vals = g.iter().map(|&n| int(n as u64)).collect::<Result<Vec<_>, _>>()?;
            set_key(t, "grid", toml::Value::Array(vals));
        }
        if let Some(v) = self.qubits {
            set_key(t, "n_qubits", int(v as u64)?);
        }
        if let Some(v) = &self.out {
            set_key(t, "output", v.to_string_lossy().as_ref().into());
        }
        if self.order_check {
            set_key(t, "order_check", true.into());
        }
        if self.chart {
            set_key(t, "chart", true.into());
        }
        if self.no_early_stop {
            set_key(t, "early_stop", false.into());
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let t = self.table()?;
        for key in ["problem", "model"] {
            if !t.contains_key(key) {
                return Err(CliError::Config(format!("missing required `{key}`: pass --{key} or set it in --config")));
            }
        }
        RunConfig::from_table(t)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Member config files; all must name the same problem.
    #[arg(long = "config")]
    pub configs: Vec<PathBuf>,
    /// Member labels such as original,to-all,to-loc2,fs.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<String>,
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Loss level at which cumulative counts are compared.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long)]
    pub chart: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Random circuits in the derivative check.
    #[arg(long, default_value_t = 50)]
    pub triples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let out = run::execute(&cfg)?;
            if let Some(o) = &out.order_check {
                let worst = o.rows.iter().map(|r| r.error).fold(0.0, f64::max);
                println!(
                    "order check passed: {} model derivatives (worst error {worst:.2e}), random circuits {:.2e} / {:.2e}",
                    o.rows.len(),
                    o.circuit_errors.0,
                    o.circuit_errors.1
                );
            }
            println!("{}", out.report_line());
            match &out.trace.failure {
                Some(msg) => Err(CliError::Numerical(msg.clone())),
                None => Ok(()),
            }
        }
        Command::Compare(args) => {
            let report = compare::execute(&args)?;
            print!("{}", report.text());
            Ok(())
        }
        Command::Count(args) => {
            let cfg = args.resolve()?;
            println!("{}", serde_json::to_string_pretty(&run::count(&cfg)?).expect("json"));
            Ok(())
        }
        Command::Selftest(args) => {
            let checks = selftest::run_all(args.triples, args.seed);
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            if failed == 0 {
                println!("selftest: all {} checks passed", checks.len());
                Ok(())
            } else {
                Err(CliError::Numerical(format!("{failed} of {} self-test checks failed", checks.len())))
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
