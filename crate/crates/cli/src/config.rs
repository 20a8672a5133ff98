//! Run configuration: a TOML document with one section per model family.
//!
//! ```toml
//! problem = "damped_osc"
//! model = "to"
//! seed = 7
//!
//! [to]
//! observables = "loc2"
//! ```
//!
//! Command-line flags are applied on top of the file before validation, so
//! a flag for the wrong family is rejected the same way a stray section is.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use dqc_core::models::{BasisKind, EvalMode};
use dqc_core::pauli::ObservableSet;
use dqc_core::problems::{DEProblem, ProblemKind};
use dqc_core::shadows::ShadowBudget;
use dqc_core::training::{AdamConfig, EarlyStop, ModelSpec, TrainConfig, DEFAULT_DEPTH, DEFAULT_QUBITS};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Original,
    To,
    Fs,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Original => "original",
            ModelKind::To => "to",
            ModelKind::Fs => "fs",
        }
    }
}

impl FromStr for ModelKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "original" => Ok(ModelKind::Original),
            "to" => Ok(ModelKind::To),
            "fs" => Ok(ModelKind::Fs),
            other => Err(CliError::Config(format!("unknown model `{other}` (expected original, to or fs)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginalSection {
    #[serde(default = "default_depth")]
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToSection {
    #[serde(default = "default_observables")]
    pub observables: ObservableSet,
    /// Seed of the fixed basis change; the run seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsSection {
    #[serde(default = "default_basis")]
    pub basis: BasisKind,
    #[serde(default = "default_mode")]
    pub mode: EvalMode,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_c0")]
    pub c0: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
}

impl Default for OriginalSection {
    fn default() -> Self {
        Self { depth: DEFAULT_DEPTH }
    }
}

impl Default for ToSection {
    fn default() -> Self {
        Self { observables: default_observables(), basis_seed: None }
    }
}

impl Default for FsSection {
    fn default() -> Self {
        Self {
            basis: default_basis(),
            mode: default_mode(),
            depth: DEFAULT_DEPTH,
            epsilon: default_epsilon(),
            c0: default_c0(),
            exponent: default_exponent(),
        }
    }
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}
fn default_observables() -> ObservableSet {
    ObservableSet::Loc2
}
fn default_basis() -> BasisKind {
    BasisKind::Chebyshev
}
fn default_mode() -> EvalMode {
    EvalMode::Shadow
}
fn default_epsilon() -> f64 {
    ShadowBudget::default().epsilon
}
fn default_c0() -> f64 {
    ShadowBudget::default().c0
}
fn default_exponent() -> f64 {
    ShadowBudget::default().exponent
}
fn default_qubits() -> usize {
    DEFAULT_QUBITS
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub model: ModelKind,
    #[serde(default)]
    pub seed: u64,
    /// Epoch budget; 1000 in 1D and 2000 in 2D when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    /// Collocation points per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    #[serde(default = "default_qubits")]
    pub n_qubits: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "yes")]
    pub early_stop: bool,
    #[serde(default)]
    pub order_check: bool,
    #[serde(default)]
    pub chart: bool,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default)]
    pub stopping: EarlyStop,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original: Option<OriginalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<ToSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fs: Option<FsSection>,
}

impl RunConfig {
    pub fn new(problem: ProblemKind, model: ModelKind) -> Self {
        Self {
            problem,
            model,
            seed: 0,
            epochs: None,
            grid: None,
            n_qubits: DEFAULT_QUBITS,
            output: default_output(),
            early_stop: true,
            order_check: false,
            chart: false,
            adam: AdamConfig::default(),
            stopping: EarlyStop::default(),
            original: None,
            to: None,
            fs: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e| CliError::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<toml::Table, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let stray = [
            (self.original.is_some(), ModelKind::Original),
            (self.to.is_some(), ModelKind::To),
            (self.fs.is_some(), ModelKind::Fs),
        ];
        for (present, kind) in stray {
            if present && kind != self.model {
                return Err(CliError::Config(format!(
                    "section [{}] does not apply to model `{}`",
                    kind.name(),
                    self.model.name()
                )));
            }
        }
        if let Some(g) = &self.grid {
            if g.len() != self.problem.dim() || g.contains(&0) {
                return Err(CliError::Config(format!(
                    "grid {g:?} does not fit the {}-dimensional problem {}",
                    self.problem.dim(),
                    self.problem.name()
                )));
            }
        }
        if self.n_qubits == 0 || self.n_qubits > 10 {
            return Err(CliError::Config(format!("n_qubits = {} out of range 1..=10", self.n_qubits)));
        }
        if self.epochs == Some(0) {
            return Err(CliError::Config("epochs must be positive".into()));
        }
        self.adam.validate()?;
        self.budget().validate()?;
        Ok(())
    }

    fn budget(&self) -> ShadowBudget {
        let fs = self.fs.clone().unwrap_or_default();
        ShadowBudget { epsilon: fs.epsilon, c0: fs.c0, exponent: fs.exponent, ..ShadowBudget::default() }
    }

    pub fn model_spec(&self) -> ModelSpec {
        let n_qubits = self.n_qubits;
        match self.model {
            ModelKind::Original => {
                ModelSpec::Original { n_qubits, depth: self.original.clone().unwrap_or_default().depth }
            }
            ModelKind::To => {
                let to = self.to.clone().unwrap_or_default();
                ModelSpec::To { n_qubits, observables: to.observables, basis_seed: to.basis_seed.unwrap_or(self.seed) }
            }
            ModelKind::Fs => {
                let fs = self.fs.clone().unwrap_or_default();
                ModelSpec::Fs { n_qubits, depth: fs.depth, basis: fs.basis, mode: fs.mode, budget: self.budget() }
            }
        }
    }

    pub fn build_problem(&self) -> Result<DEProblem, CliError> {
        match &self.grid {
            Some(g) => Ok(self.problem.build_with_counts(g)?),
            None => Ok(self.problem.build()),
        }
    }

    pub fn epochs(&self) -> usize {
        self.epochs.unwrap_or_else(|| TrainConfig::default_epochs(self.problem.dim()))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs(),
            adam: self.adam,
            early_stop: self.early_stop.then_some(self.stopping),
        }
    }

    /// A short label such as `to-loc2`.
    pub fn label(&self) -> String {
        self.model_spec().label()
    }
}

/// Sets `key` (dotted for sections) in `table`, creating sections as needed.
pub fn set_key(table: &mut toml::Table, key: &str, value: toml::Value) {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().expect("non-empty key");
    let mut t = table;
    for p in parts {
        t = t
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .expect("section key holds a table");
    }
    t.insert(last.to_string(), value);
}

/// Parses a member label like `to-loc1`, `fs` or `fs-monomial-exact` into
/// the model-specific part of a config.
pub fn apply_label(table: &mut toml::Table, label: &str) -> Result<(), CliError> {
    let mut tokens = label.split('-');
    let head = tokens.next().unwrap_or_default();
    let kind: ModelKind = head.parse()?;
    set_key(table, "model", kind.name().into());
    for tok in tokens {
        let key = match (kind, tok) {
            (ModelKind::To, "loc1" | "loc2" | "all") => "to.observables",
            (ModelKind::Fs, "chebyshev" | "monomial") => "fs.basis",
            (ModelKind::Fs, "exact" | "shadow") => "fs.mode",
            _ => return Err(CliError::Config(format!("cannot read `{tok}` in model label `{label}`"))),
        };
        set_key(table, key, tok.into());
    }
    if kind == ModelKind::To && !table.get("to").and_then(|t| t.get("observables")).is_some() {
        return Err(CliError::Config(format!("model label `{label}` needs an observable set, e.g. to-loc2")));
    }
    Ok(())
}
