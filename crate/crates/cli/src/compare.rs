//! Several runs on one problem, merged into a single trace and a cost report.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;

use crate::config::{apply_label, set_key};
use crate::svg::{LineChart, Series};
use crate::{run, CliError, CompareArgs, ModelKind, RunConfig};

#[derive(Debug, Clone, Serialize)]
pub struct Member {
    pub label: String,
    pub model: ModelKind,
    /// Precompute plus training charges; inference is excluded.
    pub cost: u64,
    pub precompute: u64,
    pub training: u64,
    pub epochs_run: usize,
    pub final_loss: f64,
    pub mos_per_point: f64,
    /// `(epoch, cumulative evaluations)` where the loss first fell below the
    /// report tolerance.
    pub first_below: Option<(usize, u64)>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioKind {
    /// Both runs reached the tolerance.
    Both,
    /// The original never did, so its whole budget bounds its cost from below.
    LowerBound,
}

#[derive(Debug, Clone, Serialize)]
pub struct Saving {
    pub label: String,
    /// Original cost over member cost, whole runs.
    pub total: f64,
    /// Original over member cumulative count at the tolerance.
    pub at_tolerance: Option<f64>,
    pub kind: Option<RatioKind>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub problem: String,
    pub tol: f64,
    pub members: Vec<Member>,
    /// Largest cost of any TO member.
    pub d_max: Option<u64>,
    pub savings: Vec<Saving>,
    #[serde(skip)]
    pub dir: PathBuf,
}

impl CompareReport {
    pub fn member(&self, label: &str) -> Option<&Member> {
        self.members.iter().find(|m| m.label == label)
    }

    pub fn saving(&self, label: &str) -> Option<&Saving> {
        self.savings.iter().find(|s| s.label == label)
    }

    pub fn text(&self) -> String {
        let mut s = format!("compare on {} (tolerance {:e})\n", self.problem, self.tol);
        let _ = writeln!(s, "{:<22} {:>14} {:>8} {:>11} {:>11} {:>20}", "model", "evals", "epochs", "loss", "MoS/m", "first below (evals)");
        for m in &self.members {
            let first = m.first_below.map_or("-".to_string(), |(e, c)| format!("{e} ({c})"));
            let _ = writeln!(
                s,
                "{:<22} {:>14} {:>8} {:>11.3e} {:>11.3e} {:>20}",
                m.label, m.cost, m.epochs_run, m.final_loss, m.mos_per_point, first
            );
        }
        if let Some(d) = self.d_max {
            let _ = writeln!(s, "d_max (largest TO count): {d}");
        }
        for sv in &self.savings {
            let at = match (sv.at_tolerance, sv.kind) {
                (Some(r), Some(RatioKind::Both)) => format!("{r:.1}"),
                (Some(r), Some(RatioKind::LowerBound)) => format!(">= {r:.1}"),
                _ => "n/a".into(),
            };
            let _ = writeln!(s, "saving original/{}: {:.1} overall, {at} at tolerance", sv.label, sv.total);
        }
        let _ = writeln!(s, "written to {}", self.dir.display());
        s
    }
}

fn member_configs(args: &CompareArgs) -> Result<(Vec<RunConfig>, PathBuf), CliError> {
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("compare"));
    let mut tables = Vec::new();
    for p in &args.configs {
        tables.push(RunConfig::load(p)?);
    }
    for label in &args.models {
        let mut t = toml::Table::new();
        apply_label(&mut t, label)?;
        tables.push(t);
    }
    let common = crate::RunArgs {
        problem: args.problem.clone(),
        seed: args.seed,
        epochs: args.epochs,
        lr: args.lr,
        grid: args.grid.clone(),
        chart: args.chart,
        ..Default::default()
    };
    let mut configs: Vec<RunConfig> = Vec::new();
    for mut t in tables {
        common.overlay(&mut t)?;
        if !t.contains_key("problem") {
            return Err(CliError::Config("compare needs --problem or a problem in every config".into()));
        }
        let label = RunConfig::from_table(t.clone())?.label();
        let mut dir = out.join(&label);
        let mut k = 2;
        while configs.iter().any(|c| c.output == dir) {
            dir = out.join(format!("{label}-{k}"));
            k += 1;
        }
        set_key(&mut t, "output", dir.to_string_lossy().as_ref().into());
        configs.push(RunConfig::from_table(t)?);
    }
    if configs.len() < 2 {
        return Err(CliError::Config("compare needs at least two models".into()));
    }
    if let Some(c) = configs.iter().find(|c| c.problem != configs[0].problem) {
        return Err(CliError::Config(format!(
            "compare members mix problems `{}` and `{}`",
            configs[0].problem.name(),
            c.problem.name()
        )));
    }
    Ok((configs, out))
}

pub fn execute(args: &CompareArgs) -> Result<CompareReport, CliError> {
    let (configs, out) = member_configs(args)?;
    fs::create_dir_all(&out)?;
    let mut csv = String::from("model,epoch,loss,mos,cum_evals\n");
    let mut members = Vec::new();
    let mut series = Vec::new();
    for cfg in &configs {
        let o = run::execute(cfg)?;
        let label = o.dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or(o.label.clone());
        for r in &o.trace.records {
            let mos = r.mos.map(|m| m.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{label},{},{},{mos},{}", r.epoch, r.loss, r.cum_evals);
        }
        series.push(Series { name: label.clone(), points: o.trace.records.iter().map(|r| (r.epoch as f64, r.loss)).collect() });
        members.push(Member {
            label,
            model: cfg.model,
            cost: o.counts.precompute + o.counts.training,
            precompute: o.counts.precompute,
            training: o.counts.training,
            epochs_run: o.trace.records.len(),
            final_loss: o.final_loss(),
            mos_per_point: o.mos_per_point(),
            first_below: o.trace.first_below(args.tol).map(|r| (r.epoch, r.cum_evals)),
            failure: o.trace.failure.clone(),
        });
    }
    let d_max = members.iter().filter(|m| m.model == ModelKind::To).map(|m| m.cost).max();
    let savings = match members.iter().find(|m| m.model == ModelKind::Original) {
        Some(orig) => members
            .iter()
            .filter(|m| m.model != ModelKind::Original)
            .map(|m| {
                let (at_tolerance, kind) = match (orig.first_below, m.first_below) {
                    (Some((_, a)), Some((_, b))) => (Some(a as f64 / b as f64), Some(RatioKind::Both)),
                    (None, Some((_, b))) => (Some(orig.cost as f64 / b as f64), Some(RatioKind::LowerBound)),
                    _ => (None, None),
                };
                Saving { label: m.label.clone(), total: orig.cost as f64 / m.cost as f64, at_tolerance, kind }
            })
            .collect(),
        None => Vec::new(),
    };
    let report = CompareReport { problem: configs[0].problem.name().into(), tol: args.tol, members, d_max, savings, dir: out.clone() };
    fs::write(out.join("compare.csv"), csv)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(out.join("report.json"), json + "\n")?;
    if args.chart {
        let chart = LineChart {
            title: format!("loss on {}", report.problem),
            x_label: "epoch".into(),
            y_label: "log10 loss".into(),
            log_y: true,
            series,
        };
        fs::write(out.join("chart.svg"), chart.render())?;
    }
    Ok(report)
}
