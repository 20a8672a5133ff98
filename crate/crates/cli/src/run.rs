//! A single training run and the files it leaves behind.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use dqc_core::differentiation::finite_difference;
use dqc_core::models::{Block, Deriv, EvalMode, Point, TrialModel};
use dqc_core::problems::DEProblem;
use dqc_core::training::{
    build_models, estimate_cost, table_points, train, CountBreakdown, EvalCounter, ModelSpec, Phase, TrainTrace,
};
use serde::Serialize;
use serde_json::json;

use crate::svg::{LineChart, Series};
use crate::{selftest, CliError, RunConfig};

/// Loss level reported as "first below" in summaries.
pub const REPORT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct OrderRow {
    pub function: usize,
    pub point: Point,
    pub deriv: String,
    pub model: f64,
    pub finite_difference: f64,
    pub error: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderCheck {
    pub rows: Vec<OrderRow>,
    /// Worst PSR-vs-FD error over random circuits, first and second order.
    pub circuit_errors: (f64, f64),
    pub pass: bool,
}

/// Model values on the dense inference grid, `[function][point]`.
#[derive(Debug, Clone)]
pub struct Solution {
    pub points: Vec<Point>,
    pub model: Vec<Vec<f64>>,
    pub exact: Vec<Vec<f64>>,
}

impl Solution {
    pub fn max_sq_err(&self) -> f64 {
        self.model
            .iter()
            .zip(&self.exact)
            .flat_map(|(m, e)| m.iter().zip(e).map(|(a, b)| (a - b).powi(2)))
            .fold(0.0, f64::max)
    }
}

pub struct RunOutcome {
    pub config: RunConfig,
    pub label: String,
    pub trace: TrainTrace,
    pub counts: CountBreakdown,
    pub grid_points: usize,
    pub n_functions: usize,
    pub solution: Solution,
    pub order_check: Option<OrderCheck>,
    pub dir: PathBuf,
    pub elapsed: Duration,
}

impl RunOutcome {
    pub fn final_loss(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.loss)
    }

    /// Last recorded MoS divided by the number of (point, function) pairs.
    pub fn mos_per_point(&self) -> f64 {
        let mos = self.trace.last().and_then(|r| r.mos).unwrap_or(f64::NAN);
        mos / (self.grid_points * self.n_functions) as f64
    }

    pub fn report_line(&self) -> String {
        let first = match self.trace.first_below(REPORT_TOL) {
            Some(r) => format!("epoch {} ({} evals)", r.epoch, r.cum_evals),
            None => "never".into(),
        };
        format!(
            "{} on {}: {} epochs, loss {:.3e}, MoS/m {:.3e}, loss<{REPORT_TOL:e} {first}, evals {} (precompute {}, training {}, inference {}), {:.1}s -> {}",
            self.label,
            self.config.problem.name(),
            self.trace.records.len(),
            self.final_loss(),
            self.mos_per_point(),
            self.counts.total,
            self.counts.precompute,
            self.counts.training,
            self.counts.inference,
            self.elapsed.as_secs_f64(),
            self.dir.display(),
        )
    }
}

/// 200 points in 1D and 50 × 50 in 2D, endpoints included.
pub fn dense_points(problem: &DEProblem) -> Vec<Point> {
    let bounds = &problem.grid().bounds;
    let n = if bounds.len() == 1 { 200 } else { 50 };
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> { (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect() };
    match bounds.len() {
        1 => axis(bounds[0]).into_iter().map(|x| vec![x]).collect(),
        _ => {
            let (xs, ys) = (axis(bounds[0]), axis(bounds[1]));
            xs.iter().flat_map(|&x| ys.iter().map(move |&y| vec![x, y])).collect()
        }
    }
}

fn values(
    model: &mut dyn TrialModel,
    points: &[Point],
    deriv: Deriv,
    counter: &EvalCounter,
    phase: Phase,
) -> Result<Vec<f64>, CliError> {
    let ev = model.evaluate(&[Block { points, derivs: &[deriv] }], false, counter, phase)?;
    Ok(ev.into_iter().next().expect("one block").values.remove(0))
}

pub fn infer(problem: &DEProblem, models: &mut [Box<dyn TrialModel>], counter: &EvalCounter) -> Result<Solution, CliError> {
    let points = dense_points(problem);
    let mut model = Vec::with_capacity(models.len());
    let mut exact = Vec::with_capacity(models.len());
    for (f, m) in models.iter_mut().enumerate() {
        model.push(values(m.as_mut(), &points, Deriv::Value, counter, Phase::Inference)?);
        exact.push(points.iter().map(|p| problem.reference(p, f)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(Solution { points, model, exact })
}

/// Compares every derivative the problem uses against five-point finite
/// differences of model values at three grid points, and PSR against
/// finite differences on random circuits. Shadow-mode FS models are
/// checked in exact mode since the stencil cannot difference noise.
pub fn order_check(problem: &DEProblem, spec: &ModelSpec, seed: u64) -> Result<OrderCheck, CliError> {
    let spec = match spec.clone() {
        ModelSpec::Fs { n_qubits, depth, basis, budget, .. } => {
            ModelSpec::Fs { n_qubits, depth, basis, mode: EvalMode::Exact, budget }
        }
        other => other,
    };
    let counter = EvalCounter::new();
    let mut built = build_models(problem, &spec, seed, &counter)?;
    let grid = &problem.grid().points;
    let probes = [grid[0].clone(), grid[grid.len() / 2].clone(), grid[grid.len() - 1].clone()];
    let h = 1e-3;
    let mut rows = Vec::new();
    for (f, m) in built.models.iter_mut().enumerate() {
        for d in problem.grid_derivs() {
            let Some(axis) = d.axis() else { continue };
            let tol = if d.order() == 1 { 1e-6 } else { 1e-4 };
            for p in &probes {
                let got = values(m.as_mut(), std::slice::from_ref(p), d, &counter, Phase::Inference)?[0];
                let along = |t: f64| {
                    let mut q = p.clone();
                    q[axis] = t;
                    values(m.as_mut(), &[q], Deriv::Value, &counter, Phase::Inference).map(|v| v[0]).unwrap_or(f64::NAN)
                };
                let fd = if d.order() == 1 {
                    finite_difference::first5(along, p[axis], h)
                } else {
                    finite_difference::second5(along, p[axis], h)
                };
                let error = (got - fd).abs();
                rows.push(OrderRow {
                    function: f,
                    point: p.clone(),
                    deriv: format!("{d:?}"),
                    model: got,
                    finite_difference: fd,
                    error,
                    tolerance: tol * (1.0 + fd.abs()),
                });
            }
        }
    }
    let circuit_errors = selftest::psr_vs_fd(10, seed);
    let pass = rows.iter().all(|r| r.error <= r.tolerance) && circuit_errors.0 < 1e-6 && circuit_errors.1 < 1e-4;
    Ok(OrderCheck { rows, circuit_errors, pass })
}

pub fn execute(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let t0 = Instant::now();
    let problem = cfg.build_problem()?;
    let spec = cfg.model_spec();
    let order = match cfg.order_check {
        true => {
            let o = order_check(&problem, &spec, cfg.seed)?;
            if !o.pass {
                let worst = o.rows.iter().map(|r| r.error / r.tolerance).fold(0.0, f64::max);
                return Err(CliError::Numerical(format!(
                    "derivative order check failed (worst error/tolerance {worst:.2}, circuits {:?})",
                    o.circuit_errors
                )));
            }
            Some(o)
        }
        false => None,
    };
    let counter = EvalCounter::new();
    let mut built = build_models(&problem, &spec, cfg.seed, &counter)?;
    let trace = train(&problem, &mut built.models, &cfg.train_config(), &counter)?;
    let solution = infer(&problem, &mut built.models, &counter)?;
    let outcome = RunOutcome {
        config: cfg.clone(),
        label: spec.label(),
        trace,
        counts: counter.breakdown(),
        grid_points: problem.grid().points.len(),
        n_functions: problem.n_functions(),
        solution,
        order_check: order,
        dir: cfg.output.clone(),
        elapsed: t0.elapsed(),
    };
    fs::create_dir_all(&cfg.output)?;
    write_artifacts(&outcome, &problem, &built.models, &spec)?;
    if let Some(t) = &built.table {
        fs::write(cfg.output.join("table.json"), t.to_json()?)?;
    }
    Ok(outcome)
}

fn solution_csv(problem: &DEProblem, sol: &Solution) -> String {
    let coords: Vec<&str> = ["x", "y"][..problem.dim()].to_vec();
    let mut header: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
    for (f, name) in problem.function_names().iter().enumerate() {
        if f == 0 {
            header.extend(["f_model".into(), "f_exact".into(), "sq_err".into()]);
        } else {
            header.extend([format!("{name}_model"), format!("{name}_exact"), format!("{name}_sq_err")]);
        }
    }
    let mut s = header.join(",");
    s.push('\n');
    for (i, p) in sol.points.iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        for f in 0..sol.model.len() {
            let (a, b) = (sol.model[f][i], sol.exact[f][i]);
            row.extend([a.to_string(), b.to_string(), ((a - b) * (a - b)).to_string()]);
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn write_artifacts(
    out: &RunOutcome,
    problem: &DEProblem,
    models: &[Box<dyn TrialModel>],
    spec: &ModelSpec,
) -> Result<(), CliError> {
    let dir = &out.dir;
    fs::write(dir.join("trace.csv"), out.trace.to_csv())?;
    fs::write(dir.join("solution.csv"), solution_csv(problem, &out.solution))?;
    let estimate = estimate_cost(problem, spec, out.trace.records.len())?;
    let last = out.trace.last();
    let first = out.trace.first_below(REPORT_TOL);
    let summary = json!({
        "problem": problem.name(),
        "model": out.label,
        "seed": out.config.seed,
        "config": out.config,
        "config_toml": out.config.to_toml(),
        "grid_points": out.grid_points,
        "n_functions": out.n_functions,
        "epochs_run": out.trace.records.len(),
        "stop": out.trace.stop,
        "failure": out.trace.failure,
        "final": {
            "loss": last.map(|r| r.loss),
            "loss_de": last.map(|r| r.loss_de),
            "loss_bc": last.map(|r| r.loss_bc),
            "mos": last.and_then(|r| r.mos),
            "mos_per_point": out.mos_per_point(),
        },
        "first_below": {
            "tol": REPORT_TOL,
            "epoch": first.map(|r| r.epoch),
            "cum_evals": first.map(|r| r.cum_evals),
        },
        "counts": out.counts,
        "predicted": estimate,
        "inference": {
            "points": out.solution.points.len(),
            "max_sq_err": out.solution.max_sq_err(),
        },
        "models": models.iter().zip(&out.trace.final_params).zip(problem.function_names()).map(|((m, p), name)| json!({
            "function": name,
            "metadata": m.metadata(),
            "param_names": m.param_names(),
            "params": p,
        })).collect::<Vec<_>>(),
        "order_check": out.order_check,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join("summary.json"), text + "\n")?;
    if out.config.chart {
        write_charts(dir, out, problem)?;
    }
    Ok(())
}

fn write_charts(dir: &Path, out: &RunOutcome, problem: &DEProblem) -> Result<(), CliError> {
    let pts = |f: fn(&dqc_core::training::EpochRecord) -> Option<f64>| -> Vec<(f64, f64)> {
        out.trace.records.iter().filter_map(|r| f(r).map(|v| (r.epoch as f64, v))).collect()
    };
    let chart = LineChart {
        title: format!("{} on {}", out.label, problem.name()),
        x_label: "epoch".into(),
        y_label: "log10".into(),
        log_y: true,
        series: vec![
            Series { name: "loss".into(), points: pts(|r| Some(r.loss)) },
            Series { name: "MoS".into(), points: pts(|r| r.mos) },
        ],
    };
    fs::write(dir.join("chart.svg"), chart.render())?;
    if problem.dim() == 1 {
        let mut series = Vec::new();
        for (f, name) in problem.function_names().iter().enumerate() {
            let xs = out.solution.points.iter().map(|p| p[0]);
            series.push(Series { name: format!("{name} model"), points: xs.clone().zip(out.solution.model[f].iter().copied()).collect() });
            series.push(Series { name: format!("{name} reference"), points: xs.zip(out.solution.exact[f].iter().copied()).collect() });
        }
        let chart = LineChart { title: format!("solution, {}", out.label), x_label: "x".into(), y_label: "f".into(), log_y: false, series };
        fs::write(dir.join("solution.svg"), chart.render())?;
    }
    Ok(())
}

/// Predicted charges for a config, without training.
pub fn count(cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    let problem = cfg.build_problem()?;
    let spec = cfg.model_spec();
    let estimate = estimate_cost(&problem, &spec, cfg.epochs())?;
    let mut v = json!({
        "problem": problem.name(),
        "model": spec.label(),
        "grid_points": problem.grid().points.len(),
        "boundary_points": problem.boundary().len(),
        "estimate": estimate,
    });
    if let ModelSpec::To { n_qubits, observables, .. } = spec {
        v["observables"] = json!(observables.strings(n_qubits)?.len());
        v["table_points"] = json!(table_points(&problem).len());
    }
    Ok(v)
}
