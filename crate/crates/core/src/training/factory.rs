//! Building trial models for a problem, and predicting their cost.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::models::{
    precompute_to_table, BasisKind, Encoding, EvalMode, FlippedShadowModel, OriginalModel, Point, TOTable,
    TrainableObservableModel, TrialModel,
};
use crate::pauli::ObservableSet;
use crate::problems::DEProblem;
use crate::shadows::ShadowBudget;
use crate::training::cost::{self, CostEstimate};
use crate::training::EvalCounter;

pub const DEFAULT_QUBITS: usize = 4;
pub const DEFAULT_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum ModelSpec {
    Original { n_qubits: usize, depth: usize },
    To { n_qubits: usize, observables: ObservableSet, basis_seed: u64 },
    Fs { n_qubits: usize, depth: usize, basis: BasisKind, mode: EvalMode, budget: ShadowBudget },
}

impl ModelSpec {
    pub fn variant_name(&self) -> &'static str {
        match self {
            ModelSpec::Original { .. } => "original",
            ModelSpec::To { .. } => "to",
            ModelSpec::Fs { .. } => "fs",
        }
    }

    /// A short label such as `to-loc2` or `fs-chebyshev-shadow`.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Original { .. } => "original".into(),
            ModelSpec::To { observables, .. } => format!("to-{}", observables.name()),
            ModelSpec::Fs { basis, mode, .. } => {
                let mode = match mode {
                    EvalMode::Exact => "exact",
                    EvalMode::Shadow => "shadow",
                };
                format!("fs-{}-{mode}", basis.name())
            }
        }
    }
}

pub struct BuiltModels {
    pub models: Vec<Box<dyn TrialModel>>,
    pub table: Option<Arc<TOTable>>,
}

/// Per-function init seeds derived from the run seed.
pub fn function_seed(seed: u64, function: usize) -> u64 {
    seed ^ (function as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Grid points followed by boundary points not already on the grid.
pub fn table_points(problem: &DEProblem) -> Vec<Point> {
    let mut pts = problem.grid().points.clone();
    for b in problem.boundary() {
        if !pts.contains(&b.point) {
            pts.push(b.point.clone());
        }
    }
    pts
}

/// One model per dependent variable. TO models share a single table,
/// measured once and charged to `counter` under the precompute phase.
pub fn build_models(problem: &DEProblem, spec: &ModelSpec, seed: u64, counter: &EvalCounter) -> Result<BuiltModels> {
    let dim = problem.dim();
    let nf = problem.n_functions();
    let mut models: Vec<Box<dyn TrialModel>> = Vec::with_capacity(nf);
    let mut table = None;
    match spec {
        ModelSpec::Original { n_qubits, depth } => {
            for f in 0..nf {
                models.push(Box::new(OriginalModel::new(*n_qubits, dim, *depth, function_seed(seed, f))?));
            }
        }
        ModelSpec::To { n_qubits, observables, basis_seed } => {
            let enc = Encoding::tower(*n_qubits, dim, Some(*basis_seed))?;
            let t = Arc::new(precompute_to_table(
                &enc,
                observables.name(),
                observables.strings(*n_qubits)?,
                table_points(problem),
                problem.grid_derivs(),
                counter,
            )?);
            for f in 0..nf {
                models.push(Box::new(TrainableObservableModel::new(t.clone(), enc.clone(), function_seed(seed, f))?));
            }
            table = Some(t);
        }
        ModelSpec::Fs { n_qubits, depth, basis, mode, budget } => {
            for f in 0..nf {
                models.push(Box::new(FlippedShadowModel::new(
                    *n_qubits,
                    dim,
                    *depth,
                    *basis,
                    *mode,
                    *budget,
                    function_seed(seed, f),
                )?));
            }
        }
    }
    Ok(BuiltModels { models, table })
}

/// Predicted charges for `epochs` full epochs, from the closed forms.
pub fn estimate_cost(problem: &DEProblem, spec: &ModelSpec, epochs: usize) -> Result<CostEstimate> {
    let dim = problem.dim();
    let derivs = problem.grid_derivs();
    let m = problem.grid().points.len();
    let nf = problem.n_functions();
    let per_point = |n: usize| -> Result<u64> {
        let enc = Encoding::tower(n, dim, None)?;
        Ok(derivs.iter().map(|&d| cost::plan_evaluations(d, d.axis().map_or(0, |a| enc.axis_gates(a).len()))).sum())
    };
    Ok(match spec {
        ModelSpec::Original { n_qubits, depth } => {
            let p = 3 * n_qubits * depth;
            let e = per_point(*n_qubits)?;
            let per_epoch: u64 =
                (0..nf).map(|f| cost::original_epoch(p, m, e, problem.boundary_points(f).len())).sum();
            CostEstimate::new(&spec.label(), 0, per_epoch, epochs, None)
        }
        ModelSpec::To { n_qubits, observables, .. } => {
            let d = observables.strings(*n_qubits)?.len();
            let pre = cost::to_precompute(d, table_points(problem).len(), per_point(*n_qubits)?);
            CostEstimate::new(&spec.label(), pre, 0, epochs, None)
        }
        ModelSpec::Fs { n_qubits, depth, budget, .. } => {
            let p = 3 * n_qubits * depth;
            let mut per_epoch = 0;
            let mut snaps = 0;
            for f in 0..nf {
                snaps = budget.snapshots(m + problem.boundary_points(f).len(), problem.order());
                per_epoch += cost::fs_epoch(p, snaps);
            }
            CostEstimate::new(&spec.label(), 0, per_epoch, epochs, Some(snaps))
        }
    })
}
