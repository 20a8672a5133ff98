//! The training loop shared by every model family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::TrialModel;
use crate::problems::{loss, DEProblem};
use crate::training::{AdamConfig, AdamState, EvalCounter, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EarlyStop {
    /// Stop once the total loss drops below this.
    pub loss_tol: f64,
    /// Stop after this many epochs without a relative improvement of
    /// `min_rel_improvement` over the best loss so far.
    pub patience: usize,
    pub min_rel_improvement: f64,
}

impl Default for EarlyStop {
    fn default() -> Self {
        Self { loss_tol: 1e-6, patience: 200, min_rel_improvement: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub adam: AdamConfig,
    pub early_stop: Option<EarlyStop>,
}

impl TrainConfig {
    pub fn new(epochs: usize) -> Self {
        Self { epochs, adam: AdamConfig::default(), early_stop: Some(EarlyStop::default()) }
    }

    /// 1000 epochs in one dimension, 2000 in two.
    pub fn default_epochs(dim: usize) -> usize {
        if dim >= 2 {
            2000
        } else {
            1000
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub loss_de: f64,
    pub loss_bc: f64,
    pub mos: Option<f64>,
    pub cum_evals: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Epochs,
    LossTolerance,
    Stalled,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
    pub final_params: Vec<Vec<f64>>,
    pub stop: StopReason,
    pub failure: Option<String>,
}

impl TrainTrace {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    /// First epoch whose loss is below `tol`, with the evaluations charged
    /// up to and including it.
    pub fn first_below(&self, tol: f64) -> Option<&EpochRecord> {
        self.records.iter().find(|r| r.loss < tol)
    }

    /// `epoch,loss,loss_de,loss_bc,mos,cum_evals` with one row per record.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,loss,loss_de,loss_bc,mos,cum_evals\n");
        for r in &self.records {
            let mos = r.mos.map(|m| m.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{},{},{}\n", r.epoch, r.loss, r.loss_de, r.loss_bc, mos, r.cum_evals));
        }
        s
    }
}

/// Runs up to `config.epochs` rounds of loss, gradient and Adam update.
/// Non-finite losses or gradients end training early with
/// [`TrainTrace::failure`] set; the records up to the failure are kept.
pub fn train(
    problem: &DEProblem,
    models: &mut [Box<dyn TrialModel>],
    config: &TrainConfig,
    counter: &EvalCounter,
) -> Result<TrainTrace> {
    config.adam.validate()?;
    let mut adams: Vec<AdamState> = models.iter().map(|m| AdamState::new(config.adam, m.params().len())).collect();
    let mut records = Vec::with_capacity(config.epochs);
    let mut stop = StopReason::Epochs;
    let mut failure = None;
    let mut best = f64::INFINITY;
    let mut best_epoch = 0;
    for epoch in 0..config.epochs {
        let l = loss(problem, models, true, counter, Phase::Training)?;
        records.push(EpochRecord {
            epoch,
            loss: l.total,
            loss_de: l.de,
            loss_bc: l.bc,
            mos: l.mos,
            cum_evals: counter.total(),
        });
        if !l.total.is_finite() {
            failure = Some(format!("non-finite loss {} at epoch {epoch}", l.total));
            stop = StopReason::Failure;
            break;
        }
        if let Some(es) = config.early_stop {
            if l.total < es.loss_tol {
                stop = StopReason::LossTolerance;
                break;
            }
            if l.total < best * (1.0 - es.min_rel_improvement) {
                best = l.total;
                best_epoch = epoch;
            } else if epoch - best_epoch >= es.patience {
                stop = StopReason::Stalled;
                break;
            }
        }
        let grads = l.grads.expect("gradient requested");
        let mut step_err = None;
        for ((m, a), g) in models.iter_mut().zip(&mut adams).zip(&grads) {
            if let Err(e) = a.step(m.params_mut(), g) {
                step_err = Some(e);
                break;
            }
        }
        match step_err {
            Some(Error::Numerical(msg)) => {
                failure = Some(format!("{msg} at epoch {epoch}"));
                stop = StopReason::Failure;
                break;
            }
            Some(e) => return Err(e),
            None => {}
        }
    }
    Ok(TrainTrace { records, final_params: models.iter().map(|m| m.params().to_vec()).collect(), stop, failure })
}
