//! Trial-function families: the original circuit model, the trainable
//! observable (TO) model over a precomputed measurement table, and the
//! flipped shadow (FS) model whose observable carries the input.
//!
//! All three implement [`TrialModel`]: given blocks of points and the
//! derivatives requested at them, return values and (optionally) their
//! Jacobian with respect to the model parameters, charging the quantum
//! evaluations they would cost on hardware to an [`EvalCounter`].

mod basis;
mod encoding;
mod flipped;
mod heisenberg;
mod original;
mod trainable;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::training::{EvalCounter, Phase};

pub use basis::{basis_exponents, chebyshev_basis, monomial_basis, BasisKind};
pub use encoding::Encoding;
pub use flipped::{EvalMode, FlippedShadowModel};
pub use heisenberg::DenseObservable;
pub use original::OriginalModel;
pub use trainable::{precompute_to_table, TOTable, TrainableObservableModel};

/// A coordinate in the problem domain (length 1 or 2).
pub type Point = Vec<f64>;

/// Which derivative of the trial function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Deriv {
    Value,
    /// `∂f/∂x_axis`
    First(usize),
    /// `∂²f/∂x_axis²`
    Second(usize),
}

impl Deriv {
    pub fn order(self) -> usize {
        match self {
            Deriv::Value => 0,
            Deriv::First(_) => 1,
            Deriv::Second(_) => 2,
        }
    }

    pub fn axis(self) -> Option<usize> {
        match self {
            Deriv::Value => None,
            Deriv::First(a) | Deriv::Second(a) => Some(a),
        }
    }

    /// Per-axis derivative multiplicity.
    pub fn multi_index(self, dim: usize) -> Vec<usize> {
        let mut k = vec![0; dim];
        if let Some(a) = self.axis() {
            k[a] = self.order();
        }
        k
    }
}

/// A set of points sharing one list of requested derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Block<'a> {
    pub points: &'a [Point],
    pub derivs: &'a [Deriv],
}

/// Results for one [`Block`], indexed `[deriv][point]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockEval {
    pub values: Vec<Vec<f64>>,
    /// `[deriv][point][param]`, present when gradients were requested.
    pub grads: Option<Vec<Vec<Vec<f64>>>>,
}

impl BlockEval {
    fn zeros(n_derivs: usize, n_points: usize, n_params: Option<usize>) -> Self {
        Self {
            values: vec![vec![0.0; n_points]; n_derivs],
            grads: n_params.map(|p| vec![vec![vec![0.0; p]; n_points]; n_derivs]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Original,
    To,
    Fs,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::To => "to",
            Variant::Fs => "fs",
        }
    }
}

pub trait TrialModel: Send {
    fn variant(&self) -> Variant;

    fn dim(&self) -> usize;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    fn param_names(&self) -> Vec<String>;

    fn supports(&self, deriv: Deriv) -> bool;

    /// Evaluates every block with a single round of quantum work.
    fn evaluate(
        &mut self,
        blocks: &[Block<'_>],
        gradient: bool,
        counter: &EvalCounter,
        phase: Phase,
    ) -> Result<Vec<BlockEval>>;

    /// Run metadata (seeds, observable assignment, circuit description).
    fn metadata(&self) -> serde_json::Value;
}
