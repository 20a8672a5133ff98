//! Optimisation and cost accounting: Adam, the shared training loop,
//! the evaluation counter and closed-form cost predictions.

mod adam;
pub mod cost;
mod counter;
mod factory;
mod trainer;

pub use adam::{AdamConfig, AdamState};
pub use counter::{CountBreakdown, EvalCounter, Phase};
pub use factory::{
    build_models, estimate_cost, function_seed, table_points, BuiltModels, ModelSpec, DEFAULT_DEPTH, DEFAULT_QUBITS,
};
pub use trainer::{train, EarlyStop, EpochRecord, StopReason, TrainConfig, TrainTrace};
