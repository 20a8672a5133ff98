//! Closed-form evaluation counts for each model family, independent of
//! the instrumented models so the two can be cross-checked.

use serde::{Deserialize, Serialize};

use crate::models::Deriv;

/// Expectations one derivative costs at one point when `gates` encoding
/// gates carry the differentiated input.
pub fn plan_evaluations(deriv: Deriv, gates: usize) -> u64 {
    match deriv.order() {
        0 => 1,
        1 => 2 * gates as u64,
        _ => 4 * (gates as u64).pow(2),
    }
}

/// Original model, one epoch: `(1 + 2P) · (m·E + b)` where `E` sums
/// [`plan_evaluations`] over the grid derivatives and `b` counts boundary
/// points.
pub fn original_epoch(n_rotations: usize, m: usize, per_point: u64, n_boundary: usize) -> u64 {
    (1 + 2 * n_rotations as u64) * (m as u64 * per_point + n_boundary as u64)
}

/// TO precompute: `d · m · E`, charged once; training adds nothing.
pub fn to_precompute(d: usize, m: usize, per_point: u64) -> u64 {
    d as u64 * m as u64 * per_point
}

/// FS, one epoch: `(1 + 2P) · M` snapshots.
pub fn fs_epoch(n_rotations: usize, snapshots: usize) -> u64 {
    (1 + 2 * n_rotations as u64) * snapshots as u64
}

/// Predicted charges for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub variant: String,
    pub precompute: u64,
    pub per_epoch: u64,
    pub epochs: usize,
    pub training_total: u64,
    pub total: u64,
    /// Snapshots per shadow (FS only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<usize>,
}

impl CostEstimate {
    pub fn new(variant: &str, precompute: u64, per_epoch: u64, epochs: usize, snapshots: Option<usize>) -> Self {
        let training_total = per_epoch * epochs as u64;
        Self {
            variant: variant.to_string(),
            precompute,
            per_epoch,
            epochs,
            training_total,
            total: precompute + training_total,
            snapshots,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counts() {
        // 2 points, value + first derivative through 4 gates, 1 boundary point
        assert_eq!(plan_evaluations(Deriv::First(0), 4), 8);
        assert_eq!(plan_evaluations(Deriv::Second(0), 4), 64);
        assert_eq!(original_epoch(36, 2, 9, 1), 73 * 19);
        assert_eq!(to_precompute(67, 2, 9), 67 * 18);
        assert_eq!(fs_epoch(36, 100), 7300);
        let e = CostEstimate::new("original", 0, 10, 3, None);
        assert_eq!(e.total, 30);
    }
}
