//! Quantum-evaluation accountant.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Precompute,
    Training,
    Inference,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Precompute, Phase::Training, Phase::Inference];

    fn slot(self) -> usize {
        match self {
            Phase::Precompute => 0,
            Phase::Training => 1,
            Phase::Inference => 2,
        }
    }
}

/// Counts charged circuit executions (expectations or shadow snapshots),
/// split by phase. Charges are atomic so parallel callers may share one.
#[derive(Debug, Default)]
pub struct EvalCounter {
    phases: [AtomicU64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CountBreakdown {
    pub precompute: u64,
    pub training: u64,
    pub inference: u64,
    pub total: u64,
}

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&self, phase: Phase, n: u64) {
        self.phases[phase.slot()].fetch_add(n, Ordering::Relaxed);
    }

    pub fn get(&self, phase: Phase) -> u64 {
        self.phases[phase.slot()].load(Ordering::Relaxed)
    }

    pub fn total(&self) -> u64 {
        Phase::ALL.iter().map(|&p| self.get(p)).sum()
    }

    pub fn breakdown(&self) -> CountBreakdown {
        CountBreakdown {
            precompute: self.get(Phase::Precompute),
            training: self.get(Phase::Training),
            inference: self.get(Phase::Inference),
            total: self.total(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases_accumulate() {
        let c = EvalCounter::new();
        c.charge(Phase::Precompute, 10);
        c.charge(Phase::Training, 3);
        c.charge(Phase::Training, 4);
        assert_eq!(c.get(Phase::Training), 7);
        assert_eq!(c.total(), 17);
        assert_eq!(c.breakdown(), CountBreakdown { precompute: 10, training: 7, inference: 0, total: 17 });
    }

    #[test]
    fn concurrent_charges_are_exact() {
        let c = EvalCounter::new();
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| {
                    for _ in 0..1000 {
                        c.charge(Phase::Inference, 1);
                    }
                });
            }
        });
        assert_eq!(c.get(Phase::Inference), 4000);
    }
}
