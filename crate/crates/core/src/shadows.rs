//! Randomised single-qubit (Pauli) classical shadows.
//!
//! Each snapshot measures every qubit in an independently drawn X/Y/Z basis.
//! For a Pauli string `P` of weight `w` the inverted-channel estimator of a
//! single snapshot is `3^w Π_j s_j` when every non-identity letter of `P`
//! matches the measured basis and `0` otherwise; the identity estimates to 1.
//! Estimates combine snapshots by median of means.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{ObservableSum, Pauli, PauliString};
use crate::statevector::{sample_index, Basis, StateVector};

pub const DEFAULT_LOCALITY_CAP: usize = 2;

// Cache rotated Born distributions when 3^n stays small.
const MAX_CACHED_QUBITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowSnapshot {
    pub bases: Vec<Basis>,
    /// `+1` for outcome bit 0, `-1` for bit 1.
    pub signs: Vec<i8>,
}

impl ShadowSnapshot {
    /// Single-snapshot estimate of `⟨P⟩`.
    pub fn value(&self, p: &PauliString) -> f64 {
        let mut v = 1.0;
        for (j, letter) in p.letters().iter().enumerate() {
            if *letter == Pauli::I {
                continue;
            }
            if self.bases[j].as_pauli() != *letter {
                return 0.0;
            }
            v *= 3.0 * f64::from(self.signs[j]);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalShadow {
    n_qubits: usize,
    snapshots: Vec<ShadowSnapshot>,
    locality_cap: usize,
    /// Free-form provenance, e.g. the parameter shift the state was prepared at.
    pub source: String,
}

/// Draws `m_snapshots` randomised measurements of `state`.
pub fn collect<R: Rng + ?Sized>(state: &StateVector, m_snapshots: usize, rng: &mut R) -> Result<ClassicalShadow> {
    if m_snapshots == 0 {
        return Err(Error::Config("a shadow needs at least one snapshot".into()));
    }
    let n = state.n_qubits();
    let mut cache: Vec<Option<Vec<f64>>> =
        if n <= MAX_CACHED_QUBITS { vec![None; 3usize.pow(n as u32)] } else { Vec::new() };
    let mut snapshots = Vec::with_capacity(m_snapshots);
    for _ in 0..m_snapshots {
        let bases: Vec<Basis> = (0..n).map(|_| Basis::ALL[rng.random_range(0..3)]).collect();
        let index = if cache.is_empty() {
            sample_index(&state.rotated_probabilities(&bases)?, rng)
        } else {
            let key = bases.iter().fold(0usize, |k, b| 3 * k + *b as usize);
            if cache[key].is_none() {
                cache[key] = Some(state.rotated_probabilities(&bases)?);
            }
            sample_index(cache[key].as_ref().expect("filled above"), rng)
        };
        let signs = (0..n).map(|j| if (index >> j) & 1 == 0 { 1 } else { -1 }).collect();
        snapshots.push(ShadowSnapshot { bases, signs });
    }
    Ok(ClassicalShadow { n_qubits: n, snapshots, locality_cap: DEFAULT_LOCALITY_CAP, source: String::new() })
}

impl ClassicalShadow {
    pub fn from_snapshots(n_qubits: usize, snapshots: Vec<ShadowSnapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::Config("a shadow needs at least one snapshot".into()));
        }
        if snapshots.iter().any(|s| s.bases.len() != n_qubits || s.signs.len() != n_qubits) {
            return Err(Error::Config("snapshot width mismatch".into()));
        }
        Ok(Self { n_qubits, snapshots, locality_cap: DEFAULT_LOCALITY_CAP, source: String::new() })
    }

    pub fn with_locality_cap(mut self, cap: usize) -> Self {
        self.locality_cap = cap;
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[ShadowSnapshot] {
        &self.snapshots
    }

    /// Median of `n_batches` equal-size batch means; trailing snapshots that
    /// do not fill a batch are ignored.
    pub fn estimate_pauli(&self, p: &PauliString, n_batches: usize) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::Config(format!(
                "{}-qubit string against {}-qubit shadow",
                p.n_qubits(),
                self.n_qubits
            )));
        }
        let w = p.weight();
        if w > self.locality_cap {
            return Err(Error::LocalityCap { weight: w, cap: self.locality_cap });
        }
        if n_batches == 0 || n_batches > self.snapshots.len() {
            return Err(Error::Config(format!(
                "{n_batches} batches for {} snapshots",
                self.snapshots.len()
            )));
        }
        if w == 0 {
            return Ok(1.0);
        }
        let size = self.snapshots.len() / n_batches;
        let mut means: Vec<f64> = self
            .snapshots
            .chunks_exact(size)
            .take(n_batches)
            .map(|chunk| chunk.iter().map(|s| s.value(p)).sum::<f64>() / size as f64)
            .collect();
        Ok(median(&mut means))
    }

    pub fn estimate_observable(&self, obs: &ObservableSum, n_batches: usize) -> Result<f64> {
        obs.terms()
            .iter()
            .try_fold(0.0, |acc, (c, p)| Ok(acc + c * self.estimate_pauli(p, n_batches)?))
    }

    /// One line per snapshot: basis letters, a space, then `+`/`-` signs.
    pub fn to_text(&self) -> String {
        let mut out = format!("shadow n_qubits={} snapshots={}\n", self.n_qubits, self.snapshots.len());
        for s in &self.snapshots {
            for b in &s.bases {
                out.push(b.as_char());
            }
            out.push(' ');
            for &sg in &s.signs {
                out.push(if sg > 0 { '+' } else { '-' });
            }
            out.push('\n');
        }
        if !self.source.is_empty() {
            let _ = writeln!(out, "# source {}", self.source);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty shadow text".into()))?;
        let field = |key: &str| -> Result<usize> {
            header
                .split_whitespace()
                .find_map(|tok| tok.strip_prefix(key))
                .ok_or_else(|| Error::Parse(format!("shadow header lacks `{key}`")))?
                .parse()
                .map_err(|e| Error::Parse(format!("shadow header `{key}`: {e}")))
        };
        let n = field("n_qubits=")?;
        let m = field("snapshots=")?;
        let mut snapshots = Vec::with_capacity(m);
        let mut source = String::new();
        for line in lines {
            if let Some(rest) = line.strip_prefix("# source ") {
                source = rest.to_string();
                continue;
            }
            let (b, s) = line
                .split_once(' ')
                .ok_or_else(|| Error::Parse(format!("malformed snapshot line `{line}`")))?;
            let bases = b.chars().map(Basis::from_char).collect::<Result<Vec<_>>>()?;
            let signs = s
                .chars()
                .map(|c| match c {
                    '+' => Ok(1),
                    '-' => Ok(-1),
                    other => Err(Error::Parse(format!("invalid sign `{other}`"))),
                })
                .collect::<Result<Vec<i8>>>()?;
            snapshots.push(ShadowSnapshot { bases, signs });
        }
        if snapshots.len() != m {
            return Err(Error::Parse(format!("header says {m} snapshots, found {}", snapshots.len())));
        }
        Ok(Self::from_snapshots(n, snapshots)?.with_source(source))
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Median-of-means batch count `2·⌈log₂(2·n_observables)⌉`.
pub fn default_batches(n_observables: usize) -> usize {
    let t = (2 * n_observables.max(1)) as f64;
    2 * t.log2().ceil().max(1.0) as usize
}

/// Snapshot budget `⌈c₀ · 3^w · log₂(m·(k+1)) / ε^p⌉` per shadow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowBudget {
    pub epsilon: f64,
    pub c0: f64,
    pub exponent: f64,
    pub max_weight: usize,
}

impl Default for ShadowBudget {
    fn default() -> Self {
        Self { epsilon: 1.0, c0: 34.0, exponent: 2.0, max_weight: 1 }
    }
}

impl ShadowBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.c0 > 0.0 && self.exponent > 0.0) {
            return Err(Error::Config("shadow budget knobs must be positive".into()));
        }
        Ok(())
    }

    /// Snapshots per shadow for `m` points and derivative order `k`.
    pub fn snapshots(&self, m: usize, k: usize) -> usize {
        let targets = (m.max(1) * (k + 1)).max(2) as f64;
        let raw = self.c0 * 3f64.powi(self.max_weight as i32) * targets.log2() / self.epsilon.powf(self.exponent);
        raw.ceil().max(1.0) as usize
    }
}
