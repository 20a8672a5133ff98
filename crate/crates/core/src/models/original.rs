//! The original protocol: `f(x) = θ_sc ⟨0|Û†(x)V̂†(θ) C V̂(θ)Û(x)|0⟩ + θ_sh`
//! with `C = Σ_j Z_j`, a plain tower map and a hardware-efficient ansatz.
//!
//! Every distinct expectation is charged, including every input and
//! parameter shift. Classically the encoding-side weighted densities are
//! cached per point and the ansatz is folded into a dense observable, which
//! leaves the charged count untouched.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::circuits::{hea, CircuitSpec, ParamRole};
use crate::differentiation::SHIFT;
use crate::error::{Error, Result};
use crate::models::{Block, BlockEval, DenseObservable, Deriv, Encoding, TrialModel, Variant};
use crate::pauli::ObservableSum;
use crate::training::{EvalCounter, Phase};

type DensityKey = (Vec<u64>, Deriv);

pub struct OriginalModel {
    encoding: Encoding,
    ansatz: CircuitSpec,
    depth: usize,
    cost: ObservableSum,
    params: Vec<f64>,
    n_theta: usize,
    densities: HashMap<DensityKey, Vec<f64>>,
    init_seed: u64,
}

fn key(point: &[f64], deriv: Deriv) -> DensityKey {
    (point.iter().map(|v| v.to_bits()).collect(), deriv)
}

impl OriginalModel {
    pub fn new(n_qubits: usize, dim: usize, depth: usize, init_seed: u64) -> Result<Self> {
        let encoding = Encoding::tower(n_qubits, dim, None)?;
        let ansatz = hea(n_qubits, depth, "theta")?;
        let n_theta = ansatz.params().len();
        let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
        let mut params: Vec<f64> = (0..n_theta).map(|_| rng.random_range(-PI..PI)).collect();
        params.push(1.0);
        params.push(0.0);
        Ok(Self {
            encoding,
            ansatz,
            depth,
            cost: ObservableSum::total_z(n_qubits),
            params,
            n_theta,
            densities: HashMap::new(),
            init_seed,
        })
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    pub fn ansatz(&self) -> &CircuitSpec {
        &self.ansatz
    }

    /// Charged expectations for one call.
    pub fn charge_for(&self, blocks: &[Block<'_>], gradient: bool) -> u64 {
        let per_variant: usize = blocks
            .iter()
            .map(|b| b.points.len() * b.derivs.iter().map(|&d| self.encoding.evaluations(d)).sum::<usize>())
            .sum();
        let shifted = if gradient { 2 * self.ansatz.variational_gates().len() } else { 0 };
        ((1 + shifted) * per_variant) as u64
    }
}

pub(crate) fn check_blocks(model: &dyn TrialModel, blocks: &[Block<'_>]) -> Result<()> {
    for b in blocks {
        for &d in b.derivs {
            if !model.supports(d) {
                return Err(match d.axis() {
                    Some(a) if a >= model.dim() => Error::IndexOutOfRange { index: a, len: model.dim() },
                    _ => Error::UnsupportedOrder(d.order()),
                });
            }
        }
        if let Some(p) = b.points.iter().find(|p| p.len() != model.dim()) {
            return Err(Error::Config(format!("point has {} coordinates, model expects {}", p.len(), model.dim())));
        }
    }
    Ok(())
}

impl TrialModel for OriginalModel {
    fn variant(&self) -> Variant {
        Variant::Original
    }

    fn dim(&self) -> usize {
        self.encoding.dim()
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.ansatz.params().iter().map(|p| p.id.clone()).collect();
        names.push("theta_sc".into());
        names.push("theta_sh".into());
        names
    }

    fn supports(&self, deriv: Deriv) -> bool {
        self.encoding.supports(deriv)
    }

    fn evaluate(
        &mut self,
        blocks: &[Block<'_>],
        gradient: bool,
        counter: &EvalCounter,
        phase: Phase,
    ) -> Result<Vec<BlockEval>> {
        check_blocks(self, blocks)?;
        for b in blocks {
            for p in b.points {
                for &d in b.derivs {
                    let k = key(p, d);
                    if !self.densities.contains_key(&k) {
                        let r = self.encoding.weighted_density(p, d)?;
                        self.densities.insert(k, r);
                    }
                }
            }
        }
        let theta = &self.params[..self.n_theta];
        let (sc, _sh) = (self.params[self.n_theta], self.params[self.n_theta + 1]);
        let base = DenseObservable::conjugated(&self.ansatz, theta, &[], &self.cost)?;
        // ∂M/∂θ_p as a single flattened matrix per parameter
        let mut dm: Vec<Vec<f64>> = Vec::new();
        if gradient {
            for p in self.ansatz.params_with_role(ParamRole::Variational) {
                let mut acc = vec![0.0; base.flat().len()];
                for (g, s) in self.ansatz.occurrences(p) {
                    let plus = DenseObservable::conjugated(&self.ansatz, theta, &[(g, SHIFT)], &self.cost)?;
                    let minus = DenseObservable::conjugated(&self.ansatz, theta, &[(g, -SHIFT)], &self.cost)?;
                    for ((a, u), v) in acc.iter_mut().zip(plus.flat()).zip(minus.flat()) {
                        *a += 0.5 * s * (u - v);
                    }
                }
                dm.push(acc);
            }
        }
        counter.charge(phase, self.charge_for(blocks, gradient));

        let n_params = self.params.len();
        let mut out = Vec::with_capacity(blocks.len());
        for b in blocks {
            let mut ev = BlockEval::zeros(b.derivs.len(), b.points.len(), gradient.then_some(n_params));
            for (di, &d) in b.derivs.iter().enumerate() {
                for (pi, p) in b.points.iter().enumerate() {
                    let r = &self.densities[&key(p, d)];
                    let raw = base.trace_with(r);
                    ev.values[di][pi] = sc * raw + if d == Deriv::Value { self.params[self.n_theta + 1] } else { 0.0 };
                    if let Some(g) = ev.grads.as_mut() {
                        let row = &mut g[di][pi];
                        for (k, m) in dm.iter().enumerate() {
                            row[k] = sc * m.iter().zip(r).map(|(a, b)| a * b).sum::<f64>();
                        }
                        row[self.n_theta] = raw;
                        row[self.n_theta + 1] = if d == Deriv::Value { 1.0 } else { 0.0 };
                    }
                }
            }
            out.push(ev);
        }
        Ok(out)
    }

    fn metadata(&self) -> serde_json::Value {
        json!({
            "variant": "original",
            "encoding": self.encoding.describe(),
            "ansatz": { "kind": "hea", "depth": self.depth, "n_params": self.n_theta },
            "cost_observable": self.cost.terms().iter().map(|(c, p)| format!("{c}*{p}")).collect::<Vec<_>>(),
            "init_seed": self.init_seed,
        })
    }
}
