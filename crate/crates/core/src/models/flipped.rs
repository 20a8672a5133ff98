//! Flipped model `f(x) = α_out ⟨ψ(θ)| C(u) |ψ(θ)⟩ + α_offset` with
//! `C(u) = Σ_l g_l(u) P_l` over the 1-local Pauli strings and
//! `u = α_in ⊙ x + α_shift`.
//!
//! Input derivatives act on the basis functions only, so every point and
//! derivative order is served by the same `⟨P_l⟩`. In shadow mode those
//! come from a fresh classical shadow of each required state (the base
//! state and every `±π/2` shift when a gradient is requested). Exact mode
//! uses the statevector but charges the same snapshot budget.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::circuits::{hea, CircuitSpec, ParamRole};
use crate::differentiation::SHIFT;
use crate::error::{Error, Result};
use crate::models::original::check_blocks;
use crate::models::{basis_exponents, Block, BlockEval, BasisKind, Deriv, TrialModel, Variant};
use crate::pauli::{enumerate_k_local, PauliString};
use crate::shadows::{collect, default_batches, ShadowBudget};
use crate::statevector::StateVector;
use crate::training::{EvalCounter, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Exact,
    Shadow,
}

impl std::str::FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(EvalMode::Exact),
            "shadow" => Ok(EvalMode::Shadow),
            other => Err(Error::Config(format!("unknown evaluation mode `{other}`"))),
        }
    }
}

pub struct FlippedShadowModel {
    ansatz: CircuitSpec,
    depth: usize,
    dim: usize,
    strings: Vec<PauliString>,
    exponents: Vec<Vec<usize>>,
    basis: BasisKind,
    mode: EvalMode,
    budget: ShadowBudget,
    batches: usize,
    rng: ChaCha8Rng,
    params: Vec<f64>,
    n_theta: usize,
    init_seed: u64,
    last_snapshots: usize,
}

impl FlippedShadowModel {
    pub fn new(
        n_qubits: usize,
        dim: usize,
        depth: usize,
        basis: BasisKind,
        mode: EvalMode,
        budget: ShadowBudget,
        init_seed: u64,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Config(format!("input dimension {dim} not supported")));
        }
        budget.validate()?;
        let ansatz = hea(n_qubits, depth, "alpha")?;
        let strings = enumerate_k_local(n_qubits, 1)?;
        let exponents = basis_exponents(dim, strings.len());
        let n_theta = ansatz.params().len();
        let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
        let mut params: Vec<f64> = (0..n_theta).map(|_| rng.random_range(-PI..PI)).collect();
        params.push(1.0);
        params.extend(std::iter::repeat_n(1.0, dim));
        params.extend(std::iter::repeat_n(0.0, dim));
        params.push(0.0);
        // shadow sampling draws from its own stream
        let shadow_rng = ChaCha8Rng::seed_from_u64(init_seed ^ 0x5348_4144_4f57);
        Ok(Self {
            ansatz,
            depth,
            dim,
            batches: default_batches(strings.len()),
            strings,
            exponents,
            basis,
            mode,
            budget,
            rng: shadow_rng,
            params,
            n_theta,
            init_seed,
            last_snapshots: 0,
        })
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    pub fn exponents(&self) -> &[Vec<usize>] {
        &self.exponents
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn budget(&self) -> ShadowBudget {
        self.budget
    }

    /// Snapshots per shadow used by the most recent evaluation.
    pub fn last_snapshots(&self) -> usize {
        self.last_snapshots
    }

    fn idx_out(&self) -> usize {
        self.n_theta
    }

    fn idx_in(&self, a: usize) -> usize {
        self.n_theta + 1 + a
    }

    fn idx_shift(&self, a: usize) -> usize {
        self.n_theta + 1 + self.dim + a
    }

    fn idx_offset(&self) -> usize {
        self.n_theta + 1 + 2 * self.dim
    }

    /// Snapshot budget and number of prepared states for one call.
    pub fn charge_for(&self, blocks: &[Block<'_>], gradient: bool) -> (usize, usize) {
        let m: usize = blocks.iter().map(|b| b.points.len()).sum();
        let k = blocks.iter().flat_map(|b| b.derivs.iter().map(|d| d.order())).max().unwrap_or(0);
        let states = 1 + if gradient { 2 * self.ansatz.variational_gates().len() } else { 0 };
        (self.budget.snapshots(m, k), states)
    }

    fn pauli_values(&mut self, state: &StateVector, snapshots: usize) -> Result<Vec<f64>> {
        match self.mode {
            EvalMode::Exact => self.strings.iter().map(|p| state.pauli_expectation(p)).collect(),
            EvalMode::Shadow => {
                let shadow = collect(state, snapshots, &mut self.rng)?;
                self.strings.iter().map(|p| shadow.estimate_pauli(p, self.batches)).collect()
            }
        }
    }

    /// `∂^{k}g_l/∂u^{k}` for the multi-index `k`, every `l`.
    fn basis_values(&self, tables: &[Vec<Vec<f64>>], k: &[usize]) -> Vec<f64> {
        self.exponents
            .iter()
            .map(|e| e.iter().enumerate().map(|(a, &deg)| tables[a][k[a]][deg]).product())
            .collect()
    }
}

impl TrialModel for FlippedShadowModel {
    fn variant(&self) -> Variant {
        Variant::Fs
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.ansatz.params().iter().map(|p| p.id.clone()).collect();
        names.push("alpha_out".into());
        for a in 0..self.dim {
            names.push(format!("alpha_in[{a}]"));
        }
        for a in 0..self.dim {
            names.push(format!("alpha_shift[{a}]"));
        }
        names.push("alpha_offset".into());
        names
    }

    fn supports(&self, deriv: Deriv) -> bool {
        deriv.axis().is_none_or(|a| a < self.dim)
    }

    fn evaluate(
        &mut self,
        blocks: &[Block<'_>],
        gradient: bool,
        counter: &EvalCounter,
        phase: Phase,
    ) -> Result<Vec<BlockEval>> {
        check_blocks(self, blocks)?;
        let (snapshots, n_states) = self.charge_for(blocks, gradient);
        self.last_snapshots = snapshots;
        let theta = self.params[..self.n_theta].to_vec();
        let base_state = self.ansatz.execute(&theta, &[]);
        let base = self.pauli_values(&base_state, snapshots)?;
        // ∂⟨P_l⟩/∂θ_p
        let mut dp: Vec<Vec<f64>> = Vec::new();
        if gradient {
            for p in self.ansatz.params_with_role(ParamRole::Variational) {
                let mut acc = vec![0.0; self.strings.len()];
                for (g, s) in self.ansatz.occurrences(p) {
                    let plus = self.pauli_values(&self.ansatz.execute(&theta, &[(g, SHIFT)]), snapshots)?;
                    let minus = self.pauli_values(&self.ansatz.execute(&theta, &[(g, -SHIFT)]), snapshots)?;
                    for ((a, u), v) in acc.iter_mut().zip(&plus).zip(&minus) {
                        *a += 0.5 * s * (u - v);
                    }
                }
                dp.push(acc);
            }
        }
        counter.charge(phase, (snapshots * n_states) as u64);

        let alpha_out = self.params[self.idx_out()];
        let alpha_in: Vec<f64> = (0..self.dim).map(|a| self.params[self.idx_in(a)]).collect();
        let alpha_shift: Vec<f64> = (0..self.dim).map(|a| self.params[self.idx_shift(a)]).collect();
        let alpha_offset = self.params[self.idx_offset()];
        let max_deg = self.exponents.iter().flatten().copied().max().unwrap_or(0);
        let max_order = blocks.iter().flat_map(|b| b.derivs.iter().map(|d| d.order())).max().unwrap_or(0);
        let table_orders = max_order + usize::from(gradient);
        let n_params = self.params.len();
        let dot = |g: &[f64], e: &[f64]| g.iter().zip(e).map(|(a, b)| a * b).sum::<f64>();

        let mut out = Vec::with_capacity(blocks.len());
        for b in blocks {
            let mut ev = BlockEval::zeros(b.derivs.len(), b.points.len(), gradient.then_some(n_params));
            for (pi, x) in b.points.iter().enumerate() {
                // tables[a][order][degree]
                let tables: Vec<Vec<Vec<f64>>> = (0..self.dim)
                    .map(|a| {
                        let u = alpha_in[a] * x[a] + alpha_shift[a];
                        (0..=table_orders).map(|k| self.basis.eval(u, max_deg, k)).collect()
                    })
                    .collect();
                for (di, &d) in b.derivs.iter().enumerate() {
                    let kvec = d.multi_index(self.dim);
                    let order = d.order();
                    let chain = d.axis().map_or(1.0, |a| alpha_in[a].powi(order as i32));
                    let g = self.basis_values(&tables, &kvec);
                    let raw = dot(&g, &base);
                    let is_value = d == Deriv::Value;
                    ev.values[di][pi] = alpha_out * chain * raw + if is_value { alpha_offset } else { 0.0 };
                    if let Some(grads) = ev.grads.as_mut() {
                        let row = &mut grads[di][pi];
                        for (k, dpk) in dp.iter().enumerate() {
                            row[k] = alpha_out * chain * dot(&g, dpk);
                        }
                        row[self.n_theta] = chain * raw;
                        for a in 0..self.dim {
                            let mut kb = kvec.clone();
                            kb[a] += 1;
                            let gb = dot(&self.basis_values(&tables, &kb), &base);
                            let dchain = match d.axis() {
                                Some(ax) if ax == a && order > 0 => {
                                    order as f64 * alpha_in[a].powi(order as i32 - 1)
                                }
                                _ => 0.0,
                            };
                            row[self.n_theta + 1 + a] = alpha_out * (dchain * raw + chain * gb * x[a]);
                            row[self.n_theta + 1 + self.dim + a] = alpha_out * chain * gb;
                        }
                        row[self.n_theta + 1 + 2 * self.dim] = if is_value { 1.0 } else { 0.0 };
                    }
                }
            }
            out.push(ev);
        }
        Ok(out)
    }

    fn metadata(&self) -> serde_json::Value {
        let assignment: Vec<serde_json::Value> = self
            .strings
            .iter()
            .zip(&self.exponents)
            .map(|(p, e)| json!({ "pauli": p.to_string(), "degree": e }))
            .collect();
        json!({
            "variant": "fs",
            "ansatz": { "kind": "hea", "depth": self.depth, "n_params": self.n_theta },
            "basis": self.basis.name(),
            "mode": self.mode,
            "budget": self.budget,
            "mom_batches": self.batches,
            "basis_assignment": assignment,
            "init_seed": self.init_seed,
        })
    }
}
