//! Trainable-observable model `f(x) = α_s Σ_j α_j ⟨0|Û†(x) C_j Û(x)|0⟩`.
//!
//! Every measurement the loss needs is taken once, before training, into a
//! [`TOTable`]; training itself is purely classical.

use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::models::original::check_blocks;
use crate::models::{Block, BlockEval, Deriv, Encoding, Point, TrialModel, Variant};
use crate::pauli::PauliString;
use crate::training::{EvalCounter, Phase};

/// Measured `c[deriv][point][obs] = d^k/dx^k ⟨Û†(x) C_obs Û(x)⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TOTable {
    pub n_qubits: usize,
    pub dim: usize,
    pub observable_set: String,
    pub observables: Vec<PauliString>,
    pub basis_seed: Option<u64>,
    pub derivs: Vec<Deriv>,
    pub points: Vec<Point>,
    /// Row-major over `[deriv][point][obs]`.
    pub entries: Vec<f64>,
}

fn point_key(p: &[f64]) -> Vec<u64> {
    p.iter().map(|v| v.to_bits()).collect()
}

impl TOTable {
    pub fn n_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn n_observables(&self) -> usize {
        self.observables.len()
    }

    pub fn deriv_index(&self, d: Deriv) -> Option<usize> {
        self.derivs.iter().position(|&e| e == d)
    }

    pub fn point_index(&self, p: &[f64]) -> Option<usize> {
        self.points.iter().position(|q| q.as_slice() == p)
    }

    pub fn row(&self, deriv: usize, point: usize) -> Result<&[f64]> {
        if deriv >= self.derivs.len() {
            return Err(Error::IndexOutOfRange { index: deriv, len: self.derivs.len() });
        }
        if point >= self.points.len() {
            return Err(Error::IndexOutOfRange { index: point, len: self.points.len() });
        }
        let d = self.observables.len();
        let start = (deriv * self.points.len() + point) * d;
        Ok(&self.entries[start..start + d])
    }

    pub fn get(&self, deriv: usize, point: usize, obs: usize) -> Result<f64> {
        let row = self.row(deriv, point)?;
        row.get(obs).copied().ok_or(Error::IndexOutOfRange { index: obs, len: row.len() })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(s)?;
        if t.entries.len() != t.derivs.len() * t.points.len() * t.observables.len() {
            return Err(Error::Parse("table entry count does not match its dimensions".into()));
        }
        Ok(t)
    }
}

/// One measured row per derivative: `d` expectations per plan term.
fn measure_rows(encoding: &Encoding, observables: &[PauliString], point: &[f64], deriv: Deriv) -> Result<Vec<f64>> {
    let plan = encoding.plan(deriv)?;
    let mut row = vec![0.0; observables.len()];
    for t in plan.terms() {
        let s = encoding.state(point, &t.shifts)?;
        for (r, p) in row.iter_mut().zip(observables) {
            *r += t.weight * s.pauli_expectation(p)?;
        }
    }
    Ok(row)
}

/// Measures every entry and charges `d · m · Σ_k (evaluations of deriv k)`.
pub fn precompute_to_table(
    encoding: &Encoding,
    observable_set: &str,
    observables: Vec<PauliString>,
    points: Vec<Point>,
    derivs: Vec<Deriv>,
    counter: &EvalCounter,
) -> Result<TOTable> {
    if let Some(&d) = derivs.iter().find(|&&d| !encoding.supports(d)) {
        return Err(Error::UnsupportedOrder(d.order()));
    }
    let mut entries = Vec::with_capacity(derivs.len() * points.len() * observables.len());
    for &d in &derivs {
        for p in &points {
            entries.extend(measure_rows(encoding, &observables, p, d)?);
        }
    }
    let per_point: usize = derivs.iter().map(|&d| encoding.evaluations(d)).sum();
    counter.charge(Phase::Precompute, (observables.len() * points.len() * per_point) as u64);
    Ok(TOTable {
        n_qubits: encoding.n_qubits(),
        dim: encoding.dim(),
        observable_set: observable_set.to_string(),
        observables,
        basis_seed: encoding.basis_seed(),
        derivs,
        points,
        entries,
    })
}

pub struct TrainableObservableModel {
    table: Arc<TOTable>,
    encoding: Encoding,
    index: HashMap<Vec<u64>, usize>,
    params: Vec<f64>,
    init_seed: u64,
}

impl TrainableObservableModel {
    /// `encoding` must be the one the table was measured with; it is used
    /// only for points outside the table.
    pub fn new(table: Arc<TOTable>, encoding: Encoding, init_seed: u64) -> Result<Self> {
        if encoding.n_qubits() != table.n_qubits || encoding.dim() != table.dim {
            return Err(Error::Config("encoding does not match the table".into()));
        }
        let d = table.n_observables();
        let normal = Normal::new(0.0, 0.1 / (d.max(1) as f64).sqrt()).map_err(|e| Error::Config(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
        let mut params: Vec<f64> = (0..d).map(|_| normal.sample(&mut rng)).collect();
        params.push(1.0);
        let index = table.points.iter().enumerate().map(|(i, p)| (point_key(p), i)).collect();
        Ok(Self { table, encoding, index, params, init_seed })
    }

    pub fn table(&self) -> &Arc<TOTable> {
        &self.table
    }

    /// `α_s Σ_j α_j c[order][i][j]` at table point `i`, with no quantum cost.
    pub fn eval_at(&self, point: usize, deriv: Deriv) -> Result<f64> {
        let di = self.table.deriv_index(deriv).ok_or(Error::UnsupportedOrder(deriv.order()))?;
        let row = self.table.row(di, point)?;
        let d = row.len();
        Ok(self.params[d] * row.iter().zip(&self.params[..d]).map(|(c, a)| c * a).sum::<f64>())
    }
}

impl TrialModel for TrainableObservableModel {
    fn variant(&self) -> Variant {
        Variant::To
    }

    fn dim(&self) -> usize {
        self.table.dim
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.table.observables.iter().map(|p| format!("alpha[{p}]")).collect();
        names.push("alpha_s".into());
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
        let d = self.table.n_observables();
        let (alpha, scale) = (&self.params[..d], self.params[d]);
        let mut out = Vec::with_capacity(blocks.len());
        let mut fresh = 0usize;
        for b in blocks {
            let mut ev = BlockEval::zeros(b.derivs.len(), b.points.len(), gradient.then_some(d + 1));
            for (di, &deriv) in b.derivs.iter().enumerate() {
                let ti = self.table.deriv_index(deriv);
                for (pi, p) in b.points.iter().enumerate() {
                    let owned;
                    let row: &[f64] = match (ti, self.index.get(&point_key(p))) {
                        (Some(ti), Some(&i)) => self.table.row(ti, i)?,
                        _ => {
                            owned = measure_rows(&self.encoding, &self.table.observables, p, deriv)?;
                            fresh += d * self.encoding.evaluations(deriv);
                            &owned
                        }
                    };
                    let lin: f64 = row.iter().zip(alpha).map(|(c, a)| c * a).sum();
                    ev.values[di][pi] = scale * lin;
                    if let Some(g) = ev.grads.as_mut() {
                        let gr = &mut g[di][pi];
                        for (gj, c) in gr.iter_mut().zip(row) {
                            *gj = scale * c;
                        }
                        gr[d] = lin;
                    }
                }
            }
            out.push(ev);
        }
        if fresh > 0 {
            counter.charge(phase, fresh as u64);
        }
        Ok(out)
    }

    fn metadata(&self) -> serde_json::Value {
        json!({
            "variant": "to",
            "encoding": self.encoding.describe(),
            "observable_set": self.table.observable_set,
            "n_observables": self.table.n_observables(),
            "table_points": self.table.points.len(),
            "table_derivs": self.table.derivs,
            "init_seed": self.init_seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{enumerate_k_local, ObservableSum};

    fn setup(points: Vec<Point>, derivs: Vec<Deriv>) -> (TOTable, Encoding, EvalCounter) {
        let enc = Encoding::tower(4, 1, Some(3)).unwrap();
        let c = EvalCounter::new();
        let obs = enumerate_k_local(4, 1).unwrap();
        let t = precompute_to_table(&enc, "loc1", obs, points, derivs, &c).unwrap();
        (t, enc, c)
    }

    #[test]
    fn table_shape_and_identity_rows() {
        let pts: Vec<Point> = (0..20).map(|i| vec![(i + 1) as f64 / 21.0]).collect();
        let (t, _, c) = setup(pts, vec![Deriv::Value, Deriv::First(0)]);
        assert_eq!(t.n_entries(), 2 * 20 * 13);
        assert_eq!(c.get(Phase::Precompute), 13 * 20 * (1 + 8));
        for i in 0..20 {
            assert!((t.get(0, i, 0).unwrap() - 1.0).abs() < 1e-12);
            assert!(t.get(1, i, 0).unwrap().abs() < 1e-12);
        }
        assert!(t.row(2, 0).is_err());
        assert!(t.row(0, 20).is_err());
    }

    #[test]
    fn training_evaluations_are_free_and_match_simulation() {
        let pts: Vec<Point> = vec![vec![0.25], vec![0.5]];
        let (t, enc, c) = setup(pts.clone(), vec![Deriv::Value]);
        let t = Arc::new(t);
        let mut m = TrainableObservableModel::new(t.clone(), enc.clone(), 4).unwrap();
        let before = c.total();
        let ev = m.evaluate(&[Block { points: &pts, derivs: &[Deriv::Value] }], true, &c, Phase::Training).unwrap();
        assert_eq!(c.total(), before);
        let d = t.n_observables();
        let obs = ObservableSum::new(t.observables.iter().cloned().zip(m.params()[..d].iter()).map(|(p, &a)| (a, p))).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let direct = enc.state(p, &[]).unwrap().expectation(&obs).unwrap();
            assert!((ev[0].values[0][i] - direct).abs() < 1e-10);
            let g = &ev[0].grads.as_ref().unwrap()[0][i];
            assert_eq!(&g[..d], t.row(0, i).unwrap());
        }
    }

    #[test]
    fn linearity_and_identity() {
        let pts: Vec<Point> = vec![vec![0.3]];
        let (t, enc, c) = setup(pts.clone(), vec![Deriv::Value]);
        let mut m = TrainableObservableModel::new(Arc::new(t), enc, 0).unwrap();
        let d = 13;
        let blocks = [Block { points: &pts, derivs: &[Deriv::Value] }];
        m.params_mut()[..d].iter_mut().enumerate().for_each(|(j, a)| *a = if j == 0 { 1.0 } else { 0.0 });
        assert_eq!(m.evaluate(&blocks, false, &c, Phase::Training).unwrap()[0].values[0][0], 1.0);
        m.params_mut()[..d].iter_mut().for_each(|a| *a = 0.0);
        assert_eq!(m.evaluate(&blocks, false, &c, Phase::Training).unwrap()[0].values[0][0], 0.0);
        let a: Vec<f64> = (0..d).map(|j| 0.1 * j as f64).collect();
        let b: Vec<f64> = (0..d).map(|j| 0.3 - 0.05 * j as f64).collect();
        let mut f = |v: &[f64]| {
            m.params_mut()[..d].copy_from_slice(v);
            m.eval_at(0, Deriv::Value).unwrap()
        };
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (fa, fb, fs) = (f(&a), f(&b), f(&sum));
        assert!((fs - (fa + fb)).abs() < 1e-15);
    }

    #[test]
    fn off_grid_points_are_charged() {
        let (t, enc, c) = setup(vec![vec![0.5]], vec![Deriv::Value]);
        let mut m = TrainableObservableModel::new(Arc::new(t), enc, 0).unwrap();
        let pts = vec![vec![0.7], vec![0.5]];
        m.evaluate(&[Block { points: &pts, derivs: &[Deriv::Value] }], false, &c, Phase::Inference).unwrap();
        assert_eq!(c.get(Phase::Inference), 13);
    }

    #[test]
    fn table_round_trip() {
        let (t, _, _) = setup(vec![vec![0.1], vec![0.9]], vec![Deriv::Value, Deriv::Second(0)]);
        let back = TOTable::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(t, back);
    }
}
