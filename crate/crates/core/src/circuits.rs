//! Parameterised circuit descriptions: feature maps, the hardware-efficient
//! ansatz and the static basis-change unitary.
//!
//! A [`CircuitSpec`] is an ordered gate list whose angles are either
//! constants or affine references `scale · value(param)`. Parameters are
//! declared up front with a role (input or variational); gates are resolved
//! against a dense value vector indexed by declaration order.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Gate, Mat2, StateVector};

pub type Bindings = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    Cnot,
    FixedSu2,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    fn arity(self) -> usize {
        if self == GateKind::Cnot {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleBinding {
    Constant(f64),
    Param { id: String, scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<AngleBinding>,
    /// Row-major `[re, im]` entries, only for `FIXED_SU2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[[f64; 2]; 2]; 2]>,
}

impl GateSpec {
    pub fn rotation(kind: GateKind, qubit: usize, angle: AngleBinding) -> Self {
        debug_assert!(kind.is_rotation());
        Self { kind, qubits: vec![qubit], angle: Some(angle), matrix: None }
    }

    pub fn param(kind: GateKind, qubit: usize, id: impl Into<String>, scale: f64) -> Self {
        Self::rotation(kind, qubit, AngleBinding::Param { id: id.into(), scale })
    }

    pub fn fixed(kind: GateKind, qubit: usize, theta: f64) -> Self {
        Self::rotation(kind, qubit, AngleBinding::Constant(theta))
    }

    pub fn h(qubit: usize) -> Self {
        Self { kind: GateKind::H, qubits: vec![qubit], angle: None, matrix: None }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self { kind: GateKind::Cnot, qubits: vec![control, target], angle: None, matrix: None }
    }

    pub fn fixed_su2(qubit: usize, m: &Mat2) -> Self {
        let e = |z: Complex64| [z.re, z.im];
        let matrix = [[e(m[0][0]), e(m[0][1])], [e(m[1][0]), e(m[1][1])]];
        Self { kind: GateKind::FixedSu2, qubits: vec![qubit], angle: None, matrix: Some(matrix) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamRole {
    Input,
    Variational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamDecl {
    pub id: String,
    pub role: ParamRole,
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    n_qubits: usize,
    params: Vec<ParamDecl>,
    gates: Vec<GateSpec>,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Constant(f64),
    Param { index: usize, scale: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CircuitDoc", into = "CircuitDoc")]
pub struct CircuitSpec {
    n_qubits: usize,
    params: Vec<ParamDecl>,
    gates: Vec<GateSpec>,
    #[serde(skip)]
    resolved: Resolved,
}

#[derive(Debug, Clone, Default)]
struct Resolved {
    slots: Vec<Slot>,
    unitaries: Vec<Option<Mat2>>,
}

impl PartialEq for Resolved {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl TryFrom<CircuitDoc> for CircuitSpec {
    type Error = Error;

    fn try_from(doc: CircuitDoc) -> Result<Self> {
        CircuitSpec::new(doc.n_qubits, doc.params, doc.gates)
    }
}

impl From<CircuitSpec> for CircuitDoc {
    fn from(c: CircuitSpec) -> Self {
        CircuitDoc { n_qubits: c.n_qubits, params: c.params, gates: c.gates }
    }
}

impl CircuitSpec {
    pub fn new(n_qubits: usize, params: Vec<ParamDecl>, gates: Vec<GateSpec>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::statevector::MAX_QUBITS {
            return Err(Error::Config(format!("circuit qubit count {n_qubits} out of range")));
        }
        for (i, p) in params.iter().enumerate() {
            if params[..i].iter().any(|q| q.id == p.id) {
                return Err(Error::Config(format!("parameter `{}` declared twice", p.id)));
            }
        }
        let mut slots = Vec::with_capacity(gates.len());
        let mut unitaries = Vec::with_capacity(gates.len());
        for (gi, g) in gates.iter().enumerate() {
            if g.qubits.len() != g.kind.arity() {
                return Err(Error::Config(format!("gate {gi} has {} qubits", g.qubits.len())));
            }
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= n_qubits) {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            if g.kind == GateKind::Cnot && g.qubits[0] == g.qubits[1] {
                return Err(Error::Config(format!("gate {gi}: CNOT control equals target")));
            }
            let slot = match (&g.angle, g.kind.is_rotation()) {
                (Some(AngleBinding::Constant(t)), true) => Slot::Constant(*t),
                (Some(AngleBinding::Param { id, scale }), true) => {
                    if !scale.is_finite() {
                        return Err(Error::Config(format!("gate {gi}: non-finite scale")));
                    }
                    let index = params
                        .iter()
                        .position(|p| &p.id == id)
                        .ok_or_else(|| Error::UndeclaredParam(id.clone()))?;
                    Slot::Param { index, scale: *scale }
                }
                (None, false) => Slot::None,
                (Some(_), false) => return Err(Error::NotARotation { gate: gi }),
                (None, true) => {
                    return Err(Error::Config(format!("rotation gate {gi} has no angle")))
                }
            };
            slots.push(slot);
            let u = match (g.kind, &g.matrix) {
                (GateKind::FixedSu2, Some(m)) => {
                    let z = |e: [f64; 2]| Complex64::new(e[0], e[1]);
                    Some([[z(m[0][0]), z(m[0][1])], [z(m[1][0]), z(m[1][1])]])
                }
                (GateKind::FixedSu2, None) => {
                    return Err(Error::Config(format!("FIXED_SU2 gate {gi} lacks a matrix")))
                }
                (_, Some(_)) => {
                    return Err(Error::Config(format!("gate {gi}: matrix on non-FIXED_SU2 gate")))
                }
                _ => None,
            };
            unitaries.push(u);
        }
        Ok(Self { n_qubits, params, gates, resolved: Resolved { slots, unitaries } })
    }

    pub fn empty(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new(), Vec::new())
    }

    /// `self` followed by `next`; parameters with the same id are merged.
    pub fn then(&self, next: &CircuitSpec) -> Result<Self> {
        if self.n_qubits != next.n_qubits {
            return Err(Error::Config("composing circuits of different widths".into()));
        }
        let mut params = self.params.clone();
        for p in &next.params {
            match params.iter().find(|q| q.id == p.id) {
                Some(q) if q.role != p.role => {
                    return Err(Error::Config(format!("parameter `{}` has conflicting roles", p.id)))
                }
                Some(_) => {}
                None => params.push(p.clone()),
            }
        }
        let mut gates = self.gates.clone();
        gates.extend(next.gates.iter().cloned());
        Self::new(self.n_qubits, params, gates)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn params(&self) -> &[ParamDecl] {
        &self.params
    }

    pub fn param_index(&self, id: &str) -> Option<usize> {
        self.params.iter().position(|p| p.id == id)
    }

    pub fn params_with_role(&self, role: ParamRole) -> Vec<usize> {
        (0..self.params.len()).filter(|&i| self.params[i].role == role).collect()
    }

    /// Gates whose angle references parameter `index`, with their scales.
    pub fn occurrences(&self, index: usize) -> Vec<(usize, f64)> {
        self.resolved
            .slots
            .iter()
            .enumerate()
            .filter_map(|(gi, s)| match *s {
                Slot::Param { index: i, scale } if i == index => Some((gi, scale)),
                _ => None,
            })
            .collect()
    }

    /// Every gate bound to a variational parameter, in gate order.
    pub fn variational_gates(&self) -> Vec<usize> {
        self.resolved
            .slots
            .iter()
            .enumerate()
            .filter_map(|(gi, s)| match *s {
                Slot::Param { index, .. } if self.params[index].role == ParamRole::Variational => {
                    Some(gi)
                }
                _ => None,
            })
            .collect()
    }

    pub fn is_rotation(&self, gate: usize) -> bool {
        self.gates.get(gate).is_some_and(|g| g.kind.is_rotation())
    }

    /// Dense value vector in declaration order.
    pub fn bind(&self, bindings: &Bindings) -> Result<Vec<f64>> {
        self.params
            .iter()
            .map(|p| bindings.get(&p.id).copied().ok_or_else(|| Error::MissingBinding(p.id.clone())))
            .collect()
    }

    /// Gate `gi` with its angle resolved and `shift` added.
    pub fn resolve_gate(&self, gi: usize, values: &[f64], shift: f64) -> Gate {
        let g = &self.gates[gi];
        let angle = match self.resolved.slots[gi] {
            Slot::Constant(t) => t + shift,
            Slot::Param { index, scale } => scale * values[index] + shift,
            Slot::None => 0.0,
        };
        let q = g.qubits[0];
        match g.kind {
            GateKind::Rx => Gate::Rx { qubit: q, theta: angle },
            GateKind::Ry => Gate::Ry { qubit: q, theta: angle },
            GateKind::Rz => Gate::Rz { qubit: q, theta: angle },
            GateKind::H => Gate::H { qubit: q },
            GateKind::Cnot => Gate::Cnot { control: q, target: g.qubits[1] },
            GateKind::FixedSu2 => Gate::Unitary {
                qubit: q,
                matrix: self.resolved.unitaries[gi].expect("validated at construction"),
            },
        }
    }

    /// Applies the circuit to `state`. `shifts` lists `(gate, Δθ)` pairs
    /// added to the resolved angles; repeated gates accumulate.
    pub fn execute_on(&self, state: &mut StateVector, values: &[f64], shifts: &[(usize, f64)]) {
        debug_assert_eq!(values.len(), self.params.len());
        debug_assert_eq!(state.n_qubits(), self.n_qubits);
        for gi in 0..self.gates.len() {
            let shift: f64 = shifts.iter().filter(|(g, _)| *g == gi).map(|(_, d)| d).sum();
            state.apply_unchecked(&self.resolve_gate(gi, values, shift));
        }
    }

    pub fn execute(&self, values: &[f64], shifts: &[(usize, f64)]) -> StateVector {
        let mut s = StateVector::zero_state(self.n_qubits).expect("validated width");
        self.execute_on(&mut s, values, shifts);
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Applies `circuit` to `|0…0⟩` under named bindings.
pub fn run(circuit: &CircuitSpec, bindings: &Bindings) -> Result<StateVector> {
    let values = circuit.bind(bindings)?;
    Ok(circuit.execute(&values, &[]))
}

/// Tower map: `RX((j+1)·x)` on qubit `j`.
pub fn tower_feature_map(n: usize) -> Result<CircuitSpec> {
    let qubits: Vec<usize> = (0..n).collect();
    tower_feature_map_on(n, &qubits, "x")
}

/// Tower map restricted to `qubits`, with multipliers `1, 2, …` in the
/// listed order, encoding the input parameter `input`.
pub fn tower_feature_map_on(n: usize, qubits: &[usize], input: &str) -> Result<CircuitSpec> {
    let gates = qubits
        .iter()
        .enumerate()
        .map(|(k, &q)| GateSpec::param(GateKind::Rx, q, input, (k + 1) as f64))
        .collect();
    CircuitSpec::new(n, vec![ParamDecl { id: input.into(), role: ParamRole::Input }], gates)
}

/// `depth` layers of per-qubit RX·RY·RZ followed by a linear CNOT chain.
/// Parameter ids are `{prefix}{k}` in gate order.
pub fn hea(n: usize, depth: usize, prefix: &str) -> Result<CircuitSpec> {
    if depth == 0 {
        return Err(Error::Config("HEA depth must be at least 1".into()));
    }
    let mut params = Vec::with_capacity(3 * n * depth);
    let mut gates = Vec::new();
    for _ in 0..depth {
        for q in 0..n {
            for kind in [GateKind::Rx, GateKind::Ry, GateKind::Rz] {
                let id = format!("{prefix}{}", params.len());
                gates.push(GateSpec::param(kind, q, id.clone(), 1.0));
                params.push(ParamDecl { id, role: ParamRole::Variational });
            }
        }
        for q in 0..n.saturating_sub(1) {
            gates.push(GateSpec::cnot(q, q + 1));
        }
    }
    CircuitSpec::new(n, params, gates)
}

/// Static entangling basis change: one layer of RX·RY·RZ per qubit with
/// angles uniform in `[0, 2π)`, then a CNOT chain. No free parameters.
pub fn random_basis_unitary(n: usize, seed: u64) -> Result<CircuitSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    for q in 0..n {
        for kind in [GateKind::Rx, GateKind::Ry, GateKind::Rz] {
            gates.push(GateSpec::fixed(kind, q, rng.random_range(0.0..TAU)));
        }
    }
    for q in 0..n.saturating_sub(1) {
        gates.push(GateSpec::cnot(q, q + 1));
    }
    CircuitSpec::new(n, Vec::new(), gates)
}
