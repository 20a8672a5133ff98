//! Input encodings `Û(x)`: a tower feature map per input axis, optionally
//! followed by the fixed basis change `Û_b`.

use num_complex::Complex64;
use serde_json::json;

use crate::circuits::{random_basis_unitary, CircuitSpec, GateKind, GateSpec, ParamDecl, ParamRole};
use crate::differentiation::ShiftPlan;
use crate::error::{Error, Result};
use crate::models::Deriv;
use crate::statevector::StateVector;

const AXIS_NAMES: [&str; 2] = ["x", "y"];
const AXIS_GATES: [GateKind; 2] = [GateKind::Rx, GateKind::Ry];

#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    circuit: CircuitSpec,
    dim: usize,
    axis_gates: Vec<Vec<(usize, f64)>>,
    axis_qubits: Vec<Vec<usize>>,
    basis_seed: Option<u64>,
}

impl Encoding {
    /// Tower map over `n` qubits: qubit `j` carries `RX((j+1)x)`, followed
    /// in two dimensions by `RY((j+1)y)`. `basis_seed` appends `Û_b`.
    pub fn tower(n: usize, dim: usize, basis_seed: Option<u64>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Config(format!("input dimension {dim} not supported")));
        }
        let params = (0..dim).map(|a| ParamDecl { id: AXIS_NAMES[a].into(), role: ParamRole::Input }).collect();
        let mut gates = Vec::with_capacity(n * dim);
        for q in 0..n {
            for a in 0..dim {
                gates.push(GateSpec::param(AXIS_GATES[a], q, AXIS_NAMES[a], (q + 1) as f64));
            }
        }
        let mut circuit = CircuitSpec::new(n, params, gates)?;
        let axis_qubits = vec![(0..n).collect::<Vec<usize>>(); dim];
        if let Some(seed) = basis_seed {
            circuit = circuit.then(&random_basis_unitary(n, seed)?)?;
        }
        let axis_gates = (0..dim).map(|a| circuit.occurrences(a)).collect();
        Ok(Self { circuit, dim, axis_gates, axis_qubits, basis_seed })
    }

    pub fn circuit(&self) -> &CircuitSpec {
        &self.circuit
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    pub fn basis_seed(&self) -> Option<u64> {
        self.basis_seed
    }

    /// Encoding gates `(gate, scale)` of one input axis.
    pub fn axis_gates(&self, axis: usize) -> &[(usize, f64)] {
        &self.axis_gates[axis]
    }

    pub fn supports(&self, deriv: Deriv) -> bool {
        deriv.axis().is_none_or(|a| a < self.dim)
    }

    pub fn plan(&self, deriv: Deriv) -> Result<ShiftPlan> {
        match deriv {
            Deriv::Value => Ok(ShiftPlan::value()),
            Deriv::First(a) | Deriv::Second(a) => {
                if a >= self.dim {
                    return Err(Error::IndexOutOfRange { index: a, len: self.dim });
                }
                ShiftPlan::for_order(&self.axis_gates[a], deriv.order())
            }
        }
    }

    /// Expectation evaluations one derivative costs at one point.
    pub fn evaluations(&self, deriv: Deriv) -> usize {
        match deriv {
            Deriv::Value => 1,
            Deriv::First(a) => 2 * self.axis_gates[a].len(),
            Deriv::Second(a) => 4 * self.axis_gates[a].len().pow(2),
        }
    }

    pub fn state(&self, point: &[f64], shifts: &[(usize, f64)]) -> Result<StateVector> {
        if point.len() != self.dim {
            return Err(Error::Config(format!("point has {} coordinates, expected {}", point.len(), self.dim)));
        }
        Ok(self.circuit.execute(point, shifts))
    }

    /// `R = Σ_t w_t |s_t⟩⟨s_t|` over the shift plan of `deriv`, flattened
    /// row-major as interleaved `[re, im]` pairs. Then
    /// `d^k/dx^k ⟨O⟩ = Re Tr(O R)` for any observable `O`.
    pub fn weighted_density(&self, point: &[f64], deriv: Deriv) -> Result<Vec<f64>> {
        let plan = self.plan(deriv)?;
        let dim = 1usize << self.n_qubits();
        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        for term in plan.terms() {
            let s = self.state(point, &term.shifts)?;
            let a = s.amplitudes();
            for i in 0..dim {
                let ai = a[i] * term.weight;
                for j in 0..dim {
                    rho[i * dim + j] += ai * a[j].conj();
                }
            }
        }
        Ok(rho.iter().flat_map(|z| [z.re, z.im]).collect())
    }

    pub fn describe(&self) -> serde_json::Value {
        json!({
            "kind": "tower",
            "n_qubits": self.n_qubits(),
            "dim": self.dim,
            "axis_qubits": self.axis_qubits,
            "basis_seed": self.basis_seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::ObservableSum;

    #[test]
    fn two_dimensional_towers() {
        let e = Encoding::tower(4, 2, None).unwrap();
        assert_eq!(e.axis_gates(0), &[(0, 1.0), (2, 2.0), (4, 3.0), (6, 4.0)]);
        assert_eq!(e.axis_gates(1), &[(1, 1.0), (3, 2.0), (5, 3.0), (7, 4.0)]);
        assert_eq!(e.evaluations(Deriv::First(1)), 8);
        assert_eq!(e.evaluations(Deriv::Second(0)), 64);
        assert!(!e.supports(Deriv::First(2)));
        let one = Encoding::tower(4, 1, None).unwrap();
        assert_eq!(one.circuit(), &crate::circuits::tower_feature_map(4).unwrap());
    }

    #[test]
    fn mixed_input_derivative_matches_fd() {
        let e = Encoding::tower(3, 2, Some(2)).unwrap();
        let obs = ObservableSum::new([(1.0, "XZI".parse().unwrap()), (0.4, "IYY".parse().unwrap())]).unwrap();
        let p = [0.3, 0.55];
        let plan = e.plan(Deriv::First(1)).unwrap();
        let psr = plan.evaluate(|s| e.state(&p, s).unwrap().expectation(&obs).unwrap());
        let f = |t: f64| e.state(&[p[0], t], &[]).unwrap().expectation(&obs).unwrap();
        let fd = (f(p[1] + 1e-5) - f(p[1] - 1e-5)) / 2e-5;
        assert!((psr - fd).abs() < 1e-8);
    }

    #[test]
    fn density_reproduces_derivative() {
        let e = Encoding::tower(3, 1, Some(4)).unwrap();
        let obs = ObservableSum::total_z(3);
        let x = 0.41;
        let rho = e.weighted_density(&[x], Deriv::First(0)).unwrap();
        // Re Tr(O R) with O diagonal
        let dim = 8;
        let mut tr = 0.0;
        for b in 0..dim {
            let z: f64 = (0..3).map(|q| if b >> q & 1 == 0 { 1.0 } else { -1.0 }).sum();
            tr += z * rho[2 * (b * dim + b)];
        }
        let f = |t: f64| e.state(&[t], &[]).unwrap().expectation(&obs).unwrap();
        let fd = (f(x + 1e-5) - f(x - 1e-5)) / 2e-5;
        assert!((tr - fd).abs() < 1e-8);
    }
}
