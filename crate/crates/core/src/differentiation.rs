//! Parameter-shift derivatives.
//!
//! Every differentiable gate is a Pauli rotation `exp(-iθP/2)`, so the
//! expectation is `A + B cos θ + C sin θ` in each angle and the two-point
//! rule `[f(θ+π/2) - f(θ-π/2)] / 2` is exact. Input derivatives chain over
//! every gate that encodes the input with an affine scale `s_g`:
//!
//! ```text
//! df/dx   = Σ_g s_g ∂f/∂θ_g
//! d²f/dx² = Σ_{g,h} s_g s_h ∂²f/∂θ_g∂θ_h
//! ```
//!
//! where each mixed term uses the nested four-point shift. No evaluations
//! are cached: a first-order plan over `n` gates issues `2n` evaluations and
//! a second-order plan `4n²`.

use std::f64::consts::FRAC_PI_2;

use crate::circuits::{CircuitSpec, ParamRole};
use crate::error::{Error, Result};
use crate::pauli::ObservableSum;

pub const SHIFT: f64 = FRAC_PI_2;

/// One weighted, shifted evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTerm {
    pub shifts: Vec<(usize, f64)>,
    pub weight: f64,
}

/// A weighted sum of shifted evaluations realising one derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPlan {
    terms: Vec<ShiftTerm>,
}

impl ShiftPlan {
    /// The undifferentiated value.
    pub fn value() -> Self {
        Self { terms: vec![ShiftTerm { shifts: Vec::new(), weight: 1.0 }] }
    }

    pub fn first_order(gates: &[(usize, f64)]) -> Self {
        let mut terms = Vec::with_capacity(2 * gates.len());
        for &(g, s) in gates {
            terms.push(ShiftTerm { shifts: vec![(g, SHIFT)], weight: 0.5 * s });
            terms.push(ShiftTerm { shifts: vec![(g, -SHIFT)], weight: -0.5 * s });
        }
        Self { terms }
    }

    pub fn second_order(gates: &[(usize, f64)]) -> Self {
        let mut terms = Vec::with_capacity(4 * gates.len() * gates.len());
        for &(g, sg) in gates {
            for &(h, sh) in gates {
                let w = 0.25 * sg * sh;
                for (dg, dh, sign) in [(SHIFT, SHIFT, 1.0), (SHIFT, -SHIFT, -1.0), (-SHIFT, SHIFT, -1.0), (-SHIFT, -SHIFT, 1.0)] {
                    terms.push(ShiftTerm { shifts: vec![(g, dg), (h, dh)], weight: sign * w });
                }
            }
        }
        Self { terms }
    }

    pub fn for_order(gates: &[(usize, f64)], order: usize) -> Result<Self> {
        match order {
            0 => Ok(Self::value()),
            1 => Ok(Self::first_order(gates)),
            2 => Ok(Self::second_order(gates)),
            k => Err(Error::UnsupportedOrder(k)),
        }
    }

    pub fn terms(&self) -> &[ShiftTerm] {
        &self.terms
    }

    /// Number of expectation evaluations the plan issues.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate<F: FnMut(&[(usize, f64)]) -> f64>(&self, mut eval: F) -> f64 {
        self.terms.iter().map(|t| t.weight * eval(&t.shifts)).sum()
    }

    /// The same plan differentiated once more with respect to `gate`'s angle.
    pub fn differentiate(&self, gate: usize, scale: f64) -> Self {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            for (d, w) in [(SHIFT, 0.5), (-SHIFT, -0.5)] {
                let mut shifts = t.shifts.clone();
                shifts.push((gate, d));
                terms.push(ShiftTerm { shifts, weight: t.weight * w * scale });
            }
        }
        Self { terms }
    }
}

/// Parameter-shift derivative of `⟨obs⟩` with respect to the angle of `gate`.
pub fn d_dtheta(circuit: &CircuitSpec, values: &[f64], obs: &ObservableSum, gate: usize) -> Result<f64> {
    if !circuit.is_rotation(gate) {
        return Err(Error::NotARotation { gate });
    }
    let plan = ShiftPlan::first_order(&[(gate, 1.0)]);
    eval_plan(circuit, values, obs, &plan)
}

/// Input derivative of order 1 or 2 through the encoding gates
/// `(gate, scale)`; `eval` returns the expectation under the given shifts.
pub fn d_dx<F: FnMut(&[(usize, f64)]) -> f64>(encoding: &[(usize, f64)], order: usize, eval: F) -> Result<f64> {
    if !(1..=2).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    Ok(ShiftPlan::for_order(encoding, order)?.evaluate(eval))
}

/// `d^order/dv^order ⟨obs⟩` for the circuit parameter at `param`.
pub fn d_dparam(circuit: &CircuitSpec, values: &[f64], obs: &ObservableSum, param: usize, order: usize) -> Result<f64> {
    let gates = circuit.occurrences(param);
    if let Some(&(g, _)) = gates.iter().find(|(g, _)| !circuit.is_rotation(*g)) {
        return Err(Error::NotARotation { gate: g });
    }
    let mut err = None;
    let v = d_dx(&gates, order, |shifts| match circuit.execute(values, shifts).expectation(obs) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// One derivative per variational parameter (declaration order), summing
/// over every gate that shares the parameter.
pub fn grad_variational(circuit: &CircuitSpec, values: &[f64], obs: &ObservableSum) -> Result<Vec<f64>> {
    circuit
        .params_with_role(ParamRole::Variational)
        .into_iter()
        .map(|p| {
            let occ = circuit.occurrences(p);
            let plan = ShiftPlan::first_order(&occ);
            eval_plan(circuit, values, obs, &plan)
        })
        .collect()
}

fn eval_plan(circuit: &CircuitSpec, values: &[f64], obs: &ObservableSum, plan: &ShiftPlan) -> Result<f64> {
    plan.terms().iter().try_fold(0.0, |acc, t| {
        Ok(acc + t.weight * circuit.execute(values, &t.shifts).expectation(obs)?)
    })
}

/// Central finite differences, the independent check on shift rules.
pub mod finite_difference {
    pub const H_FIRST: f64 = 1e-4;
    pub const H_SECOND: f64 = 1e-3;

    pub fn first<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    pub fn second<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
        (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    }

    /// Five-point stencil, error `O(h⁴)`.
    pub fn first5<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    /// Five-point stencil, error `O(h⁴)`.
    pub fn second5<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
    }

    /// Finite-difference gradient of a vector function.
    pub fn gradient<F: FnMut(&[f64]) -> f64>(mut f: F, at: &[f64], h: f64) -> Vec<f64> {
        let mut p = at.to_vec();
        (0..at.len())
            .map(|i| {
                p[i] = at[i] + h;
                let up = f(&p);
                p[i] = at[i] - h;
                let down = f(&p);
                p[i] = at[i];
                (up - down) / (2.0 * h)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{hea, random_basis_unitary, tower_feature_map, GateKind, GateSpec, ParamDecl};
    use crate::pauli::PauliString;
    use std::f64::consts::PI;

    fn single_rx() -> CircuitSpec {
        CircuitSpec::new(
            1,
            vec![ParamDecl { id: "x".into(), role: ParamRole::Input }],
            vec![GateSpec::param(GateKind::Rx, 0, "x", 1.0)],
        )
        .unwrap()
    }

    fn z() -> ObservableSum {
        ObservableSum::single("Z".parse::<PauliString>().unwrap())
    }

    #[test]
    fn psr_on_cosine() {
        let c = single_rx();
        assert!(d_dtheta(&c, &[0.0], &z(), 0).unwrap().abs() < 1e-14);
        assert!((d_dtheta(&c, &[PI / 2.0], &z(), 0).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn input_derivatives_closed_form() {
        let c = single_rx();
        let d1 = d_dparam(&c, &[1.0], &z(), 0, 1).unwrap();
        let d2 = d_dparam(&c, &[1.0], &z(), 0, 2).unwrap();
        assert!((d1 + 1f64.sin()).abs() < 1e-9);
        assert!((d2 + 1f64.cos()).abs() < 1e-9);
        assert!(matches!(d_dparam(&c, &[1.0], &z(), 0, 3), Err(Error::UnsupportedOrder(3))));
    }

    #[test]
    fn evaluation_counts() {
        let gates = [(0, 1.0), (1, 2.0), (2, 3.0), (3, 4.0)];
        let mut calls = 0;
        d_dx(&gates, 1, |_| {
            calls += 1;
            0.0
        })
        .unwrap();
        assert_eq!(calls, 8);
        calls = 0;
        d_dx(&gates, 2, |_| {
            calls += 1;
            0.0
        })
        .unwrap();
        assert_eq!(calls, 64);
    }

    #[test]
    fn non_rotation_rejected() {
        let c = hea(2, 1, "t").unwrap();
        let v = vec![0.1; 6];
        // gate 6 is the CNOT
        assert!(matches!(d_dtheta(&c, &v, &z2(), 6), Err(Error::NotARotation { gate: 6 })));
    }

    fn z2() -> ObservableSum {
        ObservableSum::total_z(2)
    }

    #[test]
    fn grad_lengths() {
        let empty = CircuitSpec::empty(2).unwrap();
        assert!(grad_variational(&empty, &[], &z2()).unwrap().is_empty());
        let h = hea(2, 1, "t").unwrap();
        assert_eq!(grad_variational(&h, &[0.2; 6], &z2()).unwrap().len(), 6);
    }

    #[test]
    fn tower_input_derivative_matches_fd() {
        let c = tower_feature_map(4).unwrap().then(&random_basis_unitary(4, 9).unwrap()).unwrap();
        let obs = ObservableSum::new([(0.6, "XZII".parse().unwrap()), (1.1, "IIYZ".parse().unwrap())]).unwrap();
        let x = 0.37;
        let psr = d_dparam(&c, &[x], &obs, 0, 1).unwrap();
        let fd = finite_difference::first(|t| c.execute(&[t], &[]).expectation(&obs).unwrap(), x, 1e-4);
        assert!((psr - fd).abs() < 1e-6, "{psr} vs {fd}");
    }

    #[test]
    fn mixed_second_derivatives_symmetric() {
        let c = tower_feature_map(3).unwrap().then(&hea(3, 1, "a").unwrap()).unwrap();
        let obs = ObservableSum::total_z(3);
        let v: Vec<f64> = (0..c.params().len()).map(|i| 0.3 + 0.17 * i as f64).collect();
        let f = |s: &[(usize, f64)]| c.execute(&v, s).expectation(&obs).unwrap();
        for (g, h) in [(0usize, 4usize), (1, 7), (2, 9)] {
            let gh = ShiftPlan::first_order(&[(g, 1.0)]).differentiate(h, 1.0).evaluate(f);
            let hg = ShiftPlan::first_order(&[(h, 1.0)]).differentiate(g, 1.0).evaluate(f);
            assert!((gh - hg).abs() < 1e-10);
        }
    }
}
