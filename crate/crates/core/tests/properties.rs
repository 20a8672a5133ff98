use std::f64::consts::PI;

use dqc_core::circuits::{CircuitSpec, GateKind, GateSpec, ParamDecl, ParamRole};
use dqc_core::differentiation::d_dparam;
use dqc_core::models::chebyshev_basis;
use dqc_core::pauli::{ObservableSum, Pauli, PauliString};
use dqc_core::shadows::ShadowBudget;
use proptest::prelude::*;

fn single_rx() -> CircuitSpec {
    CircuitSpec::new(1, vec![ParamDecl { id: "t".into(), role: ParamRole::Variational }], vec![GateSpec::param(GateKind::Rx, 0, "t", 1.0)])
        .unwrap()
}

fn pauli() -> impl Strategy<Value = Pauli> {
    prop::sample::select(Pauli::ALL.to_vec())
}

proptest! {
    // ⟨Z⟩ after RX(t)|0⟩ is cos t
    #[test]
    fn shift_rule_on_one_rotation(t in -PI..PI) {
        let c = single_rx();
        let z = ObservableSum::total_z(1);
        let d1 = d_dparam(&c, &[t], &z, 0, 1).unwrap();
        let d2 = d_dparam(&c, &[t], &z, 0, 2).unwrap();
        prop_assert!((d1 + t.sin()).abs() < 1e-12);
        prop_assert!((d2 + t.cos()).abs() < 1e-12);
    }

    #[test]
    fn rotations_preserve_norm(angles in prop::collection::vec(-4.0f64..4.0, 9)) {
        let kinds = [GateKind::Rx, GateKind::Ry, GateKind::Rz];
        let mut gates = Vec::new();
        for (i, a) in angles.iter().enumerate() {
            gates.push(GateSpec::fixed(kinds[i % 3], i % 3, *a));
            if i % 3 == 2 {
                gates.push(GateSpec::cnot(i % 3, 0));
            }
        }
        let s = CircuitSpec::new(3, vec![], gates).unwrap().execute(&[], &[]);
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_text_round_trip(letters in prop::collection::vec(pauli(), 1..8)) {
        let p = PauliString::new(letters);
        let back: PauliString = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    // T_l(cos t) = cos(l t)
    #[test]
    fn chebyshev_values_are_cosines(t in 0.0f64..PI) {
        let t_l = chebyshev_basis(t.cos(), 12, 0);
        for (l, v) in t_l.iter().enumerate() {
            prop_assert!((v - (l as f64 * t).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn budget_grows_with_points_and_precision(m in 2usize..5000, eps in 0.05f64..2.0) {
        let b = ShadowBudget { epsilon: eps, ..ShadowBudget::default() };
        prop_assert!(b.snapshots(2 * m, 1) >= b.snapshots(m, 1));
        let tighter = ShadowBudget { epsilon: eps / 2.0, ..b };
        prop_assert!(tighter.snapshots(m, 1) > b.snapshots(m, 1));
    }
}
