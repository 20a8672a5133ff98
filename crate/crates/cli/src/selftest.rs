//! The invariant suite behind `dqc selftest`.

use std::fmt;

use dqc_core::circuits::{random_basis_unitary, CircuitSpec, GateKind, GateSpec, ParamDecl, ParamRole};
use dqc_core::differentiation::{d_dparam, finite_difference};
use dqc_core::models::{BasisKind, EvalMode};
use dqc_core::pauli::{all_strings, enumerate_k_local, ObservableSet, ObservableSum, Pauli, PauliString};
use dqc_core::problems::{burgers_closed_form, burgers_constants, burgers_poles, scan_poles, ProblemKind, BURGERS_NU};
use dqc_core::shadows::{collect, ShadowBudget};
use dqc_core::training::{build_models, estimate_cost, train, EvalCounter, ModelSpec, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// A random circuit on at most four qubits over parameters `a`, `b`, `c`
/// (each possibly repeated with its own scale), a random Pauli sum and
/// random parameter values.
pub fn random_triple<R: Rng>(rng: &mut R) -> (CircuitSpec, ObservableSum, Vec<f64>) {
    let n = rng.random_range(1..=4);
    let ids = ["a", "b", "c"];
    let params = ids.iter().map(|id| ParamDecl { id: id.to_string(), role: ParamRole::Variational }).collect();
    let kinds = [GateKind::Rx, GateKind::Ry, GateKind::Rz];
    let mut gates = Vec::new();
    for layer in 0..rng.random_range(2..=4) {
        for q in 0..n {
            let kind = kinds[rng.random_range(0..3)];
            if rng.random_bool(0.7) {
                let scale = [1.0, 0.5, 2.0, -1.5][rng.random_range(0..4)];
                gates.push(GateSpec::param(kind, q, ids[rng.random_range(0..3)], scale));
            } else {
                gates.push(GateSpec::fixed(kind, q, rng.random_range(-3.0..3.0)));
            }
        }
        for q in 0..n.saturating_sub(1) {
            if (q + layer) % 2 == 0 {
                gates.push(GateSpec::cnot(q, q + 1));
            }
        }
    }
    let circuit = CircuitSpec::new(n, params, gates).expect("valid random circuit");
    let terms = (0..rng.random_range(1..=3)).map(|_| {
        let letters = (0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect();
        (rng.random_range(-1.0..1.0), PauliString::new(letters))
    });
    let obs = ObservableSum::new(terms).unwrap_or_else(|_| ObservableSum::total_z(n));
    let values = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
    (circuit, obs, values)
}

/// Worst absolute PSR-vs-FD error over `n` random triples: first order
/// against a central difference, second order against a five-point
/// stencil.
pub fn psr_vs_fd(n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let (circuit, obs, values) = random_triple(&mut rng);
        let p = rng.random_range(0..3);
        let f = |t: f64| {
            let mut v = values.clone();
            v[p] = t;
            circuit.execute(&v, &[]).expectation(&obs).expect("matching qubit count")
        };
        let d1 = d_dparam(&circuit, &values, &obs, p, 1).expect("rotations only");
        let d2 = d_dparam(&circuit, &values, &obs, p, 2).expect("rotations only");
        e1 = e1.max((d1 - finite_difference::first(f, values[p], 1e-5)).abs());
        e2 = e2.max((d2 - finite_difference::second5(f, values[p], 1e-3)).abs());
    }
    (e1, e2)
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

pub fn run_all(triples: usize, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();

    let (e1, e2) = psr_vs_fd(triples, seed);
    out.push(check("psr-vs-fd", e1 < 1e-6 && e2 < 1e-4, format!("{triples} circuits, max error {e1:.2e} (first), {e2:.2e} (second)")));

    let counts = [
        enumerate_k_local(4, 1).map(|v| v.len()),
        enumerate_k_local(4, 2).map(|v| v.len()),
        all_strings(4).map(|v| v.len()),
    ];
    let counts: Vec<usize> = counts.into_iter().map(|c| c.unwrap_or(0)).collect();
    let n = 4;
    let expected = [3 * n + 1, 9 * n * (n - 1) / 2 + 3 * n + 1, 4usize.pow(n as u32)];
    out.push(check("pauli-counts", counts == expected, format!("n=4: {counts:?}, expected {expected:?}")));

    let mut worst = 0.0f64;
    for kind in [ProblemKind::DampedOsc, ProblemKind::Coupled, ProblemKind::Twod] {
        let p = kind.build();
        for x in &p.grid().points {
            let jets: Vec<Vec<f64>> = (0..p.n_functions()).map(|f| p.analytic_jet(x, f).unwrap_or_default()).collect();
            for r in p.residuals(x, &jets) {
                worst = worst.max(r.value.abs());
            }
        }
    }
    out.push(check("analytic-residuals", worst < 1e-9, format!("max |residual| {worst:.2e} over damped_osc, coupled, twod grids")));

    let (c, k) = burgers_constants();
    let identity = (c - 2.0 * BURGERS_NU * k).abs();
    let burgers = ProblemKind::Burgers.build();
    let mut res = 0.0f64;
    for i in 0..=40 {
        let x = 0.4 + 0.6 * i as f64 / 40.0;
        let jet = burgers.analytic_jet(&[x], 0).unwrap_or_default();
        res = res.max(burgers.residuals(&[x], &[jet])[0].value.abs());
    }
    out.push(check("burgers-closed-form", identity < 1e-12 && res < 1e-8, format!("|c - 2nu k| = {identity:.1e}, max residual on [0.4, 1] {res:.1e}")));

    let poles = burgers_poles(0.0, 1.0);
    let scanned = scan_poles(burgers_closed_form, 0.0, 1.0, 1000, 10.0);
    let agree = poles.len() == 1 && scanned.len() == 1 && (poles[0] - scanned[0]).abs() < 1e-9;
    out.push(check("burgers-pole", agree, format!("closed form has a pole at x = {:.6} (scan found {scanned:.6?})", poles.first().copied().unwrap_or(f64::NAN))));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5);
    let mut bad = 0;
    let mut seen = std::collections::BTreeSet::new();
    for s in 0..5 {
        let state = random_basis_unitary(4, seed + s).expect("valid").execute(&[], &[]);
        let shadow = collect(&state, 200, &mut rng).expect("snapshots");
        for _ in 0..20 {
            let mut letters = vec![Pauli::I; 4];
            for _ in 0..rng.random_range(1..=2) {
                letters[rng.random_range(0..4)] = Pauli::ALL[rng.random_range(1..4)];
            }
            let p = PauliString::new(letters);
            let w = p.weight() as i32;
            for snap in shadow.snapshots() {
                let v = snap.value(&p);
                seen.insert((v as i64, w));
                if !(v == 0.0 || (v.abs() - 3f64.powi(w)).abs() < 1e-12) {
                    bad += 1;
                }
            }
        }
    }
    out.push(check("shadow-snapshot-values", bad == 0, format!("{bad} single-snapshot values outside {{0, ±3^w}}; seen {seen:?}")));

    let problem = ProblemKind::DampedOsc.build_with_counts(&[2]).expect("2-point grid");
    let specs = [
        ModelSpec::Original { n_qubits: 4, depth: 1 },
        ModelSpec::To { n_qubits: 4, observables: ObservableSet::Loc2, basis_seed: seed },
        ModelSpec::Fs { n_qubits: 4, depth: 1, basis: BasisKind::Chebyshev, mode: EvalMode::Shadow, budget: ShadowBudget::default() },
    ];
    let mut rows = Vec::new();
    let mut ok = true;
    for spec in specs {
        let counter = EvalCounter::new();
        let cfg = TrainConfig { early_stop: None, ..TrainConfig::new(2) };
        let counted = build_models(&problem, &spec, seed, &counter)
            .and_then(|mut b| train(&problem, &mut b.models, &cfg, &counter))
            .map(|_| counter.total());
        let predicted = estimate_cost(&problem, &spec, 2).map(|e| e.total);
        let same = matches!((&counted, &predicted), (Ok(a), Ok(b)) if a == b);
        ok &= same;
        rows.push(format!("{} {:?}/{:?}", spec.label(), counted.ok(), predicted.ok()));
    }
    out.push(check("counter-closed-form", ok, format!("2-point grid, 2 epochs, counted/predicted: {}", rows.join(", "))));
    out
}
