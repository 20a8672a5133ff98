//! Dense Heisenberg-picture observables `M = V† O V`.
//!
//! When a fixed encoding state `|s⟩` is followed by a variational block `V`,
//! `⟨s|V† O V|s⟩ = Re Tr(M |s⟩⟨s|)`. Conjugating `O` once per parameter
//! setting lets every collocation point reuse it.

use num_complex::Complex64;

use crate::circuits::CircuitSpec;
use crate::error::{Error, Result};
use crate::pauli::{ObservableSum, PauliString};
use crate::statevector::StateVector;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseObservable {
    n_qubits: usize,
    /// Row-major, interleaved `[re, im]`.
    flat: Vec<f64>,
}

fn apply_pauli(amps: &[Complex64], p: &PauliString, coef: f64, out: &mut [Complex64]) {
    let (x, z) = p.masks();
    let phase = match p.y_count() % 4 {
        0 => Complex64::new(coef, 0.0),
        1 => Complex64::new(0.0, coef),
        2 => Complex64::new(-coef, 0.0),
        _ => Complex64::new(0.0, -coef),
    };
    for (b, a) in amps.iter().enumerate() {
        let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        out[b ^ x] += phase * sign * a;
    }
}

impl DenseObservable {
    /// `V† O V` for `V = circuit(values, shifts)`.
    pub fn conjugated(circuit: &CircuitSpec, values: &[f64], shifts: &[(usize, f64)], obs: &ObservableSum) -> Result<Self> {
        let n = circuit.n_qubits();
        if obs.n_qubits().is_some_and(|k| k > n) {
            return Err(Error::Config("observable wider than circuit".into()));
        }
        let dim = 1usize << n;
        let mut columns = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            amps[j] = Complex64::new(1.0, 0.0);
            let mut s = StateVector::from_amplitudes(amps)?;
            circuit.execute_on(&mut s, values, shifts);
            columns.push(s);
        }
        let mut o_cols = Vec::with_capacity(dim);
        for c in &columns {
            let mut out = vec![Complex64::new(0.0, 0.0); dim];
            for (coef, p) in obs.terms() {
                let padded = pad(p, n);
                apply_pauli(c.amplitudes(), &padded, *coef, &mut out);
            }
            o_cols.push(out);
        }
        let mut flat = vec![0.0; 2 * dim * dim];
        for i in 0..dim {
            let vi = columns[i].amplitudes();
            for j in 0..dim {
                let m: Complex64 = vi.iter().zip(&o_cols[j]).map(|(a, b)| a.conj() * b).sum();
                flat[2 * (i * dim + j)] = m.re;
                flat[2 * (i * dim + j) + 1] = m.im;
            }
        }
        Ok(Self { n_qubits: n, flat })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    /// `Re Tr(M R)` for a Hermitian `R` in the same flattened layout.
    ///
    /// Since `Tr(MR) = Σ_ij M_ij conj(R_ij)` for Hermitian `R`, the real
    /// part is a plain dot product.
    pub fn trace_with(&self, r: &[f64]) -> f64 {
        self.flat.iter().zip(r).map(|(a, b)| a * b).sum()
    }

    pub fn expect(&self, state: &StateVector) -> f64 {
        let dim = 1usize << self.n_qubits;
        let a = state.amplitudes();
        let mut acc = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let m = Complex64::new(self.flat[2 * (i * dim + j)], self.flat[2 * (i * dim + j) + 1]);
                acc += (a[i].conj() * m * a[j]).re;
            }
        }
        acc
    }
}

fn pad(p: &PauliString, n: usize) -> PauliString {
    if p.n_qubits() == n {
        return p.clone();
    }
    let mut letters = p.letters().to_vec();
    letters.resize(n, crate::pauli::Pauli::I);
    PauliString::new(letters)
}
