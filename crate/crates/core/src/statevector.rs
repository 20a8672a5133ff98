//! Dense statevector simulation.
//!
//! Qubit ordering is little-endian: qubit `j` is bit `j` of the basis index.
//! Rotations follow `R_P(θ) = exp(-iθP/2)`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{ObservableSum, Pauli, PauliString};

pub const MAX_QUBITS: usize = 12;

const IM_TOL: f64 = 1e-10;

pub type Mat2 = [[Complex64; 2]; 2];

/// A gate with every angle resolved to a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, theta: f64 },
    Ry { qubit: usize, theta: f64 },
    Rz { qubit: usize, theta: f64 },
    H { qubit: usize },
    Cnot { control: usize, target: usize },
    /// Arbitrary fixed single-qubit unitary.
    Unitary { qubit: usize, matrix: Mat2 },
}

impl Gate {
    fn max_qubit(&self) -> usize {
        match *self {
            Gate::Rx { qubit, .. }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. }
            | Gate::H { qubit }
            | Gate::Unitary { qubit, .. } => qubit,
            Gate::Cnot { control, target } => control.max(target),
        }
    }
}

/// Measurement basis letter for one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn as_pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
            Basis::Z => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        self.as_pauli().as_char()
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'X' => Ok(Basis::X),
            'Y' => Ok(Basis::Y),
            'Z' => Ok(Basis::Z),
            other => Err(Error::Parse(format!("invalid basis letter `{other}`"))),
        }
    }

    /// Unitary taking the `+1` eigenvector of this basis to `|0⟩`.
    pub fn rotation(self) -> Option<Mat2> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match self {
            Basis::Z => None,
            Basis::X => Some([[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]),
            // H · S†
            Basis::Y => Some([[c(h, 0.0), c(0.0, -h)], [c(h, 0.0), c(0.0, h)]]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Config(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits: n, amps })
    }

    /// Wraps raw amplitudes; the caller is responsible for normalisation.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Config(format!("amplitude count {len} is not a power of two")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!("qubit count {n_qubits} exceeds {MAX_QUBITS}")));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        let q = gate.max_qubit();
        if q >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits: self.n_qubits });
        }
        if let Gate::Cnot { control, target } = *gate {
            if control == target {
                return Err(Error::Config("CNOT control equals target".into()));
            }
        }
        self.apply_unchecked(gate);
        Ok(())
    }

    /// Gate application without range checks; callers validate once up front.
    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        match *gate {
            Gate::Rx { qubit, theta } => {
                let (s, c) = (theta / 2.0).sin_cos();
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ];
                self.apply_1q(qubit, &m);
            }
            Gate::Ry { qubit, theta } => {
                let (s, c) = (theta / 2.0).sin_cos();
                let m = [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ];
                self.apply_1q(qubit, &m);
            }
            Gate::Rz { qubit, theta } => {
                let (s, c) = (theta / 2.0).sin_cos();
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                let bit = 1 << qubit;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if i & bit == 0 { lo } else { hi };
                }
            }
            Gate::H { qubit } => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                self.apply_1q(qubit, &[[h, h], [h, -h]]);
            }
            Gate::Cnot { control, target } => {
                let cbit = 1 << control;
                let tbit = 1 << target;
                for i in 0..self.amps.len() {
                    if i & cbit != 0 && i & tbit == 0 {
                        self.amps.swap(i, i | tbit);
                    }
                }
            }
            Gate::Unitary { qubit, ref matrix } => self.apply_1q(qubit, matrix),
        }
    }

    fn apply_1q(&mut self, qubit: usize, m: &Mat2) {
        let stride = 1usize << qubit;
        let dim = self.amps.len();
        let mut block = 0;
        while block < dim {
            for i in block..block + stride {
                let a0 = self.amps[i];
                let a1 = self.amps[i + stride];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
            block += 2 * stride;
        }
    }

    /// `⟨ψ|P|ψ⟩` as a complex number (its imaginary part vanishes for valid states).
    fn pauli_expectation_complex(&self, p: &PauliString) -> Complex64 {
        let (x, z) = p.masks();
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, amp) in self.amps.iter().enumerate() {
            let term = self.amps[b ^ x].conj() * amp;
            if (b & z).count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        // P = i^{n_y} X^x Z^z
        match p.y_count() % 4 {
            0 => acc,
            1 => acc * Complex64::new(0.0, 1.0),
            2 => -acc,
            _ => acc * Complex64::new(0.0, -1.0),
        }
    }

    pub fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() > self.n_qubits {
            return Err(Error::QubitOutOfRange { index: p.n_qubits() - 1, n_qubits: self.n_qubits });
        }
        let padded;
        let p = if p.n_qubits() < self.n_qubits {
            let mut letters = p.letters().to_vec();
            letters.resize(self.n_qubits, Pauli::I);
            padded = PauliString::new(letters);
            &padded
        } else {
            p
        };
        let v = self.pauli_expectation_complex(p);
        if v.im.abs() > IM_TOL {
            return Err(Error::Numerical(format!(
                "expectation of {p} has imaginary part {:e}",
                v.im
            )));
        }
        Ok(v.re)
    }

    /// `Σ_j c_j ⟨ψ|P_j|ψ⟩`.
    pub fn expectation(&self, obs: &ObservableSum) -> Result<f64> {
        obs.terms().iter().try_fold(0.0, |acc, (c, p)| Ok(acc + c * self.pauli_expectation(p)?))
    }

    /// Samples one outcome bit per qubit after rotating each qubit into its
    /// basis. Bit `0` corresponds to the `+1` eigenvalue.
    pub fn measure_in_bases<R: Rng + ?Sized>(&self, bases: &[Basis], rng: &mut R) -> Result<Vec<u8>> {
        let probs = self.rotated_probabilities(bases)?;
        let index = sample_index(&probs, rng);
        Ok((0..self.n_qubits).map(|j| ((index >> j) & 1) as u8).collect())
    }

    /// Born probabilities of the state rotated into the product basis.
    pub fn rotated_probabilities(&self, bases: &[Basis]) -> Result<Vec<f64>> {
        if bases.len() != self.n_qubits {
            return Err(Error::Config(format!(
                "{} basis letters for {} qubits",
                bases.len(),
                self.n_qubits
            )));
        }
        let mut rotated = self.clone();
        for (q, b) in bases.iter().enumerate() {
            if let Some(m) = b.rotation() {
                rotated.apply_1q(q, &m);
            }
        }
        Ok(rotated.probabilities())
    }
}

/// Inverse-CDF draw from a discrete distribution.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut r = rng.random::<f64>() * total;
    for (i, p) in probs.iter().enumerate() {
        if r < *p {
            return i;
        }
        r -= p;
    }
    // Rounding can leave r marginally above the last bucket.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn zero_state_shapes() {
        assert_eq!(StateVector::zero_state(1).unwrap().amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s2 = StateVector::zero_state(2).unwrap();
        assert_eq!(s2.amplitudes().len(), 4);
        assert_eq!(s2.amplitudes()[0], c(1.0, 0.0));
        let s4 = StateVector::zero_state(4).unwrap();
        assert_eq!(s4.amplitudes().len(), 16);
        assert!((s4.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(StateVector::zero_state(0).is_err());
        assert!(StateVector::zero_state(13).is_err());
    }

    #[test]
    fn rx_pi_is_minus_i_x() {
        let mut s = StateVector::zero_state(1).unwrap();
        s.apply_gate(&Gate::Rx { qubit: 0, theta: PI }).unwrap();
        assert!(close(s.amplitudes()[0], c(0.0, 0.0)));
        assert!(close(s.amplitudes()[1], c(0.0, -1.0)));
    }

    #[test]
    fn cnot_truth_table_little_endian() {
        // |10⟩ in ket notation q0 q1 means qubit 0 set: index 1.
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[1] = c(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply_gate(&Gate::Cnot { control: 0, target: 1 }).unwrap();
        assert!(close(s.amplitudes()[3], c(1.0, 0.0)));
        assert!(s.apply_gate(&Gate::Cnot { control: 0, target: 2 }).is_err());
        assert!(s.apply_gate(&Gate::Cnot { control: 1, target: 1 }).is_err());
    }

    #[test]
    fn rotation_inverse_restores_state() {
        let mut s = StateVector::zero_state(2).unwrap();
        s.apply_gate(&Gate::H { qubit: 1 }).unwrap();
        let before = s.clone();
        s.apply_gate(&Gate::Rx { qubit: 0, theta: 0.731 }).unwrap();
        s.apply_gate(&Gate::Rx { qubit: 0, theta: -0.731 }).unwrap();
        for (a, b) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!(close(*a, *b));
        }
    }

    #[test]
    fn expectation_examples() {
        let s = StateVector::zero_state(4).unwrap();
        assert!((s.expectation(&ObservableSum::total_z(4)).unwrap() - 4.0).abs() < 1e-15);
        let one = StateVector::zero_state(1).unwrap();
        let x0 = ObservableSum::single("X".parse().unwrap());
        assert!(one.expectation(&x0).unwrap().abs() < 1e-15);
        let mut r = one.clone();
        r.apply_gate(&Gate::Rx { qubit: 0, theta: PI / 2.0 }).unwrap();
        let y0 = ObservableSum::single("Y".parse().unwrap());
        assert!((r.expectation(&y0).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn y_expectation_phase() {
        // RY(π/2)|0⟩ = |+⟩; RX(-π/2)|0⟩ is the +Y eigenstate.
        let mut s = StateVector::zero_state(1).unwrap();
        s.apply_gate(&Gate::Rx { qubit: 0, theta: -PI / 2.0 }).unwrap();
        assert!((s.pauli_expectation(&"Y".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
        let mut t = StateVector::zero_state(1).unwrap();
        t.apply_gate(&Gate::Ry { qubit: 0, theta: PI / 2.0 }).unwrap();
        assert!((t.pauli_expectation(&"X".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_eigenstate_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = StateVector::zero_state(4).unwrap();
        for _ in 0..100 {
            assert_eq!(s.measure_in_bases(&[Basis::Z; 4], &mut rng).unwrap(), vec![0, 0, 0, 0]);
        }
        let mut plus = StateVector::zero_state(1).unwrap();
        plus.apply_gate(&Gate::H { qubit: 0 }).unwrap();
        for _ in 0..100 {
            assert_eq!(plus.measure_in_bases(&[Basis::X], &mut rng).unwrap(), vec![0]);
        }
    }

    #[test]
    fn uniform_outcomes_for_x_on_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = StateVector::zero_state(1).unwrap();
        let ones: usize = (0..10_000)
            .map(|_| s.measure_in_bases(&[Basis::X], &mut rng).unwrap()[0] as usize)
            .sum();
        let freq = ones as f64 / 10_000.0;
        assert!((freq - 0.5).abs() < 0.02, "freq {freq}");
    }

    #[test]
    fn y_basis_rotation_maps_plus_i_to_zero() {
        let mut s = StateVector::zero_state(1).unwrap();
        s.apply_gate(&Gate::Rx { qubit: 0, theta: -PI / 2.0 }).unwrap();
        let p = s.rotated_probabilities(&[Basis::Y]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
    }
}
