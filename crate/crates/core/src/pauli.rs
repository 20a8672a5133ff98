//! Pauli strings, k-local observable sets and weighted observable sums.
//!
//! Strings are written with the leftmost character acting on qubit 0, so
//! `"XIZY"` is `X_0 Z_2 Y_3`. The canonical order is lexicographic with
//! `I < X < Y < Z` and qubit 0 as the most significant position; every
//! enumeration in this module returns strings in that order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register for which the full `4^n` set may be enumerated.
pub const MAX_FULL_ENUMERATION: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::Parse(format!("invalid Pauli letter `{other}`"))),
        }
    }
}

/// A tensor product of single-qubit Paulis, one letter per qubit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: vec![Pauli::I; n] }
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Result<Self> {
        if qubit >= n {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits: n });
        }
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = letter;
        Ok(Self { letters })
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Bit masks `(x, z)` in little-endian qubit order: bit `j` of `x` is set
    /// for X or Y on qubit `j`, bit `j` of `z` for Z or Y.
    pub fn masks(&self) -> (usize, usize) {
        let mut x = 0usize;
        let mut z = 0usize;
        for (j, p) in self.letters.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x |= 1 << j,
                Pauli::Y => {
                    x |= 1 << j;
                    z |= 1 << j;
                }
                Pauli::Z => z |= 1 << j,
            }
        }
        (x, z)
    }

    pub fn y_count(&self) -> usize {
        self.letters.iter().filter(|&&p| p == Pauli::Y).count()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let letters = s.chars().map(Pauli::from_char).collect::<Result<Vec<_>>>()?;
        Ok(Self { letters })
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All strings on `n` qubits with weight at most `k`, identity included,
/// in canonical order.
pub fn enumerate_k_local(n: usize, k: usize) -> Result<Vec<PauliString>> {
    if n == 0 {
        return Err(Error::Config("Pauli enumeration needs at least one qubit".into()));
    }
    if k > n {
        return Err(Error::Config(format!("locality {k} exceeds qubit count {n}")));
    }
    if k > MAX_FULL_ENUMERATION && n > MAX_FULL_ENUMERATION {
        return Err(Error::Config(format!(
            "locality {k} on {n} qubits is too large to enumerate"
        )));
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    extend_strings(n, k, &mut prefix, &mut out);
    Ok(out)
}

// Depth-first over qubits in I<X<Y<Z order yields canonical order directly.
fn extend_strings(n: usize, budget: usize, prefix: &mut Vec<Pauli>, out: &mut Vec<PauliString>) {
    if prefix.len() == n {
        out.push(PauliString::new(prefix.clone()));
        return;
    }
    for p in Pauli::ALL {
        let cost = usize::from(p != Pauli::I);
        if cost > budget {
            continue;
        }
        prefix.push(p);
        extend_strings(n, budget - cost, prefix, out);
        prefix.pop();
    }
}

/// The full `4^n` Pauli basis in canonical order.
pub fn all_strings(n: usize) -> Result<Vec<PauliString>> {
    if n > MAX_FULL_ENUMERATION {
        return Err(Error::Config(format!(
            "refusing to enumerate 4^{n} strings (limit n = {MAX_FULL_ENUMERATION})"
        )));
    }
    enumerate_k_local(n, n)
}

/// Named observable sets used by the trainable-observable model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableSet {
    Loc1,
    Loc2,
    All,
}

impl ObservableSet {
    pub fn strings(self, n: usize) -> Result<Vec<PauliString>> {
        match self {
            ObservableSet::Loc1 => enumerate_k_local(n, 1.min(n)),
            ObservableSet::Loc2 => enumerate_k_local(n, 2.min(n)),
            ObservableSet::All => all_strings(n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ObservableSet::Loc1 => "loc1",
            ObservableSet::Loc2 => "loc2",
            ObservableSet::All => "all",
        }
    }
}

impl FromStr for ObservableSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loc1" => Ok(ObservableSet::Loc1),
            "loc2" => Ok(ObservableSet::Loc2),
            "all" => Ok(ObservableSet::All),
            other => Err(Error::Config(format!("unknown observable set `{other}`"))),
        }
    }
}

/// `Σ_j c_j P_j` with unique strings, zero coefficients dropped, terms kept
/// in canonical string order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservableSum {
    terms: Vec<(f64, PauliString)>,
}

impl ObservableSum {
    pub fn new<I: IntoIterator<Item = (f64, PauliString)>>(terms: I) -> Result<Self> {
        let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();
        let mut n = None;
        for (c, p) in terms {
            match n {
                None => n = Some(p.n_qubits()),
                Some(n) if n != p.n_qubits() => {
                    return Err(Error::Config(format!(
                        "mixed register sizes in observable ({n} vs {})",
                        p.n_qubits()
                    )))
                }
                _ => {}
            }
            *merged.entry(p).or_insert(0.0) += c;
        }
        let terms = merged.into_iter().filter(|(_, c)| *c != 0.0).map(|(p, c)| (c, p)).collect();
        Ok(Self { terms })
    }

    pub fn single(p: PauliString) -> Self {
        Self { terms: vec![(1.0, p)] }
    }

    /// `Σ_j Z_j`, the fixed cost operator of the original protocol.
    pub fn total_z(n: usize) -> Self {
        let terms = (0..n).map(|j| {
            let mut letters = vec![Pauli::I; n];
            letters[j] = Pauli::Z;
            (1.0, PauliString::new(letters))
        });
        Self::new(terms).expect("uniform register size")
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_qubits(&self) -> Option<usize> {
        self.terms.first().map(|(_, p)| p.n_qubits())
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::new(self.terms.iter().map(|(c, p)| (a * c, p.clone()))).expect("same register")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::new(self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn max_weight(&self) -> usize {
        self.terms.iter().map(|(_, p)| p.weight()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn k_local_counts_match_closed_forms() {
        for n in 1..=6 {
            assert_eq!(enumerate_k_local(n, 1).unwrap().len(), 3 * n + 1);
            if n >= 2 {
                assert_eq!(enumerate_k_local(n, 2).unwrap().len(), 9 * n * (n - 1) / 2 + 3 * n + 1);
            }
        }
        assert_eq!(enumerate_k_local(4, 1).unwrap().len(), 13);
        assert_eq!(enumerate_k_local(4, 2).unwrap().len(), 67);
        assert_eq!(enumerate_k_local(4, 4).unwrap().len(), 256);
        assert_eq!(all_strings(4).unwrap().len(), 256);
    }

    #[test]
    fn exact_weight_counts_are_binomial() {
        let n = 5;
        let set = enumerate_k_local(n, 3).unwrap();
        for w in 0..=3 {
            let count = set.iter().filter(|p| p.weight() == w).count();
            assert_eq!(count, binom(n, w) * 3usize.pow(w as u32));
        }
        assert!(set.iter().all(|p| p.weight() <= 3));
    }

    #[test]
    fn canonical_order_single_qubit() {
        let s: Vec<String> = all_strings(1).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(s, ["I", "X", "Y", "Z"]);
        let two: Vec<String> = all_strings(2).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(two.len(), 16);
        assert_eq!(&two[..5], ["II", "IX", "IY", "IZ", "XI"]);
    }

    #[test]
    fn enumeration_is_sorted_and_matches_full_set() {
        for n in 1..=4 {
            let full = all_strings(n).unwrap();
            let mut sorted = full.clone();
            sorted.sort();
            assert_eq!(full, sorted);
            assert_eq!(enumerate_k_local(n, n).unwrap(), full);
        }
        let loc2 = enumerate_k_local(4, 2).unwrap();
        assert!(loc2.windows(2).all(|w| w[0] < w[1]));
        assert!(loc2[0].is_identity());
    }

    #[test]
    fn errors_on_bad_arguments() {
        assert!(enumerate_k_local(3, 4).is_err());
        assert!(all_strings(7).is_err());
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn text_encoding_leftmost_is_qubit_zero() {
        let p: PauliString = "XIZY".parse().unwrap();
        assert_eq!(p.letter(0), Pauli::X);
        assert_eq!(p.letter(3), Pauli::Y);
        assert_eq!(p.to_string(), "XIZY");
        let (x, z) = p.masks();
        assert_eq!(x, 0b1001);
        assert_eq!(z, 0b1100);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "\"XIZY\"");
    }

    #[test]
    fn observable_sum_merges_and_drops_zeros() {
        let z0: PauliString = "ZI".parse().unwrap();
        let x1: PauliString = "IX".parse().unwrap();
        let obs = ObservableSum::new([(1.0, z0.clone()), (0.5, x1.clone()), (-1.0, z0)]).unwrap();
        assert_eq!(obs.terms(), &[(0.5, x1)]);
        assert_eq!(ObservableSum::total_z(4).terms().len(), 4);
    }
}
