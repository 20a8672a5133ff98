//! Basis functions `g_l` weighting the Pauli strings of the flipped model.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Monomial,
    Chebyshev,
}

impl BasisKind {
    /// `d^order/du^order` of degrees `0..=l_max` at `u`.
    pub fn eval(self, u: f64, l_max: usize, order: usize) -> Vec<f64> {
        match self {
            BasisKind::Monomial => monomial_basis(u, l_max, order),
            BasisKind::Chebyshev => chebyshev_basis(u, l_max, order),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Monomial => "monomial",
            BasisKind::Chebyshev => "chebyshev",
        }
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monomial" => Ok(BasisKind::Monomial),
            "chebyshev" => Ok(BasisKind::Chebyshev),
            other => Err(Error::Config(format!("unknown basis `{other}`"))),
        }
    }
}

/// `T_l^{(order)}(u)` for `l = 0..=l_max`.
///
/// Values come from the three-term recurrence; derivatives use
/// `T_l^{(k)} = l · U_{l-1}^{(k-1)}` with
/// `U_{l+1}^{(j)} = 2u U_l^{(j)} + 2j U_l^{(j-1)} - U_{l-1}^{(j)}`.
pub fn chebyshev_basis(u: f64, l_max: usize, order: usize) -> Vec<f64> {
    if order == 0 {
        let mut t = vec![0.0; l_max + 1];
        t[0] = 1.0;
        if l_max >= 1 {
            t[1] = u;
        }
        for l in 1..l_max {
            t[l + 1] = 2.0 * u * t[l] - t[l - 1];
        }
        return t;
    }
    // u_derivs[j][l] = U_l^{(j)}(u) for l in 0..l_max
    let len = l_max.max(1);
    let mut u_derivs = vec![vec![0.0; len]; order];
    for j in 0..order {
        for l in 0..len {
            let prev = if l >= 1 { u_derivs[j][l - 1] } else { 0.0 };
            let prev2 = if l >= 2 { u_derivs[j][l - 2] } else { 0.0 };
            let lower = if j >= 1 && l >= 1 { u_derivs[j - 1][l - 1] } else { 0.0 };
            u_derivs[j][l] = if l == 0 {
                if j == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                2.0 * u * prev + 2.0 * j as f64 * lower - prev2
            };
        }
    }
    (0..=l_max)
        .map(|l| if l == 0 { 0.0 } else { l as f64 * u_derivs[order - 1][l - 1] })
        .collect()
}

/// `d^order/du^order u^l` for `l = 0..=l_max`.
pub fn monomial_basis(u: f64, l_max: usize, order: usize) -> Vec<f64> {
    (0..=l_max)
        .map(|l| {
            if l < order {
                0.0
            } else {
                let falling: f64 = ((l - order + 1)..=l).map(|k| k as f64).product();
                falling * u.powi((l - order) as i32)
            }
        })
        .collect()
}

/// The first `count` exponent multi-indices in graded lexicographic order:
/// `1, x, y, x², xy, y², …` for two variables, `1, u, u², …` for one.
pub fn basis_exponents(dim: usize, count: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    let mut degree = 0;
    while out.len() < count {
        graded(dim, degree, &mut Vec::new(), &mut out, count);
        degree += 1;
    }
    out
}

fn graded(dim: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, count: usize) {
    if out.len() >= count {
        return;
    }
    if prefix.len() + 1 == dim {
        let mut e = prefix.clone();
        e.push(remaining);
        out.push(e);
        return;
    }
    for a in (0..=remaining).rev() {
        prefix.push(a);
        graded(dim, remaining - a, prefix, out, count);
        prefix.pop();
    }
}
