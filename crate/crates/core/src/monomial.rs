//! Multi-indices, holomorphic polynomials and the graded monomial basis.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Exponent vector of a monomial `z^α`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `self - other` as signed integers.
    pub fn signed_diff(&self, other: &MultiIndex) -> Vec<i64> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect()
    }

    /// `z^α` at a complex point.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (zi, &a) in z.iter().zip(&self.0) {
            if a > 0 {
                acc *= zi.powu(a);
            }
        }
        acc
    }

    /// `|z^α|² = Π s_i^{α_i}` in squared moduli.
    pub fn eval_sq_modulus(&self, s: &[f64]) -> f64 {
        self.0.iter().zip(s).map(|(&a, &si)| si.powi(a as i32)).product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// All exponents of total degree `≤ max_degree` in graded lexicographic
/// order: by total degree, then lexicographically ascending.
pub fn graded_basis(n: usize, max_degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        let mut level = Vec::new();
        compositions(n, d, &mut vec![0; n], 0, &mut level);
        level.sort();
        out.extend(level);
    }
    out
}

fn compositions(n: usize, remaining: u32, cur: &mut Vec<u32>, pos: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 == n {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for a in 0..=remaining {
        cur[pos] = a;
        compositions(n, remaining - a, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

/// A holomorphic polynomial `Σ c_α z^α`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HoloPoly {
    pub terms: Vec<(MultiIndex, Complex64)>,
}

impl HoloPoly {
    pub fn monomial(alpha: MultiIndex) -> Self {
        HoloPoly {
            terms: vec![(alpha, Complex64::new(1.0, 0.0))],
        }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        HoloPoly {
            terms: vec![(MultiIndex::zero(n), c)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, c)| *c == Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(a, c)| c * a.eval(z)).sum()
    }

    pub fn scale(&self, lambda: Complex64) -> HoloPoly {
        HoloPoly {
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * lambda)).collect(),
        }
    }

    pub fn add(&self, other: &HoloPoly) -> HoloPoly {
        let mut terms = self.terms.clone();
        for (a, c) in &other.terms {
            match terms.iter_mut().find(|(b, _)| b == a) {
                Some((_, d)) => *d += c,
                None => terms.push((a.clone(), *c)),
            }
        }
        HoloPoly { terms }
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|(a, _)| a.degree()).max().unwrap_or(0)
    }
}
