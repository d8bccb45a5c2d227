//! Flat coordinates for symmetric matrices.
//!
//! Layout: `q_11, …, q_nn` followed by the strict upper triangle row by row
//! (`q_12, q_13, …, q_{n-1,n}`). No factor-two weighting is applied; the
//! functionals below carry the factor instead.

use serde::{Deserialize, Serialize};

use super::{ExactMatrix, ExactScalar};
use crate::error::{Error, Result};

pub const fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Flat index of entry `(i, j)`.
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        return i;
    }
    // offset of row i in the strict upper triangle
    let before: usize = (0..i).map(|r| n - 1 - r).sum();
    n + before + (j - i - 1)
}

/// Inverse of [`sym_index`].
pub fn sym_entry(n: usize, idx: usize) -> (usize, usize) {
    if idx < n {
        return (idx, idx);
    }
    let mut k = idx - n;
    for i in 0..n {
        let len = n - 1 - i;
        if k < len {
            return (i, i + 1 + k);
        }
        k -= len;
    }
    panic!("index {idx} out of range for n = {n}")
}

/// Coefficients `c` with `⟨c, coords(Q)⟩ = Q[v]`.
pub fn quadratic_functional(v: &[i64]) -> Vec<i64> {
    bilinear_functional(v, v)
}

/// Coefficients `c` with `⟨c, coords(Q)⟩ = uᵀ Q v`.
pub fn bilinear_functional(u: &[i64], v: &[i64]) -> Vec<i64> {
    let n = u.len();
    let mut c = vec![0i64; sym_dim(n)];
    for i in 0..n {
        c[i] = u[i] * v[i];
        for j in (i + 1)..n {
            c[sym_index(n, i, j)] = u[i] * v[j] + u[j] * v[i];
        }
    }
    c
}

/// A symmetric matrix as a flat coordinate vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymCoordinates {
    pub n: usize,
    pub coords: Vec<ExactScalar>,
}

impl SymCoordinates {
    pub fn new(n: usize, coords: Vec<ExactScalar>) -> Result<Self> {
        if coords.len() != sym_dim(n) {
            return Err(Error::Dimension(format!(
                "expected {} symmetric coordinates, got {}",
                sym_dim(n),
                coords.len()
            )));
        }
        Ok(SymCoordinates { n, coords })
    }

    pub fn from_i64(n: usize, coords: &[i64]) -> Result<Self> {
        Self::new(n, coords.iter().map(|&x| ExactScalar::from_int(x)).collect())
    }

    pub fn from_matrix(a: &ExactMatrix) -> Result<Self> {
        a.check_symmetric()?;
        let n = a.rows();
        let coords = (0..sym_dim(n))
            .map(|k| {
                let (i, j) = sym_entry(n, k);
                a[(i, j)].clone()
            })
            .collect();
        Ok(SymCoordinates { n, coords })
    }

    pub fn to_matrix(&self) -> ExactMatrix {
        let n = self.n;
        let mut m = ExactMatrix::zeros(n, n);
        for (k, c) in self.coords.iter().enumerate() {
            let (i, j) = sym_entry(n, k);
            m[(i, j)] = c.clone();
            m[(j, i)] = c.clone();
        }
        m
    }

    /// Evaluates a coefficient vector against these coordinates.
    pub fn apply(&self, functional: &[i64]) -> ExactScalar {
        self.coords
            .iter()
            .zip(functional)
            .filter(|(_, &f)| f != 0)
            .map(|(c, &f)| c * &ExactScalar::from_int(f))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn index_layout() {
        assert_eq!(sym_index(3, 0, 0), 0);
        assert_eq!(sym_index(3, 2, 2), 2);
        assert_eq!(sym_index(3, 0, 1), 3);
        assert_eq!(sym_index(3, 0, 2), 4);
        assert_eq!(sym_index(3, 2, 1), 5);
        for n in 1..7 {
            for k in 0..sym_dim(n) {
                let (i, j) = sym_entry(n, k);
                assert_eq!(sym_index(n, i, j), k);
            }
        }
    }

    #[test]
    fn functional_matches_form() {
        let a = ExactMatrix::from_i64(&[[2, -1, 0], [-1, 3, 1], [0, 1, 5]]);
        let s = SymCoordinates::from_matrix(&a).unwrap();
        let v = [1, -2, 3];
        assert_eq!(s.apply(&quadratic_functional(&v)), a.evaluate_form_i64(&v));
    }

    proptest! {
        #[test]
        fn round_trip(n in 1usize..6, seed in prop::collection::vec(-50i64..50, 21)) {
            let s = SymCoordinates::from_i64(n, &seed[..sym_dim(n)]).unwrap();
            prop_assert_eq!(SymCoordinates::from_matrix(&s.to_matrix()).unwrap(), s);
        }
    }
}
