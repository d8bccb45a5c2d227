use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::int::primitive_from_rational;
use super::ExactScalar;
use crate::error::{Error, Result};

/// Dense matrix of exact rationals, row-major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactScalar>,
}

/// `A = L·D·Lᵀ` with `L` unit lower triangular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ldlt {
    pub l: ExactMatrix,
    pub d: Vec<ExactScalar>,
}

/// First zero pivot met by [`ExactMatrix::ldlt_decompose`] (zero-based index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZeroPivot {
    pub index: usize,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            data: vec![ExactScalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ExactScalar::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ExactScalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(ExactMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor from integer rows; panics on ragged input.
    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<ExactScalar>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| ExactScalar::from_int(x)).collect())
            .collect();
        Self::from_rows(rows).expect("ragged integer rows")
    }

    pub fn diagonal(entries: &[ExactScalar]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// `v vᵀ` for an integer vector.
    pub fn outer_i64(v: &[i64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = ExactScalar::from_int(v[i] * v[j]);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[ExactScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<ExactScalar>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &ExactScalar) -> Self {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[ExactScalar]) -> Vec<ExactScalar> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(ExactScalar::is_zero)
    }

    /// Ok when square and symmetric, otherwise the first offending entry.
    pub fn check_symmetric(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self[(i, j)] != self[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.check_symmetric().is_ok()
    }

    /// Exact `L·D·Lᵀ` without pivoting. Fails at the first zero pivot.
    pub fn ldlt_decompose(&self) -> std::result::Result<Ldlt, ZeroPivot> {
        debug_assert!(self.is_symmetric());
        let n = self.rows;
        let mut l = ExactMatrix::identity(n);
        let mut d: Vec<ExactScalar> = Vec::with_capacity(n);
        for j in 0..n {
            let mut dj = self[(j, j)].clone();
            for k in 0..j {
                let ljk = &l[(j, k)];
                if !ljk.is_zero() {
                    dj -= &(&(ljk * ljk) * &d[k]);
                }
            }
            if dj.is_zero() {
                return Err(ZeroPivot { index: j });
            }
            for i in (j + 1)..n {
                let mut s = self[(i, j)].clone();
                for k in 0..j {
                    let (lik, ljk) = (&l[(i, k)], &l[(j, k)]);
                    if !lik.is_zero() && !ljk.is_zero() {
                        s -= &(&(lik * ljk) * &d[k]);
                    }
                }
                l[(i, j)] = &s / &dj;
            }
            d.push(dj);
        }
        Ok(Ldlt { l, d })
    }

    /// Ok when positive definite; otherwise the first pivot that is not positive.
    pub fn check_positive_definite(&self) -> Result<()> {
        self.check_symmetric()?;
        let n = self.rows;
        // Same recurrence as ldlt_decompose but stops at the first non-positive pivot.
        let mut l = ExactMatrix::identity(n);
        let mut d: Vec<ExactScalar> = Vec::with_capacity(n);
        for j in 0..n {
            let mut dj = self[(j, j)].clone();
            for k in 0..j {
                let ljk = &l[(j, k)];
                if !ljk.is_zero() {
                    dj -= &(&(ljk * ljk) * &d[k]);
                }
            }
            if !dj.is_positive() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: dj });
            }
            for i in (j + 1)..n {
                let mut s = self[(i, j)].clone();
                for k in 0..j {
                    let (lik, ljk) = (&l[(i, k)], &l[(j, k)]);
                    if !lik.is_zero() && !ljk.is_zero() {
                        s -= &(&(lik * ljk) * &d[k]);
                    }
                }
                l[(i, j)] = &s / &dj;
            }
            d.push(dj);
        }
        Ok(())
    }

    pub fn is_positive_definite(&self) -> bool {
        self.check_positive_definite().is_ok()
    }

    /// `xᵀ A x`.
    pub fn evaluate_form(&self, x: &[ExactScalar]) -> ExactScalar {
        assert_eq!(x.len(), self.rows);
        let mut acc = ExactScalar::zero();
        for i in 0..self.rows {
            if x[i].is_zero() {
                continue;
            }
            let mut s = ExactScalar::zero();
            for j in 0..self.cols {
                if !x[j].is_zero() {
                    s += &(&self[(i, j)] * &x[j]);
                }
            }
            acc += &(&x[i] * &s);
        }
        acc
    }

    pub fn evaluate_form_i64(&self, x: &[i64]) -> ExactScalar {
        let xs: Vec<ExactScalar> = x.iter().map(|&v| ExactScalar::from_int(v)).collect();
        self.evaluate_form(&xs)
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(p, r);
            let inv = m[(r, c)].recip().expect("nonzero pivot");
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    if m[(r, j)].is_zero() {
                        continue;
                    }
                    let v = &m[(i, j)] - &(&f * &m[(r, j)]);
                    m[(i, j)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Exact rank and a kernel basis of primitive integer vectors (first nonzero entry positive).
    pub fn rank_and_kernel(&self) -> (usize, Vec<Vec<ExactScalar>>) {
        let (r, pivots) = self.rref();
        let mut kernel = Vec::new();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![ExactScalar::zero(); self.cols];
            v[free] = ExactScalar::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -&r[(row, free)];
            }
            let mut prim = primitive_from_rational(&v);
            if prim.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
                prim.iter_mut().for_each(|x| *x = -&*x);
            }
            kernel.push(prim.into_iter().map(ExactScalar::from_bigint).collect());
        }
        (pivots.len(), kernel)
    }

    pub fn determinant(&self) -> ExactScalar {
        assert!(self.is_square());
        let mut m = self.clone();
        let n = m.rows;
        let mut det = ExactScalar::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return ExactScalar::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det *= &piv;
            for i in (c + 1)..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] / &piv;
                for j in c..n {
                    let v = &m[(i, j)] - &(&f * &m[(c, j)]);
                    m[(i, j)] = v;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<ExactMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = ExactMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = ExactScalar::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = ExactMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for ExactMatrix {
    type Output = ExactScalar;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &ExactScalar {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ExactMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ExactScalar {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ExactMatrix {
    type Output = ExactMatrix;
    fn mul(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ExactMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += &(a * b);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::test_support::{random_sym, random_unimodular};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::ratio(n, d)
    }

    #[test]
    fn ldlt_identity() {
        let id = ExactMatrix::identity(3);
        let f = id.ldlt_decompose().unwrap();
        assert_eq!(f.l, ExactMatrix::identity(3));
        assert_eq!(f.d, vec![ExactScalar::one(); 3]);
    }

    #[test]
    fn ldlt_a2() {
        let a = ExactMatrix::from_i64(&[[2, -1], [-1, 2]]);
        let f = a.ldlt_decompose().unwrap();
        assert_eq!(f.d, vec![q(2, 1), q(3, 2)]);
        assert_eq!(f.l[(1, 0)], q(-1, 2));
        let back = &(&f.l * &ExactMatrix::diagonal(&f.d)) * &f.l.transpose();
        assert_eq!(back, a);
    }

    #[test]
    fn ldlt_rank_deficient_fails_at_second_pivot() {
        let a = ExactMatrix::from_i64(&[[1, 1], [1, 1]]);
        assert_eq!(a.ldlt_decompose().unwrap_err(), ZeroPivot { index: 1 });
    }

    #[test]
    fn positive_definiteness() {
        let mut i5 = ExactMatrix::identity(5);
        assert!(i5.is_positive_definite());
        assert!(!ExactMatrix::from_i64(&[[1, 2], [2, 1]]).is_positive_definite());
        let e1 = ExactMatrix::outer_i64(&[1, 0, 0]);
        assert!(!e1.is_positive_definite());
        i5[(0, 1)] = ExactScalar::one();
        assert!(matches!(i5.check_positive_definite(), Err(Error::NotSymmetric { .. })));
        match ExactMatrix::from_i64(&[[1, 2], [2, 1]]).check_positive_definite() {
            Err(Error::NotPositiveDefinite { pivot, value }) => {
                assert_eq!(pivot, 1);
                assert_eq!(value, q(-3, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn form_evaluation() {
        let one = ExactScalar::one();
        assert_eq!(
            ExactMatrix::identity(2).evaluate_form(&[one.clone(), one.clone()]),
            q(2, 1)
        );
        let a = ExactMatrix::from_i64(&[[2, -1], [-1, 2]]);
        assert_eq!(a.evaluate_form_i64(&[1, 1]), q(2, 1));
        assert!(a.evaluate_form_i64(&[0, 0]).is_zero());
    }

    #[test]
    fn rank_and_kernel_examples() {
        let (r, k) = ExactMatrix::identity(4).rank_and_kernel();
        assert_eq!((r, k.len()), (4, 0));

        let ones = ExactMatrix::from_i64(&[[1, 1, 1], [1, 1, 1], [1, 1, 1]]);
        let (r, k) = ones.rank_and_kernel();
        assert_eq!(r, 1);
        let k: Vec<Vec<i64>> = k
            .iter()
            .map(|v| v.iter().map(|x| x.to_i64().unwrap()).collect())
            .collect();
        assert_eq!(k, vec![vec![1, -1, 0], vec![1, 0, -1]]);

        let (r, k) = ExactMatrix::zeros(3, 3).rank_and_kernel();
        assert_eq!(r, 0);
        assert_eq!(k.len(), 3);
        for (i, v) in k.iter().enumerate() {
            for (j, x) in v.iter().enumerate() {
                assert_eq!(x.to_i64().unwrap(), (i == j) as i64);
            }
        }
    }

    #[test]
    fn inverse_and_determinant() {
        let a = ExactMatrix::from_i64(&[[2, 1, 0], [1, 3, 1], [0, 1, 4]]);
        assert_eq!(a.determinant(), q(18, 1));
        let inv = a.inverse().unwrap();
        assert_eq!(&a * &inv, ExactMatrix::identity(3));
        assert!(ExactMatrix::from_i64(&[[1, 2], [2, 4]]).inverse().is_none());
    }

    proptest! {
        #[test]
        fn ldlt_reconstructs(seed in any::<u64>(), n in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_sym(&mut rng, n, 6);
            if let Ok(f) = a.ldlt_decompose() {
                let back = &(&f.l * &ExactMatrix::diagonal(&f.d)) * &f.l.transpose();
                prop_assert_eq!(back, a);
            }
        }

        #[test]
        fn pd_invariant_under_unimodular(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_sym(&mut rng, n, 4);
            let u = random_unimodular(&mut rng, n, 6);
            let b = &(&u.transpose() * &a) * &u;
            prop_assert_eq!(a.is_positive_definite(), b.is_positive_definite());
        }

        #[test]
        fn form_parallelogram_law(seed in any::<u64>(), n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_sym(&mut rng, n, 9);
            let x: Vec<ExactScalar> = (0..n).map(|i| q((seed as i64 >> i) % 7, 3)).collect();
            let y: Vec<ExactScalar> = (0..n).map(|i| q(((seed >> (2 * i)) % 5) as i64 - 2, 2)).collect();
            let s: Vec<_> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let d: Vec<_> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let two = q(2, 1);
            prop_assert_eq!(
                a.evaluate_form(&s) + a.evaluate_form(&d),
                &two * &a.evaluate_form(&x) + &two * &a.evaluate_form(&y)
            );
        }
    }
}
