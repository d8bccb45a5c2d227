//! Integer vector helpers: primitive normalization, fraction-free rank, lattice bases.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedMul, CheckedSub, One, Signed, Zero};

use super::ExactScalar;

pub fn gcd_i64(values: &[i64]) -> i64 {
    values.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Divides by the gcd of the entries. Returns the gcd (0 for the zero vector).
pub fn make_primitive(v: &mut [i64]) -> i64 {
    let g = gcd_i64(v);
    if g > 1 {
        for x in v.iter_mut() {
            *x /= g;
        }
    }
    g
}

/// Flips the sign so that the first nonzero entry is positive. Returns true on a flip.
pub fn normalize_sign(v: &mut [i64]) -> bool {
    if let Some(&first) = v.iter().find(|&&x| x != 0) {
        if first < 0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
            return true;
        }
    }
    false
}

pub fn sign_normalized(v: &[i64]) -> Vec<i64> {
    let mut w = v.to_vec();
    normalize_sign(&mut w);
    w
}

/// Scales a rational vector to a primitive integer vector with the same direction.
pub fn primitive_from_rational(v: &[ExactScalar]) -> Vec<BigInt> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(&x.denom()));
    let mut ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in ints.iter_mut() {
            *x = &*x / &g;
        }
    }
    ints
}

/// Same as [`primitive_from_rational`] but into `i64`; `None` on overflow.
pub fn primitive_i64_from_rational(v: &[ExactScalar]) -> Option<Vec<i64>> {
    if v.iter().all(|x| x.is_integer()) {
        if let Some(mut out) = v.iter().map(|x| x.to_i64()).collect::<Option<Vec<i64>>>() {
            make_primitive(&mut out);
            return Some(out);
        }
    }
    primitive_from_rational(v)
        .iter()
        .map(|x| i64::try_from(x).ok())
        .collect()
}

pub fn dot_i64(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_i128(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(x, y)| *x as i128 * *y as i128).sum()
}

fn row_rank_generic<T>(mut rows: Vec<Vec<T>>) -> Option<usize>
where
    T: Clone + Integer + Signed + CheckedMul + CheckedSub,
{
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        let pv = pivot_row[c].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            let g = pv.gcd(&f);
            let (a, b) = (pv.clone() / g.clone(), f / g);
            let mut cont = T::zero();
            for j in c..cols {
                let lhs = row[j].checked_mul(&a)?;
                let rhs = pivot_row[j].checked_mul(&b)?;
                row[j] = lhs.checked_sub(&rhs)?;
                cont = cont.gcd(&row[j]);
            }
            if !cont.is_zero() && !cont.is_one() {
                for x in row[c..].iter_mut() {
                    *x = x.clone() / cont.clone();
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    Some(rank)
}

/// Exact rank of a list of integer rows.
pub fn rank_i64<R: AsRef<[i64]>>(rows: &[R]) -> usize {
    let small: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.as_ref().iter().map(|&x| x as i128).collect())
        .collect();
    if let Some(r) = row_rank_generic(small) {
        return r;
    }
    let big: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    row_rank_generic(big).expect("bigint elimination cannot overflow")
}

/// Exact determinant of a small square integer matrix (fraction-free elimination).
pub fn det_i64<R: AsRef<[i64]>>(rows: &[R]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = ((k + 1)..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Adjugate and determinant of a small integer matrix, so that `adj·M = det·I`.
pub fn adjugate_i64(m: &[Vec<i64>]) -> (Vec<Vec<i128>>, i128) {
    let n = m.len();
    let det: i128 = i128::try_from(det_i64(m)).expect("determinant overflow");
    let mut adj = vec![vec![0i128; n]; n];
    if n == 1 {
        adj[0][0] = 1;
        return (adj, det);
    }
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c]).collect())
                .collect();
            let cof = i128::try_from(det_i64(&minor)).expect("cofactor overflow");
            adj[i][j] = if (i + j) % 2 == 0 { cof } else { -cof };
        }
    }
    (adj, det)
}

/// Basis (as rows) of the integer lattice spanned by the given integer rows.
pub fn lattice_basis(generators: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = generators.to_vec();
    let cols = rows.first().map_or(0, Vec::len);
    let mut basis = Vec::new();
    for c in 0..cols {
        // Euclid on column c across the remaining rows.
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz
                .iter()
                .min_by(|&&a, &&b| rows[a][c].abs().cmp(&rows[b][c].abs()))
                .unwrap();
            let pr = rows[p].clone();
            for &i in &nz {
                if i == p {
                    continue;
                }
                let q = rows[i][c].div_floor(&pr[c]);
                for j in 0..cols {
                    let v = &rows[i][j] - &q * &pr[j];
                    rows[i][j] = v;
                }
            }
        }
        if let Some(p) = (0..rows.len()).find(|&i| !rows[i][c].is_zero()) {
            basis.push(rows.remove(p));
        }
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    }
    basis
}
