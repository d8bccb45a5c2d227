//! Double description over the integers.
//!
//! Runs with checked `i128` arithmetic and restarts with `BigInt` on overflow.
//! Vectors are kept primitive after every combination step.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

pub(crate) trait DdInt: Clone + PartialEq + Ord + std::fmt::Debug {
    fn from_i64(x: i64) -> Self;
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn signum_i(&self) -> i32;
    fn neg(&self) -> Self;
    fn add(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn gcd(&self, o: &Self) -> Self;
    fn div_exact(&self, o: &Self) -> Self;
    fn is_one(&self) -> bool;
    fn to_big(&self) -> BigInt;
}

impl DdInt for i128 {
    fn from_i64(x: i64) -> Self {
        x as i128
    }
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn signum_i(&self) -> i32 {
        self.signum() as i32
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        let r = self.checked_mul(*o)?;
        // keep headroom so that negation and sums of a few terms stay in range
        (r.unsigned_abs() < (1u128 << 120)).then_some(r)
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn is_one(&self) -> bool {
        *self == 1
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl DdInt for BigInt {
    fn from_i64(x: i64) -> Self {
        BigInt::from(x)
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn signum_i(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }
    fn neg(&self) -> Self {
        -self
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn is_one(&self) -> bool {
        num_traits::One::is_one(self)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

fn dot<T: DdInt>(a: &[T], b: &[T]) -> Option<T> {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        s = s.add(&x.mul(y)?)?;
    }
    Some(s)
}

fn make_primitive<T: DdInt>(v: &mut [T]) {
    let mut g = T::zero();
    for x in v.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                return;
            }
        }
    }
    if !g.is_zero() {
        for x in v.iter_mut() {
            *x = x.div_exact(&g);
        }
    }
}

/// `a·x + b·y`, made primitive.
fn combine<T: DdInt>(a: &T, x: &[T], b: &T, y: &[T]) -> Option<Vec<T>> {
    let mut out = Vec::with_capacity(x.len());
    for (xi, yi) in x.iter().zip(y) {
        out.push(a.mul(xi)?.add(&b.mul(yi)?)?);
    }
    make_primitive(&mut out);
    Some(out)
}

struct Ray<T> {
    v: Vec<T>,
    zeros: FixedBitSet,
}

/// Extreme rays and a lineality basis of `{y : h·y ≥ 0 for h in ineqs}` in `Z^k`.
/// `None` signals arithmetic overflow.
fn run<T: DdInt>(k: usize, ineqs: &[Vec<T>]) -> Option<(Vec<Vec<T>>, Vec<Vec<T>>)> {
    let m = ineqs.len();
    let mut lin: Vec<Vec<T>> = (0..k)
        .map(|i| {
            let mut e = vec![T::zero(); k];
            e[i] = T::from_i64(1);
            e
        })
        .collect();
    let mut rays: Vec<Ray<T>> = Vec::new();

    for (i, h) in ineqs.iter().enumerate() {
        let lin_vals: Vec<T> = lin.iter().map(|l| dot(h, l)).collect::<Option<_>>()?;
        if let Some(p) = lin_vals.iter().position(|x| !x.is_zero()) {
            // The hyperplane cuts the lineality space: one lineality direction becomes a ray.
            let mut l0 = lin.swap_remove(p);
            let mut s0 = lin_vals[p].clone();
            let mut rest_vals = lin_vals;
            rest_vals.swap_remove(p);
            if s0.signum_i() < 0 {
                l0 = l0.iter().map(T::neg).collect();
                s0 = s0.neg();
            }
            for (l, s) in lin.iter_mut().zip(&rest_vals) {
                if !s.is_zero() {
                    *l = combine(&s0, l, &s.neg(), &l0)?;
                }
            }
            for r in rays.iter_mut() {
                let s = dot(h, &r.v)?;
                if !s.is_zero() {
                    r.v = combine(&s0, &r.v, &s.neg(), &l0)?;
                }
                r.zeros.insert(i);
            }
            let mut zeros = FixedBitSet::with_capacity(m);
            zeros.insert_range(..i);
            rays.push(Ray { v: l0, zeros });
            continue;
        }

        let vals: Vec<T> = rays.iter().map(|r| dot(h, &r.v)).collect::<Option<_>>()?;
        let pos: Vec<usize> = (0..rays.len()).filter(|&j| vals[j].signum_i() > 0).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&j| vals[j].signum_i() < 0).collect();
        if neg.is_empty() {
            for (j, r) in rays.iter_mut().enumerate() {
                if vals[j].is_zero() {
                    r.zeros.insert(i);
                }
            }
            continue;
        }
        let pointed_dim = k - lin.len();
        let need = pointed_dim.saturating_sub(2);
        let mut new_rays: Vec<Ray<T>> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = {
                    let mut c = rays[p].zeros.clone();
                    c.intersect_with(&rays[q].zeros);
                    c
                };
                if common.count_ones(..) < need {
                    continue;
                }
                let adjacent = rays.iter().enumerate().all(|(j, r)| {
                    j == p || j == q || !common.is_subset(&r.zeros)
                });
                if !adjacent {
                    continue;
                }
                let v = combine(&vals[p], &rays[q].v, &vals[q].neg(), &rays[p].v)?;
                let mut zeros = common;
                zeros.insert(i);
                new_rays.push(Ray { v, zeros });
            }
        }
        let mut kept: Vec<Ray<T>> = Vec::with_capacity(rays.len() + new_rays.len());
        for (j, mut r) in rays.into_iter().enumerate() {
            match vals[j].signum_i() {
                0 => {
                    r.zeros.insert(i);
                    kept.push(r);
                }
                1 => kept.push(r),
                _ => {}
            }
        }
        kept.extend(new_rays);
        rays = kept;
    }
    Some((rays.into_iter().map(|r| r.v).collect(), lin))
}

/// Primitive, deduplicated inequalities in lexicographic order.
fn prepare(ineqs: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = ineqs
        .iter()
        .filter(|h| h.iter().any(|x| !Zero::is_zero(x)))
        .map(|h| {
            let mut h = h.clone();
            make_primitive(&mut h);
            h
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Extreme rays and lineality basis of `{y ∈ R^k : h·y ≥ 0}`; exact.
pub(crate) fn extreme_rays(k: usize, ineqs: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>) {
    let prepared = prepare(ineqs);
    let small: Option<Vec<Vec<i128>>> = prepared
        .iter()
        .map(|h| h.iter().map(|x| x.to_i128().filter(|v| v.unsigned_abs() < 1 << 60)).collect())
        .collect();
    if let Some(small) = small {
        if let Some((rays, lin)) = run::<i128>(k, &small) {
            let conv = |vs: Vec<Vec<i128>>| -> Vec<Vec<BigInt>> {
                vs.into_iter()
                    .map(|v| v.iter().map(DdInt::to_big).collect())
                    .collect()
            };
            return (conv(rays), conv(lin));
        }
        log::debug!("double description overflowed i128, retrying with big integers");
    }
    run::<BigInt>(k, &prepared).expect("big integer arithmetic cannot overflow")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    fn sorted(mut v: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
        v.sort();
        v
    }

    #[test]
    fn orthant() {
        let (rays, lin) = extreme_rays(3, &big(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
        assert!(lin.is_empty());
        assert_eq!(sorted(rays), big(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]));
    }

    #[test]
    fn half_plane() {
        let (rays, lin) = extreme_rays(2, &big(&[&[1, 0]]));
        assert_eq!(rays, big(&[&[1, 0]]));
        assert_eq!(lin.len(), 1);
        assert_eq!(lin[0][0], <BigInt as Zero>::zero());
    }

    #[test]
    fn cut_orthant() {
        let h = big(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, -1], &[0, 0, 1]]);
        let (rays, lin) = extreme_rays(3, &h);
        assert!(lin.is_empty());
        assert_eq!(
            sorted(rays),
            big(&[&[0, 1, 0], &[0, 1, 1], &[1, 0, 0], &[1, 0, 1]])
        );
    }

    #[test]
    fn empty_interior() {
        // x ≥ 0 and −x ≥ 0 in R^1
        let (rays, lin) = extreme_rays(1, &big(&[&[1], &[-1]]));
        assert!(rays.is_empty() && lin.is_empty());
    }
}
