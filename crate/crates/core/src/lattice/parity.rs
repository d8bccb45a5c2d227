use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::ExactScalar;

/// A nonzero element of `{0, 1/2}^n`, stored as a bit mask (bit `i` set means
/// coordinate `i` equals `1/2`). Classes are globally ordered by mask value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParityVector {
    n: u8,
    bits: u32,
}

impl ParityVector {
    pub fn new(n: usize, bits: u32) -> Option<Self> {
        if n == 0 || n > 31 || bits == 0 || bits >> n != 0 {
            return None;
        }
        Some(ParityVector { n: n as u8, bits })
    }

    /// All `2^n − 1` parity vectors in global order.
    pub fn all(n: usize) -> impl Iterator<Item = ParityVector> {
        assert!((1..=31).contains(&n));
        (1u32..(1u32 << n)).map(move |bits| ParityVector { n: n as u8, bits })
    }

    pub fn count(n: usize) -> usize {
        (1usize << n) - 1
    }

    /// Class of an integer vector modulo 2 (`None` for even vectors).
    pub fn of_vector(v: &[i64]) -> Option<Self> {
        let bits = v
            .iter()
            .enumerate()
            .filter(|(_, &x)| x.rem_euclid(2) == 1)
            .fold(0u32, |b, (i, _)| b | (1 << i));
        Self::new(v.len(), bits)
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        Self::new(n, index as u32 + 1).expect("class index out of range")
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Position in the global class order.
    pub fn index(&self) -> usize {
        self.bits as usize - 1
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    /// The vector `2v ∈ {0,1}^n`.
    pub fn doubled(&self) -> Vec<i64> {
        (0..self.n()).map(|i| self.is_set(i) as i64).collect()
    }

    pub fn to_half_vector(&self) -> Vec<ExactScalar> {
        (0..self.n())
            .map(|i| {
                if self.is_set(i) {
                    ExactScalar::ratio(1, 2)
                } else {
                    ExactScalar::zero()
                }
            })
            .collect()
    }

    /// Sum of two classes in `(Z/2)^n`; `None` when they coincide.
    pub fn add(&self, other: &ParityVector) -> Option<ParityVector> {
        debug_assert_eq!(self.n, other.n);
        Self::new(self.n(), self.bits ^ other.bits)
    }

    /// `4·vᵀw mod 2` for characters of `(Z/2)^n`.
    pub fn pairing(a: u32, b: u32) -> u32 {
        (a & b).count_ones() & 1
    }
}

impl fmt::Display for ParityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n() {
            write!(f, "{}", self.is_set(i) as u8)?;
        }
        Ok(())
    }
}

impl fmt::Debug for ParityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParityVector({self})")
    }
}
