//! `GL_n(Z)`-equivalence of integer vector systems.
//!
//! Vectors are coloured by the invariant pairwise weights `uᵀ adj(Q) w` with
//! `Q = Σ v vᵀ`. A partition of the system is refined until equitable, then
//! cells are individualized one vertex at a time. Every discrete leaf orders
//! the system; the first `n` independent vectors in that order form a basis `B`,
//! and the leaf certificate lists all vectors in `B`-coordinates. The least
//! certificate is canonical, and the leaves attaining it are in bijection with
//! the automorphisms of the system.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::int::{dot_i128, rank_i64};
use crate::arith::{ExactMatrix, ExactScalar};
use crate::error::{Error, Result};
use crate::isoedge::IsoEdgeConfiguration;

/// Hex digest identifying a `GL_n(Z)`-orbit of vector systems.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalKey(pub String);

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", &self.0[..self.0.len().min(12)])
    }
}

/// Order of a stabilizer in `GL_n(Z)`.
pub type GroupOrder = u64;

#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub key: CanonicalKey,
    pub stabilizer_order: GroupOrder,
    /// Basis of the least leaf, as vectors of the system.
    pub basis: Vec<Vec<i64>>,
    pub certificate: Vec<i128>,
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    // Bareiss elimination
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(p) = ((k + 1)..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// `adj(M)` with `adj(M)·M = det(M)·I`, and `det(M)`.
fn adjugate(m: &[Vec<i128>]) -> (Vec<Vec<i128>>, i128) {
    let n = m.len();
    let det = det_i128(m);
    if n == 1 {
        return (vec![vec![1]], det);
    }
    let mut adj = vec![vec![0i128; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i128>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c]).collect())
                .collect();
            let c = det_i128(&minor);
            adj[i][j] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    (adj, det)
}

fn dedup_system(vectors: &[Vec<i64>]) -> Result<(usize, Vec<Vec<i64>>)> {
    let n = vectors.first().map(Vec::len).ok_or(Error::NotSpanning)?;
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::Dimension("vectors of different lengths".into()));
    }
    let mut vs: Vec<Vec<i64>> = vectors
        .iter()
        .filter(|v| v.iter().any(|&x| x != 0))
        .cloned()
        .collect();
    vs.sort();
    vs.dedup();
    if rank_i64(&vs) != n {
        return Err(Error::NotSpanning);
    }
    Ok((n, vs))
}

/// `Q = Σ v vᵀ` over the system.
fn gram_sum(n: usize, vs: &[Vec<i64>]) -> Vec<Vec<i128>> {
    let mut q = vec![vec![0i128; n]; n];
    for v in vs {
        for i in 0..n {
            for j in 0..n {
                q[i][j] += v[i] as i128 * v[j] as i128;
            }
        }
    }
    q
}

/// Pairwise weights `v_iᵀ Q⁻¹ v_j` of a spanning system (in the given order).
pub fn characteristic_weights(vectors: &[Vec<i64>]) -> Result<ExactMatrix> {
    let n = vectors.first().map(Vec::len).ok_or(Error::NotSpanning)?;
    if rank_i64(vectors) != n {
        return Err(Error::NotSpanning);
    }
    let q = gram_sum(n, vectors);
    let (adj, det) = adjugate(&q);
    let d = ExactScalar::from_big(num_rational::BigRational::from_integer(det.into()));
    let m = vectors.len();
    let mut w = ExactMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let raw = weight(&adj, &vectors[i], &vectors[j]);
            let x = ExactScalar::from_big(num_rational::BigRational::from_integer(raw.into()));
            w[(i, j)] = &x / &d;
        }
    }
    Ok(w)
}

fn weight(adj: &[Vec<i128>], u: &[i64], v: &[i64]) -> i128 {
    let mut s = 0i128;
    for (i, &ui) in u.iter().enumerate() {
        if ui == 0 {
            continue;
        }
        let row: i128 = adj[i].iter().zip(v).map(|(a, &b)| a * b as i128).sum();
        s += ui as i128 * row;
    }
    s
}

fn mix(x: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Ordered partition of `0..m`: `order` lists the vertices cell by cell and
/// `cells` holds the `(start, end)` ranges in order.
#[derive(Clone)]
struct Partition {
    order: Vec<usize>,
    cells: Vec<(usize, usize)>,
}

impl Partition {
    fn is_discrete(&self) -> bool {
        self.cells.len() == self.order.len()
    }
}

struct Search<'a> {
    n: usize,
    vs: &'a [Vec<i64>],
    /// Hashed weight ids, `m × m`, row-major.
    w: Vec<u64>,
    m: usize,
    best: Option<(Vec<i128>, Vec<usize>)>,
    count: u64,
    sig: Vec<u64>,
}

impl Search<'_> {
    /// Splits cells until every vertex of a cell sees the same multiset of
    /// weights into every cell. Multisets are compared through a commutative
    /// hash, which keeps the refinement invariant.
    fn refine(&mut self, p: &mut Partition) {
        let mut s = 0;
        let mut dirty = false;
        loop {
            if p.is_discrete() {
                return;
            }
            if s >= p.cells.len() {
                if !dirty {
                    return;
                }
                s = 0;
                dirty = false;
                continue;
            }
            let (a, b) = p.cells[s];
            for x in 0..self.m {
                let row = &self.w[x * self.m..(x + 1) * self.m];
                self.sig[x] = p.order[a..b]
                    .iter()
                    .fold(0u64, |acc, &y| acc.wrapping_add(row[y]));
            }
            let mut cells = Vec::with_capacity(p.cells.len());
            let mut changed = false;
            for &(c0, c1) in &p.cells {
                if c1 - c0 == 1 {
                    cells.push((c0, c1));
                    continue;
                }
                let sig = &self.sig;
                p.order[c0..c1].sort_by_key(|&x| sig[x]);
                let mut start = c0;
                for i in (c0 + 1)..=c1 {
                    if i == c1 || sig[p.order[i]] != sig[p.order[start]] {
                        cells.push((start, i));
                        start = i;
                    }
                }
                if cells.last() != Some(&(c0, c1)) {
                    changed = true;
                }
            }
            if changed {
                p.cells = cells;
                dirty = true;
            }
            s += 1;
        }
    }

    fn basis(&self, order: &[usize]) -> Vec<usize> {
        let mut echelon: Vec<(usize, Vec<i128>)> = Vec::with_capacity(self.n);
        let mut basis = Vec::with_capacity(self.n);
        for &i in order {
            let mut v: Vec<i128> = self.vs[i].iter().map(|&x| x as i128).collect();
            for (piv, row) in &echelon {
                if v[*piv] != 0 {
                    let (a, b) = (row[*piv], v[*piv]);
                    for k in 0..self.n {
                        v[k] = v[k] * a - row[k] * b;
                    }
                    let g = v.iter().fold(0i128, |g, &x| num_integer::Integer::gcd(&g, &x));
                    if g > 1 {
                        v.iter_mut().for_each(|x| *x /= g);
                    }
                }
            }
            if let Some(piv) = v.iter().position(|&x| x != 0) {
                echelon.push((piv, v));
                basis.push(i);
                if basis.len() == self.n {
                    break;
                }
            }
        }
        basis
    }

    fn leaf(&mut self, p: &Partition) {
        let order = &p.order;
        let basis = self.basis(order);
        // columns of B are the basis vectors
        let b: Vec<Vec<i128>> = (0..self.n)
            .map(|r| basis.iter().map(|&i| self.vs[i][r] as i128).collect())
            .collect();
        let (adj, det) = adjugate(&b);
        let sign = det.signum();
        let len = 1 + self.n * order.len();
        let mut cert = Vec::with_capacity(len);
        cert.push(det.abs());
        // compare against the best certificate while it is being built
        let mut state = match &self.best {
            None => std::cmp::Ordering::Less,
            Some((best, _)) => cert[0].cmp(&best[0]),
        };
        if state == std::cmp::Ordering::Greater {
            return;
        }
        for &i in order {
            for row in &adj {
                let c: i128 = row.iter().zip(&self.vs[i]).map(|(a, &x)| a * x as i128).sum();
                cert.push(sign * c);
                if state == std::cmp::Ordering::Equal {
                    let best = &self.best.as_ref().expect("best exists").0;
                    state = (sign * c).cmp(&best[cert.len() - 1]);
                    if state == std::cmp::Ordering::Greater {
                        return;
                    }
                }
            }
        }
        match state {
            std::cmp::Ordering::Less => {
                self.best = Some((cert, basis));
                self.count = 1;
            }
            _ => self.count += 1,
        }
    }

    fn search(&mut self, mut p: Partition) {
        self.refine(&mut p);
        if p.is_discrete() {
            self.leaf(&p);
            return;
        }
        let target = (0..p.cells.len())
            .filter(|&i| p.cells[i].1 - p.cells[i].0 > 1)
            .min_by_key(|&i| (p.cells[i].1 - p.cells[i].0, i))
            .expect("non-discrete partition has a non-singleton cell");
        let (c0, c1) = p.cells[target];
        for k in c0..c1 {
            let mut q = p.clone();
            q.order.swap(c0, k);
            q.order[c0 + 1..c1].sort_unstable();
            q.cells[target] = (c0, c0 + 1);
            q.cells.insert(target + 1, (c0 + 1, c1));
            self.search(q);
        }
    }
}

/// Canonical form, key and stabilizer order of a spanning vector system that
/// generates `Z^n` (duplicates and zero vectors are ignored).
pub fn canonical_form(vectors: &[Vec<i64>]) -> Result<CanonicalForm> {
    let (n, vs) = dedup_system(vectors)?;
    let big: Vec<Vec<num_bigint::BigInt>> = vs
        .iter()
        .map(|v| v.iter().map(|&x| x.into()).collect())
        .collect();
    let lattice = crate::arith::int::lattice_basis(&big);
    let index = crate::arith::int::det_i64(
        &lattice
            .iter()
            .map(|r| r.iter().map(|x| i64::try_from(x).expect("small lattice basis")).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    );
    if index != 1.into() && index != (-1).into() {
        return Err(Error::Other(format!(
            "vector system generates a sublattice of index {index}"
        )));
    }

    let m = vs.len();
    let q = gram_sum(n, &vs);
    let (adj, _) = adjugate(&q);
    let mut raw = vec![0i128; m * m];
    for i in 0..m {
        for j in i..m {
            let x = weight(&adj, &vs[i], &vs[j]);
            raw[i * m + j] = x;
            raw[j * m + i] = x;
        }
    }
    let mut distinct = raw.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let w: Vec<u64> = raw
        .iter()
        .map(|x| mix(distinct.binary_search(x).expect("value present") as u64))
        .collect();

    // initial colours: own weight and the size of the parity class
    let parity = |v: &Vec<i64>| -> u32 {
        v.iter()
            .enumerate()
            .fold(0u32, |b, (i, &x)| b | ((x.rem_euclid(2) as u32) << i))
    };
    let mut class_size = std::collections::HashMap::new();
    for v in &vs {
        *class_size.entry(parity(v)).or_insert(0u32) += 1;
    }
    let colour: Vec<(u64, u32)> = (0..m)
        .map(|i| (w[i * m + i], class_size[&parity(&vs[i])]))
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (colour[i], i));
    let mut cells = Vec::new();
    let mut start = 0;
    for i in 1..=m {
        if i == m || colour[order[i]] != colour[order[start]] {
            cells.push((start, i));
            start = i;
        }
    }

    let mut s = Search {
        n,
        vs: &vs,
        w,
        m,
        best: None,
        count: 0,
        sig: vec![0; m],
    };
    s.search(Partition { order, cells });
    let (cert, basis_idx) = s.best.take().expect("at least one leaf");
    let mut hasher = Sha256::new();
    hasher.update((n as u64).to_le_bytes());
    hasher.update((m as u64).to_le_bytes());
    for x in &cert {
        hasher.update(x.to_le_bytes());
    }
    Ok(CanonicalForm {
        key: CanonicalKey(hex::encode(hasher.finalize())),
        stabilizer_order: s.count,
        basis: basis_idx.iter().map(|&i| vs[i].clone()).collect(),
        certificate: cert,
    })
}

pub fn canonical_key(c: &IsoEdgeConfiguration) -> CanonicalKey {
    canonical_form(&c.vector_system())
        .expect("configuration systems span and generate the lattice")
        .key
}

/// Order of the setwise stabilizer of the system in `GL_n(Z)`.
pub fn stabilizer_order(vectors: &[Vec<i64>]) -> Result<GroupOrder> {
    Ok(canonical_form(vectors)?.stabilizer_order)
}

fn apply(u: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    u.iter().map(|row| dot_i128(row, v) as i64).collect()
}

/// A unimodular `U` with `U·V1 = V2` as sets, or `None` when none exists.
pub fn are_equivalent_systems(v1: &[Vec<i64>], v2: &[Vec<i64>]) -> Result<Option<Vec<Vec<i64>>>> {
    let (c1, c2) = (canonical_form(v1)?, canonical_form(v2)?);
    if c1.certificate != c2.certificate {
        return Ok(None);
    }
    let n = c1.basis.len();
    // U = B2 · B1⁻¹ with basis vectors as columns
    let cols = |b: &[Vec<i64>]| -> ExactMatrix {
        let rows: Vec<Vec<i64>> = (0..n).map(|r| b.iter().map(|v| v[r]).collect()).collect();
        ExactMatrix::from_i64(&rows)
    };
    let b1_inv = cols(&c1.basis).inverse().expect("basis is invertible");
    let u = &cols(&c2.basis) * &b1_inv;
    let mut out = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if !u[(i, j)].is_integer() {
                return Err(Error::Validation("equivalence witness is not integral".into()));
            }
            out[i][j] = u[(i, j)].to_i64().expect("small entries");
        }
    }
    let det = u.determinant();
    if det.abs() != ExactScalar::one() {
        return Err(Error::Validation("equivalence witness is not unimodular".into()));
    }
    let (_, s1) = dedup_system(v1)?;
    let (_, s2) = dedup_system(v2)?;
    let mut img: Vec<Vec<i64>> = s1.iter().map(|v| apply(&out, v)).collect();
    img.sort();
    if img != s2 {
        return Err(Error::Validation("equivalence witness does not map the systems".into()));
    }
    Ok(Some(out))
}

/// A unimodular `U` mapping the `±` system of `c1` onto that of `c2`.
pub fn are_equivalent(c1: &IsoEdgeConfiguration, c2: &IsoEdgeConfiguration) -> Option<Vec<Vec<i64>>> {
    if c1.n() != c2.n() {
        return None;
    }
    are_equivalent_systems(&c1.vector_system(), &c2.vector_system())
        .expect("configuration systems span and generate the lattice")
}
