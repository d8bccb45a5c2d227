//! Tropical theta constants as linear maps on cells, conorms, the matroidal
//! locus and the pairwise Conway–Sloane check.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::int::{det_i64, make_primitive, primitive_i64_from_rational, rank_i64, sign_normalized};
use crate::arith::{quadratic_functional, sym_dim, ExactMatrix, ExactScalar, SymCoordinates};
use crate::enumeration::{parallel_map, CellRecord};
use crate::equivalence::{are_equivalent_systems, canonical_form, CanonicalKey};
use crate::error::{Error, Result};
use crate::lattice::{LatticeForm, ParityVector};
use crate::polyhedra::{self, Cone};

/// `Θ` restricted to a cell: `Θ_v(Q) = −Q[x_v − v] = −⟨f_v, Q⟩ / 4` with
/// `f_v = quadratic_functional(2x_v − 2v)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaLinearMap {
    pub domain_key: CanonicalKey,
    pub n: usize,
    /// `2x_v − 2v` for every class `v`, in class order.
    pub vectors: Vec<Vec<i64>>,
    /// `(2^n − 1) × n(n+1)/2`.
    pub matrix: ExactMatrix,
}

impl ThetaLinearMap {
    /// The integer functionals `f_v`, so that `Θ_v = −f_v / 4`.
    pub fn functionals(&self) -> Vec<Vec<i64>> {
        self.vectors.iter().map(|w| quadratic_functional(w)).collect()
    }

    pub fn apply(&self, q: &SymCoordinates) -> Vec<ExactScalar> {
        self.matrix.mul_vec(&q.coords)
    }

    pub fn rank(&self) -> usize {
        rank_i64(&self.functionals())
    }
}

/// Conorms indexed by class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConormVector {
    pub n: usize,
    pub values: Vec<ExactScalar>,
}

impl ConormVector {
    pub fn get(&self, v: ParityVector) -> &ExactScalar {
        &self.values[v.index()]
    }

    /// Classes with nonzero conorm.
    pub fn support(&self) -> Vec<ParityVector> {
        ParityVector::all(self.n)
            .filter(|v| !self.get(*v).is_zero())
            .collect()
    }
}

fn interior_form(n: usize, cell: &CellRecord) -> Result<LatticeForm> {
    let a = SymCoordinates::from_i64(n, &cell.interior_point())?.to_matrix();
    LatticeForm::new(&a)
}

/// The linear map `Θ` on the closure of `cell`, from one closest point per
/// class at the interior form; checked against direct evaluation at the
/// interior form and at every positive definite extreme ray.
pub fn theta_linear_map(n: usize, cell: &CellRecord) -> Result<ThetaLinearMap> {
    let form = interior_form(n, cell)?;
    let vectors: Vec<Vec<i64>> = ParityVector::all(n)
        .map(|v| form.class_vectors(v).swap_remove(0))
        .collect();
    let quarter = ExactScalar::ratio(-1, 4);
    let rows = vectors
        .iter()
        .map(|w| {
            quadratic_functional(w)
                .iter()
                .map(|&x| &ExactScalar::from_int(x) * &quarter)
                .collect()
        })
        .collect();
    let map = ThetaLinearMap {
        domain_key: cell.key.clone(),
        n,
        vectors,
        matrix: ExactMatrix::from_rows(rows)?,
    };
    let interior = cell.interior_point();
    for point in cell.rays().iter().chain(std::iter::once(&interior)) {
        let q = SymCoordinates::from_i64(n, point)?;
        let Ok(f) = LatticeForm::new(&q.to_matrix()) else {
            continue;
        };
        if map.apply(&q) != f.theta_vector() {
            return Err(Error::Validation(format!(
                "theta map of cell {} disagrees with direct evaluation at {point:?}",
                cell.key
            )));
        }
    }
    Ok(map)
}

/// The `2^n × 2^n` character table `(−1)^{popcount(v ∧ w)}`, index 0 included.
pub fn sign_matrix(n: usize) -> Vec<Vec<i8>> {
    let size = 1usize << n;
    (0..size)
        .map(|v| {
            (0..size)
                .map(|w| if ParityVector::pairing(v as u32, w as u32) == 0 { 1 } else { -1 })
                .collect()
        })
        .collect()
}

/// `x ↦ 2^{−(n−3)} H x` on vectors indexed by all of `(Z/2)^n`, index 0 first.
pub fn conorm_transform(n: usize, x: &[ExactScalar]) -> Vec<ExactScalar> {
    assert_eq!(x.len(), 1 << n);
    let scale = if n >= 3 {
        ExactScalar::ratio(1, 1 << (n - 3))
    } else {
        ExactScalar::from_int(1 << (3 - n))
    };
    sign_matrix(n)
        .iter()
        .map(|row| {
            let s: ExactScalar = row
                .iter()
                .zip(x)
                .filter(|(_, t)| !t.is_zero())
                .map(|(&sg, t)| if sg > 0 { t.clone() } else { -t.clone() })
                .sum();
            &s * &scale
        })
        .collect()
}

/// Conorms from theta constants given in class order (`Θ_0 = 0` is implied).
pub fn conorm_from_theta(n: usize, theta: &[ExactScalar]) -> ConormVector {
    let mut full = Vec::with_capacity(1 << n);
    full.push(ExactScalar::zero());
    full.extend(theta.iter().cloned());
    let mut t = conorm_transform(n, &full);
    t.remove(0);
    ConormVector { n, values: t }
}

pub fn conorm_vector(a: &ExactMatrix) -> Result<ConormVector> {
    let form = LatticeForm::new(a)?;
    Ok(conorm_from_theta(form.dim(), &form.theta_vector()))
}

/// Integer functionals proportional (positively) to the conorms on a cell.
fn conorm_functionals(map: &ThetaLinearMap) -> Vec<Vec<i64>> {
    let n = map.n;
    let f = map.functionals();
    let d = sym_dim(n);
    ParityVector::all(n)
        .map(|v| {
            // ϑ_v ∝ Σ_w (−1)^{v·w} Θ_w = −¼ Σ_w (−1)^{v·w} f_w
            let mut h = vec![0i64; d];
            for w in ParityVector::all(n) {
                let s = if ParityVector::pairing(v.bits(), w.bits()) == 0 { -1 } else { 1 };
                for (a, b) in h.iter_mut().zip(&f[w.index()]) {
                    *a += s * b;
                }
            }
            make_primitive(&mut h);
            h
        })
        .collect()
}

/// `cell ∩ {ϑ_v ≥ 0 for all v}`, with extreme rays.
pub fn matroidal_cone(cell: &CellRecord, map: &ThetaLinearMap) -> Result<Cone> {
    let mut ineqs = cell.cone.inequalities().unwrap_or_default().to_vec();
    ineqs.extend(conorm_functionals(map).into_iter().filter(|h| h.iter().any(|&x| x != 0)));
    let cone = Cone::from_inequalities(sym_dim(map.n), ineqs, cell.cone.equalities().to_vec())?;
    polyhedra::dd_rays_from_inequalities(&cone)
}

/// `c·uuᵀ` with `c > 0` and `u` primitive and sign-normalized, if the point is one.
pub fn rank_one_decomposition(n: usize, point: &[i64]) -> Option<(ExactScalar, Vec<i64>)> {
    let a = SymCoordinates::from_i64(n, point).ok()?.to_matrix();
    let i = (0..n).find(|&i| !a[(i, i)].is_zero())?;
    let u = sign_normalized(&primitive_i64_from_rational(a.row(i))?);
    let c = &a[(i, i)] / &ExactScalar::from_int(u[i] * u[i]);
    if !c.is_positive() || a != ExactMatrix::outer_i64(&u).scale(&c) {
        return None;
    }
    Some((c, u))
}

fn combinations(m: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            if !rec(i + 1, m, k, cur, f) {
                return false;
            }
            cur.pop();
        }
        true
    }
    rec(0, m, k, &mut Vec::with_capacity(k), f)
}

/// Every maximal minor lies in `{−1, 0, 1}`. Rejects systems that do not span.
pub fn is_unimodular_system(vectors: &[Vec<i64>]) -> Result<bool> {
    let n = vectors.first().map(Vec::len).ok_or(Error::NotSpanning)?;
    if rank_i64(vectors) != n {
        return Err(Error::NotSpanning);
    }
    let one = BigInt::from(1);
    Ok(combinations(vectors.len(), n, &mut |idx| {
        let rows: Vec<&Vec<i64>> = idx.iter().map(|&i| &vectors[i]).collect();
        let d = det_i64(&rows);
        d.magnitude() <= one.magnitude()
    }))
}

/// Unimodularity relative to the lattice `span ∩ Zⁿ`: each independent
/// `r`-subset (`r` the rank) has index at most one there, i.e. the gcd of its
/// `r × r` minors is 1. Agrees with [`is_unimodular_system`] on spanning input.
pub fn is_unimodular_in_span(vectors: &[Vec<i64>]) -> bool {
    let Some(n) = vectors.first().map(Vec::len) else {
        return true;
    };
    let r = rank_i64(vectors);
    if r == 0 {
        return true;
    }
    let one = BigInt::from(1);
    combinations(vectors.len(), r, &mut |idx| {
        let mut g = BigInt::from(0);
        combinations(n, r, &mut |coords| {
            let rows: Vec<Vec<i64>> = idx
                .iter()
                .map(|&i| coords.iter().map(|&c| vectors[i][c]).collect())
                .collect();
            g = g.gcd(&det_i64(&rows));
            g != one
        });
        g.magnitude() <= one.magnitude()
    })
}

/// Result of the matroidal check on one top cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatroidalCellReport {
    pub key: CanonicalKey,
    pub pass: bool,
    pub rays: usize,
    /// The vectors `u` of the rank-one rays `c·uuᵀ`.
    pub vectors: Vec<Vec<i64>>,
    /// The vectors span `Rⁿ`; otherwise the cone holds no positive definite form.
    pub spanning: bool,
    pub unimodular: bool,
    pub diagnosis: String,
}

/// A unimodular system up to `GL_n(Z)`, with the cells it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodularSystem {
    pub key: CanonicalKey,
    pub vectors: Vec<Vec<i64>>,
    pub cells: Vec<CanonicalKey>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatroidalReport {
    pub n: usize,
    pub cells: Vec<MatroidalCellReport>,
    pub passed: usize,
    /// Distinct systems found, up to equivalence.
    pub systems: Vec<UnimodularSystem>,
    /// Those not embedded in another system, up to equivalence.
    pub maximal_systems: Vec<UnimodularSystem>,
}

impl MatroidalReport {
    pub fn all_pass(&self) -> bool {
        self.passed == self.cells.len()
    }
}

pub fn check_matroidal_cell(n: usize, cell: &CellRecord) -> Result<MatroidalCellReport> {
    let map = theta_linear_map(n, cell)?;
    let cone = matroidal_cone(cell, &map)?;
    let rays = cone.rays().expect("rays computed");
    let mut vectors = Vec::new();
    let mut bad = Vec::new();
    for r in rays {
        match rank_one_decomposition(n, r) {
            Some((_, u)) => vectors.push(u),
            None => bad.push(r.clone()),
        }
    }
    vectors.sort();
    vectors.dedup();
    let spanning = rank_i64(&vectors) == n;
    let unimodular = is_unimodular_in_span(&vectors);
    let diagnosis = if !bad.is_empty() {
        format!("{} extreme rays are not rank one, e.g. {:?}", bad.len(), bad[0])
    } else if !unimodular {
        "ray vectors do not form a unimodular system".to_string()
    } else if !spanning {
        format!(
            "ray vectors span rank {} only: no positive definite form has all conorms nonnegative here",
            rank_i64(&vectors)
        )
    } else {
        String::new()
    };
    Ok(MatroidalCellReport {
        key: cell.key.clone(),
        pass: bad.is_empty() && unimodular,
        rays: rays.len(),
        vectors,
        spanning,
        unimodular,
        diagnosis,
    })
}

fn plus_minus(vs: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vs
        .iter()
        .flat_map(|v| [v.clone(), v.iter().map(|x| -x).collect()])
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Some `g ∈ GL_n(Z)` maps every vector of `small` into `big` (both `±`-closed).
pub fn embeds(small: &[Vec<i64>], big: &[Vec<i64>]) -> bool {
    let n = match small.first() {
        Some(v) => v.len(),
        None => return true,
    };
    let small = plus_minus(small);
    let big = plus_minus(big);
    if small.len() > big.len() {
        return false;
    }
    // a basis of `small` and every vector in its coordinates
    let mut basis: Vec<Vec<i64>> = Vec::new();
    for v in &small {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if rank_i64(&trial) == trial.len() {
            basis = trial;
        }
        if basis.len() == n {
            break;
        }
    }
    if basis.len() < n {
        return false;
    }
    let bm = ExactMatrix::from_i64(&basis).transpose();
    let Some(inv) = bm.inverse() else {
        return false;
    };
    let coords: Vec<Vec<ExactScalar>> = small
        .iter()
        .map(|v| inv.mul_vec(&v.iter().map(|&x| ExactScalar::from_int(x)).collect::<Vec<_>>()))
        .collect();
    // vectors whose coordinates only involve the first k basis vectors
    let depth: Vec<usize> = coords
        .iter()
        .map(|c| c.iter().rposition(|x| !x.is_zero()).map_or(0, |p| p + 1))
        .collect();
    let big_set: std::collections::BTreeSet<&Vec<i64>> = big.iter().collect();
    let mut images: Vec<&Vec<i64>> = Vec::with_capacity(n);

    fn rec<'a>(
        k: usize,
        n: usize,
        big: &'a [Vec<i64>],
        big_set: &std::collections::BTreeSet<&Vec<i64>>,
        coords: &[Vec<ExactScalar>],
        depth: &[usize],
        images: &mut Vec<&'a Vec<i64>>,
    ) -> bool {
        // every vector determined by the chosen images must land in `big`
        for (c, &d) in coords.iter().zip(depth) {
            if d != k || k == 0 {
                continue;
            }
            let mut img = vec![ExactScalar::zero(); n];
            for (j, t) in images.iter().enumerate() {
                if c[j].is_zero() {
                    continue;
                }
                for (a, &x) in img.iter_mut().zip(t.iter()) {
                    *a += &(&c[j] * &ExactScalar::from_int(x));
                }
            }
            let Some(ints) = img.iter().map(ExactScalar::to_i64).collect::<Option<Vec<i64>>>() else {
                return false;
            };
            if img.iter().any(|x| !x.is_integer()) || !big_set.contains(&ints) {
                return false;
            }
        }
        if k == n {
            let d = det_i64(images);
            return d == BigInt::from(1) || d == BigInt::from(-1);
        }
        for t in big {
            images.push(t);
            if rank_i64(images) == images.len() && rec(k + 1, n, big, big_set, coords, depth, images) {
                return true;
            }
            images.pop();
        }
        false
    }
    rec(0, n, &big, &big_set, &coords, &depth, &mut images)
}

/// Matroidal check over all top cells, with the resulting unimodular systems.
pub fn check_matroidal_theorem(n: usize, domains: &[CellRecord], workers: usize) -> Result<MatroidalReport> {
    let reports = parallel_map(domains, workers, |d| check_matroidal_cell(n, d));
    let mut cells = Vec::with_capacity(domains.len());
    let mut systems: BTreeMap<CanonicalKey, UnimodularSystem> = BTreeMap::new();
    for (d, r) in domains.iter().zip(reports) {
        let r = r?;
        if r.pass && r.spanning {
            let key = canonical_form(&plus_minus(&r.vectors))?.key;
            systems
                .entry(key.clone())
                .or_insert_with(|| UnimodularSystem {
                    key,
                    vectors: r.vectors.clone(),
                    cells: Vec::new(),
                })
                .cells
                .push(d.key.clone());
        }
        cells.push(r);
    }
    let systems: Vec<UnimodularSystem> = systems.into_values().collect();
    let maximal_systems = systems
        .iter()
        .filter(|s| {
            !systems
                .iter()
                .any(|t| t.key != s.key && t.vectors.len() > s.vectors.len() && embeds(&s.vectors, &t.vectors))
        })
        .cloned()
        .collect();
    let passed = cells.iter().filter(|c| c.pass).count();
    Ok(MatroidalReport {
        n,
        cells,
        passed,
        systems,
        maximal_systems,
    })
}

/// The closed ball around `(x + y)/2` through `x` and `y` holds no other lattice point.
pub fn segment_delaunay_test(a: &ExactMatrix, x: &[i64], y: &[i64]) -> Result<bool> {
    let form = LatticeForm::new(a)?;
    if x.len() != form.dim() || y.len() != form.dim() {
        return Err(Error::Dimension("points and form disagree".into()));
    }
    let half = ExactScalar::ratio(1, 2);
    let center: Vec<ExactScalar> = x
        .iter()
        .zip(y)
        .map(|(&p, &q)| &ExactScalar::from_int(p + q) * &half)
        .collect();
    let d: Vec<ExactScalar> = x
        .iter()
        .zip(y)
        .map(|(&p, &q)| &ExactScalar::from_int(p - q) * &half)
        .collect();
    let r = a.evaluate_form(&d);
    let pts = form.points_in_ball(&center, &r);
    Ok(pts.iter().all(|p| p.as_slice() == x || p.as_slice() == y))
}

// ---------------------------------------------------------------------------
// Conway–Sloane

/// Verdict for one pair of cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub first: CanonicalKey,
    pub second: CanonicalKey,
    /// Class permutation applied to the second image (`None` for the identity).
    pub permutation: Option<Vec<usize>>,
    /// Dimension of `Θ(C₁) ∩ Θ(C₂)`.
    pub intersection_dim: usize,
    pub relative_interiors_disjoint: bool,
    pub face_of_first: bool,
    pub face_of_second: bool,
    /// `None` when the common face holds no positive definite form.
    pub faces_equivalent: Option<bool>,
    /// Sum of the first cell's inequalities tight on the intersection, in its coordinates.
    pub supporting_functional_first: Vec<i64>,
    pub supporting_functional_second: Vec<i64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConwaySloaneReport {
    pub n: usize,
    pub permutation_mode: bool,
    pub pairs: Vec<PairReport>,
    pub passed: usize,
}

impl ConwaySloaneReport {
    pub fn all_pass(&self) -> bool {
        self.passed == self.pairs.len()
    }
}

fn to_big_rows(m: &ExactMatrix) -> Vec<Vec<ExactScalar>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Left inverse `(MᵀM)⁻¹Mᵀ` of an injective map.
fn left_inverse(m: &ExactMatrix) -> Result<ExactMatrix> {
    let mt = m.transpose();
    let g = (&mt * m)
        .inverse()
        .ok_or_else(|| Error::Validation("theta map is not injective".into()))?;
    Ok(&g * &mt)
}

/// Integer rows proportional to the rational rows `h·M` of a product.
fn pull_back(rows: &[Vec<i64>], m: &ExactMatrix) -> Vec<Vec<i64>> {
    rows.iter()
        .map(|h| {
            let hq: Vec<ExactScalar> = h.iter().map(|&x| ExactScalar::from_int(x)).collect();
            let row: Vec<ExactScalar> = (0..m.cols())
                .map(|j| (0..m.rows()).map(|i| &hq[i] * &m[(i, j)]).sum())
                .collect();
            primitive_i64_from_rational(&row).expect("coefficients fit in 64 bits")
        })
        .filter(|r| r.iter().any(|&x| x != 0))
        .collect()
}

fn tight_sum(ineqs: &[Vec<i64>], x: &[ExactScalar]) -> (Vec<i64>, Vec<usize>) {
    let d = x.len();
    let mut f = vec![0i64; d];
    let mut tight = Vec::new();
    for (i, h) in ineqs.iter().enumerate() {
        let v: ExactScalar = h
            .iter()
            .zip(x)
            .map(|(&a, b)| b * &ExactScalar::from_int(a))
            .sum();
        if v.is_zero() {
            tight.push(i);
            for (a, b) in f.iter_mut().zip(h) {
                *a += b;
            }
        }
    }
    (f, tight)
}

fn lies_in(cone: &Cone, x: &[ExactScalar]) -> bool {
    let eval = |h: &Vec<i64>| -> ExactScalar {
        h.iter()
            .zip(x)
            .map(|(&a, b)| b * &ExactScalar::from_int(a))
            .sum()
    };
    cone.equalities().iter().all(|e| eval(e).is_zero())
        && cone
            .inequalities()
            .unwrap_or_default()
            .iter()
            .all(|h| !eval(h).is_negative())
}

/// Rays of `cell` on every inequality tight at `x` (the minimal face containing `x`).
fn minimal_face_rays<'a>(cell: &'a CellRecord, tight: &[usize]) -> Vec<&'a Vec<i64>> {
    let ineqs = cell.cone.inequalities().unwrap_or_default();
    cell.rays()
        .iter()
        .filter(|r| {
            tight
                .iter()
                .all(|&i| ineqs[i].iter().zip(r.iter()).map(|(a, b)| a * b).sum::<i64>() == 0)
        })
        .collect()
}

fn qvec(v: &[i64]) -> Vec<ExactScalar> {
    v.iter().map(|&x| ExactScalar::from_int(x)).collect()
}

fn configuration_at(n: usize, x: &[ExactScalar]) -> Option<Vec<Vec<i64>>> {
    let a = SymCoordinates::new(n, x.to_vec()).ok()?.to_matrix();
    let form = LatticeForm::new(&a).ok()?;
    let mut out: Vec<Vec<i64>> = ParityVector::all(n).flat_map(|v| form.class_vectors(v)).collect();
    out.sort();
    Some(out)
}

/// Compares `Θ(C₁)` with `π(Θ(C₂))`, where `π` permutes class coordinates.
pub fn compare_pair(
    n: usize,
    c1: (&CellRecord, &ThetaLinearMap),
    c2: (&CellRecord, &ThetaLinearMap),
    permutation: Option<&[usize]>,
) -> Result<PairReport> {
    let (cell1, map1) = c1;
    let (cell2, map2) = c2;
    let m1 = &map1.matrix;
    let m2 = match permutation {
        None => map2.matrix.clone(),
        // row v of the permuted image is row π(v) of the original
        Some(p) => ExactMatrix::from_rows(p.iter().map(|&j| map2.matrix.row(j).to_vec()).collect())?,
    };
    let d = sym_dim(n);
    let l2 = left_inverse(&m2)?;
    let l1 = left_inverse(m1)?;
    // P = L₂M₁ sends Q to the form of the second cell with the same image
    let p = &l2 * m1;
    // Θ₁Q ∈ im Θ₂  ⟺  (M₂L₂ − I)M₁Q = 0
    let proj = &(&m2 * &l2) * m1;
    let residual = proj.sub(m1);
    let eq_rows: Vec<Vec<i64>> = to_big_rows(&residual)
        .iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .map(|r| primitive_i64_from_rational(r).expect("coefficients fit in 64 bits"))
        .collect();
    let ineqs2 = cell2.cone.inequalities().unwrap_or_default();
    let mut ineqs = cell1.cone.inequalities().unwrap_or_default().to_vec();
    ineqs.extend(pull_back(ineqs2, &p));
    let mut eqs = cell1.cone.equalities().to_vec();
    eqs.extend(eq_rows);
    eqs.extend(pull_back(cell2.cone.equalities(), &p));
    let k = polyhedra::dd_rays_from_inequalities(&Cone::from_inequalities(d, ineqs, eqs)?)?;
    let krays = k.rays().expect("rays computed").to_vec();
    let dim = k.dim();

    let mut report = PairReport {
        first: cell1.key.clone(),
        second: cell2.key.clone(),
        permutation: permutation.map(<[usize]>::to_vec),
        intersection_dim: dim,
        relative_interiors_disjoint: true,
        face_of_first: true,
        face_of_second: true,
        faces_equivalent: None,
        supporting_functional_first: vec![0; d],
        supporting_functional_second: vec![0; d],
        pass: true,
    };
    if krays.is_empty() {
        return Ok(report);
    }
    let x_int: Vec<i64> = (0..d).map(|j| krays.iter().map(|r| r[j]).sum()).collect();
    let x = qvec(&x_int);
    let y = p.mul_vec(&x);

    let (f1, t1) = tight_sum(cell1.cone.inequalities().unwrap_or_default(), &x);
    let (f2, t2) = tight_sum(ineqs2, &y);
    report.supporting_functional_first = f1;
    report.supporting_functional_second = f2;
    report.relative_interiors_disjoint = !(t1.is_empty() && t2.is_empty());

    report.face_of_first = minimal_face_rays(cell1, &t1).iter().all(|r| lies_in(&k, &qvec(r)));
    report.face_of_second = minimal_face_rays(cell2, &t2).iter().all(|r| {
        // the preimage in the first cell's coordinates must lie in K with the same image
        let z = l1.mul_vec(&m2.mul_vec(&qvec(r)));
        m1.mul_vec(&z) == m2.mul_vec(&qvec(r)) && lies_in(&k, &z)
    });

    if let (Some(cfg1), Some(cfg2)) = (configuration_at(n, &x), configuration_at(n, &y)) {
        report.faces_equivalent = Some(are_equivalent_systems(&cfg1, &cfg2)?.is_some());
    }
    let same_cell = permutation.is_some() && t1.is_empty() && t2.is_empty() && report.face_of_first && report.face_of_second;
    report.pass = (report.relative_interiors_disjoint || same_cell)
        && report.face_of_first
        && report.face_of_second
        && report.faces_equivalent != Some(false);
    Ok(report)
}

/// Class permutations induced by `GL_n(F₂)`, as `π[v] = g·v`.
pub fn gl_f2_permutations(n: usize) -> Vec<Vec<usize>> {
    let size = 1u32 << n;
    let mut out = Vec::new();
    let mut cols = vec![0u32; n];
    fn rec(i: usize, n: usize, size: u32, cols: &mut Vec<u32>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            let perm = (1..size)
                .map(|v| {
                    let img = (0..n).filter(|&k| v >> k & 1 == 1).fold(0u32, |a, k| a ^ cols[k]);
                    img as usize - 1
                })
                .collect();
            out.push(perm);
            return;
        }
        for c in 1..size {
            // c must be independent of the chosen columns
            let span_has = (0u32..(1 << i)).any(|m| {
                (0..i).filter(|&k| m >> k & 1 == 1).fold(0u32, |a, k| a ^ cols[k]) == c
            });
            if !span_has {
                cols[i] = c;
                rec(i + 1, n, size, cols, out);
            }
        }
    }
    rec(0, n, size, &mut cols, &mut out);
    out
}

/// Pairwise check over the given cells. In permutation mode (`n ≤ 4`) every
/// ordered pair is compared under every class permutation from `GL_n(F₂)`.
pub fn conway_sloane_check(
    n: usize,
    domains: &[CellRecord],
    permutation_mode: bool,
    workers: usize,
) -> Result<ConwaySloaneReport> {
    if permutation_mode && n > 4 {
        return Err(Error::UnsupportedDimension(n));
    }
    let maps: Vec<ThetaLinearMap> = domains
        .iter()
        .map(|d| theta_linear_map(n, d))
        .collect::<Result<_>>()?;
    let mut jobs: Vec<(usize, usize, Option<&[usize]>)> = Vec::new();
    if permutation_mode {
        let perms = gl_f2_permutations(n);
        for i in 0..domains.len() {
            for j in 0..domains.len() {
                for p in &perms {
                    let identity = p.iter().enumerate().all(|(a, &b)| a == b);
                    if identity && i >= j {
                        continue;
                    }
                    jobs.push((i, j, if identity { None } else { Some(p.as_slice()) }));
                }
            }
        }
        return finish_pairs(n, true, domains, &maps, &jobs, workers);
    }
    for i in 0..domains.len() {
        for j in (i + 1)..domains.len() {
            jobs.push((i, j, None));
        }
    }
    finish_pairs(n, false, domains, &maps, &jobs, workers)
}

fn finish_pairs(
    n: usize,
    permutation_mode: bool,
    domains: &[CellRecord],
    maps: &[ThetaLinearMap],
    jobs: &[(usize, usize, Option<&[usize]>)],
    workers: usize,
) -> Result<ConwaySloaneReport> {
    let pairs: Vec<PairReport> = parallel_map(jobs, workers, |&(i, j, p)| {
        compare_pair(n, (&domains[i], &maps[i]), (&domains[j], &maps[j]), p)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let passed = pairs.iter().filter(|p| p.pass).count();
    Ok(ConwaySloaneReport {
        n,
        permutation_mode,
        pairs,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{enumerate_primitive, Options};
    use crate::isoedge::from_form;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::ratio(n, d)
    }

    fn domains(n: usize) -> Vec<CellRecord> {
        enumerate_primitive(n, &Options::default()).unwrap().domains
    }

    #[test]
    fn hexagonal_theta_map() {
        let d = &domains(2)[0];
        let map = theta_linear_map(2, d).unwrap();
        // coordinates (a, c, b) of [[a, b], [b, c]]
        let p = SymCoordinates::from_i64(2, &[5, 7, -2]).unwrap();
        assert_eq!(map.apply(&p), vec![q(-5, 4), q(-7, 4), q(-(5 - 4 + 7), 4)]);
        assert_eq!(map.rank(), 3);
    }

    #[test]
    fn theta_maps_are_injective_on_domains() {
        for n in 2..=4 {
            for d in domains(n) {
                assert_eq!(theta_linear_map(n, &d).unwrap().rank(), sym_dim(n));
            }
        }
    }

    #[test]
    fn theta_map_matches_direct_evaluation_inside() {
        for d in domains(4) {
            let map = theta_linear_map(4, &d).unwrap();
            // interior points with uneven ray weights
            let rays = d.rays();
            let x: Vec<i64> = (0..sym_dim(4))
                .map(|j| rays.iter().enumerate().map(|(i, r)| (i as i64 + 1) * r[j]).sum())
                .collect();
            let s = SymCoordinates::from_i64(4, &x).unwrap();
            assert_eq!(map.apply(&s), crate::lattice::theta_vector(&s.to_matrix()).unwrap());
        }
    }

    #[test]
    fn conorm_examples() {
        for n in 2..=5 {
            let c = conorm_vector(&ExactMatrix::identity(n)).unwrap();
            for v in ParityVector::all(n) {
                let expected = if v.bits().count_ones() == 1 { 1 } else { 0 };
                assert_eq!(c.get(v), &q(expected, 1), "n = {n}, v = {v}");
            }
        }
        let a2 = ExactMatrix::from_i64(&[[2, -1], [-1, 2]]);
        assert_eq!(conorm_vector(&a2).unwrap().values, vec![q(1, 1); 3]);
        // A3 root lattice: vectors e1, e2, e3, e1−e2, e1−e3, e2−e3 with weight 1
        let a3 = ExactMatrix::from_i64(&[[3, -1, -1], [-1, 3, -1], [-1, -1, 3]]);
        let c = conorm_vector(&a3).unwrap();
        let support: Vec<u32> = c.support().iter().map(|v| v.bits()).collect();
        assert_eq!(support, vec![0b001, 0b010, 0b011, 0b100, 0b101, 0b110]);
        assert!(c.support().iter().all(|v| c.get(*v) == &q(1, 1)));
    }

    #[test]
    fn conorm_transform_squares_to_a_multiple_of_identity() {
        for n in 2..=5 {
            let x: Vec<ExactScalar> = (0..1i64 << n).map(|i| q(i * i - 3 * i + 1, 1 + i % 3)).collect();
            let twice = conorm_transform(n, &conorm_transform(n, &x));
            let factor = if n <= 6 { q(1 << (6 - n), 1) } else { unreachable!() };
            let expected: Vec<ExactScalar> = x.iter().map(|t| t * &factor).collect();
            assert_eq!(twice, expected);
        }
    }

    #[test]
    fn unimodular_examples() {
        let mut an = Vec::new();
        for i in 0..4 {
            let mut e = vec![0; 4];
            e[i] = 1;
            an.push(e);
            for j in (i + 1)..4 {
                let mut d = vec![0; 4];
                d[i] = 1;
                d[j] = -1;
                an.push(d);
            }
        }
        assert!(is_unimodular_system(&an).unwrap());
        assert!(!is_unimodular_system(&[vec![1, 0], vec![0, 1], vec![1, 2]]).unwrap());
        assert!(is_unimodular_system(&[vec![1, 0, 0], vec![0, 1, 0]]).is_err());
        // the same A_4 system inside Z^5
        let padded: Vec<Vec<i64>> = an.iter().map(|v| [vec![0], v.clone()].concat()).collect();
        assert!(is_unimodular_in_span(&padded));
        assert!(is_unimodular_in_span(&an));
        assert!(!is_unimodular_in_span(&[vec![1, 1, 0], vec![1, -1, 0]]));
        assert!(!is_unimodular_in_span(&[vec![1, 0, 0], vec![0, 1, 0], vec![1, 2, 0]]));
        assert!(is_unimodular_in_span(&[vec![1, 1, 1]]));
    }

    #[test]
    fn segment_examples() {
        let i2 = ExactMatrix::identity(2);
        assert!(segment_delaunay_test(&i2, &[0, 0], &[1, 0]).unwrap());
        assert!(!segment_delaunay_test(&i2, &[0, 0], &[1, 1]).unwrap());
        let a2 = ExactMatrix::from_i64(&[[2, -1], [-1, 2]]);
        assert!(segment_delaunay_test(&a2, &[0, 0], &[1, 1]).unwrap());
    }

    #[test]
    fn closest_pairs_of_primitive_forms_are_delaunay_edges() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let mut checked = 0;
        while checked < 20 {
            let n = 2 + checked % 3;
            let a = crate::arith::test_support::random_pd(&mut rng, n, 3);
            let Ok(c) = from_form(&a) else { continue };
            for v in ParityVector::all(n) {
                let d = v.doubled();
                let w = c.rep(v);
                let x: Vec<i64> = w.iter().zip(&d).map(|(a, b)| (a + b) / 2).collect();
                let y: Vec<i64> = d.iter().zip(&x).map(|(a, b)| a - b).collect();
                assert!(segment_delaunay_test(&a, &x, &y).unwrap());
            }
            checked += 1;
        }
    }

    #[test]
    fn rank_one_rays() {
        assert_eq!(
            rank_one_decomposition(2, &[4, 1, -2]),
            Some((q(1, 1), vec![2, -1]))
        );
        assert_eq!(rank_one_decomposition(2, &[1, 1, 0]), None);
        assert_eq!(rank_one_decomposition(2, &[-1, 0, 0]), None);
    }

    #[test]
    fn matroidal_small_dimensions() {
        for n in [2, 3] {
            let r = check_matroidal_theorem(n, &domains(n), 1).unwrap();
            assert!(r.all_pass());
            // the whole domain is matroidal
            for (cell, d) in r.cells.iter().zip(domains(n)) {
                assert_eq!(cell.rays, d.rays().len());
            }
        }
        let r = check_matroidal_theorem(4, &domains(4), 2).unwrap();
        assert_eq!(r.passed, 3);
        let mut sizes: Vec<usize> = r.maximal_systems.iter().map(|s| s.vectors.len()).collect();
        sizes.sort();
        // cographic K_{3,3} and graphic K_5
        assert_eq!(sizes, vec![9, 10]);
    }

    #[test]
    fn embedding_of_systems() {
        let e = vec![vec![1, 0], vec![0, 1]];
        let a2 = vec![vec![1, 0], vec![0, 1], vec![1, -1]];
        assert!(embeds(&e, &a2));
        assert!(!embeds(&a2, &e));
        let skew = vec![vec![1, 1], vec![0, 1], vec![1, 2]];
        assert!(embeds(&a2, &skew));
    }

    #[test]
    fn gl_f2_sizes() {
        assert_eq!(gl_f2_permutations(2).len(), 6);
        assert_eq!(gl_f2_permutations(3).len(), 168);
        for p in gl_f2_permutations(3) {
            let mut s = p.clone();
            s.sort();
            assert_eq!(s, (0..7).collect::<Vec<_>>());
        }
    }

    #[test]
    fn conway_sloane_small() {
        assert!(conway_sloane_check(2, &domains(2), false, 1).unwrap().pairs.is_empty());
        let r = conway_sloane_check(4, &domains(4), false, 2).unwrap();
        assert_eq!((r.passed, r.pairs.len()), (3, 3));
        let r = conway_sloane_check(3, &domains(3), true, 1).unwrap();
        assert!(r.all_pass() && r.pairs.len() == 167);
    }
}
