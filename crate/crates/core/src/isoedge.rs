//! Primitive iso-edge configurations: one `±` vector pair per parity class, the
//! zero-sum triples among them, the cone they cut out, and flips across facets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::int::sign_normalized;
use crate::arith::{quadratic_functional, sym_dim, ExactMatrix, ExactScalar};
use crate::error::{Error, Result};
use crate::lattice::{DegenerateClass, LatticeForm, ParityVector};
use crate::polyhedra::{self, Cone, FacetClass};

/// Three classes with signs such that `Σ sign·rep = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedTriple {
    pub classes: [usize; 3],
    pub signs: [i8; 3],
}

impl SignedTriple {
    /// The signed vector of member `m`.
    pub fn vector(&self, config: &IsoEdgeConfiguration, m: usize) -> Vec<i64> {
        let s = self.signs[m] as i64;
        config.reps[self.classes[m]].iter().map(|x| s * x).collect()
    }
}

/// `A[v_j] + A[v_k] − A[v_i] ≥ 0` for the triple with distinguished member `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleInequality {
    pub triple: usize,
    /// Position (0, 1 or 2) of the distinguished member within the triple.
    pub distinguished: usize,
    pub functional: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration", into = "RawConfiguration")]
pub struct IsoEdgeConfiguration {
    n: usize,
    /// Indexed by class index; first nonzero entry positive.
    reps: Vec<Vec<i64>>,
    triples: Vec<SignedTriple>,
}

#[derive(Serialize, Deserialize)]
struct RawConfiguration {
    n: usize,
    reps: Vec<Vec<i64>>,
}

impl TryFrom<RawConfiguration> for IsoEdgeConfiguration {
    type Error = Error;
    fn try_from(raw: RawConfiguration) -> Result<Self> {
        IsoEdgeConfiguration::new(raw.n, raw.reps)
    }
}

impl From<IsoEdgeConfiguration> for RawConfiguration {
    fn from(c: IsoEdgeConfiguration) -> Self {
        RawConfiguration { n: c.n, reps: c.reps }
    }
}

fn find_triples(reps: &[Vec<i64>]) -> Vec<SignedTriple> {
    let count = reps.len();
    let mut out = Vec::new();
    for a in 0..count {
        for b in (a + 1)..count {
            let c = ((a + 1) ^ (b + 1)) - 1;
            if c <= b {
                continue;
            }
            let (va, vb, vc) = (&reps[a], &reps[b], &reps[c]);
            let sum: Vec<i64> = va.iter().zip(vb).map(|(x, y)| x + y).collect();
            let diff: Vec<i64> = va.iter().zip(vb).map(|(x, y)| x - y).collect();
            let neg = |v: &[i64]| v.iter().map(|x| -x).collect::<Vec<i64>>();
            let signs = if &sum == vc {
                Some([1, 1, -1])
            } else if neg(&sum) == *vc {
                Some([1, 1, 1])
            } else if &diff == vc {
                Some([1, -1, -1])
            } else if neg(&diff) == *vc {
                Some([1, -1, 1])
            } else {
                None
            };
            if let Some(signs) = signs {
                out.push(SignedTriple {
                    classes: [a, b, c],
                    signs,
                });
            }
        }
    }
    out
}

impl IsoEdgeConfiguration {
    /// Builds a configuration from one representative per class (in class order),
    /// checking parities; representatives are sign-normalized.
    pub fn new(n: usize, reps: Vec<Vec<i64>>) -> Result<Self> {
        if !(1..=31).contains(&n) || reps.len() != ParityVector::count(n) {
            return Err(Error::Dimension(format!(
                "expected {} representatives for n = {n}",
                (1usize << n.min(31)) - 1
            )));
        }
        let mut normalized = Vec::with_capacity(reps.len());
        for (i, r) in reps.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Dimension("representative of wrong length".into()));
            }
            if ParityVector::of_vector(r).map(|p| p.index()) != Some(i) {
                return Err(Error::Validation(format!(
                    "representative {r:?} does not lie in class {}",
                    ParityVector::from_index(n, i)
                )));
            }
            normalized.push(sign_normalized(r));
        }
        let triples = find_triples(&normalized);
        Ok(IsoEdgeConfiguration {
            n,
            reps: normalized,
            triples,
        })
    }

    /// Inverse of [`vector_system`](Self::vector_system): picks the vector of
    /// each class.
    pub fn from_vector_system(n: usize, vectors: &[Vec<i64>]) -> Result<Self> {
        let mut reps = vec![Vec::new(); ParityVector::count(n)];
        for v in vectors {
            let cls = ParityVector::of_vector(v)
                .ok_or_else(|| Error::Validation(format!("vector {v:?} has no parity class")))?;
            let v = sign_normalized(v);
            if !reps[cls.index()].is_empty() && reps[cls.index()] != v {
                return Err(Error::Validation(format!("class {cls} has more than one pair")));
            }
            reps[cls.index()] = v;
        }
        if reps.iter().any(Vec::is_empty) {
            return Err(Error::Validation("some parity class has no vector".into()));
        }
        Self::new(n, reps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reps(&self) -> &[Vec<i64>] {
        &self.reps
    }

    pub fn rep(&self, v: ParityVector) -> &[i64] {
        &self.reps[v.index()]
    }

    pub fn triples(&self) -> &[SignedTriple] {
        &self.triples
    }

    /// The full system `{±v}` of `2(2^n − 1)` vectors, sorted.
    pub fn vector_system(&self) -> Vec<Vec<i64>> {
        let mut out: Vec<Vec<i64>> = self
            .reps
            .iter()
            .flat_map(|r| [r.clone(), r.iter().map(|x| -x).collect()])
            .collect();
        out.sort();
        out
    }

    /// The configuration obtained by applying `g` to every vector.
    pub fn transform(&self, g: &[Vec<i64>]) -> Result<Self> {
        let mut reps = vec![Vec::new(); self.reps.len()];
        for r in &self.reps {
            let img: Vec<i64> = g.iter().map(|row| crate::arith::int::dot_i64(row, r)).collect();
            let cls = ParityVector::of_vector(&img)
                .ok_or_else(|| Error::Validation("transform is not unimodular".into()))?;
            reps[cls.index()] = img;
        }
        if reps.iter().any(Vec::is_empty) {
            return Err(Error::Validation("transform is not unimodular".into()));
        }
        Self::new(self.n, reps)
    }
}

/// The configuration of a primitive form; otherwise the degenerate classes.
pub fn from_form(a: &ExactMatrix) -> Result<IsoEdgeConfiguration> {
    from_lattice_form(&LatticeForm::new(a)?)
}

pub fn from_lattice_form(form: &LatticeForm) -> Result<IsoEdgeConfiguration> {
    let n = form.dim();
    let mut reps = Vec::with_capacity(ParityVector::count(n));
    let mut degenerate = Vec::new();
    for v in ParityVector::all(n) {
        let w = form.class_vectors(v);
        if w.len() == 2 {
            reps.push(w[1].clone());
        } else {
            degenerate.push(DegenerateClass {
                class: v,
                minimizers: w.len(),
            });
        }
    }
    if !degenerate.is_empty() {
        return Err(Error::NonPrimitive(degenerate));
    }
    IsoEdgeConfiguration::new(n, reps)
}

/// `Σ_{0≤i<j≤n} p_ij (e_i − e_j)(e_i − e_j)ᵀ` with `e_0 = 0` and
/// `p_ij = 1 + r/(100 + seed)` for the `r`-th pair.
pub fn selling_form(n: usize, seed: u64) -> ExactMatrix {
    let basis = |i: usize| -> Vec<i64> {
        (0..n)
            .map(|k| i64::from(k + 1 == i))
            .collect()
    };
    let den = 100 + seed as i64;
    let mut a = ExactMatrix::zeros(n, n);
    let mut r = 0;
    for i in 0..=n {
        for j in (i + 1)..=n {
            r += 1;
            let (bi, bj) = (basis(i), basis(j));
            let d: Vec<i64> = bi.iter().zip(&bj).map(|(x, y)| x - y).collect();
            let p = &ExactScalar::one() + &ExactScalar::ratio(r, den);
            a = a.add(&ExactMatrix::outer_i64(&d).scale(&p));
        }
    }
    a
}

/// The configuration of a generic form in Voronoi's principal domain.
pub fn principal_configuration(n: usize) -> IsoEdgeConfiguration {
    principal_configuration_with_seed(n, 0).1
}

/// Like [`principal_configuration`], starting the Selling perturbation at `seed`
/// and moving to the next seed while the sampled form is not primitive.
/// Returns the seed actually used.
pub fn principal_configuration_with_seed(n: usize, seed: u64) -> (u64, IsoEdgeConfiguration) {
    assert!(n >= 1);
    for s in seed..seed + 1000 {
        if let Ok(c) = from_form(&selling_form(n, s)) {
            return (s, c);
        }
    }
    panic!("no primitive Selling form found for n = {n}");
}

/// All triple inequalities, three per triple, in triple order.
pub fn zero_triples(c: &IsoEdgeConfiguration) -> Vec<TripleInequality> {
    let mut out = Vec::with_capacity(3 * c.triples.len());
    for (t, tr) in c.triples.iter().enumerate() {
        let q: Vec<Vec<i64>> = tr
            .classes
            .iter()
            .map(|&k| quadratic_functional(&c.reps[k]))
            .collect();
        for d in 0..3 {
            let (j, k) = ((d + 1) % 3, (d + 2) % 3);
            let functional = (0..q[0].len())
                .map(|x| q[j][x] + q[k][x] - q[d][x])
                .collect();
            out.push(TripleInequality {
                triple: t,
                distinguished: d,
                functional,
            });
        }
    }
    out
}

/// The cone cut out by all triple inequalities (inequality `3t + d` belongs to
/// triple `t` with distinguished member `d`).
pub fn cone_of(c: &IsoEdgeConfiguration) -> Cone {
    let ineqs = zero_triples(c).into_iter().map(|t| t.functional).collect();
    Cone::from_inequalities(sym_dim(c.n), ineqs, Vec::new()).expect("functionals have the right length")
}

/// A configuration together with its cone (both descriptions) and facet classes.
#[derive(Clone, Debug)]
pub struct Domain {
    pub config: IsoEdgeConfiguration,
    pub cone: Cone,
    pub facets: Vec<FacetClass>,
}

impl Domain {
    pub fn new(config: IsoEdgeConfiguration) -> Result<Self> {
        let cone = polyhedra::dd_rays_from_inequalities(&cone_of(&config))?;
        let facets = polyhedra::irredundant_facets(&cone)?;
        Ok(Domain {
            config,
            cone,
            facets,
        })
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        self.cone.rays().expect("domain cones carry rays")
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    /// Crosses facet `f`: each distinguished vector `v_i` of the facet's triples
    /// becomes `v_j − v_k`.
    pub fn flip(&self, f: usize) -> Result<IsoEdgeConfiguration> {
        let facet = self.facets.get(f).ok_or(Error::UnknownFacet)?;
        flip_with(&self.config, facet)
    }

    /// Sum of the facet's rays (relative interior of the facet).
    pub fn facet_point(&self, f: usize) -> Vec<i64> {
        sum_rays(self.rays(), self.facets[f].rays.iter().copied())
    }

    /// Checks the flipped configuration by locating a form just across the facet
    /// whose closest-point structure is exactly the new configuration.
    pub fn certify_flip(&self, f: usize, flipped: &IsoEdgeConfiguration) -> Result<ExactMatrix> {
        let n = self.config.n;
        let p = self.facet_point(f);
        let on_facet: Vec<bool> = {
            let mut v = vec![false; self.rays().len()];
            for &r in &self.facets[f].rays {
                v[r] = true;
            }
            v
        };
        let q = sum_rays(self.rays(), (0..on_facet.len()).filter(|&i| !on_facet[i]));
        let mut last = None;
        for k in 1..48 {
            let t = 1i64 << k;
            let x: Vec<ExactScalar> = p
                .iter()
                .zip(&q)
                .map(|(&a, &b)| ExactScalar::from_int(t * a - b))
                .collect();
            let a = crate::arith::SymCoordinates::new(n, x)?.to_matrix();
            let Ok(form) = LatticeForm::new(&a) else {
                continue;
            };
            match from_lattice_form(&form) {
                Ok(c) if &c == flipped => return Ok(a),
                Ok(c) => last = Some(c),
                Err(_) => {}
            }
        }
        Err(Error::Validation(format!(
            "flip across facet {f} not confirmed by any form near the facet (last seen {last:?})"
        )))
    }
}

fn sum_rays(rays: &[Vec<i64>], idx: impl Iterator<Item = usize>) -> Vec<i64> {
    let mut p = vec![0i64; rays.first().map_or(0, Vec::len)];
    for i in idx {
        for (a, b) in p.iter_mut().zip(&rays[i]) {
            *a += b;
        }
    }
    p
}

/// Flip across `facet`, which must be a facet class of `cone_of(c)`.
pub fn flip(c: &IsoEdgeConfiguration, facet: &FacetClass) -> Result<IsoEdgeConfiguration> {
    let cone = polyhedra::dd_rays_from_inequalities(&cone_of(c))?;
    if !polyhedra::irredundant_facets(&cone)?.contains(facet) {
        return Err(Error::UnknownFacet);
    }
    flip_with(c, facet)
}

fn flip_with(c: &IsoEdgeConfiguration, facet: &FacetClass) -> Result<IsoEdgeConfiguration> {
    let mut replaced: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    for &i in &facet.inequalities {
        let tr = c.triples.get(i / 3).ok_or(Error::UnknownFacet)?;
        let d = i % 3;
        let vj = tr.vector(c, (d + 1) % 3);
        let vk = tr.vector(c, (d + 2) % 3);
        let new = sign_normalized(&vj.iter().zip(&vk).map(|(a, b)| a - b).collect::<Vec<_>>());
        let cls = tr.classes[d];
        if let Some(prev) = replaced.insert(cls, new.clone()) {
            if prev != new {
                return Err(Error::Validation(format!(
                    "facet assigns two different replacements to class {}",
                    ParityVector::from_index(c.n, cls)
                )));
            }
        }
    }
    let mut reps = c.reps.clone();
    for (cls, v) in replaced {
        reps[cls] = v;
    }
    IsoEdgeConfiguration::new(c.n, reps)
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub ok: bool,
    pub diagnosis: String,
}

/// Round trip: interior point of the cone, positive definiteness, and the
/// configuration of that form.
pub fn validate(c: &IsoEdgeConfiguration) -> Validation {
    let fail = |d: String| Validation {
        ok: false,
        diagnosis: d,
    };
    let cone = match polyhedra::dd_rays_from_inequalities(&cone_of(c)) {
        Ok(k) => k,
        Err(e) => return fail(format!("cone computation failed: {e}")),
    };
    let p = match polyhedra::interior_point(&cone) {
        Ok(p) => p,
        Err(e) => return fail(format!("no interior point: {e}")),
    };
    let full = sym_dim(c.n);
    let dim = cone.dim();
    if dim != full {
        return fail(format!("cone has dimension {dim}, expected {full}"));
    }
    let a = crate::arith::SymCoordinates::new(c.n, p)
        .expect("length matches")
        .to_matrix();
    if let Err(e) = a.check_positive_definite() {
        return fail(format!("interior point is not positive definite: {e}"));
    }
    match from_form(&a) {
        Ok(found) if &found == c => Validation {
            ok: true,
            diagnosis: "ok".into(),
        },
        Ok(found) => {
            let diffs: Vec<String> = ParityVector::all(c.n)
                .filter(|v| found.rep(*v) != c.rep(*v))
                .map(|v| format!("{v}: expected {:?}, found {:?}", c.rep(v), found.rep(v)))
                .collect();
            fail(format!("interior form has a different configuration ({})", diffs.join("; ")))
        }
        Err(Error::NonPrimitive(d)) => fail(format!(
            "interior form is not primitive: {}",
            d.iter()
                .map(|x| format!("{} has {} closest points", x.class, x.minimizers))
                .collect::<Vec<_>>()
                .join(", ")
        )),
        Err(e) => fail(e.to_string()),
    }
}
