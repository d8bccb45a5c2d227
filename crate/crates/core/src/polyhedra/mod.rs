//! Exact polyhedral cones with both descriptions.
//!
//! All vectors are primitive integer vectors. A cone `{x : E·x = 0, H·x ≥ 0}`
//! is converted to rays and a lineality basis by double description.

mod dd;

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::int::{dot_i128, make_primitive, primitive_from_rational, rank_i64};
use crate::arith::{ExactMatrix, ExactScalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    ambient_dim: usize,
    inequalities: Option<Vec<Vec<i64>>>,
    equalities: Vec<Vec<i64>>,
    rays: Option<Vec<Vec<i64>>>,
    lineality: Vec<Vec<i64>>,
}

/// A facet together with every inequality defining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetClass {
    /// Indices into the cone's inequality list; all define the same facet.
    pub inequalities: Vec<usize>,
    /// Indices of the extreme rays lying on the facet.
    pub rays: Vec<usize>,
}

impl FacetClass {
    pub fn multiplicity(&self) -> usize {
        self.inequalities.len()
    }
}

#[derive(Clone, Debug)]
pub struct Face {
    pub parent: Cone,
    pub active_inequalities: Vec<usize>,
    pub as_cone: Cone,
}

impl Face {
    pub fn dim(&self) -> usize {
        self.as_cone.dim()
    }
}

fn check_len(d: usize, vs: &[Vec<i64>]) -> Result<()> {
    match vs.iter().find(|v| v.len() != d) {
        Some(v) => Err(Error::Dimension(format!(
            "vector of length {} in ambient dimension {d}",
            v.len()
        ))),
        None => Ok(()),
    }
}

fn to_i64_vec(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| {
            x.to_i64()
                .ok_or_else(|| Error::Other(format!("cone coefficient {x} exceeds 64 bits")))
        })
        .collect()
}

fn to_rational(v: &[i64]) -> Vec<ExactScalar> {
    v.iter().map(|&x| ExactScalar::from_int(x)).collect()
}

fn rational_rows(rows: &[Vec<i64>], cols: usize) -> ExactMatrix {
    if rows.is_empty() {
        return ExactMatrix::zeros(0, cols);
    }
    ExactMatrix::from_rows(rows.iter().map(|r| to_rational(r)).collect())
        .expect("rows have equal length")
}

/// Primitive integer basis of `{x : row·x = 0 for every row}`.
fn kernel_i64(rows: &[Vec<i64>], cols: usize) -> Result<Vec<Vec<i64>>> {
    if rows.is_empty() {
        return Ok((0..cols)
            .map(|i| {
                let mut e = vec![0; cols];
                e[i] = 1;
                e
            })
            .collect());
    }
    let (_, ker) = rational_rows(rows, cols).rank_and_kernel();
    ker.iter()
        .map(|v| to_i64_vec(&primitive_from_rational(v)))
        .collect()
}

/// Canonical basis of a subspace: reduced echelon rows scaled to primitive integers.
fn echelon_basis(vs: &[Vec<i64>], cols: usize) -> Result<Vec<Vec<i64>>> {
    if vs.is_empty() {
        return Ok(Vec::new());
    }
    let (r, piv) = rational_rows(vs, cols).rref();
    (0..piv.len())
        .map(|i| to_i64_vec(&primitive_from_rational(r.row(i))))
        .collect()
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    dot_i128(a, b)
}

impl Cone {
    pub fn from_inequalities(
        ambient_dim: usize,
        inequalities: Vec<Vec<i64>>,
        equalities: Vec<Vec<i64>>,
    ) -> Result<Self> {
        check_len(ambient_dim, &inequalities)?;
        check_len(ambient_dim, &equalities)?;
        Ok(Cone {
            ambient_dim,
            inequalities: Some(inequalities),
            equalities,
            rays: None,
            lineality: Vec::new(),
        })
    }

    /// Cone generated by `rays` plus the linear span of `lineality`.
    pub fn from_rays(
        ambient_dim: usize,
        rays: Vec<Vec<i64>>,
        lineality: Vec<Vec<i64>>,
    ) -> Result<Self> {
        check_len(ambient_dim, &rays)?;
        check_len(ambient_dim, &lineality)?;
        let mut rays: Vec<Vec<i64>> = rays
            .into_iter()
            .filter(|r| r.iter().any(|&x| x != 0))
            .map(|mut r| {
                make_primitive(&mut r);
                r
            })
            .collect();
        rays.sort();
        rays.dedup();
        Ok(Cone {
            ambient_dim,
            inequalities: None,
            equalities: Vec::new(),
            rays: Some(rays),
            lineality: echelon_basis(&lineality, ambient_dim)?,
        })
    }

    /// Both descriptions at once; fails unless every ray satisfies the
    /// inequalities and equalities.
    pub fn from_descriptions(
        ambient_dim: usize,
        inequalities: Vec<Vec<i64>>,
        equalities: Vec<Vec<i64>>,
        rays: Vec<Vec<i64>>,
    ) -> Result<Self> {
        check_len(ambient_dim, &inequalities)?;
        check_len(ambient_dim, &equalities)?;
        check_len(ambient_dim, &rays)?;
        let c = Cone {
            ambient_dim,
            inequalities: Some(inequalities),
            equalities,
            rays: Some(rays),
            lineality: Vec::new(),
        };
        if !c.verify() {
            return Err(Error::Validation("rays violate the inequality description".into()));
        }
        Ok(c)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn inequalities(&self) -> Option<&[Vec<i64>]> {
        self.inequalities.as_deref()
    }

    pub fn equalities(&self) -> &[Vec<i64>] {
        &self.equalities
    }

    pub fn rays(&self) -> Option<&[Vec<i64>]> {
        self.rays.as_deref()
    }

    pub fn lineality(&self) -> &[Vec<i64>] {
        &self.lineality
    }

    /// The rays, computing them first when only inequalities are known.
    pub fn with_rays(&self) -> Result<Cone> {
        if self.rays.is_some() {
            Ok(self.clone())
        } else {
            dd_rays_from_inequalities(self)
        }
    }

    /// Dimension of the linear span.
    pub fn dim(&self) -> usize {
        match &self.rays {
            Some(rays) => {
                let gens: Vec<&Vec<i64>> = rays.iter().chain(&self.lineality).collect();
                rank_i64(&gens)
            }
            None => dd_rays_from_inequalities(self)
                .expect("double description of a valid cone")
                .dim(),
        }
    }

    /// Membership test against the inequality description.
    pub fn contains(&self, x: &[i64]) -> bool {
        let ineqs = self
            .inequalities
            .as_ref()
            .expect("membership needs an inequality description");
        self.equalities.iter().all(|e| dot(e, x) == 0) && ineqs.iter().all(|h| dot(h, x) >= 0)
    }

    /// Checks that the two descriptions agree on every generator.
    pub fn verify(&self) -> bool {
        let (Some(ineqs), Some(rays)) = (&self.inequalities, &self.rays) else {
            return true;
        };
        rays.iter().all(|r| {
            self.equalities.iter().all(|e| dot(e, r) == 0) && ineqs.iter().all(|h| dot(h, r) >= 0)
        }) && self.lineality.iter().all(|l| {
            self.equalities.iter().all(|e| dot(e, l) == 0) && ineqs.iter().all(|h| dot(h, l) == 0)
        })
    }

    /// Bitset of the rays on which `functional` vanishes.
    pub fn tight_rays(&self, functional: &[i64]) -> FixedBitSet {
        let rays = self.rays.as_ref().expect("rays required");
        let mut set = FixedBitSet::with_capacity(rays.len());
        for (i, r) in rays.iter().enumerate() {
            if dot(functional, r) == 0 {
                set.insert(i);
            }
        }
        set
    }
}

/// Adds the extreme rays (and lineality basis) to an inequality description.
pub fn dd_rays_from_inequalities(c: &Cone) -> Result<Cone> {
    let d = c.ambient_dim;
    let ineqs = c
        .inequalities
        .as_ref()
        .ok_or_else(|| Error::Other("cone has no inequality description".into()))?;
    let basis = kernel_i64(&c.equalities, d)?;
    let k = basis.len();
    let reduced: Vec<Vec<BigInt>> = ineqs
        .iter()
        .map(|h| basis.iter().map(|b| BigInt::from(dot(h, b))).collect())
        .collect();
    let (ys, lin_ys) = dd::extreme_rays(k, &reduced);
    let lift = |y: &[BigInt]| -> Result<Vec<i64>> {
        let mut x = vec![BigInt::zero(); d];
        for (yj, b) in y.iter().zip(&basis) {
            if yj.is_zero() {
                continue;
            }
            for (xi, &bi) in x.iter_mut().zip(b) {
                *xi += yj * bi;
            }
        }
        let g = x.iter().fold(BigInt::zero(), |g, v| num_integer::Integer::gcd(&g, v));
        if !g.is_zero() {
            x.iter_mut().for_each(|v| *v = &*v / &g);
        }
        to_i64_vec(&x)
    };
    let mut rays: Vec<Vec<i64>> = ys.iter().map(|y| lift(y)).collect::<Result<_>>()?;
    rays.sort();
    let lin: Vec<Vec<i64>> = lin_ys.iter().map(|y| lift(y)).collect::<Result<_>>()?;
    Ok(Cone {
        ambient_dim: d,
        inequalities: Some(ineqs.clone()),
        equalities: c.equalities.clone(),
        rays: Some(rays),
        lineality: echelon_basis(&lin, d)?,
    })
}

/// Adds the span equalities and the facet inequalities to a ray description.
pub fn dd_inequalities_from_rays(c: &Cone) -> Result<Cone> {
    let d = c.ambient_dim;
    let rays = c
        .rays
        .as_ref()
        .ok_or_else(|| Error::Other("cone has no ray description".into()))?;
    let gens: Vec<Vec<i64>> = rays.iter().chain(&c.lineality).cloned().collect();
    let equalities = echelon_basis(&kernel_i64(&gens, d)?, d)?;

    // Facet normals are the extreme rays of the polar cone.
    let polar = Cone {
        ambient_dim: d,
        inequalities: Some(rays.clone()),
        equalities: c.lineality.clone(),
        rays: None,
        lineality: Vec::new(),
    };
    let polar = dd_rays_from_inequalities(&polar)?;
    let normals = polar.rays.unwrap_or_default();

    // Reduce each normal modulo the equalities by projecting onto the span.
    let span = echelon_basis(&gens, d)?;
    let mut inequalities: Vec<Vec<i64>> = if equalities.is_empty() || span.is_empty() {
        normals
    } else {
        let b = rational_rows(&span, d);
        let gram_inv = (&b * &b.transpose())
            .inverse()
            .expect("echelon basis is independent");
        let proj = &(&b.transpose() * &gram_inv) * &b;
        normals
            .iter()
            .map(|h| to_i64_vec(&primitive_from_rational(&proj.mul_vec(&to_rational(h)))))
            .collect::<Result<_>>()?
    };
    inequalities.sort();
    inequalities.dedup();
    Ok(Cone {
        ambient_dim: d,
        inequalities: Some(inequalities),
        equalities,
        rays: Some(rays.clone()),
        lineality: c.lineality.clone(),
    })
}

/// Facet classes of a cone: inequalities grouped by the set of rays they cut out,
/// keeping only groups whose rays span a hyperplane of the cone.
pub fn irredundant_facets(c: &Cone) -> Result<Vec<FacetClass>> {
    let c = c.with_rays()?;
    let ineqs = c
        .inequalities
        .as_ref()
        .ok_or_else(|| Error::Other("cone has no inequality description".into()))?;
    let rays = c.rays.as_ref().expect("rays computed");
    let dim = c.dim();
    if dim == 0 {
        return Ok(Vec::new());
    }
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (i, h) in ineqs.iter().enumerate() {
        let tight: Vec<usize> = c.tight_rays(h).ones().collect();
        if tight.len() == rays.len() {
            continue;
        }
        groups.entry(tight).or_default().push(i);
    }
    let mut out = Vec::new();
    for (tight, members) in groups {
        let gens: Vec<&Vec<i64>> = tight.iter().map(|&i| &rays[i]).chain(&c.lineality).collect();
        if rank_i64(&gens) + 1 == dim {
            out.push(FacetClass {
                inequalities: members,
                rays: tight,
            });
        }
    }
    out.sort_by(|a, b| a.inequalities.cmp(&b.inequalities));
    Ok(out)
}

/// The face cut out by making the `active` inequalities tight.
pub fn face_of(c: &Cone, active: &[usize]) -> Result<Face> {
    let parent = c.with_rays()?;
    let ineqs = parent
        .inequalities
        .clone()
        .ok_or_else(|| Error::Other("cone has no inequality description".into()))?;
    if let Some(&bad) = active.iter().find(|&&i| i >= ineqs.len()) {
        return Err(Error::Other(format!("inequality index {bad} out of range")));
    }
    let rays: Vec<Vec<i64>> = parent
        .rays
        .as_ref()
        .expect("rays computed")
        .iter()
        .filter(|r| active.iter().all(|&i| dot(&ineqs[i], r) == 0))
        .cloned()
        .collect();
    let mut equalities = parent.equalities.clone();
    equalities.extend(active.iter().map(|&i| ineqs[i].clone()));
    let as_cone = Cone {
        ambient_dim: parent.ambient_dim,
        inequalities: Some(ineqs),
        equalities,
        rays: Some(rays),
        lineality: parent.lineality.clone(),
    };
    Ok(Face {
        parent,
        active_inequalities: active.to_vec(),
        as_cone,
    })
}

/// Intersection of two cones, with rays recomputed.
pub fn intersect(c1: &Cone, c2: &Cone) -> Result<Cone> {
    if c1.ambient_dim != c2.ambient_dim {
        return Err(Error::Dimension("cones live in different spaces".into()));
    }
    let with_ineqs = |c: &Cone| -> Result<Cone> {
        if c.inequalities.is_some() {
            Ok(c.clone())
        } else {
            dd_inequalities_from_rays(c)
        }
    };
    let (a, b) = (with_ineqs(c1)?, with_ineqs(c2)?);
    let mut ineqs = a.inequalities.unwrap_or_default();
    ineqs.extend(b.inequalities.unwrap_or_default());
    let mut eqs = a.equalities;
    eqs.extend(b.equalities);
    dd_rays_from_inequalities(&Cone::from_inequalities(c1.ambient_dim, ineqs, eqs)?)
}

/// Image of a cone under `m` (rows × ambient), with its dual description.
pub fn linear_image(c: &Cone, m: &ExactMatrix) -> Result<Cone> {
    let c = c.with_rays()?;
    if m.cols() != c.ambient_dim {
        return Err(Error::Dimension(format!(
            "map has {} columns, cone lives in dimension {}",
            m.cols(),
            c.ambient_dim
        )));
    }
    let image = |v: &Vec<i64>| -> Result<Vec<i64>> {
        to_i64_vec(&primitive_from_rational(&m.mul_vec(&to_rational(v))))
    };
    let rays = c.rays.as_ref().expect("rays computed").iter().map(image).collect::<Result<_>>()?;
    let lin = c.lineality.iter().map(image).collect::<Result<_>>()?;
    dd_inequalities_from_rays(&Cone::from_rays(m.rows(), rays, lin)?)
}

/// Integer interior point: the sum of all rays and lineality basis vectors.
pub fn interior_point_i64(c: &Cone) -> Result<Vec<i64>> {
    let c = c.with_rays()?;
    let rays = c.rays.as_ref().expect("rays computed");
    if rays.is_empty() && c.lineality.is_empty() {
        return Err(Error::EmptyInterior);
    }
    let mut p = vec![0i64; c.ambient_dim];
    for v in rays.iter().chain(&c.lineality) {
        for (pi, &vi) in p.iter_mut().zip(v) {
            *pi = pi
                .checked_add(vi)
                .ok_or_else(|| Error::Other("interior point overflow".into()))?;
        }
    }
    Ok(p)
}

/// A point of the relative interior, as a rational vector.
pub fn interior_point(c: &Cone) -> Result<Vec<ExactScalar>> {
    Ok(to_rational(&interior_point_i64(c)?))
}

/// Sign of `h·x` for an integer functional and point.
pub fn evaluate_sign(h: &[i64], x: &[i64]) -> i32 {
    dot(h, x).signum() as i32
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orthant(d: usize) -> Cone {
        let ineqs = (0..d)
            .map(|i| {
                let mut e = vec![0; d];
                e[i] = 1;
                e
            })
            .collect();
        Cone::from_inequalities(d, ineqs, vec![]).unwrap()
    }

    #[test]
    fn rays_examples() {
        let c = dd_rays_from_inequalities(&orthant(3)).unwrap();
        assert_eq!(c.rays().unwrap(), &[vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);

        let h = Cone::from_inequalities(2, vec![vec![1, 0]], vec![]).unwrap();
        let h = dd_rays_from_inequalities(&h).unwrap();
        assert_eq!(h.rays().unwrap(), &[vec![1, 0]]);
        assert_eq!(h.lineality(), &[vec![0, 1]]);

        let c = Cone::from_inequalities(
            3,
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, -1], vec![0, 0, 1]],
            vec![],
        )
        .unwrap();
        let c = dd_rays_from_inequalities(&c).unwrap();
        assert_eq!(
            c.rays().unwrap(),
            &[vec![0, 1, 0], vec![0, 1, 1], vec![1, 0, 0], vec![1, 0, 1]]
        );
    }

    #[test]
    fn inequalities_examples() {
        let c = Cone::from_rays(3, vec![vec![1, 0, 0], vec![0, 1, 0]], vec![]).unwrap();
        let c = dd_inequalities_from_rays(&c).unwrap();
        assert_eq!(c.equalities(), &[vec![0, 0, 1]]);
        assert_eq!(c.inequalities().unwrap(), &[vec![0, 1, 0], vec![1, 0, 0]]);

        let r = Cone::from_rays(2, vec![vec![1, 2]], vec![]).unwrap();
        let r = dd_inequalities_from_rays(&r).unwrap();
        assert_eq!(r.equalities(), &[vec![2, -1]]);
        // x ≥ 0 up to the equality: the projected normal is a positive multiple of (1, 2)
        assert_eq!(r.inequalities().unwrap(), &[vec![1, 2]]);
        assert!(r.verify());

        let o = dd_rays_from_inequalities(&orthant(3)).unwrap();
        let back = dd_inequalities_from_rays(&Cone::from_rays(3, o.rays().unwrap().to_vec(), vec![]).unwrap())
            .unwrap();
        let mut expected = orthant(3).inequalities().unwrap().to_vec();
        expected.sort();
        assert_eq!(back.inequalities().unwrap(), expected.as_slice());
    }

    #[test]
    fn facets_examples() {
        let c = Cone::from_inequalities(2, vec![vec![1, 0], vec![0, 1], vec![1, 1]], vec![]).unwrap();
        let f = irredundant_facets(&c).unwrap();
        assert_eq!(f.iter().map(|f| f.inequalities.clone()).collect::<Vec<_>>(), vec![vec![0], vec![1]]);

        let c = Cone::from_inequalities(2, vec![vec![1, 0], vec![2, 0], vec![0, 1]], vec![]).unwrap();
        let f = irredundant_facets(&c).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].inequalities, vec![0, 1]);
        assert_eq!(f[0].multiplicity(), 2);
        assert_eq!(f[1].inequalities, vec![2]);
    }

    #[test]
    fn faces_and_intersections() {
        let o = orthant(3);
        let f = face_of(&o, &[0]).unwrap();
        assert_eq!(f.dim(), 2);
        assert_eq!(f.as_cone.rays().unwrap(), &[vec![0, 0, 1], vec![0, 1, 0]]);
        assert_eq!(face_of(&o, &[0, 1, 2]).unwrap().dim(), 0);

        let q = orthant(2);
        let h = Cone::from_inequalities(2, vec![vec![-1, 0]], vec![]).unwrap();
        let i = intersect(&q, &h).unwrap();
        assert_eq!(i.rays().unwrap(), &[vec![0, 1]]);
        assert!(i.lineality().is_empty());

        let qq = intersect(&q, &q).unwrap();
        assert_eq!(qq.rays(), dd_rays_from_inequalities(&q).unwrap().rays());
    }

    #[test]
    fn images_and_interior() {
        let o = orthant(3);
        let drop_z = ExactMatrix::from_i64(&[[1, 0, 0], [0, 1, 0]]);
        let img = linear_image(&o, &drop_z).unwrap();
        assert_eq!(img.rays().unwrap(), &[vec![0, 1], vec![1, 0]]);
        assert!(img.equalities().is_empty());

        let id = linear_image(&o, &ExactMatrix::identity(3)).unwrap();
        assert_eq!(id.rays(), dd_rays_from_inequalities(&o).unwrap().rays());

        assert_eq!(interior_point_i64(&orthant(2)).unwrap(), vec![1, 1]);
        let r = Cone::from_rays(2, vec![vec![1, 2]], vec![]).unwrap();
        assert_eq!(interior_point_i64(&r).unwrap(), vec![1, 2]);
        let zero = Cone::from_rays(2, vec![], vec![]).unwrap();
        assert!(matches!(interior_point_i64(&zero), Err(Error::EmptyInterior)));
    }

    fn random_ray_cone(rng: &mut ChaCha8Rng) -> Cone {
        let d = rng.gen_range(2..=10);
        let m = rng.gen_range(1..=12);
        let rays: Vec<Vec<i64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.gen_range(-3..=3)).collect())
            .collect();
        Cone::from_rays(d, rays, vec![]).unwrap()
    }

    /// Extreme rays by brute force: a generator is extreme iff it is not a
    /// nonnegative combination of the others, certified via the facet description.
    fn check_ray_properties(c: &Cone) {
        let rays = c.rays().unwrap();
        let ineqs = c.inequalities().unwrap();
        let k = c.ambient_dim() - c.lineality().len();
        for r in rays {
            let tight: Vec<Vec<i64>> = ineqs
                .iter()
                .filter(|h| dot(h, r) == 0)
                .cloned()
                .chain(c.equalities().iter().cloned())
                .collect();
            assert_eq!(rank_i64(&tight), k - 1, "ray {r:?} is not extreme");
        }
    }

    #[test]
    fn duality_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let c = random_ray_cone(&mut rng);
            let full = dd_inequalities_from_rays(&c).unwrap();
            assert!(full.verify());
            let back = dd_rays_from_inequalities(&Cone::from_inequalities(
                c.ambient_dim(),
                full.inequalities().unwrap().to_vec(),
                full.equalities().to_vec(),
            )
            .unwrap())
            .unwrap();
            assert!(back.verify());
            check_ray_properties(&back);
            // the extreme rays of the generated cone are a subset of the generators
            for r in back.rays().unwrap() {
                assert!(c.rays().unwrap().contains(r) || !back.lineality().is_empty());
            }
            if back.lineality().is_empty() {
                let again = dd_rays_from_inequalities(&Cone::from_inequalities(
                    c.ambient_dim(),
                    back.inequalities().unwrap().to_vec(),
                    back.equalities().to_vec(),
                )
                .unwrap())
                .unwrap();
                assert_eq!(again.rays(), back.rays());
            }
            let p = interior_point_i64(&back).unwrap();
            for f in irredundant_facets(&back).unwrap() {
                let h = &back.inequalities().unwrap()[f.inequalities[0]];
                assert!(dot(h, &p) > 0);
            }
        }
    }

    #[test]
    fn intersection_is_contained() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let d = rng.gen_range(2..=6);
            let gen = |rng: &mut ChaCha8Rng| {
                let rays: Vec<Vec<i64>> = (0..rng.gen_range(d..=d + 4))
                    .map(|_| (0..d).map(|_| rng.gen_range(-3..=3)).collect())
                    .collect();
                dd_inequalities_from_rays(&Cone::from_rays(d, rays, vec![]).unwrap()).unwrap()
            };
            let (a, b) = (gen(&mut rng), gen(&mut rng));
            let i = intersect(&a, &b).unwrap();
            for r in i.rays().unwrap().iter().chain(i.lineality()) {
                assert!(a.contains(r) && b.contains(r));
            }
        }
    }
}
