//! Exact closest-vector enumeration (Fincke–Pohst over the rational LDLᵀ).

use serde::{Deserialize, Serialize};

use super::ParityVector;
use crate::arith::{ExactMatrix, ExactScalar};
use crate::error::{Error, Result};

/// Minimum squared distance `min_x A[x − t]` and the complete set of minimizers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvpResult {
    pub min_value: ExactScalar,
    /// Sorted lexicographically.
    pub minimizers: Vec<Vec<i64>>,
}

/// A parity class whose closest-point set has more than two elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateClass {
    pub class: ParityVector,
    pub minimizers: usize,
}

/// A positive definite form with its LDLᵀ factorization cached for repeated
/// closest-vector queries.
#[derive(Clone, Debug)]
pub struct LatticeForm {
    n: usize,
    matrix: ExactMatrix,
    /// `lower[j][i] = L_{ji}` for `j > i`.
    lower: Vec<Vec<ExactScalar>>,
    diag: Vec<ExactScalar>,
}

struct Search<'a> {
    form: &'a LatticeForm,
    target: &'a [ExactScalar],
    bound: ExactScalar,
    adaptive: bool,
    x: Vec<i64>,
    z: Vec<ExactScalar>,
    found: Vec<Vec<i64>>,
}

impl Search<'_> {
    fn center(&self, i: usize) -> ExactScalar {
        let mut s = ExactScalar::zero();
        for j in (i + 1)..self.form.n {
            let l = &self.form.lower[j][i];
            if !l.is_zero() && !self.z[j].is_zero() {
                s += &(l * &self.z[j]);
            }
        }
        &self.target[i] - &s
    }

    fn visit(&mut self, i: usize, k: i64, c: &ExactScalar, partial: &ExactScalar) -> bool {
        let diff = &ExactScalar::from_int(k) - c;
        let val = partial + &(&self.form.diag[i] * &(&diff * &diff));
        if val > self.bound {
            return false;
        }
        self.x[i] = k;
        self.z[i] = &ExactScalar::from_int(k) - &self.target[i];
        if i == 0 {
            self.record(val);
        } else {
            self.descend(i - 1, &val);
        }
        true
    }

    fn record(&mut self, val: ExactScalar) {
        if self.adaptive && val < self.bound {
            self.bound = val;
            self.found.clear();
        }
        self.found.push(self.x.clone());
    }

    fn descend(&mut self, i: usize, partial: &ExactScalar) {
        let c = self.center(i);
        let r = c.round_half_up().to_i64().expect("coordinate out of range");
        let mut k = r;
        while self.visit(i, k, &c, partial) {
            k += 1;
        }
        let mut k = r - 1;
        while self.visit(i, k, &c, partial) {
            k -= 1;
        }
    }
}

impl LatticeForm {
    pub fn new(a: &ExactMatrix) -> Result<Self> {
        a.check_positive_definite()?;
        let f = a
            .ldlt_decompose()
            .expect("positive definite forms have nonzero pivots");
        let n = a.rows();
        let lower = (0..n)
            .map(|j| (0..n).map(|i| f.l[(j, i)].clone()).collect())
            .collect();
        Ok(LatticeForm {
            n,
            matrix: a.clone(),
            lower,
            diag: f.d,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.matrix
    }

    /// Value of Babai's nearest-plane point, used as the initial radius.
    fn nearest_plane_value(&self, target: &[ExactScalar]) -> ExactScalar {
        let mut z = vec![ExactScalar::zero(); self.n];
        let mut total = ExactScalar::zero();
        for i in (0..self.n).rev() {
            let mut s = ExactScalar::zero();
            for j in (i + 1)..self.n {
                s += &(&self.lower[j][i] * &z[j]);
            }
            let c = &target[i] - &s;
            let k = c.round_half_up();
            let diff = &k - &c;
            total += &(&self.diag[i] * &(&diff * &diff));
            z[i] = &k - &target[i];
        }
        total
    }

    /// All minimizers of `x ↦ A[x − t]` over `Z^n`.
    pub fn closest_points(&self, target: &[ExactScalar]) -> CvpResult {
        assert_eq!(target.len(), self.n);
        let bound = self.nearest_plane_value(target);
        let mut search = Search {
            form: self,
            target,
            bound,
            adaptive: true,
            x: vec![0; self.n],
            z: vec![ExactScalar::zero(); self.n],
            found: Vec::new(),
        };
        search.descend(self.n - 1, &ExactScalar::zero());
        let mut minimizers = search.found;
        minimizers.sort();
        minimizers.dedup();
        CvpResult {
            min_value: search.bound,
            minimizers,
        }
    }

    /// Every lattice point with `A[x − c] ≤ radius_sq`.
    pub fn points_in_ball(&self, center: &[ExactScalar], radius_sq: &ExactScalar) -> Vec<Vec<i64>> {
        assert_eq!(center.len(), self.n);
        let mut search = Search {
            form: self,
            target: center,
            bound: radius_sq.clone(),
            adaptive: false,
            x: vec![0; self.n],
            z: vec![ExactScalar::zero(); self.n],
            found: Vec::new(),
        };
        search.descend(self.n - 1, &ExactScalar::zero());
        let mut pts = search.found;
        pts.sort();
        pts
    }

    pub fn class_cvp(&self, v: ParityVector) -> CvpResult {
        assert_eq!(v.n(), self.n);
        self.closest_points(&v.to_half_vector())
    }

    /// The centered, doubled closest-point set `{2x − 2v : x ∈ tCVP(A, v)}`, sorted.
    pub fn class_vectors(&self, v: ParityVector) -> Vec<Vec<i64>> {
        let twice = v.doubled();
        let mut out: Vec<Vec<i64>> = self
            .class_cvp(v)
            .minimizers
            .iter()
            .map(|x| x.iter().zip(&twice).map(|(a, b)| 2 * a - b).collect())
            .collect();
        out.sort();
        out
    }

    pub fn theta_vector(&self) -> Vec<ExactScalar> {
        ParityVector::all(self.n)
            .map(|v| -self.class_cvp(v).min_value)
            .collect()
    }
}

/// `tcvp(A, v)` together with `tCVP(A, v)`.
pub fn closest_points(a: &ExactMatrix, v: ParityVector) -> Result<CvpResult> {
    if v.n() != a.rows() {
        return Err(Error::Dimension("parity vector and form disagree".into()));
    }
    Ok(LatticeForm::new(a)?.class_cvp(v))
}

/// Conway–Sloane vonorm of the class `2v + 2Z^n`: `4·tcvp(A, v)`.
pub fn vonorm(a: &ExactMatrix, v: ParityVector) -> Result<ExactScalar> {
    Ok(&ExactScalar::from_int(4) * &closest_points(a, v)?.min_value)
}

/// Tropical theta constants `Θ_v(A) = −tcvp(A, v)` in global class order.
pub fn theta_vector(a: &ExactMatrix) -> Result<Vec<ExactScalar>> {
    Ok(LatticeForm::new(a)?.theta_vector())
}

/// Facet vectors of the Voronoi cell coming from classes with exactly two
/// closest points, both signs included, sorted.
pub fn voronoi_relevant_vectors(a: &ExactMatrix) -> Result<Vec<Vec<i64>>> {
    let form = LatticeForm::new(a)?;
    let mut out = Vec::new();
    for v in ParityVector::all(form.dim()) {
        let w = form.class_vectors(v);
        if w.len() == 2 {
            out.extend(w);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::test_support::{random_pd, random_unimodular_i64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::ratio(n, d)
    }

    fn pv(n: usize, bits: u32) -> ParityVector {
        ParityVector::new(n, bits).unwrap()
    }

    /// Exhaustive search over a box; the box radius comes from the covering
    /// bound `A[x − t] ≤ Σ d_i / 4` and `|x_i − t_i| ≤ sqrt(bound · (A⁻¹)_ii)`.
    fn brute_force(a: &ExactMatrix, target: &[ExactScalar]) -> CvpResult {
        let n = a.rows();
        let f = a.ldlt_decompose().unwrap();
        let cover: ExactScalar = f.d.iter().sum::<ExactScalar>() * q(1, 4);
        let inv = a.inverse().unwrap();
        let radius: Vec<i64> = (0..n)
            .map(|i| {
                let r2 = &cover * &inv[(i, i)];
                let mut k = 0i64;
                while ExactScalar::from_int(k * k) < r2 {
                    k += 1;
                }
                k + 1
            })
            .collect();
        let mut best: Option<ExactScalar> = None;
        let mut pts = Vec::new();
        let mut x: Vec<i64> = (0..n)
            .map(|i| target[i].floor().to_i64().unwrap() - radius[i])
            .collect();
        let lo = x.clone();
        loop {
            let z: Vec<ExactScalar> = x
                .iter()
                .zip(target)
                .map(|(a, b)| &ExactScalar::from_int(*a) - b)
                .collect();
            let val = a.evaluate_form(&z);
            match &best {
                Some(b) if val > *b => {}
                Some(b) if val == *b => pts.push(x.clone()),
                _ => {
                    best = Some(val);
                    pts = vec![x.clone()];
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    pts.sort();
                    return CvpResult {
                        min_value: best.unwrap(),
                        minimizers: pts,
                    };
                }
                x[i] += 1;
                if x[i] <= lo[i] + 2 * radius[i] + 1 {
                    break;
                }
                x[i] = lo[i];
                i += 1;
            }
        }
    }

    #[test]
    fn identity_examples() {
        let r = closest_points(&ExactMatrix::identity(2), pv(2, 0b01)).unwrap();
        assert_eq!(r.min_value, q(1, 4));
        assert_eq!(r.minimizers, vec![vec![0, 0], vec![1, 0]]);
        for n in 1..6 {
            let r = closest_points(&ExactMatrix::identity(n), pv(n, (1 << n) - 1)).unwrap();
            assert_eq!(r.min_value, q(n as i64, 4));
            assert_eq!(r.minimizers.len(), 1 << n);
        }
    }

    #[test]
    fn a2_dual_example() {
        let a = ExactMatrix::from_i64(&[[2, 1], [1, 2]]);
        let r = closest_points(&a, pv(2, 0b11)).unwrap();
        assert_eq!(r.min_value, q(1, 2));
        assert_eq!(r.minimizers, vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(r, brute_force(&a, &pv(2, 0b11).to_half_vector()));
    }

    #[test]
    fn vonorm_examples() {
        let i2 = ExactMatrix::identity(2);
        assert_eq!(vonorm(&i2, pv(2, 0b01)).unwrap(), q(1, 1));
        assert_eq!(vonorm(&i2, pv(2, 0b11)).unwrap(), q(2, 1));
        let a = ExactMatrix::from_i64(&[[2, 1], [1, 2]]);
        assert_eq!(vonorm(&a, pv(2, 0b11)).unwrap(), q(2, 1));
    }

    #[test]
    fn theta_examples() {
        let i2 = ExactMatrix::identity(2);
        assert_eq!(theta_vector(&i2).unwrap(), vec![q(-1, 4), q(-1, 4), q(-1, 2)]);
        let four = theta_vector(&i2.scale(&q(4, 1))).unwrap();
        assert_eq!(four, vec![q(-1, 1), q(-1, 1), q(-2, 1)]);
        let a = ExactMatrix::from_i64(&[[2, -1], [-1, 2]]);
        assert_eq!(theta_vector(&a).unwrap(), vec![q(-1, 2); 3]);
    }

    #[test]
    fn relevant_vectors() {
        let a = ExactMatrix::from_i64(&[[2, -1], [-1, 2]]);
        let v = voronoi_relevant_vectors(&a).unwrap();
        assert_eq!(
            v,
            vec![vec![-1, -1], vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
        let v = voronoi_relevant_vectors(&ExactMatrix::identity(2)).unwrap();
        assert_eq!(v, vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
        let g = ExactMatrix::from_i64(&[[2, -1], [-1, 3]]);
        assert_eq!(voronoi_relevant_vectors(&g).unwrap().len(), 6);
    }

    #[test]
    fn rejects_non_pd() {
        let a = ExactMatrix::from_i64(&[[1, 2], [2, 1]]);
        assert!(matches!(
            closest_points(&a, pv(2, 1)),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn minimizers_symmetric_about_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.gen_range(1..5);
            let a = random_pd(&mut rng, n, 3);
            let form = LatticeForm::new(&a).unwrap();
            for v in ParityVector::all(n) {
                let r = form.class_cvp(v);
                let twice = v.doubled();
                for x in &r.minimizers {
                    let refl: Vec<i64> = x.iter().zip(&twice).map(|(a, b)| b - a).collect();
                    assert!(r.minimizers.contains(&refl));
                    let z: Vec<ExactScalar> = x
                        .iter()
                        .zip(v.to_half_vector())
                        .map(|(a, b)| &ExactScalar::from_int(*a) - &b)
                        .collect();
                    assert_eq!(a.evaluate_form(&z), r.min_value);
                }
            }
        }
    }

    #[test]
    fn oracle_equivalence_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let n = rng.gen_range(1..=4);
            let a = random_pd(&mut rng, n, 2);
            let form = LatticeForm::new(&a).unwrap();
            let v = ParityVector::new(n, rng.gen_range(1..(1u32 << n))).unwrap();
            let t = v.to_half_vector();
            assert_eq!(form.closest_points(&t), brute_force(&a, &t), "form {a:?} class {v}");
        }
    }

    #[test]
    fn equivariance_under_unimodular() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..40 {
            let n = rng.gen_range(2..=4);
            let a = random_pd(&mut rng, n, 2);
            let u = random_unimodular_i64(&mut rng, n, 8);
            let um = ExactMatrix::from_i64(&u);
            let b = &(&um.transpose() * &a) * &um;
            let fa = LatticeForm::new(&a).unwrap();
            let fb = LatticeForm::new(&b).unwrap();
            for v in ParityVector::all(n) {
                // B[y − v] = A[U y − U v]; U v reduces to the class of U·2v.
                let uv: Vec<i64> = (0..n)
                    .map(|i| (0..n).map(|j| u[i][j] * v.doubled()[j]).sum())
                    .collect();
                let w = ParityVector::of_vector(&uv).unwrap();
                let rb = fb.class_cvp(v);
                let ra = fa.class_cvp(w);
                assert_eq!(rb.min_value, ra.min_value);
                // minimizers map by y ↦ U y − (U v − w) up to the class translation
                let shift: Vec<i64> = uv
                    .iter()
                    .zip(w.doubled())
                    .map(|(a, b)| (a - b) / 2)
                    .collect();
                let mut mapped: Vec<Vec<i64>> = rb
                    .minimizers
                    .iter()
                    .map(|y| {
                        (0..n)
                            .map(|i| (0..n).map(|j| u[i][j] * y[j]).sum::<i64>() - shift[i])
                            .collect()
                    })
                    .collect();
                mapped.sort();
                assert_eq!(mapped, ra.minimizers);
            }
        }
    }
}
