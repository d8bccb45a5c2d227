use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isoedge_core::arith::sym_dim;
use isoedge_core::enumeration::{enumerate_primitive, Options};
use isoedge_core::equivalence::{are_equivalent_systems, canonical_key};
use isoedge_core::isoedge::from_form;
use isoedge_core::lattice::{theta_vector, LatticeForm, ParityVector};
use isoedge_core::tropical::{conorm_vector, theta_linear_map};
use isoedge_core::{ExactMatrix, ExactScalar};

fn gram(b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = b.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| b[k][i] * b[k][j]).sum::<i64>() + (i == j) as i64)
                .collect()
        })
        .collect()
}

fn random_unimodular(rng: &mut impl Rng, n: usize, steps: usize, even: bool) -> Vec<Vec<i64>> {
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    for _ in 0..steps {
        if n < 2 {
            break;
        }
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let c = if even { 2 * rng.gen_range(-1..=1) } else { rng.gen_range(-1..=1) };
        for row in u.iter_mut() {
            row[i] += c * row[j];
        }
        if !even && rng.gen_bool(0.3) {
            for row in u.iter_mut() {
                row.swap(i, j);
            }
        }
    }
    u
}

fn apply(g: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    g.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// `16·A[x − p/4]` for integer `A`.
fn scaled_value(a: &[Vec<i64>], x: &[i64], p: &[i64]) -> i64 {
    let d: Vec<i64> = x.iter().zip(p).map(|(x, p)| 4 * x - p).collect();
    (0..d.len())
        .map(|i| (0..d.len()).map(|j| a[i][j] * d[i] * d[j]).sum::<i64>())
        .sum()
}

/// Exhaustive search over the box `|x_i − t_i|² ≤ m·(A⁻¹)_ii`, where `m` is the
/// value at the rounded target.
fn box_search(a: &[Vec<i64>], p: &[i64]) -> (i64, BTreeSet<Vec<i64>>) {
    let n = a.len();
    let round: Vec<i64> = p.iter().map(|&p| (p as f64 / 4.0).round() as i64).collect();
    let m0 = ExactScalar::ratio(scaled_value(a, &round, p), 16);
    let inv = ExactMatrix::from_i64(a).inverse().unwrap();
    let radius: Vec<i64> = (0..n)
        .map(|i| {
            let r2 = &m0 * &inv[(i, i)];
            (0..).find(|&r: &i64| ExactScalar::from_int(r * r) >= r2).unwrap() + 1
        })
        .collect();
    let mut best = i64::MAX;
    let mut set = BTreeSet::new();
    let mut x: Vec<i64> = round.iter().zip(&radius).map(|(r, w)| r - w).collect();
    loop {
        let v = scaled_value(a, &x, p);
        if v < best {
            best = v;
            set.clear();
        }
        if v == best {
            set.insert(x.clone());
        }
        let mut i = 0;
        while i < n && x[i] == round[i] + radius[i] {
            x[i] = round[i] - radius[i];
            i += 1;
        }
        if i == n {
            break;
        }
        x[i] += 1;
    }
    (best, set)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closest_points_match_box_search(
        n in 1usize..=4,
        b in prop::collection::vec(prop::collection::vec(-2i64..=2, 4), 4),
        p in prop::collection::vec(-6i64..=6, 4),
    ) {
        let b: Vec<Vec<i64>> = b[..n].iter().map(|r| r[..n].to_vec()).collect();
        let a = gram(&b);
        let p = &p[..n];
        let form = LatticeForm::new(&ExactMatrix::from_i64(&a)).unwrap();
        let target: Vec<ExactScalar> = p.iter().map(|&p| ExactScalar::ratio(p, 4)).collect();
        let got = form.closest_points(&target);
        let (best, set) = box_search(&a, p);
        prop_assert_eq!(got.min_value, ExactScalar::ratio(best, 16));
        prop_assert_eq!(got.minimizers.into_iter().collect::<BTreeSet<_>>(), set);
    }

    #[test]
    fn conorms_recover_graphic_coefficients(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = rng.gen_range(3..=6);
        let n = nodes - 1;
        let mut edges = BTreeSet::new();
        for j in 1..nodes {
            edges.insert((rng.gen_range(0..j), j));
        }
        for i in 0..nodes {
            for j in (i + 1)..nodes {
                if rng.gen_bool(0.4) {
                    edges.insert((i, j));
                }
            }
        }
        let g = random_unimodular(&mut rng, n, 8, false);
        let mut a = ExactMatrix::zeros(n, n);
        let mut expected = vec![ExactScalar::zero(); ParityVector::count(n)];
        for &(i, j) in &edges {
            // node 0 is the origin
            let mut v = vec![0i64; n];
            if i > 0 {
                v[i - 1] = 1;
            }
            v[j - 1] -= 1;
            let v = apply(&g, &v);
            let c = ExactScalar::ratio(rng.gen_range(1..20), rng.gen_range(1..6));
            a = a.add(&ExactMatrix::outer_i64(&v).scale(&c));
            expected[ParityVector::of_vector(&v).unwrap().index()] = c;
        }
        prop_assert_eq!(conorm_vector(&a).unwrap().values, expected);
    }

    #[test]
    fn planted_even_transforms_keep_theta_and_the_system(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=4);
        // A_n root system: e_i and e_i − e_j
        let mut system = Vec::new();
        for i in 0..n {
            let mut e = vec![0i64; n];
            e[i] = 1;
            system.push(e);
            for j in (i + 1)..n {
                let mut d = vec![0i64; n];
                d[i] = 1;
                d[j] = -1;
                system.push(d);
            }
        }
        let coeffs: Vec<ExactScalar> = system.iter().map(|_| ExactScalar::ratio(rng.gen_range(1..9), rng.gen_range(1..4))).collect();
        let build = |vs: &[Vec<i64>]| {
            vs.iter().zip(&coeffs).fold(ExactMatrix::zeros(n, n), |acc, (v, c)| acc.add(&ExactMatrix::outer_i64(v).scale(c)))
        };
        let u = random_unimodular(&mut rng, n, 10, true);
        let moved: Vec<Vec<i64>> = system.iter().map(|v| apply(&u, v)).collect();
        let (a, b) = (build(&system), build(&moved));
        prop_assert_eq!(theta_vector(&a).unwrap(), theta_vector(&b).unwrap());
        let recover = |m: &ExactMatrix| {
            let c = conorm_vector(m).unwrap();
            c.support().len()
        };
        prop_assert_eq!(recover(&a), system.len());
        prop_assert_eq!(recover(&b), system.len());
        prop_assert!(are_equivalent_systems(&system, &moved).unwrap().is_some());
    }
}

#[test]
fn theta_maps_have_full_rank_on_every_domain() {
    for n in 2..=4 {
        for d in enumerate_primitive(n, &Options::default()).unwrap().domains {
            assert_eq!(theta_linear_map(n, &d).unwrap().rank(), sym_dim(n));
        }
    }
}

#[test]
fn keys_survive_unimodular_transforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut configs = Vec::new();
    for n in 2..=4 {
        for d in enumerate_primitive(n, &Options::default()).unwrap().domains {
            configs.push(d.primitive_configuration(n).unwrap());
        }
    }
    while configs.len() < 12 {
        let n = rng.gen_range(2..=4);
        let b: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        if let Ok(c) = from_form(&ExactMatrix::from_i64(&gram(&b))) {
            configs.push(c);
        }
    }
    for c in &configs {
        let key = canonical_key(c);
        for _ in 0..25 {
            let g = random_unimodular(&mut rng, c.n(), 12, false);
            assert_eq!(canonical_key(&c.transform(&g).unwrap()), key);
        }
    }
}
