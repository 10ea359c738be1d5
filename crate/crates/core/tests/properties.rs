use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use curvecft::algebra::{cokernel, smith_normal_form, CyclotomicElem, IntMatrix, LatticeBasis};
use curvecft::classgroup::{ClassGroupCache, Orientation};
use curvecft::curve::{Curve, CurveRecord, Place};
use curvecft::divisor::{
    is_congruent_one, principal_divisor, riemann_roch_basis, CongruenceSystem, CurveFunction,
    Divisor,
};
use curvecft::dynamics::FiniteSystem;
use curvecft::experiment::{X_MINUS, X_PLUS};
use curvecft::field::{build_extension, is_irreducible, Poly, GF};

struct Fixture {
    curve: Arc<Curve>,
    groups: ClassGroupCache,
    places: Vec<Place>,
}

fn fixture(which: usize) -> &'static Fixture {
    static CELLS: [OnceLock<Fixture>; 2] = [OnceLock::new(), OnceLock::new()];
    CELLS[which].get_or_init(|| {
        let f = if which == 0 { X_PLUS } else { X_MINUS };
        let curve = Arc::new(
            Curve::from_record(&CurveRecord {
                q: 3,
                f: f.to_vec(),
            })
            .unwrap(),
        );
        let groups = ClassGroupCache::for_curve(curve.clone()).unwrap();
        let places = curve.places_up_to(3);
        Fixture {
            curve,
            groups,
            places,
        }
    })
}

fn affine_places(fx: &Fixture) -> Vec<Place> {
    fx.places
        .iter()
        .filter(|p| !p.is_infinity())
        .cloned()
        .collect()
}

/// A nonzero function of L(n∞) from base-3 digits.
fn function(c: &Curve, n: i64, digits: &[u32]) -> CurveFunction {
    let basis = riemann_roch_basis(c, n);
    let mut phi = CurveFunction::default();
    for (psi, &d) in basis.iter().zip(digits) {
        if d % 3 != 0 {
            phi = phi.add(c, &psi.scale(c, d % 3));
        }
    }
    if phi.is_zero() {
        CurveFunction::one()
    } else {
        phi
    }
}

fn det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0] as i128;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> = m[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] as i128 * det(&minor)
        })
        .sum()
}

fn matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(-20i64..20, c), r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_form_is_a_diagonalization(m in matrix()) {
        let a = IntMatrix::from_rows(&m);
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a).mul(&s.v), s.d.clone());
        prop_assert_eq!(s.u.mul(&s.u_inv), IntMatrix::identity(a.rows()));
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    prop_assert!(s.d[(i, j)].is_zero());
                }
            }
        }
        let diag = s.diagonal();
        for w in diag.windows(2) {
            prop_assert!(!w[0].is_negative());
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            } else {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }
        if m.len() == m[0].len() {
            let d: BigInt = diag.iter().product();
            prop_assert_eq!(d, BigInt::from(det(&m).abs()));
        }
    }

    #[test]
    fn cokernel_projection_kills_exactly_the_lattice(
        rels in proptest::collection::vec(proptest::collection::vec(-6i64..6, 4), 1..6),
        combo in proptest::collection::vec(-3i64..3, 6),
        v in proptest::collection::vec(-8i64..8, 4),
    ) {
        let g = cokernel(4, &rels);
        let mut lattice = LatticeBasis::new(4);
        for r in &rels {
            lattice.insert(r);
        }
        let is_zero = |v: &[i64]| {
            let mut c = g.project_i64(v);
            g.reduce(&mut c);
            c.iter().all(|x| x.is_zero())
        };
        let mut w = vec![0i64; 4];
        for (r, k) in rels.iter().zip(&combo) {
            for i in 0..4 {
                w[i] += k * r[i];
            }
        }
        prop_assert!(is_zero(&w));
        prop_assert_eq!(is_zero(&v), lattice.contains(&v));
    }

    #[test]
    fn cyclotomic_products_match_complex_embeddings(
        n in prop::sample::select(vec![1u32, 2, 3, 4, 5, 6, 8, 9, 12]),
        factors in proptest::collection::vec(proptest::collection::vec(-3i64..4, 1..6), 1..11),
    ) {
        let elems: Vec<CyclotomicElem> = factors.iter().map(|c| CyclotomicElem::from_poly(n, c)).collect();
        let prod = elems.iter().fold(CyclotomicElem::one(n), |a, b| a.mul(b));
        let sum = elems.iter().fold(CyclotomicElem::zero(n), |a, b| a.add(b));
        for k in CyclotomicElem::embeddings(n) {
            let (mut re, mut im) = (1.0f64, 0.0f64);
            let (mut sre, mut sim) = (0.0f64, 0.0f64);
            for e in &elems {
                let (a, b) = e.to_complex(k);
                (re, im) = (re * a - im * b, re * b + im * a);
                sre += a;
                sim += b;
            }
            let (pre, pim) = prod.to_complex(k);
            let scale = 1.0 + re.abs() + im.abs();
            prop_assert!((pre - re).abs() <= 1e-9 * scale && (pim - im).abs() <= 1e-9 * scale);
            let (tre, tim) = sum.to_complex(k);
            prop_assert!((tre - sre).abs() <= 1e-9 && (tim - sim).abs() <= 1e-9);
        }
    }

    #[test]
    fn field_axioms(which in 0usize..4, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let k = GF::new(3, [1, 2, 3, 6][which]).unwrap();
        let s = k.size();
        let (a, b, c) = (a % s, b % s, c % s);
        prop_assert_eq!(k.add(k.add(a, b), c), k.add(a, k.add(b, c)));
        prop_assert_eq!(k.mul(k.mul(a, b), c), k.mul(a, k.mul(b, c)));
        prop_assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
        prop_assert_eq!(k.add(a, k.neg(a)), 0);
        prop_assert_eq!(k.sub(k.add(a, b), b), a);
        if a != 0 {
            prop_assert_eq!(k.mul(a, k.inv(a)), 1);
        }
    }

    #[test]
    fn frobenius_is_a_ring_homomorphism(a in any::<u32>(), b in any::<u32>()) {
        let base = Arc::new(GF::new(3, 2).unwrap());
        let ext = build_extension(&base, 3).unwrap();
        let k = &ext.field;
        let (a, b) = (a % k.size(), b % k.size());
        let f = |x| ext.frobenius_q(x);
        prop_assert_eq!(f(k.add(a, b)), k.add(f(a), f(b)));
        prop_assert_eq!(f(k.mul(a, b)), k.mul(f(a), f(b)));
    }

    #[test]
    fn expansions_are_multiplicative(
        which in 0usize..2,
        pick in any::<prop::sample::Index>(),
        d1 in proptest::collection::vec(0u32..3, 8),
        d2 in proptest::collection::vec(0u32..3, 8),
    ) {
        let fx = fixture(which);
        let c = &fx.curve;
        let places = &fx.places;
        let p = pick.get(places);
        let (phi, psi) = (function(c, 8, &d1), function(c, 8, &d2));
        let n = 6;
        let a = c.local_expand(p, &phi, n).unwrap();
        let b = c.local_expand(p, &psi, n).unwrap();
        let ab = c.local_expand(p, &phi.mul(c, &psi), n).unwrap();
        prop_assert_eq!(ab.valuation, a.valuation + b.valuation);
        let k = &c.extension(p.degree()).field;
        for i in 0..n {
            let mut s = 0;
            for j in 0..=i {
                s = k.add(s, k.mul(a.coeffs[j], b.coeffs[i - j]));
            }
            prop_assert_eq!(ab.coeffs[i], s, "coefficient {} at {}", i, p);
        }
    }

    #[test]
    fn principal_divisors_have_degree_zero_and_add(
        which in 0usize..2,
        d1 in proptest::collection::vec(0u32..3, 9),
        d2 in proptest::collection::vec(0u32..3, 9),
    ) {
        let c = &fixture(which).curve;
        let (phi, psi) = (function(c, 9, &d1), function(c, 9, &d2));
        let a = principal_divisor(c, &phi).unwrap();
        let b = principal_divisor(c, &psi).unwrap();
        prop_assert_eq!(a.degree(), 0);
        prop_assert_eq!(principal_divisor(c, &phi.mul(c, &psi)).unwrap(), a.add(&b));
    }

    #[test]
    fn congruence_to_one_is_closed(
        which in 0usize..2,
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
        w1 in proptest::collection::vec(0u32..3, 40),
        w2 in proptest::collection::vec(0u32..3, 40),
    ) {
        let fx = fixture(which);
        let c = &fx.curve;
        let aff = affine_places(fx);
        let (p, q) = (i.get(&aff).clone(), j.get(&aff).clone());
        prop_assume!(p != q);
        let d = Divisor::from_terms([(p.clone(), 2), (q.clone(), 1)]);
        let basis = riemann_roch_basis(c, 4 * c.genus() as i64 + 2 + d.degree());
        let sys = CongruenceSystem::new(c, basis, vec![(p, 2), (q, 1)]).unwrap();
        let sol = sys.solve_one().unwrap();
        let make = |w: &[u32]| {
            sol.kernel.iter().zip(w).fold(sol.particular.clone(), |acc, (k, &x)| {
                if x == 0 { acc } else { acc.add(c, &k.scale(c, x)) }
            })
        };
        let (phi, psi) = (make(&w1), make(&w2));
        prop_assert!(is_congruent_one(c, &phi, &d).unwrap());
        prop_assert!(is_congruent_one(c, &psi, &d).unwrap());
        prop_assert!(is_congruent_one(c, &phi.mul(c, &psi), &d).unwrap());
        let affine = phi.add(c, &psi).sub(c, &CurveFunction::one());
        prop_assert!(is_congruent_one(c, &affine, &d).unwrap());
    }

    #[test]
    fn artin_classes_are_additive_with_the_right_degree(
        which in 0usize..2,
        m in any::<prop::sample::Index>(),
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
    ) {
        let fx = fixture(which);
        let deg2 = fx.curve.places_of_degree(2);
        let d = Divisor::single(m.get(&deg2).clone(), 1);
        let g = fx.groups.get(&d).unwrap();
        let free: Vec<Place> = fx.places.iter().filter(|p| !d.contains(p)).cloned().collect();
        let (p, q) = (i.get(&free), j.get(&free));
        let (cp, cq) = (g.artin_class(p).unwrap(), g.artin_class(q).unwrap());
        prop_assert_eq!(cp.degree, p.degree() as i64);
        let sum = Divisor::from_terms([(p.clone(), 1), (q.clone(), 1)]);
        prop_assert_eq!(g.add(&cp, &cq), g.divisor_class(&sum).unwrap());
        prop_assert_eq!(g.frobenius(p, Orientation::Inverse).unwrap(), g.neg(&cp));
    }

    #[test]
    fn level_quotients_compose(which in 0usize..2, pick in any::<prop::sample::Index>(), k in 0usize..64) {
        let fx = fixture(which);
        let deg2 = fx.curve.places_of_degree(2);
        let p = pick.get(&deg2).clone();
        let q = deg2.iter().find(|x| **x != p).unwrap().clone();
        let big = fx.groups.get(&Divisor::from_terms([(p.clone(), 2), (q.clone(), 1)])).unwrap();
        let mid = fx.groups.get(&Divisor::single(p.clone(), 2)).unwrap();
        let small = fx.groups.get(&Divisor::single(p, 1)).unwrap();
        let h1 = big.level_quotient(&mid).unwrap();
        let h2 = mid.level_quotient(&small).unwrap();
        let h3 = big.level_quotient(&small).unwrap();
        let x = big.generator_class(k % big.generator_count());
        let y = big.scale(&x, 1 + k as i64);
        for e in [x, y] {
            prop_assert_eq!(h2.apply(&mid, &small, &h1.apply(&big, &mid, &e)), h3.apply(&big, &small, &e));
        }
    }

    #[test]
    fn normal_form_is_canonical(which in 0usize..2, pick in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let fx = fixture(which);
        let deg2 = fx.curve.places_of_degree(2);
        let p = pick.get(&deg2).clone();
        let q = deg2.iter().find(|x| **x != p).unwrap().clone();
        let d = Divisor::from_terms([(p, 2), (q, 1)]);
        let sys = FiniteSystem::new(fx.groups.get(&d).unwrap(), &Default::default(), Orientation::Place).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = sys.random_point(&mut rng);
        let u = sys.random_units(&mut rng);
        let moved = sys.unit_move(&x, &u).unwrap();
        let n = sys.normalize(&x).unwrap();
        prop_assert_eq!(sys.normalize(&n).unwrap(), n.clone());
        prop_assert_eq!(sys.normalize(&moved).unwrap(), n);
        prop_assert!(sys.equivalent(&x, &moved).unwrap());
    }
}

#[test]
fn irreducible_counts_match_the_necklace_formula() {
    let k = GF::new(3, 1).unwrap();
    for d in 1..=5u32 {
        let mut count = 0u64;
        for idx in 0..3u32.pow(d) {
            let mut cs: Vec<u32> = (0..d).map(|i| (idx / 3u32.pow(i)) % 3).collect();
            cs.push(1);
            if is_irreducible(&k, &Poly::new(cs)) {
                count += 1;
            }
        }
        let mut expected: i64 = 0;
        for e in 1..=d {
            if d % e == 0 {
                expected += mobius(d / e) * 3i64.pow(e);
            }
        }
        assert_eq!(count as i64, expected / d as i64, "degree {}", d);
    }
}

fn mobius(n: u32) -> i64 {
    let (mut n, mut sign, mut p) = (n, 1, 2);
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        -sign
    } else {
        sign
    }
}

#[test]
fn frobenius_fixes_exactly_the_base_field() {
    let base = Arc::new(GF::new(3, 1).unwrap());
    let ext = build_extension(&base, 4).unwrap();
    let fixed = (0..ext.field.size())
        .filter(|&x| ext.frobenius_q(x) == x)
        .count();
    assert_eq!(fixed, 3);
    let base = Arc::new(GF::new(3, 2).unwrap());
    let ext = build_extension(&base, 2).unwrap();
    let fixed: Vec<u32> = (0..ext.field.size())
        .filter(|&x| ext.frobenius_q(x) == x)
        .collect();
    assert_eq!(fixed.len(), 9);
    for x in fixed {
        assert!(ext.restrict(x).is_some());
    }
}

#[test]
fn places_match_orbit_counts_up_to_degree_six() {
    for which in 0..2 {
        let c = &fixture(which).curve;
        let a: Vec<u64> = (1..=6)
            .map(|d| c.places_of_degree(d).len() as u64)
            .collect();
        for m in 1..=6u32 {
            let s: u64 = (1..=m)
                .filter(|d| m % d == 0)
                .map(|d| d as u64 * a[d as usize - 1])
                .sum();
            assert_eq!(s, c.count_points(m), "N_{}", m);
            assert_eq!(a[m as usize - 1], c.place_counts_via_mobius(m).unwrap());
        }
    }
}

#[test]
fn units_embed_with_kernel_the_constants() {
    let fx = fixture(0);
    let p = fx.curve.places_of_degree(2)[0].clone();
    let g = fx.groups.get(&Divisor::single(p, 1)).unwrap();
    let k = &fx.curve.extension(2).field;
    let trivial = (1..k.size())
        .filter(|&u| g.unit_embedding(&[vec![u]]).unwrap() == g.identity())
        .count();
    assert_eq!(trivial, 2);
    let a = g.unit_embedding(&[vec![3]]).unwrap();
    let b = g.unit_embedding(&[vec![5]]).unwrap();
    assert_eq!(
        g.add(&a, &b),
        g.unit_embedding(&[vec![k.mul(3, 5)]]).unwrap()
    );
}
