//! Unit groups (O/P^n)^* ≅ K^* × (1 + tK[[t]]) / (1 + t^n K[[t]]) and their
//! discrete logarithms in a fixed generating set.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::curve::local::{series_inv, series_mul};
use crate::curve::{Curve, Place};
use crate::divisor::Divisor;
use crate::field::{Elem, GF};

/// (q^d - 1) q^{d(n-1)} over P^n ‖ D.
pub fn phi_of_modulus(c: &Curve, d: &Divisor) -> BigInt {
    let q = BigInt::from(c.q());
    d.terms()
        .filter(|(_, n)| *n > 0)
        .map(|(p, n)| {
            let qd = num_traits::pow(q.clone(), p.degree() as usize);
            (&qd - 1) * num_traits::pow(qd, (n - 1) as usize)
        })
        .product()
}

/// One generator: level 0 is the residue-field generator g, level i ≥ 1 is
/// 1 + b t^i with b the j-th F_p-basis element of the residue field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitGenerator {
    pub level: usize,
    pub coefficient: Elem,
}

/// Generators and relations of (O/P^n)^* for one place P.
#[derive(Clone, Debug)]
pub struct LocalUnitGroup {
    place: Place,
    level: usize,
    residue: Arc<GF>,
    gens: Vec<UnitGenerator>,
}

impl LocalUnitGroup {
    pub fn new(c: &Curve, place: &Place, level: usize) -> Self {
        assert!(level >= 1 && !place.is_infinity());
        let residue = c.extension(place.degree()).field.clone();
        let p = residue.characteristic();
        let mut gens = vec![UnitGenerator {
            level: 0,
            coefficient: residue.generator(),
        }];
        for i in 1..level {
            for j in 0..residue.degree() {
                gens.push(UnitGenerator {
                    level: i,
                    coefficient: p.pow(j),
                });
            }
        }
        LocalUnitGroup {
            place: place.clone(),
            level,
            residue,
            gens,
        }
    }

    pub fn place(&self) -> &Place {
        &self.place
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn generators(&self) -> &[UnitGenerator] {
        &self.gens
    }

    pub fn generator_count(&self) -> usize {
        self.gens.len()
    }

    pub fn order(&self) -> BigInt {
        let qd = BigInt::from(self.residue.size());
        (&qd - 1) * num_traits::pow(qd, self.level - 1)
    }

    /// The generator as a truncated power series.
    pub fn generator_series(&self, j: usize) -> Vec<Elem> {
        let g = self.gens[j];
        let mut s = vec![0; self.level];
        if g.level == 0 {
            s[0] = g.coefficient;
        } else {
            s[0] = 1;
            s[g.level] = g.coefficient;
        }
        s
    }

    /// Exponents e with Π gen_j^{e_j} = u exactly, 0 ≤ e_j < (p or q^d - 1).
    pub fn dlog(&self, u: &[Elem]) -> Vec<i64> {
        let k = &self.residue;
        let n = self.level;
        assert!(
            u.len() >= n && u[0] != 0,
            "not a unit to the required precision"
        );
        let mut out = vec![0i64; self.gens.len()];
        out[0] = k.log(u[0]) as i64;
        let inv0 = k.inv(u[0]);
        let mut w: Vec<Elem> = u[..n].iter().map(|&c| k.mul(c, inv0)).collect();
        let mut idx = 1;
        let rd = k.degree() as usize;
        for i in 1..n {
            let digits = k.to_digits(w[i]);
            let mut prod = vec![0; n];
            prod[0] = 1;
            for (j, &d) in digits.iter().enumerate() {
                out[idx + j] = d as i64;
                for _ in 0..d {
                    let mut f = vec![0; n];
                    f[0] = 1;
                    f[i] = self.gens[idx + j].coefficient;
                    prod = series_mul(k, &prod, &f, n);
                }
            }
            w = series_mul(k, &w, &series_inv(k, &prod, n), n);
            debug_assert_eq!(w[i], 0);
            idx += rd;
        }
        out
    }

    /// Relation vectors of the presentation, one per generator.
    pub fn relations(&self) -> Vec<Vec<i64>> {
        let k = &self.residue;
        let p = k.characteristic() as i64;
        let mut rels = Vec::with_capacity(self.gens.len());
        let mut r0 = vec![0i64; self.gens.len()];
        r0[0] = (k.size() - 1) as i64;
        rels.push(r0);
        for j in 1..self.gens.len() {
            let s = self.generator_series(j);
            let mut pw = vec![0; self.level];
            pw[0] = 1;
            for _ in 0..p {
                pw = series_mul(k, &pw, &s, self.level);
            }
            let mut r: Vec<i64> = self.dlog(&pw).iter().map(|x| -x).collect();
            r[j] += p;
            rels.push(r);
        }
        rels
    }

    /// Index of the first generator of level ≥ `n`.
    pub fn first_index_at_level(&self, n: usize) -> usize {
        self.gens
            .iter()
            .position(|g| g.level >= n)
            .unwrap_or(self.gens.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::cokernel;
    use crate::curve::CurveRecord;
    use num_traits::ToPrimitive;

    fn x_plus() -> Curve {
        Curve::from_record(&CurveRecord {
            q: 3,
            f: vec![-1, -1, 1, 1, 0, 1],
        })
        .unwrap()
    }

    #[test]
    fn phi_examples() {
        let c = x_plus();
        let d2 = c.places_of_degree(2);
        assert_eq!(phi_of_modulus(&c, &Divisor::zero()), BigInt::from(1));
        assert_eq!(
            phi_of_modulus(&c, &Divisor::single(d2[0].clone(), 2)),
            BigInt::from(72)
        );
        let d = Divisor::from_terms([(d2[0].clone(), 2), (d2[1].clone(), 1), (d2[2].clone(), 1)]);
        assert_eq!(phi_of_modulus(&c, &d), BigInt::from(4608));
    }

    #[test]
    fn presentation_has_the_right_order() {
        let c = x_plus();
        for p in c.places_up_to(2).into_iter().filter(|p| !p.is_infinity()) {
            for n in 1..=3 {
                let u = LocalUnitGroup::new(&c, &p, n);
                let g = cokernel(u.generator_count(), &u.relations());
                assert!(g.is_finite());
                assert_eq!(g.torsion_order(), u.order(), "{} level {}", p, n);
            }
        }
    }

    #[test]
    fn dlog_is_a_homomorphism() {
        let c = x_plus();
        let p = c.places_of_degree(2)[1].clone();
        let u = LocalUnitGroup::new(&c, &p, 3);
        let k = c.extension(2).field.clone();
        let g = cokernel(u.generator_count(), &u.relations());
        let a = vec![5, 2, 7];
        let b = vec![3, 8, 1];
        let ab = series_mul(&k, &a, &b, 3);
        let la = g.project_i64(&u.dlog(&a));
        let lb = g.project_i64(&u.dlog(&b));
        let lab = g.project_i64(&u.dlog(&ab));
        let mut sum: Vec<BigInt> = la.iter().zip(&lb).map(|(x, y)| x + y).collect();
        g.reduce(&mut sum);
        assert_eq!(sum, lab);
        assert_eq!(
            g.project_i64(&u.dlog(&[1, 0, 0]))
                .iter()
                .map(|x| x.to_i64().unwrap())
                .sum::<i64>(),
            0
        );
    }
}
