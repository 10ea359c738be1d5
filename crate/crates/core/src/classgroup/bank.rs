//! Functions of L(n∞) with their norm factorizations, harvested once per
//! curve and shared by every ray class group built on it.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::curve::{Branch, Curve, Place};
use crate::divisor::{principal_divisor, CurveFunction, Divisor};
use crate::error::Result;
use crate::field::{factor_poly, Poly};
use crate::zeta::{zeta_l_polynomial, ZetaPolynomial};

#[derive(Debug)]
pub struct BankEntry {
    pub phi: CurveFunction,
    pub norm_factors: Vec<(Poly, u32)>,
    divisor: OnceLock<Divisor>,
}

impl BankEntry {
    pub fn divisor(&self, c: &Curve) -> &Divisor {
        self.divisor.get_or_init(|| {
            principal_divisor(c, &self.phi).expect("nonzero function has a divisor")
        })
    }
}

/// A function with a simple zero at a place and every other zero of
/// smaller degree, used to express the class of the place through smaller
/// places.
#[derive(Debug)]
pub struct Reduction {
    pub phi: CurveFunction,
    pub divisor: Divisor,
}

/// Per-curve cache of relation candidates and the zeta numerator.
pub struct RelationBank {
    curve: Arc<Curve>,
    zeta: ZetaPolynomial,
    ramified: Vec<Poly>,
    levels: Mutex<BTreeMap<i64, Arc<Vec<BankEntry>>>>,
    reductions: Mutex<HashMap<Place, Option<Arc<Reduction>>>>,
}

impl RelationBank {
    pub fn new(curve: Arc<Curve>) -> Result<Self> {
        let zeta = zeta_l_polynomial(&curve)?;
        let ramified = factor_poly(curve.field(), curve.f())
            .into_iter()
            .map(|(u, _)| u)
            .collect();
        Ok(RelationBank {
            curve,
            zeta,
            ramified,
            levels: Mutex::new(BTreeMap::new()),
            reductions: Mutex::new(HashMap::new()),
        })
    }

    pub fn curve(&self) -> &Arc<Curve> {
        &self.curve
    }

    pub fn zeta(&self) -> &ZetaPolynomial {
        &self.zeta
    }

    pub fn class_number(&self) -> i64 {
        self.zeta.class_number()
    }

    /// Monic irreducible factors of f.
    pub fn ramified_polynomials(&self) -> &[Poly] {
        &self.ramified
    }

    /// All φ with pole order exactly n whose leading coefficient is 1.
    pub fn level(&self, n: i64) -> Arc<Vec<BankEntry>> {
        if let Some(l) = self.levels.lock().expect("bank poisoned").get(&n) {
            return l.clone();
        }
        let built = Arc::new(self.harvest(n));
        self.levels
            .lock()
            .expect("bank poisoned")
            .entry(n)
            .or_insert(built)
            .clone()
    }

    /// Degree of the places over the irreducible `u` when that degree is
    /// below `limit`, without building place tables of degree `limit` or more.
    pub(crate) fn place_degree_below(&self, u: &Poly, limit: u32) -> Option<u32> {
        let e = u.deg() as u32;
        if e >= limit {
            return None;
        }
        let d = match self.curve.root_level(e).branch_type(u) {
            Some(Branch::Inert) => 2 * e,
            _ => e,
        };
        (d < limit).then_some(d)
    }

    /// Checks that φ vanishes simply at `place` with all other zeros of
    /// smaller degree, and returns its divisor.
    pub fn reduction_for(&self, place: &Place, phi: &CurveFunction) -> Result<Option<Reduction>> {
        let c = &self.curve;
        let Some(u) = place.u() else { return Ok(None) };
        if phi.is_zero() {
            return Ok(None);
        }
        let e = place.degree();
        for (w, m) in factor_poly(c.field(), &phi.norm(c)) {
            if &w == u {
                if m != 1 {
                    return Ok(None);
                }
            } else if self.place_degree_below(&w, e).is_none() {
                return Ok(None);
            }
        }
        let divisor = principal_divisor(c, phi)?;
        if divisor.multiplicity(place) != 1 {
            return Ok(None);
        }
        Ok(Some(Reduction {
            phi: phi.clone(),
            divisor,
        }))
    }

    /// The reduction by φ = v(x) - y with v(α) = β, for a split place.
    pub fn split_reduction(&self, place: &Place) -> Result<Option<Arc<Reduction>>> {
        if let Some(r) = self.reductions.lock().expect("bank poisoned").get(place) {
            return Ok(r.clone());
        }
        let c = &self.curve;
        let r = match c.residue_polynomial(place, place.beta()) {
            Some(v) if place.is_split() => {
                let phi = CurveFunction::new(v, Poly::one().neg(c.field()));
                self.reduction_for(place, &phi)?.map(Arc::new)
            }
            _ => None,
        };
        self.reductions
            .lock()
            .expect("bank poisoned")
            .insert(place.clone(), r.clone());
        Ok(r)
    }

    fn harvest(&self, n: i64) -> Vec<BankEntry> {
        let c = &self.curve;
        let k = c.field();
        let q = c.q();
        let g = c.genus() as i64;
        if n <= 0 {
            return Vec::new();
        }
        // free coefficients: a_0..a_{da-1} (plus a_da = 1 when n even) and b_0..b_{db}
        let (da, db, lead_in_a): (i64, i64, bool) = if n % 2 == 0 {
            (n / 2, (n - 2 * g - 2).div_euclid(2), true)
        } else if n >= 2 * g + 1 {
            ((n - 1) / 2, (n - 2 * g - 1) / 2, false)
        } else {
            return Vec::new();
        };
        let free_a = if lead_in_a { da } else { da + 1 } as u32;
        let free_b = if lead_in_a { (db + 1).max(0) } else { db } as u32;
        let total = free_a + free_b;
        let count = q.pow(total);
        (0..count)
            .into_par_iter()
            .map(|mut idx| {
                let mut digits = Vec::with_capacity(total as usize);
                for _ in 0..total {
                    digits.push((idx % q) as u32);
                    idx /= q;
                }
                let mut a: Vec<u32> = digits[..free_a as usize].to_vec();
                let mut b: Vec<u32> = digits[free_a as usize..].to_vec();
                if lead_in_a {
                    a.push(1);
                } else {
                    b.push(1);
                }
                let phi = CurveFunction::new(Poly::new(a), Poly::new(b));
                let norm_factors = factor_poly(k, &phi.norm(c));
                BankEntry {
                    phi,
                    norm_factors,
                    divisor: OnceLock::new(),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveRecord;

    #[test]
    fn level_sizes_match_riemann_roch() {
        let c = Arc::new(
            Curve::from_record(&CurveRecord {
                q: 3,
                f: vec![-1, -1, 1, 1, 0, 1],
            })
            .unwrap(),
        );
        let bank = RelationBank::new(c.clone()).unwrap();
        let dims: Vec<usize> = (0..=9)
            .map(|n| crate::divisor::riemann_roch_basis(&c, n).len())
            .collect();
        for n in 1..=9i64 {
            let expected = if dims[n as usize] > dims[n as usize - 1] {
                3usize.pow(dims[n as usize] as u32 - 1)
            } else {
                0
            };
            assert_eq!(bank.level(n).len(), expected, "level {}", n);
            for e in bank.level(n).iter() {
                assert_eq!(e.phi.pole_order(&c), n);
            }
        }
    }
}
