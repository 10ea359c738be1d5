//! Imaginary hyperelliptic curves y^2 = f(x) over F_q and their points and places.

pub mod local;
pub mod place;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::factor::mobius;
use crate::field::gf::{prime_power, GF};
use crate::field::linalg::solve_affine;
use crate::field::{build_extension, Elem, Extension, Poly};

pub use local::LocalSeries;
pub use place::{Branch, Place, PlaceDescriptor, PlaceKind};

use place::RootLevel;

/// Textual curve record: `q` and the ascending integer coefficients of f.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRecord {
    pub q: u64,
    pub f: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawQ {
    Int(u64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    q: RawQ,
    f: Vec<i64>,
}

impl CurveRecord {
    /// Reads `{q: 3, f: [-1, -1, 1, 1, 0, 1]}`; q may also be written `"3^1"`.
    pub fn parse(text: &str) -> Result<CurveRecord> {
        let raw: RawRecord = json5::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("curve record: {}", e)))?;
        let q = match raw.q {
            RawQ::Int(q) => q,
            RawQ::Text(s) => parse_prime_power(&s)?,
        };
        Ok(CurveRecord { q, f: raw.f })
    }
}

impl fmt::Display for CurveRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self.f.iter().map(|c| c.to_string()).collect();
        write!(f, "{{q: {}, f: [{}]}}", self.q, cs.join(", "))
    }
}

fn parse_prime_power(s: &str) -> Result<u64> {
    let bad = || Error::InvalidInput(format!("field q: cannot read {:?} as p^r", s));
    let (p, r) = match s.split_once('^') {
        Some((p, r)) => (p.trim(), r.trim()),
        None => (s.trim(), "1"),
    };
    let p: u64 = p.parse().map_err(|_| bad())?;
    let r: u32 = r.parse().map_err(|_| bad())?;
    p.checked_pow(r).ok_or_else(bad)
}

/// y^2 = f(x) with f monic, square-free, of odd degree 2g + 1 >= 3.
pub struct Curve {
    field: Arc<GF>,
    f: Poly,
    genus: u32,
    record: Option<CurveRecord>,
    extensions: Mutex<BTreeMap<u32, Arc<Extension>>>,
    levels: Mutex<BTreeMap<u32, Arc<RootLevel>>>,
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve(y^2 = {:?} over F_{})", self.f.coeffs(), self.q())
    }
}

impl Curve {
    pub fn new(field: Arc<GF>, f: Poly) -> Result<Self> {
        let deg = f.deg();
        if deg < 3 || deg % 2 == 0 {
            return Err(Error::InvalidCurve(format!(
                "f must have odd degree >= 3, got degree {}",
                deg
            )));
        }
        if !f.is_monic() {
            return Err(Error::InvalidCurve("f must be monic".into()));
        }
        let g = f.gcd(&field, &f.derivative(&field));
        if !g.is_one() {
            return Err(Error::InvalidCurve(format!(
                "f is not square-free (gcd(f, f') has degree {})",
                g.deg()
            )));
        }
        Ok(Curve {
            genus: ((deg - 1) / 2) as u32,
            field,
            f,
            record: None,
            extensions: Mutex::new(BTreeMap::new()),
            levels: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn from_record(rec: &CurveRecord) -> Result<Self> {
        let (p, r) = prime_power(rec.q)
            .ok_or_else(|| Error::InvalidField(format!("q = {} is not a prime power", rec.q)))?;
        let field = Arc::new(GF::new(p, r)?);
        let f = Poly::from_ints(&field, &rec.f);
        if f.deg() + 1 != rec.f.len() as isize {
            return Err(Error::InvalidCurve(
                "leading coefficient of f vanishes mod p".into(),
            ));
        }
        let mut c = Curve::new(field, f)?;
        c.record = Some(rec.clone());
        Ok(c)
    }

    pub fn record(&self) -> CurveRecord {
        self.record.clone().unwrap_or_else(|| CurveRecord {
            q: self.q(),
            f: self.f.coeffs().iter().map(|&c| c as i64).collect(),
        })
    }

    pub fn field(&self) -> &Arc<GF> {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.field.size() as u64
    }

    pub fn f(&self) -> &Poly {
        &self.f
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    /// F_{q^m} with its embedding of F_q, cached.
    pub fn extension(&self, m: u32) -> Arc<Extension> {
        let mut map = self.extensions.lock().expect("extension cache poisoned");
        map.entry(m)
            .or_insert_with(|| {
                Arc::new(build_extension(&self.field, m).expect("extension field fits in memory"))
            })
            .clone()
    }

    /// Number of points over F_{q^m}, including the point at infinity.
    pub fn count_points(&self, m: u32) -> u64 {
        assert!(m >= 1);
        let ext = self.extension(m);
        let big = &ext.field;
        let fx = self.f.map(ext.embedding.table());
        let affine: i64 = (0..big.size())
            .into_par_iter()
            .map(|x| 1 + big.legendre(fx.eval(big, x)))
            .sum();
        affine as u64 + 1
    }

    /// a_d = (1/d) Σ_{e|d} μ(d/e) N_e, the number of places of degree d.
    pub fn place_counts_via_mobius(&self, d: u32) -> Result<u64> {
        let mut total: i128 = 0;
        for e in 1..=d {
            if d % e == 0 {
                total += mobius((d / e) as u64) as i128 * self.count_points(e) as i128;
            }
        }
        if total % d as i128 != 0 || total < 0 {
            return Err(Error::Internal(format!(
                "Möbius place count {}/{} is not a natural number",
                total, d
            )));
        }
        Ok((total / d as i128) as u64)
    }

    pub(crate) fn root_level(&self, e: u32) -> Arc<RootLevel> {
        if let Some(l) = self.levels.lock().expect("place cache poisoned").get(&e) {
            return l.clone();
        }
        let level = Arc::new(RootLevel::build(self, e));
        self.levels
            .lock()
            .expect("place cache poisoned")
            .entry(e)
            .or_insert(level)
            .clone()
    }

    pub fn infinity(&self) -> Place {
        Place::infinity()
    }

    /// All places of degree `d`, sorted.
    pub fn places_of_degree(&self, d: u32) -> Vec<Place> {
        assert!(d >= 1);
        let mut out = Vec::new();
        if d == 1 {
            out.push(Place::infinity());
        }
        out.extend(self.root_level(d).places_of_root_degree());
        if d % 2 == 0 {
            out.extend(self.root_level(d / 2).inert_places(self).iter().cloned());
        }
        out.sort();
        out
    }

    /// All places of degree at most `d`.
    pub fn places_up_to(&self, d: u32) -> Vec<Place> {
        (1..=d).flat_map(|k| self.places_of_degree(k)).collect()
    }

    /// The places lying over the monic irreducible `u` (one or two).
    pub fn places_over(&self, u: &Poly) -> Vec<Place> {
        let e = u.deg() as u32;
        self.root_level(e).places_over(self, u)
    }

    /// The polynomial v with deg v < deg u and v(α) = z, for z in F_q(α).
    pub fn residue_polynomial(&self, place: &Place, z: Elem) -> Option<Poly> {
        let u = place.u()?;
        let e = u.deg() as usize;
        let ext = self.extension(place.degree());
        let k = &ext.field;
        let r = self.field.degree() as usize;
        let p = self.field.characteristic();
        let dk = k.degree() as usize;
        let mut rows = vec![vec![0u32; e * r]; dk];
        let mut pow = 1;
        for i in 0..e {
            for j in 0..r {
                let col = k.to_digits(k.mul(pow, ext.embed(p.pow(j as u32))));
                for (row, &d) in rows.iter_mut().zip(&col) {
                    row[i * r + j] = d;
                }
            }
            pow = k.mul(pow, place.alpha());
        }
        let sol = solve_affine(p, &rows, &k.to_digits(z), e * r)?;
        Some(Poly::new(
            (0..e)
                .map(|i| self.field.from_digits(&sol.particular[i * r..(i + 1) * r]))
                .collect(),
        ))
    }

    /// Resolves a place descriptor.
    pub fn place_from_descriptor(&self, d: &PlaceDescriptor) -> Result<Place> {
        match d {
            PlaceDescriptor::Infinity => Ok(Place::infinity()),
            PlaceDescriptor::Affine { u, branch } => {
                let poly = Poly::new(u.iter().map(|&c| c % self.field.size()).collect());
                if !poly.is_monic()
                    || poly.deg() < 1
                    || !crate::field::is_irreducible(&self.field, &poly)
                {
                    return Err(Error::InvalidInput(format!(
                        "{:?} is not a monic irreducible polynomial",
                        u
                    )));
                }
                self.places_over(&poly)
                    .into_iter()
                    .find(|p| p.branch() == Some(*branch))
                    .ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "no place with branch {:?} over {:?}",
                            branch, u
                        ))
                    })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn x_plus() -> Curve {
        Curve::from_record(&CurveRecord {
            q: 3,
            f: vec![-1, -1, 1, 1, 0, 1],
        })
        .unwrap()
    }

    pub(crate) fn x_minus() -> Curve {
        Curve::from_record(&CurveRecord {
            q: 3,
            f: vec![-1, -1, 1, -1, 0, 1],
        })
        .unwrap()
    }

    #[test]
    fn point_counts_over_f3() {
        assert_eq!(x_plus().count_points(1), 3);
        assert_eq!(x_minus().count_points(1), 3);
        let e = Curve::from_record(&CurveRecord {
            q: 3,
            f: vec![1, 1, 0, 1],
        })
        .unwrap();
        assert_eq!(e.count_points(1), 4);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(Curve::from_record(&CurveRecord {
            q: 3,
            f: vec![0, 0, 1, 1]
        })
        .is_err()); // x^2(x+1)
        assert!(Curve::from_record(&CurveRecord {
            q: 3,
            f: vec![1, 0, 0, 0, 1]
        })
        .is_err()); // even degree
        assert!(Curve::from_record(&CurveRecord {
            q: 4,
            f: vec![1, 1, 0, 1]
        })
        .is_err());
        assert!(Curve::from_record(&CurveRecord {
            q: 6,
            f: vec![1, 1, 0, 1]
        })
        .is_err());
        assert!(Curve::from_record(&CurveRecord {
            q: 3,
            f: vec![1, 1, 0, 3]
        })
        .is_err());
    }

    #[test]
    fn degree_two_places_of_x_pm() {
        assert_eq!(x_plus().places_of_degree(2).len(), 4);
        assert_eq!(x_minus().places_of_degree(2).len(), 4);
        assert_eq!(x_plus().place_counts_via_mobius(2).unwrap(), 4);
    }

    #[test]
    fn degree_one_places_of_x_plus() {
        let c = x_plus();
        let ps = c.places_of_degree(1);
        assert_eq!(ps.len(), 3);
        assert!(ps.contains(&Place::infinity()));
        let u = Poly::from_ints(c.field(), &[-1, 1]);
        let over: Vec<Branch> = ps.iter().filter_map(|p| p.branch()).collect();
        assert_eq!(over, vec![Branch::Plus, Branch::Minus]);
        assert!(ps
            .iter()
            .filter(|p| !p.is_infinity())
            .all(|p| p.u() == Some(&u)));
    }

    #[test]
    fn residue_polynomials_interpolate_beta() {
        let c = x_plus();
        for p in c.places_up_to(4).into_iter().filter(|p| p.is_split()) {
            let v = c.residue_polynomial(&p, p.beta()).unwrap();
            assert!(v.deg() < p.u().unwrap().deg());
            let v2 = v.square(c.field()).sub(c.field(), c.f());
            assert!(v2.rem(c.field(), p.u().unwrap()).is_zero(), "{}", p);
        }
    }

    #[test]
    fn orbit_identity_and_mobius_agree() {
        for c in [x_plus(), x_minus()] {
            let a: Vec<u64> = (1..=6)
                .map(|d| c.places_of_degree(d).len() as u64)
                .collect();
            for m in 1..=6u32 {
                let s: u64 = (1..=m)
                    .filter(|d| m % d == 0)
                    .map(|d| d as u64 * a[d as usize - 1])
                    .sum();
                assert_eq!(s, c.count_points(m), "m = {}", m);
                assert_eq!(c.place_counts_via_mobius(m).unwrap(), a[m as usize - 1]);
            }
        }
    }
}
