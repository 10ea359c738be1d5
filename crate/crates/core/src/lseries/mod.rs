//! Abelian L-series of ray class characters: Euler products, the weighted
//! point-counting formula, L-polynomials, cover zeta functions and spectra.

pub mod character;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::CyclotomicElem;
use crate::classgroup::ClassGroupCache;
use crate::curve::{Branch, Curve, Place};
use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::field::factor::mobius;
use crate::field::Poly;
use crate::weil::{weil_check_cyclotomic, weil_check_integer, WeilReport};

pub use character::{characters, Character, CharacterData};

/// A truncated power series in T over Z[ζ_n].
pub type Series = Vec<CyclotomicElem>;

/// An L-function as a polynomial numerator, with the denominator
/// (1 - ωT)(1 - qωT) when the character is constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LPoly {
    order: u32,
    coeffs: Vec<CyclotomicElem>,
    pole: Option<CyclotomicElem>,
}

/// Plain form of an [`LPoly`] for reports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LPolyData {
    pub order: u32,
    pub degree: usize,
    pub coefficients: Vec<Vec<i64>>,
    pub denominator_omega: Option<Vec<i64>>,
}

impl Serialize for LPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.data().serialize(s)
    }
}

impl LPoly {
    pub fn new(order: u32, mut coeffs: Vec<CyclotomicElem>, pole: Option<CyclotomicElem>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        LPoly {
            order,
            coeffs,
            pole,
        }
    }

    pub fn from_integers(c: &[i64]) -> Self {
        LPoly::new(
            1,
            c.iter().map(|&x| CyclotomicElem::from_int(1, x)).collect(),
            None,
        )
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn data(&self) -> LPolyData {
        LPolyData {
            order: self.order,
            degree: self.degree(),
            coefficients: self.coeffs.iter().map(|c| c.coeffs().to_vec()).collect(),
            denominator_omega: self.pole.as_ref().map(|w| w.coeffs().to_vec()),
        }
    }

    pub fn coefficients(&self) -> &[CyclotomicElem] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// ω of the denominator (1 - ωT)(1 - qωT), if any.
    pub fn pole_omega(&self) -> Option<&CyclotomicElem> {
        self.pole.as_ref()
    }

    pub fn is_polynomial(&self) -> bool {
        self.pole.is_none()
    }

    /// Poles sit at T = ω^{-1} and T = (qω)^{-1}; T = 1 is a pole exactly when ω = 1.
    pub fn has_pole_at_one(&self) -> bool {
        self.pole
            .as_ref()
            .is_some_and(|w| w.as_integer() == Some(1))
    }

    pub fn integer_coefficients(&self) -> Option<Vec<i64>> {
        self.coeffs.iter().map(|c| c.as_integer()).collect()
    }

    pub fn conj(&self) -> LPoly {
        LPoly::new(
            self.order,
            self.coeffs.iter().map(|c| c.conjugate()).collect(),
            self.pole.as_ref().map(|w| w.conjugate()),
        )
    }

    pub fn weil_check(&self, q: u64, tol: f64) -> Result<WeilReport> {
        weil_check_cyclotomic(&self.coeffs, q, tol)
    }
}

/// Product of truncated series.
fn series_mul(a: &[CyclotomicElem], b: &[CyclotomicElem], n: usize, order: u32) -> Series {
    let mut out = vec![CyclotomicElem::zero(order); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            if !y.is_zero() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
    }
    out
}

/// s(T) ↦ s(ζ^k T).
pub fn substitute_root(s: &[CyclotomicElem], order: u32, k: u64) -> Series {
    s.iter()
        .enumerate()
        .map(|(i, c)| {
            c.embed(order)
                .mul(&CyclotomicElem::root_of_unity(order, (k as i64) * i as i64))
        })
        .collect()
}

/// Points of the curve over F_{q^m} grouped by the place they lie on.
#[derive(Debug)]
pub struct PointCensus {
    /// per m = 1..=N: number of F_{q^m}-points on each place
    counts: Vec<HashMap<Place, u64>>,
}

impl PointCensus {
    /// Enumerates X(F_{q^m}) for m ≤ n and attaches each point to its place.
    pub fn build(c: &Curve, n: u32) -> Result<PointCensus> {
        let mut counts = Vec::with_capacity(n as usize);
        let q = c.q();
        for m in 1..=n {
            let ext = c.extension(m);
            let k = &ext.field;
            let fx = c.f().map(ext.embedding.table());
            let partial: Vec<Vec<(Place, u64)>> = (0..k.size())
                .into_par_iter()
                .map(|x| -> Result<Vec<(Place, u64)>> {
                    let mut orbit = vec![x];
                    let mut z = k.pow(x, q);
                    while z != x {
                        if z < x {
                            return Ok(Vec::new());
                        }
                        orbit.push(z);
                        z = k.pow(z, q);
                    }
                    let d = orbit.len() as u64;
                    let mut u = Poly::one();
                    for &r in &orbit {
                        u = u.mul(k, &Poly::linear(k, r));
                    }
                    let u = Poly::new(
                        u.coeffs()
                            .iter()
                            .map(|&a| {
                                ext.restrict(a).ok_or_else(|| {
                                    Error::Internal("minimal polynomial outside F_q".into())
                                })
                            })
                            .collect::<Result<_>>()?,
                    );
                    let v = fx.eval(k, x);
                    let y = if v == 0 {
                        0
                    } else {
                        match k.sqrt(v) {
                            Some(y) => y,
                            None => return Ok(Vec::new()),
                        }
                    };
                    let places = c.places_over(&u);
                    if v == 0 {
                        return Ok(vec![(places[0].clone(), d)]);
                    }
                    let first = &places[0];
                    match first.branch() {
                        Some(Branch::Inert) => Ok(vec![(first.clone(), 2 * d)]),
                        // (x, y) and (x, -y) lie on the two places over u
                        Some(Branch::Plus) | Some(Branch::Minus) if places.len() == 2 && y != 0 => {
                            Ok(vec![(places[0].clone(), d), (places[1].clone(), d)])
                        }
                        _ => Err(Error::Internal("unexpected place type in census".into())),
                    }
                })
                .collect::<Result<_>>()?;
            let mut map: HashMap<Place, u64> = HashMap::new();
            map.insert(Place::infinity(), 1);
            for (p, cnt) in partial.into_iter().flatten() {
                *map.entry(p).or_default() += cnt;
            }
            counts.push(map);
        }
        Ok(PointCensus { counts })
    }

    pub fn max_degree(&self) -> u32 {
        self.counts.len() as u32
    }

    /// Points over F_{q^m} on each place.
    pub fn points(&self, m: u32) -> &HashMap<Place, u64> {
        &self.counts[m as usize - 1]
    }

    pub fn total(&self, m: u32) -> u64 {
        self.points(m).values().sum()
    }
}

/// The zeta numerator of a cover Y → X attached to a cyclic quotient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverZeta {
    pub degree: u32,
    pub genus: usize,
    pub numerator: Vec<i64>,
    pub n1: i64,
    pub weil: WeilReport,
    pub factor_degrees: Vec<usize>,
}

/// L-series computations on one curve, sharing class groups, Frobenius
/// tables and the point census.
pub struct LSeriesEngine {
    groups: ClassGroupCache,
    census: Mutex<BTreeMap<u32, Arc<PointCensus>>>,
}

impl LSeriesEngine {
    pub fn new(groups: ClassGroupCache) -> Self {
        LSeriesEngine {
            groups,
            census: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn for_curve(curve: Arc<Curve>) -> Result<Self> {
        Ok(Self::new(ClassGroupCache::for_curve(curve)?))
    }

    pub fn groups(&self) -> &ClassGroupCache {
        &self.groups
    }

    pub fn curve(&self) -> &Arc<Curve> {
        self.groups.curve()
    }

    pub fn census(&self, n: u32) -> Result<Arc<PointCensus>> {
        let mut map = self.census.lock().expect("census cache poisoned");
        if let Some((_, c)) = map.range(n..).next() {
            return Ok(c.clone());
        }
        let c = Arc::new(PointCensus::build(self.curve(), n)?);
        map.insert(n, c.clone());
        Ok(c)
    }

    /// The primitive character behind χ.
    pub fn primitive(&self, chi: &Character) -> Result<Character> {
        chi.primitive(&self.groups)
    }

    /// Exponents of χ(Frob_P) for all places of degree ≤ n coprime to f_χ.
    fn frobenius_exponents(&self, chi: &Character, n: u32) -> Result<Vec<(Place, u64)>> {
        let g = chi.group();
        let mut out = Vec::new();
        for d in 1..=n {
            for (p, cls) in g.classes_of_degree(d)?.iter() {
                out.push((p.clone(), chi.exponent(cls)));
            }
        }
        Ok(out)
    }

    /// Π_{P ∤ f} (1 - χ(Frob_P) T^{deg P})^{-1} up to T^n.
    pub fn l_series_euler(&self, chi: &Character, n: usize) -> Result<Series> {
        let chi = self.primitive(chi)?;
        let order = chi.order();
        let mut counts: BTreeMap<(u32, u64), u64> = BTreeMap::new();
        for (p, k) in self.frobenius_exponents(&chi, n as u32)? {
            *counts.entry((p.degree(), k)).or_default() += 1;
        }
        let mut s = vec![CyclotomicElem::zero(order); n + 1];
        s[0] = CyclotomicElem::one(order);
        for ((d, k), a) in counts {
            let c = CyclotomicElem::root_of_unity(order, k as i64);
            let d = d as usize;
            for _ in 0..a {
                for i in d..=n {
                    let add = s[i - d].mul(&c);
                    s[i] = s[i].add(&add);
                }
            }
        }
        Ok(s)
    }

    /// N(X, m, ζ_n^k, χ) for m ≤ n: points over F_{q^m} on places coprime
    /// to f_χ with χ(Frob) = ζ_n^k.
    pub fn weighted_counts(&self, chi: &Character, n: u32) -> Result<Vec<Vec<u64>>> {
        let chi = self.primitive(chi)?;
        let census = self.census(n)?;
        let exps: HashMap<Place, u64> = self.frobenius_exponents(&chi, n)?.into_iter().collect();
        let order = chi.order() as usize;
        let mut out = vec![vec![0u64; order]; n as usize + 1];
        for m in 1..=n {
            for (p, &cnt) in census.points(m) {
                if chi.group().modulus().contains(p) {
                    continue;
                }
                let k = *exps.get(p).ok_or_else(|| {
                    Error::Internal(format!(
                        "place {} of degree {} missing from the Frobenius table",
                        p,
                        p.degree()
                    ))
                })?;
                out[m as usize][k as usize] += cnt;
            }
        }
        Ok(out)
    }

    /// exp(Σ_s (T^s/s) Σ_{d|s} Σ_ζ ζ^{s/d} Σ_{m|d} μ(d/m) N(X, m, ζ, χ)) up
    /// to T^n, with ζ running over μ_{ord χ}.
    pub fn l_series_weighted(&self, chi: &Character, n: usize) -> Result<Series> {
        let prim = self.primitive(chi)?;
        let order = prim.order();
        let counts = self.weighted_counts(&prim, n as u32)?;
        let mut inner = vec![vec![0i64; order as usize]; n + 1];
        for d in 1..=n {
            for k in 0..order as usize {
                inner[d][k] = (1..=d)
                    .filter(|m| d % m == 0)
                    .map(|m| mobius((d / m) as u64) * counts[m][k] as i64)
                    .sum();
            }
        }
        let mut c = vec![CyclotomicElem::zero(order); n + 1];
        for s in 1..=n {
            let mut acc = CyclotomicElem::zero(order);
            for d in (1..=s).filter(|d| s % d == 0) {
                for k in 0..order as usize {
                    if inner[d][k] != 0 {
                        let z = CyclotomicElem::root_of_unity(order, (k * (s / d)) as i64);
                        acc = acc.add(&z.scale(inner[d][k]));
                    }
                }
            }
            c[s] = acc;
        }
        // t L_t = Σ_{j=1}^t c_j L_{t-j}
        let mut l = vec![CyclotomicElem::zero(order); n + 1];
        l[0] = CyclotomicElem::one(order);
        for t in 1..=n {
            let mut acc = CyclotomicElem::zero(order);
            for j in 1..=t {
                acc = acc.add(&c[j].mul(&l[t - j]));
            }
            l[t] = acc.div_exact(t as i64).ok_or_else(|| {
                Error::Internal(format!("weighted series coefficient {} is not integral", t))
            })?;
        }
        Ok(l)
    }

    /// The L-function of χ: a polynomial of degree 2g - 2 + deg f_χ for
    /// characters nontrivial on Cl^0, and Z(ωT) otherwise.
    pub fn l_polynomial(&self, chi: &Character) -> Result<LPoly> {
        let chi = self.primitive(chi)?;
        let order = chi.order();
        let c = self.curve();
        if chi.is_constant() {
            let (_, k) = chi.split();
            let zeta = self.groups.bank().zeta();
            let num: Vec<CyclotomicElem> = zeta
                .coeffs
                .iter()
                .map(|&x| CyclotomicElem::from_int(order, x))
                .collect();
            return Ok(LPoly::new(
                order,
                substitute_root(&num, order, k),
                Some(CyclotomicElem::root_of_unity(order, k as i64)),
            ));
        }
        let d = self.predicted_degree(&chi);
        let s = self.l_series_euler(&chi, d + 2)?;
        if s[d].is_zero() || !s[d + 1].is_zero() || !s[d + 2].is_zero() {
            return Err(Error::Internal(format!(
                "L-series of {:?} on {} is not a polynomial of degree {}: {} / {} / {}",
                chi.data(),
                c.record().q,
                d,
                s[d],
                s[d + 1],
                s[d + 2]
            )));
        }
        Ok(LPoly::new(order, s[..=d].to_vec(), None))
    }

    /// 2g - 2 + deg f_χ.
    pub fn predicted_degree(&self, chi: &Character) -> usize {
        (2 * self.curve().genus() as i64 - 2 + chi.conductor().degree()) as usize
    }

    /// L(χ, T) = L(χ_g, ωT) coefficientwise up to T^n.
    pub fn constant_twist_check(&self, chi: &Character, n: usize) -> Result<bool> {
        let chi = self.primitive(chi)?;
        let (chi_g, k) = chi.split();
        let lhs = self.l_series_euler(&chi, n)?;
        let rhs = substitute_root(&self.l_series_euler(&chi_g, n)?, chi.order(), k);
        Ok(lhs == rhs)
    }

    /// Zeta numerator of the cover cut out by the kernel of `chi`:
    /// Π_j numerator(L(χ^j)) over j = 0..ord χ - 1.
    pub fn cover_zeta(&self, chi: &Character, tol: f64) -> Result<CoverZeta> {
        let n = chi.exact_order();
        let order = chi.order();
        let mut prod = vec![CyclotomicElem::one(order)];
        let mut factor_degrees = Vec::new();
        for j in 0..n as i64 {
            let l = self.l_polynomial(&chi.pow(j))?;
            factor_degrees.push(l.degree());
            let c = l
                .coefficients()
                .iter()
                .map(|x| x.embed(order))
                .collect::<Vec<_>>();
            prod = series_mul(&prod, &c, prod.len() + c.len() - 2, order);
        }
        let numerator: Vec<i64> = prod
            .iter()
            .map(|x| x.as_integer())
            .collect::<Option<_>>()
            .ok_or_else(|| {
                Error::Internal("cover zeta numerator has non-integral coefficients".into())
            })?;
        let q = self.curve().q();
        let n1 = q as i64 + 1 + numerator.get(1).copied().unwrap_or(0);
        let big: Vec<BigInt> = numerator.iter().map(|&x| BigInt::from(x)).collect();
        let weil = weil_check_integer(&big, q, tol);
        Ok(CoverZeta {
            degree: n,
            genus: (numerator.len() - 1) / 2,
            numerator,
            n1,
            weil,
            factor_degrees,
        })
    }

    /// Sorted L-polynomials of all characters of Cl_D of exact order n, over
    /// every D in `moduli`, each taken at its conductor.
    pub fn l_spectrum(&self, moduli: &[Divisor], n: u32) -> Result<Vec<LPoly>> {
        let mut out = Vec::new();
        for d in moduli {
            let g = self.groups.get(d)?;
            let chars: Vec<Character> = characters(&g, n, &[])
                .into_iter()
                .filter(|chi| chi.exact_order() == n)
                .collect();
            let polys: Vec<LPoly> = chars
                .par_iter()
                .map(|chi| self.l_polynomial(chi))
                .collect::<Result<_>>()?;
            out.extend(polys);
        }
        out.sort();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveRecord;

    fn engine(f: &[i64]) -> LSeriesEngine {
        let c = Curve::from_record(&CurveRecord {
            q: 3,
            f: f.to_vec(),
        })
        .unwrap();
        LSeriesEngine::for_curve(Arc::new(c)).unwrap()
    }

    fn ints(s: &[CyclotomicElem]) -> Vec<i64> {
        s.iter().map(|c| c.as_integer().unwrap()).collect()
    }

    #[test]
    fn trivial_character_gives_zeta_series() {
        let e = engine(&[-1, -1, 1, 1, 0, 1]);
        let g = e.groups().get(&Divisor::zero()).unwrap();
        let chi = Character::trivial(g);
        let s = e.l_series_euler(&chi, 6).unwrap();
        let z: Vec<i64> = e
            .groups()
            .bank()
            .zeta()
            .zeta_series(6)
            .iter()
            .map(|&x| x as i64)
            .collect();
        assert_eq!(ints(&s), z);
        assert_eq!(ints(&e.l_series_weighted(&chi, 6).unwrap()), z);
        let l = e.l_polynomial(&chi).unwrap();
        assert_eq!(l.degree(), 4);
        assert!(l.has_pole_at_one());
    }

    #[test]
    fn census_matches_point_counts() {
        let e = engine(&[-1, -1, 1, 1, 0, 1]);
        let census = e.census(5).unwrap();
        for m in 1..=5 {
            assert_eq!(census.total(m), e.curve().count_points(m), "m = {}", m);
        }
    }

    #[test]
    fn character_counts_and_constraints() {
        let e = engine(&[-1, -1, 1, 1, 0, 1]);
        let g = e.groups().get(&Divisor::zero()).unwrap();
        assert_eq!(characters(&g, 1, &[]).len(), 1);
        let d = e.curve().places_of_degree(2);
        let dd = Divisor::from_terms([(d[0].clone(), 2), (d[1].clone(), 1), (d[2].clone(), 1)]);
        let g = e.groups().get(&dd).unwrap();
        let s = g.artin_class(&d[3]).unwrap();
        let all = characters(&g, 3, &[]);
        let three_rank = g.torsion_factors().iter().filter(|&&x| x % 3 == 0).count();
        assert_eq!(all.len(), 3usize.pow(three_rank as u32 + 1));
        for chi in characters(&g, 3, &[s.clone()]) {
            assert_eq!(chi.exponent(&s), 0);
        }
    }

    #[test]
    fn euler_and_weighted_agree_with_degree_law() {
        let e = engine(&[-1, -1, 1, 1, 0, 1]);
        let d = e.curve().places_of_degree(2);
        let dd = Divisor::from_terms([(d[0].clone(), 2), (d[1].clone(), 1)]);
        let g = e.groups().get(&dd).unwrap();
        let mut tested = 0;
        for chi in characters(&g, 3, &[]).into_iter().take(9) {
            let a = e.l_series_euler(&chi, 7).unwrap();
            let b = e.l_series_weighted(&chi, 7).unwrap();
            assert_eq!(a, b, "{:?}", chi.data());
            assert!(e.constant_twist_check(&chi, 7).unwrap());
            if !chi.is_constant() {
                let l = e.l_polynomial(&chi).unwrap();
                assert_eq!(l.degree(), e.predicted_degree(&e.primitive(&chi).unwrap()));
                assert!(l.weil_check(3, 1e-9).unwrap().passed);
                assert_eq!(e.l_polynomial(&chi.conj()).unwrap(), l.conj());
            }
            tested += 1;
        }
        assert_eq!(tested, 9);
    }

    #[test]
    fn split_reconstructs_character() {
        let e = engine(&[-1, -1, 1, -1, 0, 1]);
        let d = e.curve().places_of_degree(2);
        let g = e.groups().get(&Divisor::single(d[0].clone(), 2)).unwrap();
        for chi in characters(&g, 3, &[]) {
            let (chi_g, k) = chi.split();
            assert_eq!(chi_g.exponent(&g.section()), 0);
            for i in 0..g.generator_count() {
                let x = g.generator_class(i);
                assert_eq!(
                    (chi_g.exponent(&x) + k * x.degree.rem_euclid(3) as u64) % 3,
                    chi.exponent(&x)
                );
            }
        }
    }

    #[test]
    fn whole_group_cover_is_the_curve() {
        let e = engine(&[-1, -1, 1, 1, 0, 1]);
        let g = e.groups().get(&Divisor::zero()).unwrap();
        let cz = e.cover_zeta(&Character::trivial(g), 1e-9).unwrap();
        assert_eq!(cz.numerator, e.groups().bank().zeta().coeffs);
        assert_eq!(cz.n1, 3);
    }
}
