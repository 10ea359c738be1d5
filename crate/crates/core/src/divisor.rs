//! Divisors, functions a(x) + y b(x), principal divisors and congruences mod D.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curve::{Branch, Curve, Place, PlaceDescriptor};
use crate::error::{Error, Result};
use crate::field::linalg::solve_affine;
use crate::field::{factor_poly, Elem, Poly};

/// a(x) + y·b(x).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CurveFunction {
    a: Poly,
    b: Poly,
}

impl Serialize for CurveFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            a: &'a [Elem],
            b: &'a [Elem],
        }
        Raw {
            a: self.a.coeffs(),
            b: self.b.coeffs(),
        }
        .serialize(s)
    }
}

impl CurveFunction {
    pub fn new(a: Poly, b: Poly) -> Self {
        CurveFunction { a, b }
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: Elem) -> Self {
        CurveFunction {
            a: Poly::constant(c),
            b: Poly::zero(),
        }
    }

    pub fn x() -> Self {
        CurveFunction {
            a: Poly::x(),
            b: Poly::zero(),
        }
    }

    pub fn y() -> Self {
        CurveFunction {
            a: Poly::zero(),
            b: Poly::one(),
        }
    }

    pub fn from_poly(a: Poly) -> Self {
        CurveFunction { a, b: Poly::zero() }
    }

    pub fn a(&self) -> &Poly {
        &self.a
    }

    pub fn b(&self) -> &Poly {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.a.deg() <= 0 && self.b.is_zero()
    }

    pub fn add(&self, c: &Curve, o: &Self) -> Self {
        let k = c.field();
        CurveFunction {
            a: self.a.add(k, &o.a),
            b: self.b.add(k, &o.b),
        }
    }

    pub fn sub(&self, c: &Curve, o: &Self) -> Self {
        let k = c.field();
        CurveFunction {
            a: self.a.sub(k, &o.a),
            b: self.b.sub(k, &o.b),
        }
    }

    pub fn scale(&self, c: &Curve, s: Elem) -> Self {
        let k = c.field();
        CurveFunction {
            a: self.a.scale(k, s),
            b: self.b.scale(k, s),
        }
    }

    pub fn mul(&self, c: &Curve, o: &Self) -> Self {
        let k = c.field();
        let fb = self.b.mul(k, &o.b).mul(k, c.f());
        CurveFunction {
            a: self.a.mul(k, &o.a).add(k, &fb),
            b: self.a.mul(k, &o.b).add(k, &self.b.mul(k, &o.a)),
        }
    }

    /// The hyperelliptic conjugate a - y b.
    pub fn conj(&self, c: &Curve) -> Self {
        CurveFunction {
            a: self.a.clone(),
            b: self.b.neg(c.field()),
        }
    }

    /// a^2 - f b^2.
    pub fn norm(&self, c: &Curve) -> Poly {
        let k = c.field();
        self.a.square(k).sub(k, &self.b.square(k).mul(k, c.f()))
    }

    /// Pole order at infinity, max(2 deg a, 2 deg b + 2g + 1); 0 for constants.
    pub fn pole_order(&self, c: &Curve) -> i64 {
        let pa = if self.a.is_zero() {
            0
        } else {
            2 * self.a.deg() as i64
        };
        let pb = if self.b.is_zero() {
            0
        } else {
            2 * self.b.deg() as i64 + 2 * c.genus() as i64 + 1
        };
        pa.max(pb)
    }

    /// φ(α, β) in the residue field of an affine place.
    pub fn residue(&self, c: &Curve, place: &Place) -> Elem {
        assert!(!place.is_infinity());
        let ext = c.extension(place.degree());
        let k = &ext.field;
        let t = ext.embedding.table();
        let a = self.a.eval_in(k, t, place.alpha());
        let b = self.b.eval_in(k, t, place.alpha());
        k.add(a, k.mul(place.beta(), b))
    }
}

/// A finite formal sum of places.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divisor {
    terms: BTreeMap<Place, i64>,
}

impl Divisor {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(p: Place, m: i64) -> Self {
        let mut d = Self::zero();
        d.add_term(p, m);
        d
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Place, i64)>) -> Self {
        let mut d = Self::zero();
        for (p, m) in terms {
            d.add_term(p, m);
        }
        d
    }

    /// Resolves a literal list of (descriptor, multiplicity).
    pub fn from_literal(c: &Curve, lit: &[(PlaceDescriptor, i64)]) -> Result<Self> {
        let mut d = Self::zero();
        for (desc, m) in lit {
            d.add_term(c.place_from_descriptor(desc)?, *m);
        }
        Ok(d)
    }

    /// Parses the display form, e.g. `2*[1,0,1:+] + [2,1:i]`, or `0`.
    pub fn parse(c: &Curve, text: &str) -> Result<Self> {
        let mut lit = Vec::new();
        let mut rest = text.trim();
        if rest == "0" {
            return Ok(Self::zero());
        }
        while !rest.is_empty() {
            let bad = || Error::InvalidInput(format!("divisor literal {:?}", text));
            let open = rest.find('[').ok_or_else(bad)?;
            let close = rest[open..].find(']').ok_or_else(bad)? + open;
            let head = rest[..open].trim();
            let head = head.strip_prefix('+').unwrap_or(head).trim();
            let m = match head.strip_suffix('*').map(str::trim) {
                Some(k) => k.parse::<i64>().map_err(|_| bad())?,
                None if head.is_empty() => 1,
                None if head == "-" => -1,
                None => return Err(bad()),
            };
            lit.push((rest[open + 1..close].parse::<PlaceDescriptor>()?, m));
            rest = rest[close + 1..].trim();
        }
        Self::from_literal(c, &lit)
    }

    pub fn literal(&self) -> Vec<(PlaceDescriptor, i64)> {
        self.terms
            .iter()
            .map(|(p, &m)| (p.descriptor(), m))
            .collect()
    }

    pub fn add_term(&mut self, p: Place, m: i64) {
        if m == 0 {
            return;
        }
        let e = self.terms.entry(p.clone()).or_insert(0);
        *e += m;
        if *e == 0 {
            self.terms.remove(&p);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut d = self.clone();
        for (p, &m) in &o.terms {
            d.add_term(p.clone(), m);
        }
        d
    }

    pub fn neg(&self) -> Self {
        Divisor {
            terms: self.terms.iter().map(|(p, &m)| (p.clone(), -m)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::zero();
        }
        Divisor {
            terms: self
                .terms
                .iter()
                .map(|(p, &m)| (p.clone(), m * k))
                .collect(),
        }
    }

    pub fn multiplicity(&self, p: &Place) -> i64 {
        self.terms.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.terms.iter().map(|(p, &m)| m * p.degree() as i64).sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Place, i64)> {
        self.terms.iter().map(|(p, &m)| (p, m))
    }

    pub fn support(&self) -> impl Iterator<Item = &Place> {
        self.terms.keys()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_effective(&self) -> bool {
        self.terms.values().all(|&m| m >= 0)
    }

    /// Componentwise ≤.
    pub fn le(&self, o: &Self) -> bool {
        self.terms.iter().all(|(p, &m)| m <= o.multiplicity(p))
            && o.terms.iter().all(|(p, &m)| m >= self.multiplicity(p))
    }

    pub fn contains(&self, p: &Place) -> bool {
        self.terms.contains_key(p)
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(p, m)| format!("{}*[{}]", m, p))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for Divisor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.literal().serialize(s)
    }
}

/// Divisor literal as read from configuration files.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DivisorLiteral(pub Vec<(PlaceDescriptor, i64)>);

/// Basis of L(n∞): x^i with 2i ≤ n and y x^j with 2j + 2g + 1 ≤ n, by pole order.
pub fn riemann_roch_basis(c: &Curve, n: i64) -> Vec<CurveFunction> {
    let g = c.genus() as i64;
    let mut out: Vec<(i64, CurveFunction)> = Vec::new();
    let mut i = 0;
    while 2 * i <= n {
        out.push((
            2 * i,
            CurveFunction::from_poly(Poly::monomial(1, i as usize)),
        ));
        i += 1;
    }
    let mut j = 0;
    while 2 * j + 2 * g + 1 <= n {
        out.push((
            2 * j + 2 * g + 1,
            CurveFunction::new(Poly::zero(), Poly::monomial(1, j as usize)),
        ));
        j += 1;
    }
    out.sort_by_key(|(o, _)| *o);
    out.into_iter().map(|(_, f)| f).collect()
}

/// Order of φ at one place.
pub fn valuation(c: &Curve, place: &Place, phi: &CurveFunction) -> Result<i64> {
    Ok(c.local_expand(place, phi, 1)?.valuation)
}

/// div(φ) = zeros - poles.
pub fn principal_divisor(c: &Curve, phi: &CurveFunction) -> Result<Divisor> {
    if phi.is_zero() {
        return Err(Error::InvalidInput(
            "the zero function has no divisor".into(),
        ));
    }
    let mut d = Divisor::zero();
    let norm = phi.norm(c);
    for (u, m) in factor_poly(c.field(), &norm) {
        let m = m as i64;
        let places = c.places_over(&u);
        match places[0].branch().expect("affine place") {
            Branch::Ramified => d.add_term(places[0].clone(), m),
            Branch::Inert => {
                if m % 2 != 0 {
                    return Err(Error::Internal(format!(
                        "odd norm multiplicity {} at an inert place",
                        m
                    )));
                }
                d.add_term(places[0].clone(), m / 2)
            }
            Branch::Plus | Branch::Minus => {
                let (pp, pm) = (&places[0], &places[1]);
                let vp = if phi.residue(c, pp) != 0 {
                    0
                } else if phi.residue(c, pm) != 0 {
                    m
                } else {
                    let vp = valuation(c, pp, phi)?;
                    let vm = valuation(c, pm, phi)?;
                    if vp + vm != m {
                        return Err(Error::Internal(format!(
                            "branch valuations {} + {} disagree with norm multiplicity {}",
                            vp, vm, m
                        )));
                    }
                    vp
                };
                d.add_term(pp.clone(), vp);
                d.add_term(pm.clone(), m - vp);
            }
        }
    }
    d.add_term(Place::infinity(), -phi.pole_order(c));
    if d.degree() != 0 {
        return Err(Error::Internal(format!(
            "principal divisor of degree {}",
            d.degree()
        )));
    }
    Ok(d)
}

/// φ ≡ 1 mod D: v_P(φ - 1) ≥ n_P for every P in D.
pub fn is_congruent_one(c: &Curve, phi: &CurveFunction, modulus: &Divisor) -> Result<bool> {
    if !modulus.is_effective() {
        return Err(Error::InvalidInput("modulus must be effective".into()));
    }
    let diff = phi.sub(c, &CurveFunction::one());
    if diff.is_zero() {
        return Ok(true);
    }
    for (p, n) in modulus.terms() {
        if valuation(c, p, &diff)? < n {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The first `n` power-series coefficients of φ at an affine place.
pub fn local_residues(c: &Curve, place: &Place, phi: &CurveFunction, n: usize) -> Vec<Elem> {
    c.expand_affine(place, phi, n)
}

/// Solutions φ = Σ λ_i ψ_i of prescribed truncated expansions at affine places.
#[derive(Clone, Debug)]
pub struct CongruenceSolution {
    pub particular: CurveFunction,
    /// F_p-basis of the homogeneous solutions.
    pub kernel: Vec<CurveFunction>,
}

/// Linear system "expansion of Σ λ_i ψ_i at P agrees with target_P to
/// precision len(target_P)" over F_p, where λ_i ∈ F_q.
pub struct CongruenceSystem<'a> {
    curve: &'a Curve,
    basis: Vec<CurveFunction>,
    places: Vec<(Place, usize)>,
    /// rows[r][col], col = i * r_q + j for λ_i's j-th F_p digit
    rows: Vec<Vec<u32>>,
}

impl<'a> CongruenceSystem<'a> {
    pub fn new(
        curve: &'a Curve,
        basis: Vec<CurveFunction>,
        places: Vec<(Place, usize)>,
    ) -> Result<Self> {
        let base = curve.field();
        let p = base.characteristic();
        let r = base.degree() as usize;
        let ncols = basis.len() * r;
        let mut rows = Vec::new();
        for (place, n) in &places {
            if place.is_infinity() {
                return Err(Error::InvalidInput(
                    "congruences at infinity are not supported".into(),
                ));
            }
            let ext = curve.extension(place.degree());
            let k = &ext.field;
            let dk = k.degree() as usize;
            let mut block = vec![vec![0u32; ncols]; n * dk];
            for (i, psi) in basis.iter().enumerate() {
                let s = local_residues(curve, place, psi, *n);
                for j in 0..r {
                    let w = ext.embed(p.pow(j as u32));
                    for (pos, &coef) in s.iter().enumerate() {
                        let digits = k.to_digits(k.mul(coef, w));
                        for (dd, &dig) in digits.iter().enumerate() {
                            block[pos * dk + dd][i * r + j] = dig;
                        }
                    }
                }
            }
            rows.extend(block);
        }
        Ok(CongruenceSystem {
            curve,
            basis,
            places,
            rows,
        })
    }

    pub fn places(&self) -> &[(Place, usize)] {
        &self.places
    }

    fn combine(&self, digits: &[u32]) -> CurveFunction {
        let base = self.curve.field();
        let r = base.degree() as usize;
        let mut out = CurveFunction::default();
        for (i, psi) in self.basis.iter().enumerate() {
            let lam = base.from_digits(&digits[i * r..(i + 1) * r]);
            if lam != 0 {
                out = out.add(self.curve, &psi.scale(self.curve, lam));
            }
        }
        out
    }

    /// Targets are truncated expansions, one per place in order.
    pub fn solve(&self, targets: &[Vec<Elem>]) -> Option<CongruenceSolution> {
        assert_eq!(targets.len(), self.places.len());
        let base = self.curve.field();
        let mut rhs = Vec::with_capacity(self.rows.len());
        for ((place, n), t) in self.places.iter().zip(targets) {
            let k = &self.curve.extension(place.degree()).field;
            for pos in 0..*n {
                rhs.extend(k.to_digits(t.get(pos).copied().unwrap_or(0)));
            }
        }
        let ncols = self.basis.len() * base.degree() as usize;
        let sol = solve_affine(base.characteristic(), &self.rows, &rhs, ncols)?;
        Some(CongruenceSolution {
            particular: self.combine(&sol.particular),
            kernel: sol.kernel.iter().map(|v| self.combine(v)).collect(),
        })
    }

    /// φ ≡ 1 at every place.
    pub fn solve_one(&self) -> Option<CongruenceSolution> {
        let targets: Vec<Vec<Elem>> = self
            .places
            .iter()
            .map(|(_, n)| {
                let mut t = vec![0; *n];
                if *n > 0 {
                    t[0] = 1;
                }
                t
            })
            .collect();
        self.solve(&targets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveRecord;

    fn x_plus() -> Curve {
        Curve::from_record(&CurveRecord {
            q: 3,
            f: vec![-1, -1, 1, 1, 0, 1],
        })
        .unwrap()
    }

    #[test]
    fn rr_bases() {
        let c = x_plus();
        assert_eq!(riemann_roch_basis(&c, 4).len(), 3);
        let b5 = riemann_roch_basis(&c, 5);
        assert_eq!(b5.len(), 4);
        assert_eq!(b5[3], CurveFunction::y());
        assert_eq!(riemann_roch_basis(&c, 13).len(), 12);
    }

    #[test]
    fn divisor_of_constant_is_zero() {
        let c = x_plus();
        assert!(principal_divisor(&c, &CurveFunction::constant(2))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn divisor_of_x_minus_one() {
        let c = x_plus();
        let phi = CurveFunction::from_poly(Poly::from_ints(c.field(), &[-1, 1]));
        let d = principal_divisor(&c, &phi).unwrap();
        let split: Vec<Place> = c
            .places_of_degree(1)
            .into_iter()
            .filter(|p| !p.is_infinity())
            .collect();
        let expected = Divisor::from_terms([
            (split[0].clone(), 1),
            (split[1].clone(), 1),
            (Place::infinity(), -2),
        ]);
        assert_eq!(d, expected);
    }

    #[test]
    fn divisor_of_y_is_ramification() {
        let c = x_plus();
        let d = principal_divisor(&c, &CurveFunction::y()).unwrap();
        assert_eq!(d.multiplicity(&Place::infinity()), -5);
        for (p, m) in d.terms() {
            if !p.is_infinity() {
                assert_eq!(p.branch(), Some(Branch::Ramified));
                assert_eq!(m, 1);
            }
        }
    }

    #[test]
    fn congruence_examples() {
        let c = x_plus();
        let p = c.places_of_degree(2)[0].clone();
        assert!(
            is_congruent_one(&c, &CurveFunction::one(), &Divisor::single(p.clone(), 3)).unwrap()
        );
        let pts = c.places_of_degree(1);
        let q = pts.iter().find(|p| !p.is_infinity()).unwrap().clone();
        // x = 1 + t at q
        let phi = CurveFunction::x();
        assert!(is_congruent_one(&c, &phi, &Divisor::single(q.clone(), 1)).unwrap());
        assert!(!is_congruent_one(&c, &phi, &Divisor::single(q.clone(), 2)).unwrap());
        let two = CurveFunction::constant(2);
        assert!(!is_congruent_one(&c, &two, &Divisor::single(q.clone(), 1)).unwrap());
    }

    #[test]
    fn solving_for_one_mod_d() {
        let c = x_plus();
        let p = c.places_of_degree(2)[0].clone();
        let d = Divisor::single(p.clone(), 2);
        let basis = riemann_roch_basis(&c, 10);
        let sys = CongruenceSystem::new(&c, basis, vec![(p, 2)]).unwrap();
        let sol = sys.solve_one().unwrap();
        assert!(is_congruent_one(&c, &sol.particular, &d).unwrap());
        for k in &sol.kernel {
            let phi = sol.particular.add(&c, k);
            assert!(is_congruent_one(&c, &phi, &d).unwrap());
        }
    }
}
