//! A finite-level model of the class field theory system: points
//! [(γ, ρ)] with γ ∈ Cl_D and ρ ∈ Π_{P|D} O/P^{n_P}, modulo
//! (γ, ρ) ∼ (γ - ι(u), uρ), with places acting by Frobenius translation and
//! multiplication by uniformizers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::LatticeBasis;
use crate::classgroup::{GroupElem, Orientation, RayClassGroup};
use crate::curve::local::{series_inv, series_mul};
use crate::curve::{Place, PlaceDescriptor};
use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::field::{Elem, GF};

/// An element of O/P^n: zero, or t^k u with u a unit known to precision n - k.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LocalElem {
    Zero,
    Unit { k: usize, u: Vec<Elem> },
}

/// The multiplicative monoid O/P^n at one place.
#[derive(Clone, Debug)]
pub struct LocalTruncation {
    place: Place,
    level: usize,
    field: Arc<GF>,
}

impl LocalTruncation {
    pub fn new(place: Place, level: usize, field: Arc<GF>) -> Self {
        LocalTruncation {
            place,
            level,
            field,
        }
    }

    pub fn place(&self) -> &Place {
        &self.place
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn one(&self) -> LocalElem {
        let mut u = vec![0; self.level];
        u[0] = 1;
        LocalElem::Unit { k: 0, u }
    }

    /// (k, u) with u truncated; zero once k reaches the level.
    pub fn make(&self, k: usize, u: &[Elem]) -> LocalElem {
        if k >= self.level {
            return LocalElem::Zero;
        }
        assert!(u.len() >= self.level - k && u[0] != 0, "not a unit");
        LocalElem::Unit {
            k,
            u: u[..self.level - k].to_vec(),
        }
    }

    pub fn mul(&self, a: &LocalElem, b: &LocalElem) -> LocalElem {
        match (a, b) {
            (LocalElem::Unit { k: k1, u: u1 }, LocalElem::Unit { k: k2, u: u2 })
                if k1 + k2 < self.level =>
            {
                let m = self.level - k1 - k2;
                LocalElem::Unit {
                    k: k1 + k2,
                    u: series_mul(&self.field, u1, u2, m),
                }
            }
            _ => LocalElem::Zero,
        }
    }

    /// π · a.
    pub fn shift(&self, a: &LocalElem) -> LocalElem {
        match a {
            LocalElem::Unit { k, u } => self.make(k + 1, u),
            LocalElem::Zero => LocalElem::Zero,
        }
    }

    /// u · a for a unit u given to full precision.
    pub fn scale(&self, unit: &[Elem], a: &LocalElem) -> LocalElem {
        self.mul(&self.make(0, unit), a)
    }

    pub fn random_unit(&self, rng: &mut ChaCha8Rng) -> Vec<Elem> {
        let size = self.field.size();
        let mut u: Vec<Elem> = (0..self.level).map(|_| rng.gen_range(0..size)).collect();
        u[0] = rng.gen_range(1..size);
        u
    }

    pub fn random_element(&self, rng: &mut ChaCha8Rng) -> LocalElem {
        let k = rng.gen_range(0..=self.level);
        let u = self.random_unit(rng);
        self.make(k, &u)
    }

    /// The valuation pattern of an element (None for zero).
    fn pattern(a: &LocalElem) -> Option<usize> {
        match a {
            LocalElem::Unit { k, .. } => Some(*k),
            LocalElem::Zero => None,
        }
    }
}

/// A representative (γ, ρ), kept in normal form by [`FiniteSystem`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SystemPoint {
    pub gamma: GroupElem,
    pub rho: Vec<LocalElem>,
}

/// The finite system over Cl_D.
pub struct FiniteSystem {
    group: Arc<RayClassGroup>,
    locals: Vec<LocalTruncation>,
    lifts: Vec<GroupElem>,
    orientation: Orientation,
    stabilizers: Mutex<HashMap<Vec<Option<usize>>, Arc<LatticeBasis>>>,
}

impl std::fmt::Debug for FiniteSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FiniteSystem({:?})", self.group)
    }
}

impl FiniteSystem {
    /// Builds the system; `lifts` gives c_P for the places of D (identity
    /// when missing).
    pub fn new(
        group: Arc<RayClassGroup>,
        lifts: &HashMap<Place, GroupElem>,
        orientation: Orientation,
    ) -> Result<Self> {
        if group.modulus().is_zero() {
            return Err(Error::InvalidInput(
                "the finite system needs a nonzero modulus".into(),
            ));
        }
        let c = group.curve().clone();
        let locals: Vec<LocalTruncation> = group
            .modulus()
            .terms()
            .map(|(p, n)| {
                LocalTruncation::new(p.clone(), n as usize, c.extension(p.degree()).field.clone())
            })
            .collect();
        let lifts = locals
            .iter()
            .map(|l| {
                let e = lifts
                    .get(l.place())
                    .cloned()
                    .unwrap_or_else(|| group.identity());
                if e.torsion.len() != group.torsion_factors().len() {
                    return Err(Error::InvalidInput(format!(
                        "lift for {} has the wrong shape",
                        l.place()
                    )));
                }
                Ok(e)
            })
            .collect::<Result<_>>()?;
        Ok(FiniteSystem {
            group,
            locals,
            lifts,
            orientation,
            stabilizers: Mutex::new(HashMap::new()),
        })
    }

    pub fn group(&self) -> &Arc<RayClassGroup> {
        &self.group
    }

    pub fn locals(&self) -> &[LocalTruncation] {
        &self.locals
    }

    pub fn unit_group_order(&self) -> BigInt {
        self.group.unit_groups().iter().map(|u| u.order()).product()
    }

    /// ι(u) for u ∈ U_D.
    pub fn iota(&self, u: &[Vec<Elem>]) -> Result<GroupElem> {
        self.group.unit_embedding(u)
    }

    /// The raw equivalence move (γ, ρ) ↦ (γ - ι(u), uρ), without normalizing.
    pub fn unit_move(&self, x: &SystemPoint, u: &[Vec<Elem>]) -> Result<SystemPoint> {
        let iu = self.iota(u)?;
        Ok(SystemPoint {
            gamma: self.group.sub(&x.gamma, &iu),
            rho: self
                .locals
                .iter()
                .zip(u)
                .zip(&x.rho)
                .map(|((l, ui), r)| l.scale(ui, r))
                .collect(),
        })
    }

    /// Lattice of torsion relations plus ι of the stabilizer of ρ.
    fn stabilizer_lattice(&self, pattern: &[Option<usize>]) -> Arc<LatticeBasis> {
        if let Some(l) = self
            .stabilizers
            .lock()
            .expect("stabilizer cache poisoned")
            .get(pattern)
        {
            return l.clone();
        }
        let factors = self.group.torsion_factors();
        let t = factors.len();
        let mut lat = LatticeBasis::new(t);
        for (i, &d) in factors.iter().enumerate() {
            let mut v = vec![0i64; t];
            v[i] = d;
            lat.insert(&v);
        }
        for (l, pat) in self.locals.iter().zip(pattern) {
            let from = match pat {
                None => 0,
                Some(k) => l.level() - k,
            };
            for x in self.group.unit_generator_classes(l.place(), from) {
                lat.insert(&x.torsion);
            }
        }
        let lat = Arc::new(lat);
        self.stabilizers
            .lock()
            .expect("stabilizer cache poisoned")
            .insert(pattern.to_vec(), lat.clone());
        lat
    }

    /// The normal form of the class of (γ, ρ): each ρ_P becomes t^k or 0,
    /// and γ is reduced modulo ι of the stabilizer of ρ.
    pub fn normalize(&self, x: &SystemPoint) -> Result<SystemPoint> {
        let mut units = Vec::with_capacity(self.locals.len());
        let mut rho = Vec::with_capacity(self.locals.len());
        for (l, r) in self.locals.iter().zip(&x.rho) {
            match r {
                LocalElem::Zero => {
                    units.push(l.one().unit_series());
                    rho.push(LocalElem::Zero);
                }
                LocalElem::Unit { k, u } => {
                    let mut inv = series_inv(&l.field, u, u.len());
                    inv.resize(l.level(), 0);
                    units.push(inv);
                    let mut one = vec![0; l.level() - k];
                    one[0] = 1;
                    rho.push(LocalElem::Unit { k: *k, u: one });
                }
            }
        }
        let moved = self.group.sub(&x.gamma, &self.iota(&units)?);
        let pattern: Vec<Option<usize>> = rho.iter().map(LocalTruncation::pattern).collect();
        let lat = self.stabilizer_lattice(&pattern);
        let torsion = lat
            .reduce_vector(&moved.torsion)
            .iter()
            .map(|v| v.to_i64().expect("reduced coordinate"))
            .collect();
        Ok(SystemPoint {
            gamma: GroupElem {
                torsion,
                degree: moved.degree,
            },
            rho,
        })
    }

    pub fn equivalent(&self, a: &SystemPoint, b: &SystemPoint) -> Result<bool> {
        Ok(self.normalize(a)? == self.normalize(b)?)
    }

    /// [(identity, 1)].
    pub fn unit_point(&self) -> SystemPoint {
        SystemPoint {
            gamma: self.group.identity(),
            rho: self.locals.iter().map(|l| l.one()).collect(),
        }
    }

    /// One place acting on a representative (not normalized).
    fn act_place(&self, p: &Place, x: &SystemPoint) -> Result<SystemPoint> {
        if let Some(i) = self.locals.iter().position(|l| l.place() == p) {
            let mut rho = x.rho.clone();
            rho[i] = self.locals[i].shift(&rho[i]);
            Ok(SystemPoint {
                gamma: self.group.sub(&x.gamma, &self.lifts[i]),
                rho,
            })
        } else {
            let f = self.group.frobenius(p, self.orientation)?;
            Ok(SystemPoint {
                gamma: self.group.sub(&x.gamma, &f),
                rho: x.rho.clone(),
            })
        }
    }

    /// 𝔫 ∗ x for an effective divisor 𝔫, returned in normal form.
    pub fn act(&self, n: &Divisor, x: &SystemPoint) -> Result<SystemPoint> {
        if !n.is_effective() {
            return Err(Error::InvalidInput(format!(
                "{} is not an effective divisor",
                n
            )));
        }
        let mut y = x.clone();
        for (p, m) in n.terms() {
            for _ in 0..m {
                y = self.act_place(p, &y)?;
            }
        }
        self.normalize(&y)
    }

    pub fn random_point(&self, rng: &mut ChaCha8Rng) -> SystemPoint {
        let torsion = self
            .group
            .torsion_factors()
            .iter()
            .map(|&d| rng.gen_range(0..d))
            .collect();
        SystemPoint {
            gamma: GroupElem {
                torsion,
                degree: rng.gen_range(-3..=3),
            },
            rho: self.locals.iter().map(|l| l.random_element(rng)).collect(),
        }
    }

    pub fn random_units(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<Elem>> {
        self.locals.iter().map(|l| l.random_unit(rng)).collect()
    }

    /// Places that act: the generators of Cl_D and the places of D.
    pub fn acting_places(&self) -> Vec<Place> {
        let mut v: Vec<Place> = self.group.generators().to_vec();
        v.extend(self.locals.iter().map(|l| l.place().clone()));
        v
    }

    fn random_coprime(&self, rng: &mut ChaCha8Rng, places: &[Place]) -> Divisor {
        let coprime: Vec<&Place> = places
            .iter()
            .filter(|p| !self.group.modulus().contains(p))
            .collect();
        let mut d = Divisor::zero();
        for _ in 0..rng.gen_range(1..=3) {
            d.add_term(coprime[rng.gen_range(0..coprime.len())].clone(), 1);
        }
        d
    }

    fn random_monoid(&self, rng: &mut ChaCha8Rng, places: &[Place]) -> Divisor {
        let mut d = Divisor::zero();
        for _ in 0..rng.gen_range(0..=3) {
            d.add_term(places[rng.gen_range(0..places.len())].clone(), 1);
        }
        d
    }

    /// Checks laws (i)-(v) on `samples` seeded random instances.
    pub fn check_action_laws(&self, samples: usize, seed: u64) -> Result<DynamicsReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let places = self.acting_places();
        let mut laws = Vec::new();

        // (i) equivalence: reflexive, symmetric, transitive along unit moves
        let mut fail = None;
        for _ in 0..samples {
            let x = self.random_point(&mut rng);
            let u1 = self.random_units(&mut rng);
            let u2 = self.random_units(&mut rng);
            let y = self.unit_move(&x, &u1)?;
            let z = self.unit_move(&y, &u2)?;
            let inv: Vec<Vec<Elem>> = self
                .locals
                .iter()
                .zip(&u1)
                .map(|(l, u)| series_inv(&l.field, u, l.level()))
                .collect();
            let back = self.unit_move(&y, &inv)?;
            let nx = self.normalize(&x)?;
            let ok = nx == self.normalize(&y)?
                && nx == self.normalize(&z)?
                && nx == self.normalize(&back)?
                && nx == self.normalize(&nx)?
                && back.rho == x.rho;
            if !ok && fail.is_none() {
                fail = Some(format!("x = {:?}", x));
            }
        }
        laws.push(LawResult::new("equivalence", samples, fail));

        // (ii) act commutes with the quotient, for every acting place
        let mut fail = None;
        let mut checked = 0;
        for _ in 0..samples {
            let x = self.random_point(&mut rng);
            let u = self.random_units(&mut rng);
            let y = self.unit_move(&x, &u)?;
            for p in &places {
                let d = Divisor::single(p.clone(), 1);
                checked += 1;
                if self.act(&d, &x)? != self.act(&d, &y)? && fail.is_none() {
                    fail = Some(format!("place {} on x = {:?}", p, x));
                }
            }
        }
        laws.push(LawResult::new("well_defined", checked, fail));

        // (iii) 𝔪 ∗ (𝔫 ∗ x) = 𝔫 ∗ (𝔪 ∗ x) = (𝔪𝔫) ∗ x
        let mut fail = None;
        for _ in 0..samples {
            let x = self.random_point(&mut rng);
            let m = self.random_monoid(&mut rng, &places);
            let n = self.random_monoid(&mut rng, &places);
            let a = self.act(&m, &self.act(&n, &x)?)?;
            let b = self.act(&n, &self.act(&m, &x)?)?;
            let c = self.act(&m.add(&n), &x)?;
            if !(a == b && b == c) && fail.is_none() {
                fail = Some(format!("m = {}, n = {}, x = {:?}", m, n, x));
            }
        }
        laws.push(LawResult::new("monoid_action", samples, fail));

        // (iv) places coprime to D act injectively
        let mut fail = None;
        for _ in 0..samples {
            let x = self.normalize(&self.random_point(&mut rng))?;
            let y = self.normalize(&self.random_point(&mut rng))?;
            let n = self.random_coprime(&mut rng, &places);
            let same = self.act(&n, &x)? == self.act(&n, &y)?;
            if same != (x == y) && fail.is_none() {
                fail = Some(format!("n = {}, x = {:?}, y = {:?}", n, x, y));
            }
        }
        laws.push(LawResult::new("coprime_injective", samples, fail));

        // (v) 𝔫 ∗ [(1, 1)] = [(class(𝔫)^{-1}, 1)]
        let mut fail = None;
        let orbit_samples = samples.min(20).max(1);
        for _ in 0..orbit_samples {
            let n = self.random_coprime(&mut rng, &places);
            let mut cls = self.group.divisor_class(&n)?;
            if self.orientation == Orientation::Inverse {
                cls = self.group.neg(&cls);
            }
            let expected = self.normalize(&SystemPoint {
                gamma: self.group.neg(&cls),
                rho: self.unit_point().rho,
            })?;
            if self.act(&n, &self.unit_point())? != expected && fail.is_none() {
                fail = Some(format!("n = {}", n));
            }
        }
        laws.push(LawResult::new("orbit_identity", orbit_samples, fail));

        let non_injective = self
            .locals
            .iter()
            .map(|l| {
                Ok((
                    l.place().descriptor(),
                    self.non_injective_witness(l.place())?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DynamicsReport {
            modulus: self.group.modulus().literal(),
            seed,
            samples,
            passed: laws.iter().all(|l| l.passed),
            laws,
            unit_group_order: self.unit_group_order().to_string(),
            h_subspace: self.h_subspace(),
            non_injective_at_modulus: non_injective,
        })
    }

    /// Two distinct points identified by the action of P | D.
    pub fn non_injective_witness(&self, p: &Place) -> Result<bool> {
        let i = self
            .locals
            .iter()
            .position(|l| l.place() == p)
            .ok_or_else(|| Error::InvalidInput(format!("{} does not divide D", p)))?;
        let l = &self.locals[i];
        let d = Divisor::single(p.clone(), 1);
        let base = self.unit_point();
        for z in 1..l.field.size() {
            let mut u = vec![0; l.level()];
            u[0] = z;
            let mut a = base.clone();
            let mut b = base.clone();
            a.rho[i] = l.make(l.level() - 1, &l.one().unit_series());
            b.rho[i] = l.make(l.level() - 1, &u);
            if self.normalize(&a)? != self.normalize(&b)?
                && self.act(&d, &a)? == self.act(&d, &b)?
            {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Classes with unit ρ, with ρ forgotten: Cl_D / ι(U_D). Its degree-0
    /// part is compared with the class number.
    pub fn h_subspace(&self) -> HSubspaceReport {
        let pattern = vec![None; self.locals.len()];
        let lat = self.stabilizer_lattice(&pattern);
        let index = lat.index().expect("torsion relations give full rank");
        let h = self.group.class_number();
        HSubspaceReport {
            torsion_order: self.group.torsion_order().to_string(),
            units_image_order: (self.group.torsion_order() / &index).to_string(),
            quotient_order: index.to_string(),
            class_number: h,
            bijective: index == BigInt::from(h),
        }
    }
}

impl LocalElem {
    fn unit_series(&self) -> Vec<Elem> {
        match self {
            LocalElem::Unit { u, .. } => u.clone(),
            LocalElem::Zero => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawResult {
    pub law: String,
    pub checked: usize,
    pub passed: bool,
    pub counterexample: Option<String>,
}

impl LawResult {
    fn new(law: &str, checked: usize, fail: Option<String>) -> Self {
        LawResult {
            law: law.into(),
            checked,
            passed: fail.is_none(),
            counterexample: fail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HSubspaceReport {
    pub torsion_order: String,
    pub units_image_order: String,
    /// |Cl_D^0 / ι(U_D)|
    pub quotient_order: String,
    pub class_number: i64,
    pub bijective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub modulus: Vec<(PlaceDescriptor, i64)>,
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    pub laws: Vec<LawResult>,
    pub unit_group_order: String,
    pub h_subspace: HSubspaceReport,
    pub non_injective_at_modulus: Vec<(PlaceDescriptor, bool)>,
}
