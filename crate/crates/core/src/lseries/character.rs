//! Characters Cl_D → μ_n.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::algebra::{enumerate_homs, CyclotomicElem};
use crate::classgroup::{ClassGroupCache, GroupElem, RayClassGroup};
use crate::divisor::Divisor;
use crate::error::{Error, Result};

/// χ(x) = ζ_n^{Σ a_i x_i + a_deg · deg x} on the canonical coordinates of
/// Cl_D (torsion coordinates x_i and the degree).
#[derive(Clone)]
pub struct Character {
    group: Arc<RayClassGroup>,
    order: u32,
    torsion: Vec<u64>,
    degree: u64,
    conductor: OnceLock<Divisor>,
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "χ[n={}; {:?}; deg {}] on {:?}",
            self.order, self.torsion, self.degree, self.group
        )
    }
}

impl PartialEq for Character {
    fn eq(&self, o: &Self) -> bool {
        self.group.modulus() == o.group.modulus()
            && self.order == o.order
            && self.torsion == o.torsion
            && self.degree == o.degree
    }
}

impl Eq for Character {}

/// Serializable character data.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharacterData {
    pub order: u32,
    pub torsion_exponents: Vec<u64>,
    pub degree_exponent: u64,
}

impl Character {
    /// Checks that each exponent a_i is compatible with its invariant factor
    /// (d_i · a_i ≡ 0 mod n).
    pub fn new(
        group: Arc<RayClassGroup>,
        order: u32,
        torsion: Vec<u64>,
        degree: u64,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput(
                "character order must be positive".into(),
            ));
        }
        let n = order as u64;
        if torsion.len() != group.torsion_factors().len() {
            return Err(Error::InvalidInput(
                "wrong number of torsion exponents".into(),
            ));
        }
        for (&a, &d) in torsion.iter().zip(group.torsion_factors()) {
            if (a as u128 * d as u128) % n as u128 != 0 {
                return Err(Error::InvalidInput(format!(
                    "exponent {} is not defined on Z/{}",
                    a, d
                )));
            }
        }
        Ok(Character {
            group,
            order,
            torsion: torsion.into_iter().map(|a| a % n).collect(),
            degree: degree % n,
            conductor: OnceLock::new(),
        })
    }

    pub fn trivial(group: Arc<RayClassGroup>) -> Self {
        let k = group.torsion_factors().len();
        Character::new(group, 1, vec![0; k], 0).expect("trivial character")
    }

    pub fn group(&self) -> &Arc<RayClassGroup> {
        &self.group
    }

    /// The n of the target μ_n (the exact order divides it).
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn data(&self) -> CharacterData {
        CharacterData {
            order: self.order,
            torsion_exponents: self.torsion.clone(),
            degree_exponent: self.degree,
        }
    }

    pub fn exact_order(&self) -> u32 {
        let n = self.order as u64;
        let g = self
            .torsion
            .iter()
            .chain(std::iter::once(&self.degree))
            .fold(n, |g, &a| g.gcd(&a));
        (n / g) as u32
    }

    /// k with χ(x) = ζ_n^k.
    pub fn exponent(&self, x: &GroupElem) -> u64 {
        let n = self.order as i128;
        let s: i128 = self
            .torsion
            .iter()
            .zip(&x.torsion)
            .map(|(&a, &t)| a as i128 * t as i128)
            .sum::<i128>()
            + self.degree as i128 * x.degree as i128;
        s.rem_euclid(n) as u64
    }

    pub fn value(&self, x: &GroupElem) -> CyclotomicElem {
        CyclotomicElem::root_of_unity(self.order, self.exponent(x) as i64)
    }

    pub fn is_trivial(&self) -> bool {
        self.exact_order() == 1
    }

    /// Factors through the degree map.
    pub fn is_constant(&self) -> bool {
        self.torsion.iter().all(|&a| a == 0)
    }

    pub fn conj(&self) -> Character {
        self.pow(self.order as i64 - 1)
    }

    pub fn pow(&self, k: i64) -> Character {
        let n = self.order as i64;
        let f = |a: u64| ((a as i64 * k).rem_euclid(n)) as u64;
        Character::new(
            self.group.clone(),
            self.order,
            self.torsion.iter().map(|&a| f(a)).collect(),
            f(self.degree),
        )
        .expect("powers stay well defined")
    }

    /// χ · ζ_n^{k · deg}.
    pub fn twist_by_degree(&self, k: i64) -> Character {
        let n = self.order as i64;
        let degree = (self.degree as i64 + k).rem_euclid(n) as u64;
        Character::new(self.group.clone(), self.order, self.torsion.clone(), degree)
            .expect("twist stays well defined")
    }

    /// The smallest D' ≤ D such that χ factors through Cl_{D'}.
    pub fn conductor(&self) -> &Divisor {
        self.conductor.get_or_init(|| {
            let g = &self.group;
            let mut f = Divisor::zero();
            for (p, n_p) in g.modulus().terms() {
                let killed = |level: usize| {
                    g.unit_generator_classes(p, level)
                        .iter()
                        .all(|x| self.exponent(x) == 0)
                };
                let level = (0..=n_p as usize)
                    .find(|&l| killed(l))
                    .expect("level n_P kills nothing");
                if level > 0 {
                    f.add_term(p.clone(), level as i64);
                }
            }
            f
        })
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.group.modulus()
    }

    /// The character of Cl_{f_χ} inducing χ.
    pub fn primitive(&self, groups: &ClassGroupCache) -> Result<Character> {
        if self.is_primitive() {
            return Ok(self.clone());
        }
        let target = groups.get(self.conductor())?;
        let hom = self.group.level_quotient(&target)?;
        let wanted: Vec<u64> = (0..self.group.generator_count())
            .map(|i| self.exponent(&self.group.generator_class(i)))
            .collect();
        for cand in characters(&target, self.order, &[]) {
            if hom
                .images()
                .iter()
                .zip(&wanted)
                .all(|(img, &w)| cand.exponent(img) == w)
            {
                let _ = cand.conductor.set(self.conductor().clone());
                return Ok(cand);
            }
        }
        Err(Error::Internal(format!(
            "{:?} does not factor through its conductor {}",
            self,
            self.conductor()
        )))
    }

    /// (χ_g, k) with ω = ζ_n^k = χ(section), χ_g = χ · ω^{-deg}; χ_g is
    /// trivial on the section.
    pub fn split(&self) -> (Character, u64) {
        let k = self.exponent(&self.group.section());
        (self.twist_by_degree(-(k as i64)), k)
    }
}

/// All homomorphisms Cl_D → μ_n trivial on the given elements.
pub fn characters(group: &Arc<RayClassGroup>, n: u32, trivial_on: &[GroupElem]) -> Vec<Character> {
    let pres = group.presentation();
    let sign = group.free_sign();
    let mut out = Vec::new();
    for h in enumerate_homs(pres, n as u64) {
        let mut torsion = Vec::with_capacity(group.torsion_factors().len());
        let mut degree = 0u64;
        for (img, d) in h.iter().zip(pres.invariant_factors()) {
            if d.to_i64() == Some(0) {
                degree = ((*img as i64 * sign).rem_euclid(n as i64)) as u64;
            } else {
                torsion.push(*img);
            }
        }
        let chi = Character::new(group.clone(), n, torsion, degree)
            .expect("homomorphisms respect invariant factors");
        if trivial_on.iter().all(|x| chi.exponent(x) == 0) {
            out.push(chi);
        }
    }
    out
}
