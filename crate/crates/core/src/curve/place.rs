//! Places of the function field F_q(x, y): the unique place at infinity and
//! the places over each monic irreducible u(x), with canonical residue data.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Curve;
use crate::error::{Error, Result};
use crate::field::{Elem, Embedding, Poly, GF};

/// How the place over u(x) sits in the quadratic extension F_q(x, y) / F_q(x).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    /// split, y ≡ β with β of canonical sign
    Plus,
    /// split, y ≡ -β
    Minus,
    Inert,
    Ramified,
}

impl Branch {
    pub fn tag(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
            Branch::Inert => "i",
            Branch::Ramified => "r",
        }
    }

    pub fn from_tag(s: &str) -> Result<Branch> {
        match s {
            "+" | "plus" => Ok(Branch::Plus),
            "-" | "minus" => Ok(Branch::Minus),
            "i" | "inert" => Ok(Branch::Inert),
            "r" | "ramified" => Ok(Branch::Ramified),
            _ => Err(Error::InvalidInput(format!("unknown branch tag {:?}", s))),
        }
    }

    pub fn conjugate(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
            b => b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlaceKind {
    Infinity,
    Affine { u: Poly, branch: Branch },
}

/// A place of the curve together with a canonical point (α, β) over the
/// residue field F_{q^deg}, the field `curve.extension(deg)`.
#[derive(Clone, Debug)]
pub struct Place {
    kind: PlaceKind,
    degree: u32,
    alpha: Elem,
    beta: Elem,
}

impl PartialEq for Place {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind
    }
}

impl Eq for Place {}

impl std::hash::Hash for Place {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.kind.hash(h)
    }
}

impl Ord for Place {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.degree, &self.kind).cmp(&(o.degree, &o.kind))
    }
}

impl PartialOrd for Place {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Place {
    pub fn infinity() -> Place {
        Place {
            kind: PlaceKind::Infinity,
            degree: 1,
            alpha: 0,
            beta: 0,
        }
    }

    pub(crate) fn affine(u: Poly, branch: Branch, degree: u32, alpha: Elem, beta: Elem) -> Place {
        Place {
            kind: PlaceKind::Affine { u, branch },
            degree,
            alpha,
            beta,
        }
    }

    pub fn kind(&self) -> &PlaceKind {
        &self.kind
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_infinity(&self) -> bool {
        self.kind == PlaceKind::Infinity
    }

    pub fn u(&self) -> Option<&Poly> {
        match &self.kind {
            PlaceKind::Affine { u, .. } => Some(u),
            PlaceKind::Infinity => None,
        }
    }

    pub fn branch(&self) -> Option<Branch> {
        match &self.kind {
            PlaceKind::Affine { branch, .. } => Some(*branch),
            PlaceKind::Infinity => None,
        }
    }

    pub fn is_split(&self) -> bool {
        matches!(self.branch(), Some(Branch::Plus | Branch::Minus))
    }

    /// x-coordinate of the canonical point, in F_{q^deg}.
    pub fn alpha(&self) -> Elem {
        self.alpha
    }

    /// y-coordinate of the canonical point, in F_{q^deg}.
    pub fn beta(&self) -> Elem {
        self.beta
    }

    pub fn descriptor(&self) -> PlaceDescriptor {
        match &self.kind {
            PlaceKind::Infinity => PlaceDescriptor::Infinity,
            PlaceKind::Affine { u, branch } => PlaceDescriptor::Affine {
                u: u.coeffs().to_vec(),
                branch: *branch,
            },
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.descriptor().fmt(f)
    }
}

/// Serializable name of a place: `"inf"` or `[u-coefficients, branch tag]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlaceDescriptor {
    Infinity,
    Affine { u: Vec<u32>, branch: Branch },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawDescriptor {
    Name(String),
    Pair(Vec<u32>, String),
}

impl Serialize for PlaceDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PlaceDescriptor::Infinity => RawDescriptor::Name("inf".into()),
            PlaceDescriptor::Affine { u, branch } => {
                RawDescriptor::Pair(u.clone(), branch.tag().into())
            }
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PlaceDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RawDescriptor::deserialize(d)? {
            RawDescriptor::Name(s) => s.parse().map_err(serde::de::Error::custom),
            RawDescriptor::Pair(u, tag) => Ok(PlaceDescriptor::Affine {
                u,
                branch: Branch::from_tag(&tag).map_err(serde::de::Error::custom)?,
            }),
        }
    }
}

impl fmt::Display for PlaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaceDescriptor::Infinity => write!(f, "inf"),
            PlaceDescriptor::Affine { u, branch } => {
                let cs: Vec<String> = u.iter().map(|c| c.to_string()).collect();
                write!(f, "{}:{}", cs.join(","), branch.tag())
            }
        }
    }
}

/// Parses `inf` or `c0,c1,...,1:tag`.
impl FromStr for PlaceDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" {
            return Ok(PlaceDescriptor::Infinity);
        }
        let (cs, tag) = s.rsplit_once(':').ok_or_else(|| {
            Error::InvalidInput(format!("place descriptor {:?} lacks a branch tag", s))
        })?;
        let u = cs
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::InvalidInput(format!("bad coefficient {:?}: {}", c, e)))
            })
            .collect::<Result<Vec<u32>>>()?;
        Ok(PlaceDescriptor::Affine {
            u,
            branch: Branch::from_tag(tag.trim())?,
        })
    }
}

#[derive(Clone, Copy, Debug)]
enum RootType {
    Ramified,
    Split(Elem),
    Inert,
}

#[derive(Clone, Debug)]
struct RootEntry {
    u: Poly,
    alpha: Elem,
    kind: RootType,
}

/// All monic irreducibles u of degree e, with the orbit-minimal root α of u
/// in F_{q^e} and the behaviour of u in the quadratic extension.
pub(crate) struct RootLevel {
    e: u32,
    field: Arc<GF>,
    entries: Vec<RootEntry>,
    index: HashMap<Poly, usize>,
    inert: OnceLock<Vec<Place>>,
}

impl RootLevel {
    pub(crate) fn build(curve: &Curve, e: u32) -> RootLevel {
        let ext = curve.extension(e);
        let big = ext.field.clone();
        let q = curve.q();
        let fx = curve.f().map(ext.embedding.table());
        let mut entries: Vec<RootEntry> = (0..big.size())
            .into_par_iter()
            .filter_map(|alpha| {
                let mut conj = vec![alpha];
                let mut c = big.pow(alpha, q);
                while c != alpha {
                    if c < alpha {
                        return None;
                    }
                    conj.push(c);
                    c = big.pow(c, q);
                }
                if conj.len() as u32 != e {
                    return None;
                }
                let mut u = Poly::one();
                for &z in &conj {
                    u = u.mul(&big, &Poly::linear(&big, z));
                }
                let u = Poly::new(
                    u.coeffs()
                        .iter()
                        .map(|&c| {
                            ext.restrict(c)
                                .expect("minimal polynomial has base-field coefficients")
                        })
                        .collect(),
                );
                let v = fx.eval(&big, alpha);
                let kind = if v == 0 {
                    RootType::Ramified
                } else if let Some(b) = big.sqrt(v) {
                    RootType::Split(if big.is_canonical_sign(b) {
                        b
                    } else {
                        big.neg(b)
                    })
                } else {
                    RootType::Inert
                };
                Some(RootEntry { u, alpha, kind })
            })
            .collect();
        entries.sort_by(|a, b| a.u.cmp(&b.u));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, r)| (r.u.clone(), i))
            .collect();
        RootLevel {
            e,
            field: big,
            entries,
            index,
            inert: OnceLock::new(),
        }
    }

    fn root_places(&self, r: &RootEntry) -> Vec<Place> {
        match r.kind {
            RootType::Ramified => vec![Place::affine(
                r.u.clone(),
                Branch::Ramified,
                self.e,
                r.alpha,
                0,
            )],
            RootType::Split(b) => vec![
                Place::affine(r.u.clone(), Branch::Plus, self.e, r.alpha, b),
                Place::affine(
                    r.u.clone(),
                    Branch::Minus,
                    self.e,
                    r.alpha,
                    self.field.neg(b),
                ),
            ],
            RootType::Inert => Vec::new(),
        }
    }

    /// Places of degree e (ramified and split).
    pub(crate) fn places_of_root_degree(&self) -> Vec<Place> {
        self.entries
            .iter()
            .flat_map(|r| self.root_places(r))
            .collect()
    }

    /// Places of degree 2e lying over inert u of degree e.
    pub(crate) fn inert_places(&self, curve: &Curve) -> &[Place] {
        self.inert.get_or_init(|| self.build_inert(curve))
    }

    fn build_inert(&self, curve: &Curve) -> Vec<Place> {
        let inert: Vec<&RootEntry> = self
            .entries
            .iter()
            .filter(|r| matches!(r.kind, RootType::Inert))
            .collect();
        if inert.is_empty() {
            return Vec::new();
        }
        let ext2 = curve.extension(2 * self.e);
        let big = ext2.field.clone();
        let chain = Embedding::new(&self.field, &big);
        let fx = curve.f().map(ext2.embedding.table());
        let q = curve.q();
        inert
            .par_iter()
            .map(|r| {
                let um = r.u.map(ext2.embedding.table());
                let z0 = chain.apply(r.alpha);
                let root = (0..big.degree())
                    .map(|k| big.frobenius(z0, k))
                    .find(|&z| um.eval(&big, z) == 0)
                    .expect("some Frobenius conjugate of an embedded root is a root");
                let mut alpha = root;
                let mut c = big.pow(root, q);
                while c != root {
                    alpha = alpha.min(c);
                    c = big.pow(c, q);
                }
                let b = big
                    .sqrt(fx.eval(&big, alpha))
                    .expect("inert residue becomes a square in the quadratic extension");
                let beta = if big.is_canonical_sign(b) {
                    b
                } else {
                    big.neg(b)
                };
                Place::affine(r.u.clone(), Branch::Inert, 2 * self.e, alpha, beta)
            })
            .collect()
    }

    pub(crate) fn places_over(&self, curve: &Curve, u: &Poly) -> Vec<Place> {
        let Some(&i) = self.index.get(u) else {
            return Vec::new();
        };
        let r = &self.entries[i];
        match r.kind {
            RootType::Inert => {
                let pos = self.entries[..i]
                    .iter()
                    .filter(|r| matches!(r.kind, RootType::Inert))
                    .count();
                vec![self.inert_places(curve)[pos].clone()]
            }
            _ => self.root_places(r),
        }
    }

    /// Whether u has a root α with f(α) = 0, a square, or neither.
    pub(crate) fn branch_type(&self, u: &Poly) -> Option<Branch> {
        self.index.get(u).map(|&i| match self.entries[i].kind {
            RootType::Ramified => Branch::Ramified,
            RootType::Split(_) => Branch::Plus,
            RootType::Inert => Branch::Inert,
        })
    }
}
