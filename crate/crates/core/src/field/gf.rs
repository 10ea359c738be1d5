//! Finite fields F_{p^n} with table-driven multiplication.
//!
//! An element is a `u32` index: the base-p digits of the index are the
//! coefficients of the element in the power basis 1, t, t^2, ... of
//! F_p[t]/(modulus).

use std::fmt;

use crate::error::{Error, Result};

pub type Elem = u32;

/// Upper bound on field sizes handled by the table-driven representation.
pub const MAX_FIELD_SIZE: u64 = 1 << 22;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits q into (p, r) with q = p^r, p prime.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    let f = prime_factors(q);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let mut r = 0;
    let mut m = q;
    while m > 1 {
        m /= p;
        r += 1;
    }
    Some((p as u32, r))
}

// --- dense polynomials over F_p, used only while building a field ---

fn fp_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] += x as u64 * y as u64;
        }
    }
    let mut r: Vec<u32> = prod.iter().map(|&c| (c % p as u64) as u32).collect();
    fp_rem_in_place(&mut r, m, p);
    fp_trim(r)
}

fn fp_rem_in_place(r: &mut Vec<u32>, m: &[u32], p: u32) {
    let dm = m.len() - 1;
    // m is monic
    while r.len() > dm {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if c != 0 {
            for (j, &mj) in m.iter().enumerate() {
                let sub = (c as u64 * mj as u64 % p as u64) as u32;
                r[shift + j] = (r[shift + j] + p - sub) % p;
            }
        }
        r.pop();
    }
    let t = fp_trim(std::mem::take(r));
    *r = t;
}

fn fp_gcd(mut a: Vec<u32>, mut b: Vec<u32>, p: u32) -> Vec<u32> {
    a = fp_trim(a);
    b = fp_trim(b);
    while !b.is_empty() {
        // make b monic
        let inv = fp_inv(*b.last().unwrap(), p);
        let bm: Vec<u32> = b
            .iter()
            .map(|&c| (c as u64 * inv as u64 % p as u64) as u32)
            .collect();
        let mut r = a;
        fp_rem_in_place(&mut r, &bm, p);
        a = bm;
        b = r;
    }
    a
}

fn fp_inv(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Rabin's test: m of degree n is irreducible iff x^{p^n} = x mod m and
/// gcd(x^{p^{n/l}} - x, m) = 1 for every prime l | n.
fn fp_is_irreducible(m: &[u32], p: u32) -> bool {
    let n = m.len() - 1;
    if n == 1 {
        return true;
    }
    let x = vec![0, 1];
    let frob_iter = |k: usize| -> Vec<u32> {
        // x^{p^k} mod m
        let mut cur = x.clone();
        for _ in 0..k {
            let mut acc = vec![1u32];
            let mut base = cur.clone();
            let mut e = p;
            while e > 0 {
                if e & 1 == 1 {
                    acc = fp_mulmod(&acc, &base, m, p);
                }
                base = fp_mulmod(&base, &base, m, p);
                e >>= 1;
            }
            cur = acc;
        }
        cur
    };
    let sub_x = |mut v: Vec<u32>| -> Vec<u32> {
        if v.len() < 2 {
            v.resize(2, 0);
        }
        v[1] = (v[1] + p - 1) % p;
        fp_trim(v)
    };
    if !sub_x(frob_iter(n)).is_empty() {
        return false;
    }
    for l in prime_factors(n as u64) {
        let h = sub_x(frob_iter(n / l as usize));
        if fp_gcd(m.to_vec(), h, p).len() != 1 {
            return false;
        }
    }
    true
}

/// The finite field F_{p^n}.
pub struct GF {
    p: u32,
    degree: u32,
    size: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    pow_p: Vec<u32>,
}

impl fmt::Debug for GF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.degree)
    }
}

impl GF {
    /// Builds F_{p^n}, taking the lexicographically first irreducible modulus.
    pub fn new(p: u32, n: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidField(format!("{} is not prime", p)));
        }
        if p == 2 {
            return Err(Error::InvalidField(
                "characteristic 2 is not supported".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidField(
                "extension degree must be positive".into(),
            ));
        }
        let size = (p as u64)
            .checked_pow(n)
            .filter(|&s| s <= MAX_FIELD_SIZE)
            .ok_or_else(|| Error::InvalidField(format!("field of size {}^{} is too large", p, n)))?
            as u32;
        let modulus = (0..size)
            .map(|idx| {
                let mut m = digits(idx, p, n);
                m.push(1);
                m
            })
            .find(|m| fp_is_irreducible(m, p))
            .expect("an irreducible polynomial of every degree exists");
        Ok(Self::with_modulus(p, n, modulus))
    }

    fn with_modulus(p: u32, n: u32, modulus: Vec<u32>) -> Self {
        let size = p.pow(n);
        let pow_p: Vec<u32> = (0..=n).map(|i| p.pow(i)).collect();
        let order = (size - 1) as u64;
        let as_poly = |idx: u32| fp_trim(digits(idx, p, n));
        let from_poly = |v: &[u32]| v.iter().zip(&pow_p).map(|(&c, &w)| c * w).sum::<u32>();
        let factors = prime_factors(order);
        let pow_slow = |g: &[u32], mut e: u64| {
            let mut acc = vec![1u32];
            let mut base = g.to_vec();
            while e > 0 {
                if e & 1 == 1 {
                    acc = fp_mulmod(&acc, &base, &modulus, p);
                }
                base = fp_mulmod(&base, &base, &modulus, p);
                e >>= 1;
            }
            acc
        };
        let gen = (1..size)
            .find(|&g| {
                let gp = as_poly(g);
                order == 0 || factors.iter().all(|&l| pow_slow(&gp, order / l) != vec![1])
            })
            .expect("multiplicative group is cyclic");
        let mut exp = Vec::with_capacity(size as usize);
        let mut log = vec![0u32; size as usize];
        let gp = as_poly(gen);
        let mut cur = vec![1u32];
        for k in 0..order.max(1) {
            let idx = from_poly(&cur);
            exp.push(idx);
            log[idx as usize] = k as u32;
            cur = fp_mulmod(&cur, &gp, &modulus, p);
        }
        GF {
            p,
            degree: n,
            size,
            modulus,
            exp,
            log,
            pow_p,
        }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Coefficients over F_p of the defining polynomial, ascending, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The fixed primitive element.
    pub fn generator(&self) -> Elem {
        self.exp[if self.size > 2 { 1 } else { 0 }]
    }

    pub fn zero(&self) -> Elem {
        0
    }

    pub fn one(&self) -> Elem {
        1
    }

    /// The image of an integer in the prime field.
    pub fn from_int(&self, c: i64) -> Elem {
        c.rem_euclid(self.p as i64) as u32
    }

    /// The coefficient vector over F_p.
    pub fn to_digits(&self, a: Elem) -> Vec<u32> {
        digits(a, self.p, self.degree)
    }

    pub fn from_digits(&self, d: &[u32]) -> Elem {
        d.iter()
            .zip(&self.pow_p)
            .map(|(&c, &w)| (c % self.p) * w)
            .sum()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.size
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let p = self.p;
        if self.degree == 1 {
            let s = a + b;
            return if s >= p { s - p } else { s };
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut w = 1;
        while a | b != 0 {
            let s = a % p + b % p;
            out += if s >= p { s - p } else { s } * w;
            a /= p;
            b /= p;
            w *= p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        let p = self.p;
        if self.degree == 1 {
            return if a == 0 { 0 } else { p - a };
        }
        let mut a = a;
        let mut out = 0;
        let mut w = 1;
        while a != 0 {
            let d = a % p;
            if d != 0 {
                out += (p - d) * w;
            }
            a /= p;
            w *= p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let order = self.size - 1;
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[(if s >= order { s - order } else { s }) as usize]
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: Elem) -> Elem {
        assert!(a != 0, "inverse of zero");
        let order = self.size - 1;
        let l = self.log[a as usize];
        self.exp[((order - l) % order) as usize]
    }

    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.size - 1) as u64;
        let l = self.log[a as usize] as u64;
        self.exp[((l * (e % order)) % order) as usize]
    }

    /// Discrete logarithm to the fixed generator.
    pub fn log(&self, a: Elem) -> u32 {
        assert!(a != 0, "logarithm of zero");
        self.log[a as usize]
    }

    /// g^k for the fixed generator g.
    pub fn exp(&self, k: u64) -> Elem {
        self.exp[(k % (self.size as u64 - 1)) as usize]
    }

    /// a^(p^k).
    pub fn frobenius(&self, a: Elem, k: u32) -> Elem {
        self.pow(a, (self.p as u64).pow(k % self.degree))
    }

    /// a^Q for Q a power of p (any field-automorphism power).
    pub fn pow_q(&self, a: Elem, q: u64) -> Elem {
        self.pow(a, q)
    }

    pub fn is_square(&self, a: Elem) -> bool {
        assert!(self.p != 2, "odd characteristic required");
        a == 0 || self.log[a as usize] % 2 == 0
    }

    /// A square root, if one exists (the one with even logarithm half).
    pub fn sqrt(&self, a: Elem) -> Option<Elem> {
        if a == 0 {
            return Some(0);
        }
        let l = self.log[a as usize];
        if l % 2 == 1 {
            return None;
        }
        Some(self.exp[(l / 2) as usize])
    }

    /// Quadratic character: 0, 1 or -1.
    pub fn legendre(&self, a: Elem) -> i64 {
        if a == 0 {
            0
        } else if self.log[a as usize] % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Canonical sign: true when the lowest nonzero F_p-digit is in 1..=(p-1)/2.
    pub fn is_canonical_sign(&self, a: Elem) -> bool {
        let p = self.p;
        let mut a = a;
        while a != 0 {
            let d = a % p;
            if d != 0 {
                return d <= (p - 1) / 2;
            }
            a /= p;
        }
        true
    }
}

fn digits(mut idx: u32, p: u32, n: u32) -> Vec<u32> {
    let mut d = Vec::with_capacity(n as usize);
    for _ in 0..n {
        d.push(idx % p);
        idx /= p;
    }
    d
}

/// A field embedding F_{p^a} -> F_{p^b}, a | b, sending the generator of the
/// small field to a chosen root of its minimal polynomial.
#[derive(Clone, Debug)]
pub struct Embedding {
    image: Vec<Elem>,
    /// small exponent k for big element h^{c m}: k = m * j0_inv mod (s - 1)
    cofactor: u64,
    j0_inv: u64,
    small_order: u64,
    big_order: u64,
}

impl Embedding {
    pub fn new(small: &GF, big: &GF) -> Self {
        assert_eq!(small.characteristic(), big.characteristic());
        assert!(
            big.degree() % small.degree() == 0,
            "{:?} is not a subfield of {:?}",
            small,
            big
        );
        let s_order = (small.size() - 1) as u64;
        let b_order = (big.size() - 1) as u64;
        let cofactor = b_order / s_order;
        // candidates h^{c j} with gcd(j, s-1) = 1; minimal polynomial of the small
        // generator over F_p has coefficients given by the conjugates
        let minpoly = small_minpoly_of_generator(small);
        let mut root = None;
        let mut candidates: Vec<(Elem, u64)> = (1..=s_order)
            .filter(|j| gcd(*j, s_order) == 1)
            .map(|j| (big.exp(cofactor * j), j))
            .collect();
        candidates.sort();
        for (z, j) in candidates {
            // evaluate minpoly (over F_p) at z
            let mut acc = 0;
            for &c in minpoly.iter().rev() {
                acc = big.add(big.mul(acc, z), c);
            }
            if acc == 0 {
                root = Some(j);
                break;
            }
        }
        let j0 = root.expect("subfield generator has a root in the extension");
        let image = (0..small.size())
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    big.exp(cofactor * ((small.log(a) as u64 * j0) % s_order.max(1)))
                }
            })
            .collect();
        let j0_inv = mod_inverse(j0 % s_order.max(1), s_order.max(1));
        Embedding {
            image,
            cofactor,
            j0_inv,
            small_order: s_order,
            big_order: b_order,
        }
    }

    pub fn apply(&self, a: Elem) -> Elem {
        self.image[a as usize]
    }

    pub fn table(&self) -> &[Elem] {
        &self.image
    }

    /// The preimage of `z`, if `z` lies in the image.
    pub fn preimage(&self, big: &GF, small: &GF, z: Elem) -> Option<Elem> {
        if z == 0 {
            return Some(0);
        }
        let l = big.log(z) as u64;
        if l % self.cofactor != 0 {
            return None;
        }
        debug_assert_eq!(self.big_order, self.cofactor * self.small_order);
        let m = l / self.cofactor;
        let k = (m * self.j0_inv) % self.small_order.max(1);
        Some(small.exp(k))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    old_s.rem_euclid(m as i128) as u64
}

/// Minimal polynomial over F_p of the fixed generator of `f`, as F_p digits
/// (each coefficient is a prime-field element, i.e. its own index).
fn small_minpoly_of_generator(f: &GF) -> Vec<Elem> {
    let g = f.generator();
    let mut conj = vec![g];
    loop {
        let next = f.frobenius(*conj.last().unwrap(), 1);
        if next == g {
            break;
        }
        conj.push(next);
    }
    // product of (x - c) over conjugates, coefficients land in F_p
    let mut poly = vec![1u32];
    for &c in &conj {
        let mut next = vec![0u32; poly.len() + 1];
        for (i, &a) in poly.iter().enumerate() {
            next[i + 1] = f.add(next[i + 1], a);
            next[i] = f.sub(next[i], f.mul(a, c));
        }
        poly = next;
    }
    debug_assert!(poly.iter().all(|&c| c < f.characteristic()));
    poly
}
