//! Exact arithmetic in the cyclotomic integers Z[ζ_n].

use std::cmp::Ordering;
use std::fmt;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

fn checked(a: i64, b: i64, op: fn(i64, i64) -> Option<i64>) -> i64 {
    op(a, b).expect("cyclotomic coefficient overflow")
}

/// Integer coefficients of the n-th cyclotomic polynomial, ascending.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    assert!(n >= 1);
    // x^n - 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = exact_div(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn cached_phi(n: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().expect("cyclotomic cache poisoned");
    map.entry(n)
        .or_insert_with(|| Arc::new(cyclotomic_polynomial(n)))
        .clone()
}

fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    debug_assert_eq!(den[dd], 1);
    let mut q = vec![0i64; rem.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd];
        q[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    q
}

pub fn euler_phi(n: u32) -> u32 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u32
}

/// An element of Z[ζ_n], stored as a polynomial in ζ_n of degree < φ(n).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclotomicElem {
    order: u32,
    coeffs: Vec<i64>,
}

impl CyclotomicElem {
    pub fn zero(order: u32) -> Self {
        CyclotomicElem {
            order,
            coeffs: vec![0; euler_phi(order) as usize],
        }
    }

    pub fn from_int(order: u32, c: i64) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = c;
        z
    }

    pub fn one(order: u32) -> Self {
        Self::from_int(order, 1)
    }

    /// ζ_n^k.
    pub fn root_of_unity(order: u32, k: i64) -> Self {
        let mut v = vec![0i64; order as usize];
        v[k.rem_euclid(order as i64) as usize] = 1;
        Self::from_cyclic(order, v)
    }

    /// Reduces a polynomial in ζ_n (any length) to canonical form.
    pub fn from_poly(order: u32, poly: &[i64]) -> Self {
        let mut v = vec![0i64; order as usize];
        for (i, &c) in poly.iter().enumerate() {
            let slot = &mut v[i % order as usize];
            *slot = checked(*slot, c, i64::checked_add);
        }
        Self::from_cyclic(order, v)
    }

    fn from_cyclic(order: u32, mut v: Vec<i64>) -> Self {
        let phi = cached_phi(order);
        let deg = phi.len() - 1;
        for i in (deg..v.len()).rev() {
            let c = v[i];
            if c == 0 {
                continue;
            }
            for (j, &pj) in phi.iter().enumerate() {
                let t = checked(c, pj, i64::checked_mul);
                v[i - deg + j] = checked(v[i - deg + j], t, i64::checked_sub);
            }
        }
        v.truncate(deg);
        CyclotomicElem { order, coeffs: v }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The integer value, if the element lies in Z.
    pub fn as_integer(&self) -> Option<i64> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }

    /// Re-embeds into Z[ζ_m] for a multiple m of the current order.
    pub fn embed(&self, m: u32) -> Self {
        assert!(
            m % self.order == 0,
            "order {} does not divide {}",
            self.order,
            m
        );
        if m == self.order {
            return self.clone();
        }
        let step = (m / self.order) as usize;
        let mut v = vec![0i64; m as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            v[(i * step) % m as usize] += c;
        }
        Self::from_cyclic(m, v)
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        if self.order == other.order {
            return (self.clone(), other.clone());
        }
        let m = self.order.lcm(&other.order);
        (self.embed(m), other.embed(m))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.order != other.order {
            let (a, b) = self.aligned(other);
            return a.add(&b);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| checked(a, b, i64::checked_add))
            .collect();
        CyclotomicElem {
            order: self.order,
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CyclotomicElem {
            order: self.order,
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.order != other.order {
            let (a, b) = self.aligned(other);
            return a.mul(&b);
        }
        let n = self.order as usize;
        let mut v = vec![0i64; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let t = checked(a, b, i64::checked_mul);
                let slot = &mut v[(i + j) % n];
                *slot = checked(*slot, t, i64::checked_add);
            }
        }
        Self::from_cyclic(self.order, v)
    }

    pub fn scale(&self, k: i64) -> Self {
        CyclotomicElem {
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| checked(c, k, i64::checked_mul))
                .collect(),
        }
    }

    /// Exact division by an integer; `None` if some coefficient is not divisible.
    pub fn div_exact(&self, k: i64) -> Option<Self> {
        if self.coeffs.iter().any(|c| c % k != 0) {
            return None;
        }
        Some(CyclotomicElem {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c / k).collect(),
        })
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// The Galois automorphism ζ ↦ ζ^k (k coprime to the order).
    pub fn galois(&self, k: i64) -> Self {
        let n = self.order as i64;
        assert_eq!(k.rem_euclid(n).gcd(&n), 1, "exponent not a unit");
        let mut v = vec![0i64; n as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            v[((i as i64) * k).rem_euclid(n) as usize] += c;
        }
        Self::from_cyclic(self.order, v)
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conjugate(&self) -> Self {
        self.galois(-1)
    }

    /// Value under the complex embedding ζ_n ↦ exp(2πi·k/n).
    pub fn to_complex(&self, k: u32) -> (f64, f64) {
        let n = self.order as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &c) in self.coeffs.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) * (i as f64) / n;
            re += c as f64 * theta.cos();
            im += c as f64 * theta.sin();
        }
        (re, im)
    }

    /// |x| under the k-th complex embedding.
    pub fn complex_abs(&self, k: u32) -> f64 {
        let (re, im) = self.to_complex(k);
        re.hypot(im)
    }

    /// Exponents k in [1, n] coprime to n, indexing the complex embeddings.
    pub fn embeddings(order: u32) -> Vec<u32> {
        (1..=order).filter(|k| k.gcd(&order) == 1).collect()
    }
}

impl PartialOrd for CyclotomicElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CyclotomicElem {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.order, &self.coeffs).cmp(&(other.order, &other.coeffs))
    }
}

impl fmt::Debug for CyclotomicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CyclotomicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            terms.push(match i {
                0 => format!("{}", c),
                1 => format!("{}*z{}", c, self.order),
                _ => format!("{}*z{}^{}", c, self.order, i),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_small() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn zeta3_relation() {
        let z = CyclotomicElem::root_of_unity(3, 1);
        let z2 = CyclotomicElem::root_of_unity(3, 2);
        assert_eq!(z.add(&z2), CyclotomicElem::from_int(3, -1));
        assert_eq!(z.conjugate(), z2);
        assert_eq!(z.pow(3), CyclotomicElem::one(3));
    }

    #[test]
    fn abs_of_root_of_unity() {
        let z = CyclotomicElem::root_of_unity(5, 1);
        for k in CyclotomicElem::embeddings(5) {
            assert!((z.complex_abs(k) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_orders_meet_in_lcm() {
        let i = CyclotomicElem::root_of_unity(4, 1);
        let w = CyclotomicElem::root_of_unity(3, 1);
        let p = i.mul(&w);
        assert_eq!(p.order(), 12);
        assert_eq!(p, CyclotomicElem::root_of_unity(12, 3 + 4));
        assert_eq!(p.pow(12), CyclotomicElem::one(12));
    }

    #[test]
    fn order_one_and_two_are_integers() {
        let m = CyclotomicElem::root_of_unity(2, 1);
        assert_eq!(m.as_integer(), Some(-1));
        assert_eq!(CyclotomicElem::root_of_unity(1, 5).as_integer(), Some(1));
    }
}
