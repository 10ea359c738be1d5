//! Dense univariate polynomials over a [`GF`].
//!
//! A `Poly` is a bare coefficient vector (ascending, no trailing zeros); the
//! field is passed explicitly to every operation.

use super::gf::{Elem, GF};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Poly(Vec<Elem>);

impl Poly {
    pub fn new(mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn one() -> Self {
        Poly(vec![1])
    }

    pub fn constant(c: Elem) -> Self {
        Poly::new(vec![c])
    }

    /// x
    pub fn x() -> Self {
        Poly(vec![0, 1])
    }

    /// c x^k
    pub fn monomial(c: Elem, k: usize) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// x - a
    pub fn linear(f: &GF, a: Elem) -> Self {
        Poly(vec![f.neg(a), 1])
    }

    pub fn from_ints(f: &GF, coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| f.from_int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.0
    }

    pub fn into_coeffs(self) -> Vec<Elem> {
        self.0
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0 == [1]
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    /// Degree with deg 0 := -1 convention folded to `isize`.
    pub fn deg(&self) -> isize {
        self.0.len() as isize - 1
    }

    pub fn lead(&self) -> Elem {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn add(&self, f: &GF, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn sub(&self, f: &GF, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new((0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn neg(&self, f: &GF) -> Poly {
        Poly(self.0.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn scale(&self, f: &GF, c: Elem) -> Poly {
        if c == 0 {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, f: &GF, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0; self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.0.iter().enumerate() {
                if b != 0 {
                    out[i + j] = f.add(out[i + j], f.mul(a, b));
                }
            }
        }
        Poly::new(out)
    }

    pub fn square(&self, f: &GF) -> Poly {
        self.mul(f, self)
    }

    pub fn pow(&self, f: &GF, mut e: u64) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(f, &base);
            }
            base = base.square(f);
            e >>= 1;
        }
        acc
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, f: &GF, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.0.len() - 1;
        if self.0.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let inv_lead = f.inv(d.lead());
        let mut r = self.0.clone();
        let mut q = vec![0; r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = f.mul(r[i + dd], inv_lead);
            q[i] = c;
            if c == 0 {
                continue;
            }
            for (j, &dj) in d.0.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(c, dj));
            }
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn rem(&self, f: &GF, d: &Poly) -> Poly {
        self.divrem(f, d).1
    }

    /// Exact quotient; panics if `d` does not divide `self`.
    pub fn div_exact(&self, f: &GF, d: &Poly) -> Poly {
        let (q, r) = self.divrem(f, d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn monic(&self, f: &GF) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(f, f.inv(self.lead()))
    }

    /// Monic gcd.
    pub fn gcd(&self, f: &GF, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(f, &b);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// Extended gcd: (g, s, t) with s a + t b = g monic.
    pub fn xgcd(&self, f: &GF, o: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(f, &r1);
            let s2 = s0.sub(f, &q.mul(f, &s1));
            let t2 = t0.sub(f, &q.mul(f, &t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = f.inv(r0.lead());
        (r0.scale(f, inv), s0.scale(f, inv), t0.scale(f, inv))
    }

    pub fn mulmod(&self, f: &GF, o: &Poly, m: &Poly) -> Poly {
        self.mul(f, o).rem(f, m)
    }

    pub fn powmod(&self, f: &GF, mut e: u64, m: &Poly) -> Poly {
        let mut acc = Poly::one().rem(f, m);
        let mut base = self.rem(f, m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mulmod(f, &base, m);
            }
            base = base.mulmod(f, &base, m);
            e >>= 1;
        }
        acc
    }

    /// self^(big exponent given as repeated q-th powers): self^(q^k) mod m.
    pub fn pow_q_iter(&self, f: &GF, q: u64, k: u32, m: &Poly) -> Poly {
        let mut cur = self.rem(f, m);
        for _ in 0..k {
            cur = cur.powmod(f, q, m);
        }
        cur
    }

    pub fn derivative(&self, f: &GF) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| f.mul(c, f.from_int(i as i64)))
                .collect(),
        )
    }

    pub fn eval(&self, f: &GF, x: Elem) -> Elem {
        self.0
            .iter()
            .rev()
            .fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Evaluates at `x` in a larger field, mapping coefficients through `embed`.
    pub fn eval_in(&self, big: &GF, embed: &[Elem], x: Elem) -> Elem {
        self.0
            .iter()
            .rev()
            .fold(0, |acc, &c| big.add(big.mul(acc, x), embed[c as usize]))
    }

    /// Maps coefficients into a larger field.
    pub fn map(&self, embed: &[Elem]) -> Poly {
        Poly::new(self.0.iter().map(|&c| embed[c as usize]).collect())
    }

    /// p(x + a) (Taylor shift).
    pub fn shift(&self, f: &GF, a: Elem) -> Poly {
        let lin = Poly::new(vec![a, 1]);
        let mut acc = Poly::zero();
        for &c in self.0.iter().rev() {
            acc = acc.mul(f, &lin).add(f, &Poly::constant(c));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divrem_roundtrip() {
        let f = GF::new(5, 1).unwrap();
        let a = Poly::from_ints(&f, &[1, 2, 3, 4, 1]);
        let b = Poly::from_ints(&f, &[2, 0, 1]);
        let (q, r) = a.divrem(&f, &b);
        assert_eq!(q.mul(&f, &b).add(&f, &r), a);
        assert!(r.deg() < b.deg());
    }

    #[test]
    fn xgcd_identity() {
        let f = GF::new(3, 2).unwrap();
        let a = Poly::new(vec![1, 3, 4, 1]);
        let b = Poly::new(vec![2, 1, 1]);
        let (g, s, t) = a.xgcd(&f, &b);
        assert_eq!(s.mul(&f, &a).add(&f, &t.mul(&f, &b)), g);
        assert_eq!(g, a.gcd(&f, &b));
    }

    #[test]
    fn taylor_shift() {
        let f = GF::new(7, 1).unwrap();
        let p = Poly::from_ints(&f, &[3, 0, 2, 1]);
        let s = p.shift(&f, 4);
        for x in f.elements() {
            assert_eq!(s.eval(&f, x), p.eval(&f, f.add(x, 4)));
        }
    }
}
