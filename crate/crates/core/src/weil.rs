//! Numerical checks of the Riemann hypothesis for curves: every inverse root
//! of an L-polynomial has absolute value √q.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::CyclotomicElem;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilReport {
    pub passed: bool,
    /// max over inverse roots of ||α| - √q|
    pub max_deviation: f64,
    pub distinct_roots: usize,
}

fn trim(p: &mut Vec<BigInt>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn content(p: &[BigInt]) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn primitive(mut p: Vec<BigInt>) -> Vec<BigInt> {
    trim(&mut p);
    let c = content(&p);
    if c.is_zero() {
        return p;
    }
    let mut out: Vec<BigInt> = p.iter().map(|x| x / &c).collect();
    if out.last().is_some_and(|l| l.is_negative()) {
        out.iter_mut().for_each(|x| *x = -&*x);
    }
    out
}

/// Pseudo-remainder of a by b over Z.
fn prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - 1 - db;
        r.iter_mut().for_each(|x| *x *= &lb);
        for (i, c) in b.iter().enumerate() {
            r[i + shift] -= &lr * c;
        }
        trim(&mut r);
        r = primitive(r);
    }
    r
}

fn gcd_z(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let (mut a, mut b) = (primitive(a.to_vec()), primitive(b.to_vec()));
    while !b.is_empty() {
        let r = prem(&a, &b);
        a = b;
        b = primitive(r);
    }
    a
}

fn exact_div(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![BigInt::zero(); r.len().saturating_sub(db)];
    for i in (0..q.len()).rev() {
        let (c, rem) = r[i + db].div_rem(&b[db]);
        assert!(rem.is_zero(), "inexact integer polynomial division");
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &c * bj;
        }
        q[i] = c;
    }
    q
}

/// p / gcd(p, p') over Q, made primitive.
pub fn squarefree_part(p: &[BigInt]) -> Vec<BigInt> {
    let p = primitive(p.to_vec());
    if p.len() <= 2 {
        return p;
    }
    let d: Vec<BigInt> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    let g = gcd_z(&p, &d);
    if g.len() <= 1 {
        return p;
    }
    // scale p so the division is exact over Z
    let lead = g.last().unwrap().clone();
    let scale = num_traits::pow(lead, p.len());
    let scaled: Vec<BigInt> = p.iter().map(|c| c * &scale).collect();
    primitive(exact_div(&scaled, &g))
}

/// All complex roots by the Aberth–Ehrlich iteration, then Newton polishing.
pub fn complex_roots(p: &[f64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = p[n];
    let a: Vec<Complex64> = p.iter().map(|&c| Complex64::new(c / lead, 0.0)).collect();
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut v = Complex64::zero();
        let mut d = Complex64::zero();
        for c in a.iter().rev() {
            d = d * z + v;
            v = v * z + c;
        }
        (v, d)
    };
    let radius = 1.0 + a[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            Complex64::from_polar(
                radius * 0.5,
                0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64,
            )
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (v, d) = eval(z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / z[i].norm().max(1e-300));
        }
        if moved < 1e-16 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (v, d) = eval(*zi);
            if d.norm() > 0.0 {
                *zi -= v / d;
            }
        }
    }
    z
}

/// Checks an integer polynomial P(T) = Π (1 - α_i T), P(0) ≠ 0.
pub fn weil_check_integer(p: &[BigInt], q: u64, tol: f64) -> WeilReport {
    let sq = squarefree_part(p);
    let coeffs: Vec<f64> = sq.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let roots = complex_roots(&coeffs);
    let target = (q as f64).sqrt();
    let max_deviation = roots
        .iter()
        .map(|r| (1.0 / r.norm() - target).abs())
        .fold(0.0, f64::max);
    WeilReport {
        passed: max_deviation <= tol,
        max_deviation,
        distinct_roots: roots.len(),
    }
}

pub fn weil_check_i64(p: &[i64], q: u64, tol: f64) -> WeilReport {
    let big: Vec<BigInt> = p.iter().map(|&c| BigInt::from(c)).collect();
    weil_check_integer(&big, q, tol)
}

fn poly_mul_cyclo(a: &[CyclotomicElem], b: &[CyclotomicElem], order: u32) -> Vec<CyclotomicElem> {
    let mut out = vec![CyclotomicElem::zero(order); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// Π over Galois conjugates σ of σ(L): an integer polynomial with the same
/// inverse roots as all conjugates of L together.
pub fn norm_polynomial(l: &[CyclotomicElem]) -> Result<Vec<BigInt>> {
    let order = l.iter().map(|c| c.order()).fold(1, num_integer::lcm);
    let l: Vec<CyclotomicElem> = l.iter().map(|c| c.embed(order)).collect();
    let mut acc = vec![CyclotomicElem::one(order)];
    for k in CyclotomicElem::embeddings(order) {
        let conj: Vec<CyclotomicElem> = l.iter().map(|c| c.galois(k as i64)).collect();
        acc = poly_mul_cyclo(&acc, &conj, order);
    }
    acc.iter()
        .map(|c| {
            c.as_integer().map(BigInt::from).ok_or_else(|| {
                Error::Internal(format!(
                    "norm polynomial has non-rational coefficient {}",
                    c
                ))
            })
        })
        .collect()
}

pub fn weil_check_cyclotomic(l: &[CyclotomicElem], q: u64, tol: f64) -> Result<WeilReport> {
    Ok(weil_check_integer(&norm_polynomial(l)?, q, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_numerator() {
        // 1 + 3T^2: inverse roots ±i√3
        let r = weil_check_i64(&[1, 0, 3], 3, 1e-9);
        assert!(r.passed, "{:?}", r);
        assert_eq!(r.distinct_roots, 2);
    }

    #[test]
    fn repeated_roots_are_collapsed() {
        // (1 + 3T^2)^2
        let r = weil_check_i64(&[1, 0, 6, 0, 9], 3, 1e-9);
        assert!(r.passed);
        assert_eq!(r.distinct_roots, 2);
    }

    #[test]
    fn violation_detected() {
        assert!(!weil_check_i64(&[1, 1], 3, 1e-9).passed);
    }

    #[test]
    fn cyclotomic_norm() {
        // L = 1 - 3ζ3 T^2 has |α|^2 = 3
        let l = vec![
            CyclotomicElem::one(3),
            CyclotomicElem::zero(3),
            CyclotomicElem::root_of_unity(3, 1).scale(-3),
        ];
        let r = weil_check_cyclotomic(&l, 3, 1e-9).unwrap();
        assert!(r.passed, "{:?}", r);
    }
}
