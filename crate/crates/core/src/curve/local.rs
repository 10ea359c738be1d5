//! Power-series expansions of functions a(x) + y b(x) at a place.
//!
//! Uniformizers: t = x - α at split and inert places, t = y at ramified
//! places and t = x^g / y at infinity.

use serde::Serialize;

use super::{Curve, Place};
use crate::divisor::CurveFunction;
use crate::error::{Error, Result};
use crate::field::{Elem, Poly, GF};

/// Laurent expansion t^valuation (c_0 + c_1 t + ...), c_0 ≠ 0, with
/// coefficients in the residue field of the place.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalSeries {
    pub valuation: i64,
    pub coeffs: Vec<Elem>,
}

pub(crate) fn series_mul(k: &GF, a: &[Elem], b: &[Elem], n: usize) -> Vec<Elem> {
    let mut out = vec![0; n];
    for (i, &x) in a.iter().enumerate().take(n) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(n - i) {
            if y != 0 {
                out[i + j] = k.add(out[i + j], k.mul(x, y));
            }
        }
    }
    out
}

pub(crate) fn series_add(k: &GF, a: &[Elem], b: &[Elem], n: usize) -> Vec<Elem> {
    (0..n)
        .map(|i| {
            k.add(
                a.get(i).copied().unwrap_or(0),
                b.get(i).copied().unwrap_or(0),
            )
        })
        .collect()
}

/// 1 / a for a unit series.
pub(crate) fn series_inv(k: &GF, a: &[Elem], n: usize) -> Vec<Elem> {
    assert!(a.first().is_some_and(|&c| c != 0), "series is not a unit");
    let inv0 = k.inv(a[0]);
    let mut out = vec![0; n];
    out[0] = inv0;
    for i in 1..n {
        let mut s = 0;
        for j in 1..=i.min(a.len() - 1) {
            s = k.add(s, k.mul(a[j], out[i - j]));
        }
        out[i] = k.neg(k.mul(s, inv0));
    }
    out
}

/// Evaluates the polynomial `p` (coefficients in k) at the series `s`.
fn poly_at_series(k: &GF, p: &Poly, s: &[Elem], n: usize) -> Vec<Elem> {
    let mut acc = vec![0; n];
    for &c in p.coeffs().iter().rev() {
        acc = series_mul(k, &acc, s, n);
        acc[0] = k.add(acc[0], c);
    }
    acc
}

fn truncated(p: &Poly, n: usize) -> Vec<Elem> {
    (0..n).map(|i| p.coeff(i)).collect()
}

/// Expansions of x and y at a place, to absolute precision `n`.
pub(crate) struct LocalCoordinates {
    pub kind: CoordinateKind,
}

pub(crate) enum CoordinateKind {
    /// x = α + t, y = Y(t)
    Unramified { y: Vec<Elem> },
    /// x = α + X(t), y = t
    Ramified { x: Vec<Elem> },
    /// x = t^-2 U, y = t^-(2g+1) U^g; holds U.
    Infinity { u: Vec<Elem> },
}

impl Curve {
    pub(crate) fn local_coordinates(&self, place: &Place, n: usize) -> LocalCoordinates {
        let ext = self.extension(place.degree());
        let k = &ext.field;
        let f = self.f().map(ext.embedding.table());
        let kind = match place.branch() {
            None => {
                // w = t^2 F(w), F(w) = w^{2g+1} f(1/w)
                let rev = Poly::new(f.coeffs().iter().rev().copied().collect());
                let mut w = vec![0; n];
                for _ in 0..n / 2 + 1 {
                    let fw = poly_at_series(k, &rev, &w, n);
                    let mut next = vec![0; n];
                    next[2.min(n)..].copy_from_slice(&fw[..n.saturating_sub(2)]);
                    w = next;
                }
                let fw = poly_at_series(k, &rev, &w, n);
                CoordinateKind::Infinity {
                    u: series_inv(k, &fw, n),
                }
            }
            Some(super::Branch::Ramified) => {
                // h(X) = t^2 with h(s) = f(α + s), h(0) = 0, h'(0) ≠ 0
                let h = f.shift(k, place.alpha());
                let c1 = h.coeff(1);
                let inv = k.inv(c1);
                let higher = Poly::new(
                    h.coeffs()
                        .iter()
                        .enumerate()
                        .map(|(i, &c)| if i >= 2 { c } else { 0 })
                        .collect(),
                );
                let mut x = vec![0; n];
                for _ in 0..n / 2 + 1 {
                    let hx = poly_at_series(k, &higher, &x, n);
                    let mut next = vec![0; n];
                    for (i, v) in next.iter_mut().enumerate() {
                        let t2 = if i == 2 { 1 } else { 0 };
                        *v = k.mul(inv, k.sub(t2, hx[i]));
                    }
                    x = next;
                }
                CoordinateKind::Ramified { x }
            }
            Some(_) => {
                let fs = f.shift(k, place.alpha());
                let beta = place.beta();
                let inv2b = k.inv(k.add(beta, beta));
                let mut y = vec![0; n];
                if n > 0 {
                    y[0] = beta;
                }
                for i in 1..n {
                    let mut s = fs.coeff(i);
                    for j in 1..i {
                        s = k.sub(s, k.mul(y[j], y[i - j]));
                    }
                    y[i] = k.mul(s, inv2b);
                }
                CoordinateKind::Unramified { y }
            }
        };
        LocalCoordinates { kind }
    }

    /// Expansion of φ at `place` with `n` significant coefficients.
    /// At infinity φ may have a pole; affine functions a + yb never do.
    pub fn local_expand(
        &self,
        place: &Place,
        phi: &CurveFunction,
        n: usize,
    ) -> Result<LocalSeries> {
        if phi.is_zero() {
            return Err(Error::InvalidInput(
                "cannot expand the zero function".into(),
            ));
        }
        let n = n.max(1);
        if place.is_infinity() {
            let (k_shift, coeffs) = self.expand_at_infinity(phi, n);
            return Ok(LocalSeries {
                valuation: -k_shift,
                coeffs,
            });
        }
        let bound = phi.norm(self).deg().max(0) as usize;
        let m = n + bound + 1;
        let raw = self.expand_affine(place, phi, m);
        let v = raw.iter().position(|&c| c != 0).ok_or_else(|| {
            Error::Internal("local expansion vanished below the norm bound".into())
        })?;
        Ok(LocalSeries {
            valuation: v as i64,
            coeffs: raw[v..v + n].to_vec(),
        })
    }

    /// Power series of φ at an affine place, absolute precision `m`.
    pub(crate) fn expand_affine(&self, place: &Place, phi: &CurveFunction, m: usize) -> Vec<Elem> {
        let ext = self.extension(place.degree());
        let k = &ext.field;
        let a = phi.a().map(ext.embedding.table());
        let b = phi.b().map(ext.embedding.table());
        match self.local_coordinates(place, m).kind {
            CoordinateKind::Unramified { y } => {
                let at = truncated(&a.shift(k, place.alpha()), m);
                let bt = truncated(&b.shift(k, place.alpha()), m);
                series_add(k, &at, &series_mul(k, &y, &bt, m), m)
            }
            CoordinateKind::Ramified { x } => {
                let at = poly_at_series(k, &a.shift(k, place.alpha()), &x, m);
                let bt = poly_at_series(k, &b.shift(k, place.alpha()), &x, m);
                let mut tb = vec![0; m];
                tb[1.min(m)..].copy_from_slice(&bt[..m.saturating_sub(1)]);
                series_add(k, &at, &tb, m)
            }
            CoordinateKind::Infinity { .. } => {
                unreachable!("affine expansion requested at infinity")
            }
        }
    }

    /// Returns (K, c) with t^K φ = c_0 + c_1 t + ..., c_0 ≠ 0.
    fn expand_at_infinity(&self, phi: &CurveFunction, n: usize) -> (i64, Vec<Elem>) {
        let k = self.field().as_ref();
        let g = self.genus() as i64;
        let da = phi.a().deg();
        let db = phi.b().deg();
        let big_k = (2 * da as i64).max(if db >= 0 {
            2 * db as i64 + 2 * g + 1
        } else {
            -1
        });
        let CoordinateKind::Infinity { u } = self.local_coordinates(&Place::infinity(), n).kind
        else {
            unreachable!()
        };
        let mut out = vec![0; n];
        let mut upow = vec![0; n];
        upow[0] = 1;
        let top = (da.max(0) as i64).max(db.max(0) as i64 + g);
        for i in 0..=top {
            let mut term = |c: Elem, shift: i64| {
                if c == 0 {
                    return;
                }
                for j in 0..n {
                    let idx = j as i64 + shift;
                    if idx >= n as i64 {
                        break;
                    }
                    out[idx as usize] = k.add(out[idx as usize], k.mul(c, upow[j]));
                }
            };
            // a_i x^i = a_i t^{-2i} U^i
            if i <= da as i64 {
                term(phi.a().coeff(i as usize), big_k - 2 * i);
            }
            // b_j x^j y = b_j t^{-(2j + 2g + 1)} U^{j + g}
            let j = i - g;
            if j >= 0 && j <= db as i64 {
                term(phi.b().coeff(j as usize), big_k - 2 * j - 2 * g - 1);
            }
            upow = series_mul(k, &upow, &u, n);
        }
        debug_assert!(out[0] != 0);
        (big_k, out)
    }
}
