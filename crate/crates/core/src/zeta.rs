//! Zeta functions Z(T) = P(T) / ((1 - T)(1 - qT)) of curves.

use serde::Serialize;

use crate::curve::Curve;
use crate::error::{Error, Result};

/// The numerator P(T) of the zeta function, degree 2g, P(0) = 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZetaPolynomial {
    pub q: u64,
    pub genus: u32,
    /// N_1, ..., N_g
    pub counts: Vec<u64>,
    pub coeffs: Vec<i64>,
}

/// Coefficients of exp(Σ_{m≥1} s_m T^m / m) up to T^n, using
/// k e_k = Σ_{i=1}^k s_i e_{k-i}.
pub fn exp_power_sums(s: &[i128], n: usize) -> Result<Vec<i128>> {
    let mut e = vec![0i128; n + 1];
    e[0] = 1;
    for k in 1..=n {
        let mut acc: i128 = 0;
        for i in 1..=k {
            let si = s.get(i - 1).copied().unwrap_or(0);
            acc = acc
                .checked_add(si.checked_mul(e[k - i]).ok_or_else(overflow)?)
                .ok_or_else(overflow)?;
        }
        if acc % k as i128 != 0 {
            return Err(Error::Internal(format!(
                "non-integral coefficient {}/{} in exp series",
                acc, k
            )));
        }
        e[k] = acc / k as i128;
    }
    Ok(e)
}

fn overflow() -> Error {
    Error::Internal("integer overflow in series arithmetic".into())
}

pub fn zeta_l_polynomial(c: &Curve) -> Result<ZetaPolynomial> {
    let g = c.genus() as usize;
    let q = c.q() as i128;
    let counts: Vec<u64> = (1..=g as u32).map(|m| c.count_points(m)).collect();
    let s: Vec<i128> = counts.iter().map(|&n| n as i128).collect();
    let z = exp_power_sums(&s, g)?;
    let mut coeffs = vec![0i64; 2 * g + 1];
    for i in 0..=g {
        let mut v = z[i];
        if i >= 1 {
            v -= (1 + q) * z[i - 1];
        }
        if i >= 2 {
            v += q * z[i - 2];
        }
        coeffs[i] = i64::try_from(v).map_err(|_| overflow())?;
    }
    for i in 0..g {
        coeffs[2 * g - i] = coeffs[i] * (q as i64).pow((g - i) as u32);
    }
    Ok(ZetaPolynomial {
        q: c.q(),
        genus: g as u32,
        counts,
        coeffs,
    })
}

impl ZetaPolynomial {
    /// h = P(1).
    pub fn class_number(&self) -> i64 {
        self.coeffs.iter().sum()
    }

    /// P(T) = q^g T^{2g} P(1/(qT)).
    pub fn satisfies_functional_equation(&self) -> bool {
        let g = self.genus as usize;
        let q = self.q as i128;
        let c = |i: usize| self.coeffs[i] as i128;
        self.coeffs.len() == 2 * g + 1
            && (0..=2 * g).all(|i| {
                if i <= g {
                    c(2 * g - i) == c(i) * q.pow((g - i) as u32)
                } else {
                    c(2 * g - i) * q.pow((i - g) as u32) == c(i)
                }
            })
    }

    /// Power sums s_m = Σ α_i^m of the inverse roots, by Newton's identities.
    pub fn power_sums(&self, n: usize) -> Vec<i128> {
        let c = |i: usize| self.coeffs.get(i).copied().unwrap_or(0) as i128;
        let mut s = vec![0i128; n + 1];
        for m in 1..=n {
            let mut v = -(m as i128) * c(m);
            for i in 1..m {
                v -= c(i) * s[m - i];
            }
            s[m] = v;
        }
        s
    }

    /// N_m = q^m + 1 - Σ α_i^m.
    pub fn point_count(&self, m: u32) -> i128 {
        (self.q as i128).pow(m) + 1 - self.power_sums(m as usize)[m as usize]
    }

    /// Z(T) up to T^n.
    pub fn zeta_series(&self, n: usize) -> Vec<i128> {
        let q = self.q as i128;
        let mut out = vec![0i128; n + 1];
        // 1 / ((1 - T)(1 - qT)) = Σ (q^{k+1} - 1)/(q - 1) T^k
        let geo: Vec<i128> = (0..=n)
            .map(|k| (q.pow(k as u32 + 1) - 1) / (q - 1))
            .collect();
        for (i, &c) in self.coeffs.iter().enumerate() {
            for k in 0..=n.saturating_sub(i) {
                if i + k <= n {
                    out[i + k] += c as i128 * geo[k];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveRecord;

    fn curve(f: Vec<i64>) -> Curve {
        Curve::from_record(&CurveRecord { q: 3, f }).unwrap()
    }

    #[test]
    fn elliptic_example() {
        let z = zeta_l_polynomial(&curve(vec![1, 1, 0, 1])).unwrap();
        assert_eq!(z.coeffs, vec![1, 0, 3]);
        assert_eq!(z.point_count(2), 16);
        assert_eq!(curve(vec![1, 1, 0, 1]).count_points(2), 16);
        assert_eq!(z.class_number(), 4);
    }

    #[test]
    fn x_plus_and_x_minus_share_zeta() {
        let zp = zeta_l_polynomial(&curve(vec![-1, -1, 1, 1, 0, 1])).unwrap();
        let zm = zeta_l_polynomial(&curve(vec![-1, -1, 1, -1, 0, 1])).unwrap();
        assert_eq!(zp.coeffs, zm.coeffs);
        assert_eq!(zp.coeffs.len(), 5);
        assert_eq!(zp.coeffs[0], 1);
        assert!(zp.satisfies_functional_equation());
    }

    #[test]
    fn predicted_counts_match_enumeration() {
        let c = curve(vec![-1, -1, 1, 1, 0, 1]);
        let z = zeta_l_polynomial(&c).unwrap();
        for m in 1..=5 {
            assert_eq!(z.point_count(m), c.count_points(m) as i128);
        }
        let series = z.zeta_series(3);
        let n1 = c.count_points(1) as i128;
        let n2 = c.count_points(2) as i128;
        assert_eq!(series[1], n1);
        assert_eq!(series[2], (n1 * n1 + n2) / 2);
    }
}
