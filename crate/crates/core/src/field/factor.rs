//! Factorization of polynomials over finite fields: square-free splitting,
//! distinct-degree splitting and Cantor–Zassenhaus equal-degree splitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gf::{prime_factors, GF};
use super::poly::Poly;

/// Monic irreducible factors with multiplicities, sorted by (degree, coefficients).
pub fn factor_poly(f: &GF, p: &Poly) -> Vec<(Poly, u32)> {
    assert!(!p.is_zero(), "cannot factor the zero polynomial");
    let mut out = Vec::new();
    for (sqf, mult) in squarefree_decomposition(f, &p.monic(f)) {
        for (g, d) in distinct_degree(f, &sqf) {
            for factor in equal_degree(f, &g, d) {
                out.push((factor, mult));
            }
        }
    }
    out.sort_by(|a, b| (a.0.deg(), &a.0).cmp(&(b.0.deg(), &b.0)));
    out
}

/// Square-free decomposition of a monic polynomial: pairs (g_i, i) with
/// p = Π g_i^i, each g_i square-free.
pub fn squarefree_decomposition(f: &GF, p: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    sqf_rec(f, &p.monic(f), 1, &mut out);
    // merge equal multiplicities
    out.sort_by_key(|(_, m)| *m);
    let mut merged: Vec<(Poly, u32)> = Vec::new();
    for (g, m) in out {
        match merged.last_mut() {
            Some((h, mm)) if *mm == m => *h = h.mul(f, &g),
            _ => merged.push((g, m)),
        }
    }
    merged
}

fn sqf_rec(f: &GF, p: &Poly, scale: u32, out: &mut Vec<(Poly, u32)>) {
    if p.deg() <= 0 {
        return;
    }
    let char_p = f.characteristic();
    let d = p.derivative(f);
    if d.is_zero() {
        sqf_rec(f, &pth_root(f, p), scale * char_p, out);
        return;
    }
    let mut c = p.gcd(f, &d);
    let mut w = p.div_exact(f, &c);
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(f, &c);
        let z = w.div_exact(f, &y);
        if z.deg() > 0 {
            out.push((z, i * scale));
        }
        i += 1;
        w = y;
        c = c.div_exact(f, &w);
    }
    if c.deg() > 0 {
        sqf_rec(f, &pth_root(f, &c), scale * char_p, out);
    }
}

fn pth_root(f: &GF, p: &Poly) -> Poly {
    let char_p = f.characteristic() as usize;
    let k = f.degree() - 1;
    let coeffs: Vec<u32> = p
        .coeffs()
        .iter()
        .step_by(char_p)
        .map(|&c| f.frobenius(c, k))
        .collect();
    Poly::new(coeffs)
}

/// Splits a square-free monic polynomial into products of irreducibles of equal degree.
pub fn distinct_degree(f: &GF, p: &Poly) -> Vec<(Poly, u32)> {
    let q = f.size() as u64;
    let mut out = Vec::new();
    let mut rest = p.monic(f);
    let mut h = Poly::x().rem(f, &rest);
    let mut d = 0;
    while rest.deg() > 0 {
        d += 1;
        if 2 * d > rest.deg() as u32 {
            out.push((rest.clone(), rest.deg() as u32));
            break;
        }
        h = h.powmod(f, q, &rest);
        let g = h.sub(f, &Poly::x()).gcd(f, &rest);
        if !g.is_one() {
            rest = rest.div_exact(f, &g);
            h = h.rem(f, &rest);
            out.push((g, d));
        }
    }
    out
}

/// Splits a product of distinct irreducibles of degree `d` (odd characteristic).
pub fn equal_degree(f: &GF, p: &Poly, d: u32) -> Vec<Poly> {
    let n = p.deg() as u32;
    if n == d {
        return vec![p.monic(f)];
    }
    if d == 1 && n <= 3 {
        // few roots: exhaustive search
        let mut roots: Vec<Poly> = f
            .elements()
            .filter(|&a| p.eval(f, a) == 0)
            .map(|a| Poly::linear(f, a))
            .collect();
        roots.sort();
        debug_assert_eq!(roots.len() as u32, n);
        return roots;
    }
    let seed = p.coeffs().iter().fold(0xcbf29ce484222325u64, |h, &c| {
        (h ^ c as u64).wrapping_mul(0x100000001b3)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = f.size() as u64;
    let half = (q - 1) / 2;
    loop {
        let a = Poly::new((0..n).map(|_| rng.gen_range(0..f.size())).collect());
        if a.deg() <= 0 {
            continue;
        }
        // a^{(q^d - 1)/2} = (a * a^q * ... * a^{q^{d-1}})^{(q-1)/2}
        let mut t = a.rem(f, p);
        let mut cur = t.clone();
        for _ in 1..d {
            cur = cur.powmod(f, q, p);
            t = t.mulmod(f, &cur, p);
        }
        let b = t.powmod(f, half, p).sub(f, &Poly::one());
        let g = b.gcd(f, p);
        if g.deg() > 0 && g.deg() < p.deg() {
            let mut out = equal_degree(f, &g, d);
            out.extend(equal_degree(f, &p.div_exact(f, &g), d));
            out.sort();
            return out;
        }
    }
}

/// Rabin's irreducibility test over F_q.
pub fn is_irreducible(f: &GF, p: &Poly) -> bool {
    let n = match p.degree() {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(n) => n as u32,
    };
    let m = p.monic(f);
    let q = f.size() as u64;
    let x = Poly::x();
    if x.pow_q_iter(f, q, n, &m) != x.rem(f, &m) {
        return false;
    }
    prime_factors(n as u64).into_iter().all(|l| {
        let h = x.pow_q_iter(f, q, n / l as u32, &m).sub(f, &x);
        h.gcd(f, &m).is_one()
    })
}

/// All monic irreducible polynomials of degree `d` (exhaustive; small fields only).
pub fn monic_irreducibles(f: &GF, d: u32) -> Vec<Poly> {
    let q = f.size() as u64;
    let count = q.pow(d);
    (0..count)
        .map(|mut idx| {
            let mut c = Vec::with_capacity(d as usize + 1);
            for _ in 0..d {
                c.push((idx % q) as u32);
                idx /= q;
            }
            c.push(1);
            Poly::new(c)
        })
        .filter(|p| is_irreducible(f, p))
        .collect()
}

/// Number of monic irreducibles of degree d over F_q: (1/d) Σ_{e|d} μ(d/e) q^e.
pub fn necklace_count(q: u64, d: u32) -> u64 {
    let mut total: i128 = 0;
    for e in 1..=d {
        if d % e == 0 {
            total += mobius((d / e) as u64) as i128 * (q as i128).pow(e);
        }
    }
    (total / d as i128) as u64
}

pub fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut result = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            result = -result;
        }
        d += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product(f: &GF, fs: &[(Poly, u32)]) -> Poly {
        fs.iter()
            .fold(Poly::one(), |acc, (g, m)| acc.mul(f, &g.pow(f, *m as u64)))
    }

    #[test]
    fn x2_plus_2_splits() {
        let f = GF::new(3, 1).unwrap();
        let fs = factor_poly(&f, &Poly::from_ints(&f, &[2, 0, 1]));
        assert_eq!(
            fs,
            vec![
                (Poly::from_ints(&f, &[1, 1]), 1),
                (Poly::from_ints(&f, &[2, 1]), 1)
            ]
        );
    }

    #[test]
    fn x2_plus_1_irreducible() {
        let f = GF::new(3, 1).unwrap();
        let p = Poly::from_ints(&f, &[1, 0, 1]);
        assert!(is_irreducible(&f, &p));
        assert_eq!(factor_poly(&f, &p), vec![(p, 1)]);
    }

    #[test]
    fn x3_minus_x() {
        let f = GF::new(3, 1).unwrap();
        let fs = factor_poly(&f, &Poly::from_ints(&f, &[0, -1, 0, 1]));
        let lin: Vec<Poly> = fs.iter().map(|(g, _)| g.clone()).collect();
        assert_eq!(
            lin,
            vec![
                Poly::x(),
                Poly::from_ints(&f, &[1, 1]),
                Poly::from_ints(&f, &[2, 1])
            ]
        );
    }

    #[test]
    fn repeated_and_inseparable_factors() {
        let f = GF::new(3, 2).unwrap();
        // (x^3 + t)^2 (x^2 + 1)^4 (x + 1)
        let a = Poly::new(vec![3, 0, 0, 1]);
        let b = Poly::new(vec![1, 0, 1]);
        let c = Poly::new(vec![1, 1]);
        let p = a.pow(&f, 2).mul(&f, &b.pow(&f, 4)).mul(&f, &c).scale(&f, 5);
        let fs = factor_poly(&f, &p);
        assert_eq!(product(&f, &fs), p.monic(&f));
        for (g, _) in &fs {
            assert!(is_irreducible(&f, g));
        }
    }

    #[test]
    fn gauss_count_matches_enumeration() {
        let f = GF::new(3, 1).unwrap();
        for d in 1..=5 {
            assert_eq!(
                monic_irreducibles(&f, d).len() as u64,
                necklace_count(3, d),
                "degree {}",
                d
            );
        }
    }

    #[test]
    fn mobius_values() {
        let v: Vec<i64> = (1..=10).map(mobius).collect();
        assert_eq!(v, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }
}
