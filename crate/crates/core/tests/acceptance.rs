//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use curvecft::algebra::CyclotomicElem;
use curvecft::classgroup::{ClassGroupCache, Orientation};
use curvecft::curve::{Curve, CurveRecord};
use curvecft::divisor::Divisor;
use curvecft::experiment::{
    modulus_family, run_experiment, zeta_report, BoundsConfig, CurveSession, ExperimentConfig,
    ExperimentReport, ModulusShape, VerdictKind, X_MINUS, X_PLUS,
};
use curvecft::lseries::{characters, substitute_root, Character, LSeriesEngine};
use curvecft::zeta::zeta_l_polynomial;
use curvecft::{Error, Result};

const TRUNCATION: usize = 10;
const TOL: f64 = 1e-9;

struct Line {
    passed: bool,
    text: String,
}

fn line(passed: bool, text: impl Into<String>) -> Line {
    Line {
        passed,
        text: text.into(),
    }
}

fn record(f: &[i64]) -> CurveRecord {
    CurveRecord {
        q: 3,
        f: f.to_vec(),
    }
}

fn sessions() -> Result<Vec<CurveSession>> {
    [("X+", X_PLUS), ("X-", X_MINUS)]
        .iter()
        .map(|(n, f)| CurveSession::new(n, &record(f), &BoundsConfig::default()))
        .collect()
}

/// P(T) = q^g T^{2g} P(1/(qT)) for an integer polynomial of even degree.
fn functional_equation(p: &[i64], q: i64) -> bool {
    if p.len() % 2 == 0 {
        return false;
    }
    let g = (p.len() - 1) / 2;
    (0..p.len()).all(|i| {
        let j = 2 * g - i;
        if i <= g {
            p[j] as i128 == p[i] as i128 * (q as i128).pow((g - i) as u32)
        } else {
            p[j] as i128 * (q as i128).pow((i - g) as u32) == p[i] as i128
        }
    })
}

fn criterion_1() -> Result<Line> {
    let t = Instant::now();
    let a = zeta_report(&Curve::from_record(&record(&X_PLUS))?, TOL)?;
    let b = zeta_report(&Curve::from_record(&record(&X_MINUS))?, TOL)?;
    let dt = t.elapsed();
    let p = &a.l_polynomial;
    let ok = p == &b.l_polynomial && p.len() == 5 && p[0] == 1 && dt < Duration::from_secs(1);
    Ok(line(
        ok,
        format!(
            "zeta equality: P(T) = {:?} for both curves, degree {}, P(0) = {} [{:.3} s]",
            p,
            p.len() - 1,
            p[0],
            dt.as_secs_f64()
        ),
    ))
}

fn criterion_2() -> Result<Line> {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for f in [X_PLUS, X_MINUS] {
        let c = Curve::from_record(&record(&f))?;
        let direct = c.places_of_degree(2).len() as u64;
        let mobius = c.place_counts_via_mobius(2)?;
        ok &= direct == 4 && mobius == 4;
        parts.push(format!("{} direct / {} Möbius", direct, mobius));
    }
    let dt = t.elapsed();
    ok &= dt < Duration::from_secs(1);
    Ok(line(
        ok,
        format!(
            "degree-2 places: {} [{:.3} s]",
            parts.join(", "),
            dt.as_secs_f64()
        ),
    ))
}

fn criterion_3(s: &[CurveSession]) -> Result<Line> {
    let counts = s
        .iter()
        .map(|x| modulus_family(&x.curve, &ModulusShape::default()).map(|f| f.len()))
        .collect::<Result<Vec<_>>>()?;
    Ok(line(
        counts.iter().all(|&n| n == 12),
        format!("moduli D = 2P+Q+R per curve: {:?}", counts),
    ))
}

fn pattern_reproduced(r: &ExperimentReport) -> bool {
    r.verdicts
        .iter()
        .filter(|v| v.kind == VerdictKind::Pattern)
        .all(|v| v.passed)
}

/// χ(Frob S) agrees between Cl_D and the conductor group of χ.
fn split_condition_consistent(s: &CurveSession) -> Result<bool> {
    let fam = modulus_family(&s.curve, &ModulusShape::default())?;
    let m = &fam[0];
    let g = s.groups().get(&m.modulus)?;
    let sclass = g.artin_class(&m.remaining[0])?;
    for chi in characters(&g, 3, &[sclass.clone()]) {
        let prim = s.engine.primitive(&chi)?;
        let there = prim.exponent(&prim.group().artin_class(&m.remaining[0])?);
        if there != chi.exponent(&sclass) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn criterion_4(reports: &mut Vec<ExperimentReport>, s: &[CurveSession]) -> Result<Line> {
    let t = Instant::now();
    let mut notes = Vec::new();
    let mut any_pattern = false;
    let mut fallback = false;
    for o in [Orientation::Place, Orientation::Inverse] {
        let cfg = ExperimentConfig {
            orientation: o,
            ..Default::default()
        };
        let r = run_experiment(&cfg)?;
        let per_s: Vec<String> = r
            .curves
            .iter()
            .map(|c| {
                let pointless: Vec<usize> = c.groups.iter().map(|g| g.pointless_covers).collect();
                format!("{} pointless covers per S {:?}", c.name, pointless)
            })
            .collect();
        let reproduced = pattern_reproduced(&r);
        any_pattern |= reproduced;
        let differ = r
            .compare
            .as_ref()
            .and_then(|c| c.spectrum.as_ref())
            .is_some_and(|sp| !sp.equal);
        fallback |= differ;
        notes.push(format!(
            "{:?}: pattern {}; {}",
            o,
            if reproduced {
                "reproduced"
            } else {
                "not reproduced"
            },
            per_s.join(", ")
        ));
        reports.push(r);
    }
    let consistent = s
        .iter()
        .map(split_condition_consistent)
        .collect::<Result<Vec<_>>>()?;
    let dt = t.elapsed();
    let ok =
        (any_pattern || fallback) && consistent.iter().all(|&b| b) && dt < Duration::from_secs(600);
    Ok(line(
        ok,
        format!(
            "cover experiment: {}; fallback L-spectra differ: {}; split test consistent across levels: {:?} [{:.1} s]",
            notes.join(" | "),
            fallback,
            consistent,
            dt.as_secs_f64()
        ),
    ))
}

/// (curve index, character) for criteria 5 to 7.
fn series_characters(s: &[CurveSession]) -> Result<Vec<(usize, Character)>> {
    let mut out = Vec::new();
    for (i, x) in s.iter().enumerate() {
        let deg2 = x.curve.places_of_degree(2);
        let moduli = [
            (Divisor::single(deg2[0].clone(), 1), 4),
            (Divisor::single(deg2[1].clone(), 2), 3),
            (
                Divisor::from_terms([(deg2[2].clone(), 1), (deg2[3].clone(), 1)]),
                2,
            ),
        ];
        for (d, n) in moduli {
            let g = x.groups().get(&d)?;
            out.extend(
                characters(&g, n, &[])
                    .into_iter()
                    .filter(|c| !c.is_trivial())
                    .map(|c| (i, c)),
            );
        }
    }
    Ok(out)
}

fn criterion_5(s: &[CurveSession], chars: &[(usize, Character)]) -> Result<Line> {
    let t = Instant::now();
    let mut agree = 0;
    for (i, chi) in chars {
        let e = &s[*i].engine;
        if e.l_series_euler(chi, TRUNCATION)? == e.l_series_weighted(chi, TRUNCATION)? {
            agree += 1;
        }
    }
    let moduli: std::collections::BTreeSet<(usize, Divisor)> = chars
        .iter()
        .map(|(i, c)| (*i, c.group().modulus().clone()))
        .collect();
    let dt = t.elapsed();
    let ok = agree == chars.len()
        && chars.len() >= 20
        && moduli.len() >= 3
        && dt < Duration::from_secs(120);
    Ok(line(
        ok,
        format!(
            "Euler = weighted up to T^{}: {}/{} characters on {} (curve, modulus) pairs [{:.1} s]",
            TRUNCATION,
            agree,
            chars.len(),
            moduli.len(),
            dt.as_secs_f64()
        ),
    ))
}

/// deg L = 2g - 2 + deg f with the two following coefficients zero.
fn degree_law(e: &LSeriesEngine, chi: &Character) -> Result<bool> {
    let p = e.primitive(chi)?;
    let d = e.predicted_degree(&p);
    let s = e.l_series_euler(&p, d + 2)?;
    let l = e.l_polynomial(&p)?;
    Ok(!s[d].is_zero() && s[d + 1].is_zero() && s[d + 2].is_zero() && l.degree() == d)
}

fn criterion_6(
    s: &[CurveSession],
    chars: &[(usize, Character)],
    covers: &[(usize, Character)],
) -> Result<Line> {
    let mut checked = 0;
    let mut passed = 0;
    for (i, chi) in chars.iter().chain(covers) {
        if chi.is_constant() {
            continue;
        }
        checked += 1;
        match degree_law(&s[*i].engine, chi) {
            Ok(true) => passed += 1,
            Ok(false) | Err(Error::Internal(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(line(
        checked > 0 && passed == checked,
        format!(
            "degree law with two zero guard coefficients: {}/{} geometric characters",
            passed, checked
        ),
    ))
}

fn criterion_7(s: &[CurveSession], chars: &[(usize, Character)]) -> Result<Line> {
    let mut twist = 0;
    let mut constant = 0;
    let mut constant_ok = 0;
    for (i, chi) in chars {
        let e = &s[*i].engine;
        if e.constant_twist_check(chi, TRUNCATION)? {
            twist += 1;
        }
        if chi.is_constant() {
            constant += 1;
            let l = e.l_polynomial(chi)?;
            let (_, k) = chi.split();
            let n = chi.order();
            let omega = CyclotomicElem::root_of_unity(n, k as i64);
            let zeta: Vec<CyclotomicElem> = zeta_l_polynomial(&s[*i].curve)?
                .zeta_series(TRUNCATION)
                .iter()
                .map(|&c| CyclotomicElem::from_int(n, c as i64))
                .collect();
            let expected = substitute_root(&zeta, n, k);
            let euler = e.l_series_euler(&e.primitive(chi)?, TRUNCATION)?;
            if l.pole_omega() == Some(&omega) && !l.has_pole_at_one() && euler == expected {
                constant_ok += 1;
            }
        }
    }
    Ok(line(
        twist == chars.len() && constant >= 3 && constant_ok == constant,
        format!(
            "twist identity: {}/{} characters; constant characters with L = Z(ωT), poles off T = 1: {}/{}",
            twist,
            chars.len(),
            constant_ok,
            constant
        ),
    ))
}

fn criterion_8(s: &[CurveSession]) -> Result<Line> {
    let mut checked = 0;
    let mut ok = true;
    for x in s {
        let zero = x.groups().get(&Divisor::zero())?;
        ok &= zero.torsion_order() == num_bigint::BigInt::from(x.groups().bank().class_number());
        for g in x.groups().built() {
            checked += 1;
            ok &= g.torsion_order() == g.expected_torsion_order();
        }
    }
    Ok(line(
        ok,
        format!(
            "|torsion Cl_D| = h·Φ(D)/(q-1) on all {} groups built",
            checked
        ),
    ))
}

fn criterion_9(
    s: &[CurveSession],
    reports: &[ExperimentReport],
    chars: &[(usize, Character)],
) -> Result<Line> {
    let mut ok = true;
    let mut zetas = 0;
    for x in s {
        let z = x.groups().bank().zeta();
        let w = curvecft::weil::weil_check_i64(&z.coeffs, z.q, TOL);
        ok &= z.satisfies_functional_equation() && w.passed;
        zetas += 1;
    }
    let mut covers = 0;
    for r in reports {
        for c in &r.curves {
            for m in &c.moduli {
                for cv in &m.covers {
                    covers += 1;
                    ok &= functional_equation(&cv.zeta.numerator, 3)
                        && cv.zeta.weil.passed
                        && cv.zeta.weil.max_deviation <= TOL;
                }
            }
        }
    }
    let mut lpolys = 0;
    for (i, chi) in chars {
        let l = s[*i].engine.l_polynomial(chi)?;
        ok &= l.weil_check(3, TOL)?.passed;
        lpolys += 1;
    }
    Ok(line(
        ok && covers > 0,
        format!(
            "functional equation and |α| = √q within {:e}: {} curve zetas, {} integral cover numerators, {} L-polynomials",
            TOL, zetas, covers, lpolys
        ),
    ))
}

fn random_modulus(c: &Curve, rng: &mut ChaCha8Rng) -> Divisor {
    let places: Vec<_> = c
        .places_up_to(2)
        .into_iter()
        .filter(|p| !p.is_infinity())
        .collect();
    loop {
        let k = rng.gen_range(1..=2);
        let mut d = Divisor::zero();
        for _ in 0..k {
            let p = places[rng.gen_range(0..places.len())].clone();
            d.add_term(p, rng.gen_range(1..=2));
        }
        if d.degree() <= 6 && !d.is_zero() {
            return d;
        }
    }
}

fn criterion_10() -> Result<Line> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut results = Vec::new();
    for f in [X_PLUS, X_MINUS] {
        let c = Arc::new(Curve::from_record(&record(&f))?);
        let cache = ClassGroupCache::for_curve(c.clone())?;
        for k in 0..3u64 {
            let d = random_modulus(&c, &mut rng);
            let g = cache.get(&d)?;
            let sys =
                curvecft::dynamics::FiniteSystem::new(g, &Default::default(), Orientation::Place)?;
            let r = sys.check_action_laws(100, 1000 + k)?;
            results.push((d.degree(), r.passed, r.h_subspace.bijective));
        }
    }
    let dt = t.elapsed();
    let ok =
        results.len() >= 5 && results.iter().all(|r| r.1 && r.2) && dt < Duration::from_secs(120);
    Ok(line(
        ok,
        format!(
            "dynamics laws on {} seeded moduli of degrees {:?}, 100 samples each [{:.1} s]",
            results.len(),
            results.iter().map(|r| r.0).collect::<Vec<_>>(),
            dt.as_secs_f64()
        ),
    ))
}

fn cover_characters(s: &[CurveSession]) -> Result<Vec<(usize, Character)>> {
    let mut out = Vec::new();
    for (i, x) in s.iter().enumerate() {
        for m in modulus_family(&x.curve, &ModulusShape::default())? {
            let g = x.groups().get(&m.modulus)?;
            let split = g.artin_class(&m.remaining[0])?;
            out.extend(
                curvecft::experiment::cover_characters(&g, 3, &[split])
                    .into_iter()
                    .map(|c| (i, c)),
            );
        }
    }
    Ok(out)
}

fn run() -> Result<Vec<Line>> {
    let s = sessions()?;
    let mut reports = Vec::new();
    let chars = series_characters(&s)?;
    let covers = cover_characters(&s)?;
    Ok(vec![
        criterion_1()?,
        criterion_2()?,
        criterion_3(&s)?,
        criterion_4(&mut reports, &s)?,
        criterion_5(&s, &chars)?,
        criterion_6(&s, &chars, &covers)?,
        criterion_7(&s, &chars)?,
        criterion_8(&s)?,
        criterion_9(&s, &reports, &chars)?,
        criterion_10()?,
    ])
}

fn main() {
    let lines = match run() {
        Ok(l) => l,
        Err(e) => {
            println!("acceptance run aborted: {}", e);
            std::process::exit(1);
        }
    };
    for (i, l) in lines.iter().enumerate() {
        println!(
            "criterion {:>2}: {}  {}",
            i + 1,
            if l.passed { "PASS" } else { "FAIL" },
            l.text
        );
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!(
        "acceptance: {} passed, {} failed",
        lines.len() - failed,
        failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
