//! Configuration, orchestration and reports behind the command-line tools.
//!
//! Every report is plain data with `Serialize + Deserialize`, built from
//! ordered containers so that a fixed configuration always produces the same
//! bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classgroup::{
    ClassGroupBounds, ClassGroupCache, Orientation, RayClassSummary, RelationBank,
};
use crate::curve::{Curve, CurveRecord, Place, PlaceDescriptor};
use crate::divisor::Divisor;
use crate::dynamics::{DynamicsReport, FiniteSystem};
use crate::error::{Error, Result};
use crate::lseries::{characters, Character, CharacterData, CoverZeta, LPolyData, LSeriesEngine};
use crate::weil::{weil_check_i64, WeilReport};
use crate::zeta::zeta_l_polynomial;

/// y^2 = x^5 + x^3 + x^2 - x - 1 over F_3.
pub const X_PLUS: [i64; 6] = [-1, -1, 1, 1, 0, 1];
/// y^2 = x^5 - x^3 + x^2 - x - 1 over F_3.
pub const X_MINUS: [i64; 6] = [-1, -1, 1, -1, 0, 1];

pub type DivisorTerms = Vec<(PlaceDescriptor, i64)>;

/// One curve of an experiment, with the claims to check against it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveEntry {
    /// label used in reports
    pub name: String,
    pub q: u64,
    /// ascending coefficients of f
    pub f: Vec<i64>,
    /// expected number of S for which every qualifying cover has a rational
    /// point; unchecked when absent
    #[serde(default)]
    pub expect_all_covers_pointed: Option<usize>,
    /// expected answer to "every S has a qualifying cover without rational
    /// points"; unchecked when absent
    #[serde(default)]
    pub expect_pointless_for_every_s: Option<bool>,
}

impl CurveEntry {
    pub fn record(&self) -> CurveRecord {
        CurveRecord {
            q: self.q,
            f: self.f.clone(),
        }
    }
}

/// D = Σ m_i P_i over distinct places P_i of one degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModulusShape {
    /// multiplicities m_i; default [2, 1, 1]
    pub multiplicities: Vec<i64>,
    /// degree of the places P_i; default 2
    pub place_degree: u32,
    /// asserted size of the family; default 12
    pub expected_count: Option<usize>,
}

impl Default for ModulusShape {
    fn default() -> Self {
        ModulusShape {
            multiplicities: vec![2, 1, 1],
            place_degree: 2,
            expected_count: Some(12),
        }
    }
}

impl ModulusShape {
    /// Number of distinct divisors of this shape on `n` places.
    pub fn family_size(&self, n: usize) -> usize {
        let k = self.multiplicities.len();
        if k > n {
            return 0;
        }
        let falling: usize = (n - k + 1..=n).product();
        let mut same: BTreeMap<i64, usize> = BTreeMap::new();
        for &m in &self.multiplicities {
            *same.entry(m).or_default() += 1;
        }
        let sym: usize = same.values().map(|&c| (1..=c).product::<usize>()).product();
        falling / sym
    }
}

/// Harvesting bounds and the series truncation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    /// generator degree bound B; default max(2, g, degrees in D)
    pub generator_bound: Option<u32>,
    /// highest pole order of relation functions; default 4g + 2 + deg D
    pub n_max: Option<i64>,
    /// largest B tried when raising bounds; default 6
    pub bound_limit: u32,
    /// largest n_max tried when raising bounds; default 24
    pub n_max_limit: i64,
    /// truncation N for series comparisons; default 10
    pub truncation: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        let b = ClassGroupBounds::default();
        BoundsConfig {
            generator_bound: None,
            n_max: None,
            bound_limit: b.bound_limit,
            n_max_limit: b.n_max_limit,
            truncation: 10,
        }
    }
}

impl BoundsConfig {
    pub fn class_group_bounds(&self) -> ClassGroupBounds {
        ClassGroupBounds {
            bound: self.generator_bound,
            n_max: self.n_max,
            auto_increment: true,
            bound_limit: self.bound_limit,
            n_max_limit: self.n_max_limit,
        }
    }
}

/// The cover experiment, read from a single TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// default: X+ and X- with the expectations of the original run
    pub curves: Vec<CurveEntry>,
    pub modulus: ModulusShape,
    /// order of the cyclic covers; default 3
    pub order: u32,
    /// only keep covers in which every place of the shape's degree outside D
    /// splits completely; default true
    pub split_remaining: bool,
    pub bounds: BoundsConfig,
    /// which class stands for Frobenius; default "place"
    pub orientation: Orientation,
    /// default 0
    pub seed: u64,
    /// tolerance for |α| = √q; default 1e-9
    pub weil_tolerance: f64,
    /// compare Euler and weighted expansions of every cover character up to
    /// the truncation; default true
    pub check_weighted: bool,
    /// compare L-spectra of the first two curves; default true
    pub compare_spectra: bool,
    /// default true
    pub expect_spectra_differ: Option<bool>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            curves: vec![
                CurveEntry {
                    name: "X+".into(),
                    q: 3,
                    f: X_PLUS.to_vec(),
                    expect_all_covers_pointed: Some(2),
                    expect_pointless_for_every_s: Some(false),
                },
                CurveEntry {
                    name: "X-".into(),
                    q: 3,
                    f: X_MINUS.to_vec(),
                    expect_all_covers_pointed: Some(0),
                    expect_pointless_for_every_s: Some(true),
                },
            ],
            modulus: ModulusShape::default(),
            order: 3,
            split_remaining: true,
            bounds: BoundsConfig::default(),
            orientation: Orientation::Place,
            seed: 0,
            weil_tolerance: 1e-9,
            check_weighted: true,
            compare_spectra: true,
            expect_spectra_differ: Some(true),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {}", e)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("config: {}", e)))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("config: {}", m)));
        if self.curves.is_empty() {
            return bad("at least one curve is required");
        }
        if self.order == 0 {
            return bad("order must be positive");
        }
        if self.modulus.multiplicities.is_empty()
            || self.modulus.multiplicities.iter().any(|&m| m <= 0)
        {
            return bad("modulus multiplicities must be positive");
        }
        if self.modulus.place_degree == 0 {
            return bad("modulus place_degree must be positive");
        }
        if !(self.weil_tolerance > 0.0) {
            return bad("weil_tolerance must be positive");
        }
        Ok(())
    }
}

/// A curve with its class group and L-series caches.
pub struct CurveSession {
    pub name: String,
    pub curve: Arc<Curve>,
    pub engine: LSeriesEngine,
}

impl CurveSession {
    pub fn new(name: &str, record: &CurveRecord, bounds: &BoundsConfig) -> Result<Self> {
        let curve = Arc::new(Curve::from_record(record)?);
        let bank = Arc::new(RelationBank::new(curve.clone())?);
        let groups = ClassGroupCache::new(bank, bounds.class_group_bounds());
        Ok(CurveSession {
            name: name.into(),
            curve,
            engine: LSeriesEngine::new(groups),
        })
    }

    pub fn groups(&self) -> &ClassGroupCache {
        self.engine.groups()
    }
}

/// One member of a modulus family with the places of the shape's degree it
/// leaves out.
#[derive(Clone, Debug)]
pub struct ModulusChoice {
    pub modulus: Divisor,
    pub remaining: Vec<Place>,
}

/// All divisors of the given shape, sorted by their literal.
pub fn modulus_family(c: &Curve, shape: &ModulusShape) -> Result<Vec<ModulusChoice>> {
    let places = c.places_of_degree(shape.place_degree);
    let k = shape.multiplicities.len();
    if places.len() < k {
        return Err(Error::InvalidInput(format!(
            "the curve has {} places of degree {}, the shape needs {}",
            places.len(),
            shape.place_degree,
            k
        )));
    }
    let mut seen = BTreeMap::new();
    let mut chosen = Vec::with_capacity(k);
    fn walk(
        places: &[Place],
        mult: &[i64],
        chosen: &mut Vec<usize>,
        seen: &mut BTreeMap<Divisor, Vec<Place>>,
    ) {
        if chosen.len() == mult.len() {
            let d = Divisor::from_terms(
                chosen
                    .iter()
                    .zip(mult)
                    .map(|(&i, &m)| (places[i].clone(), m)),
            );
            let rest = (0..places.len())
                .filter(|i| !chosen.contains(i))
                .map(|i| places[i].clone())
                .collect();
            seen.entry(d).or_insert(rest);
            return;
        }
        for i in 0..places.len() {
            if !chosen.contains(&i) {
                chosen.push(i);
                walk(places, mult, chosen, seen);
                chosen.pop();
            }
        }
    }
    walk(&places, &shape.multiplicities, &mut chosen, &mut seen);
    let mut out: Vec<ModulusChoice> = seen
        .into_iter()
        .map(|(modulus, remaining)| ModulusChoice { modulus, remaining })
        .collect();
    out.sort_by_key(|m| m.modulus.literal());
    let expected = shape.family_size(places.len());
    if out.len() != expected {
        return Err(Error::Internal(format!(
            "enumerated {} moduli, counting gives {}",
            out.len(),
            expected
        )));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaReport {
    pub record: CurveRecord,
    pub genus: u32,
    /// N_1, ..., N_{2g} by direct enumeration
    pub point_counts: Vec<u64>,
    /// P(T), ascending
    pub l_polynomial: Vec<i64>,
    pub class_number: i64,
    pub functional_equation: bool,
    pub weil: WeilReport,
    /// N_m recomputed from P(T) agrees with enumeration for m ≤ 2g
    pub counts_consistent: bool,
}

impl ZetaReport {
    pub fn passed(&self) -> bool {
        self.functional_equation && self.weil.passed && self.counts_consistent
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "curve {}  genus {}", self.record, self.genus);
        for (m, n) in self.point_counts.iter().enumerate() {
            let _ = writeln!(s, "  N_{} = {}", m + 1, n);
        }
        let _ = writeln!(s, "  P(T) = {}", poly_string(&self.l_polynomial));
        let _ = writeln!(s, "  h = P(1) = {}", self.class_number);
        let _ = writeln!(
            s,
            "  functional equation: {}",
            verdict(self.functional_equation)
        );
        let _ = writeln!(
            s,
            "  Weil bound: {} (max deviation {:.3e})",
            verdict(self.weil.passed),
            self.weil.max_deviation
        );
        let _ = writeln!(
            s,
            "  counts match P(T): {}",
            verdict(self.counts_consistent)
        );
        s
    }
}

pub fn zeta_report(c: &Curve, tol: f64) -> Result<ZetaReport> {
    let z = zeta_l_polynomial(c)?;
    let g = c.genus();
    let point_counts: Vec<u64> = (1..=2 * g).map(|m| c.count_points(m)).collect();
    let counts_consistent = point_counts
        .iter()
        .enumerate()
        .all(|(i, &n)| z.point_count(i as u32 + 1) == n as i128);
    Ok(ZetaReport {
        record: c.record(),
        genus: g,
        weil: weil_check_i64(&z.coeffs, c.q(), tol),
        functional_equation: z.satisfies_functional_equation(),
        class_number: z.class_number(),
        l_polynomial: z.coeffs,
        point_counts,
        counts_consistent,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceCount {
    pub degree: u32,
    pub enumerated: usize,
    pub mobius: u64,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacesReport {
    pub record: CurveRecord,
    pub counts: Vec<PlaceCount>,
    /// descriptors by degree, for degrees up to the listing limit
    pub places: Vec<Vec<PlaceDescriptor>>,
}

impl PlacesReport {
    pub fn passed(&self) -> bool {
        self.counts.iter().all(|c| c.agree)
    }

    pub fn count(&self, degree: u32) -> Option<usize> {
        self.counts
            .iter()
            .find(|c| c.degree == degree)
            .map(|c| c.enumerated)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "curve {}", self.record);
        let _ = writeln!(s, "  degree  places  Möbius");
        for c in &self.counts {
            let _ = writeln!(
                s,
                "  {:>6}  {:>6}  {:>6}  {}",
                c.degree,
                c.enumerated,
                c.mobius,
                verdict(c.agree)
            );
        }
        for (d, ps) in self.places.iter().enumerate() {
            let names: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(s, "  degree {}: {}", d + 1, names.join("  "));
        }
        s
    }
}

pub fn places_report(c: &Curve, max_degree: u32, list_up_to: u32) -> Result<PlacesReport> {
    let mut counts = Vec::new();
    let mut places = Vec::new();
    for d in 1..=max_degree {
        let ps = c.places_of_degree(d);
        let mobius = c.place_counts_via_mobius(d)?;
        counts.push(PlaceCount {
            degree: d,
            enumerated: ps.len(),
            mobius,
            agree: ps.len() as u64 == mobius,
        });
        if d <= list_up_to {
            places.push(ps.iter().map(Place::descriptor).collect());
        }
    }
    Ok(PlacesReport {
        record: c.record(),
        counts,
        places,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayClassReport {
    pub record: CurveRecord,
    pub class_number: i64,
    pub structure: RayClassSummary,
    /// |torsion| = h Φ(D) / (q - 1)
    pub order_law: bool,
}

impl RayClassReport {
    pub fn summary(&self) -> String {
        let st = &self.structure;
        let mut s = String::new();
        let _ = writeln!(s, "curve {}  h = {}", self.record, self.class_number);
        let _ = writeln!(s, "  D = {}", terms_string(&st.modulus));
        let _ = writeln!(s, "  Cl_D ≅ {}", structure_string(&st.invariant_factors));
        let _ = writeln!(
            s,
            "  |torsion| = {} (h·Φ(D)/(q-1) = {}): {}",
            st.torsion_order,
            st.expected_torsion_order,
            verdict(self.order_law)
        );
        let _ = writeln!(
            s,
            "  B = {}, relations from L({}∞): {} inserted, {} place and {} unit generators",
            st.generator_bound,
            st.relation_level,
            st.relations_inserted,
            st.generators.len(),
            st.unit_generators
        );
        s
    }
}

pub fn rayclass_report(groups: &ClassGroupCache, d: &Divisor) -> Result<RayClassReport> {
    let g = groups.get(d)?;
    let structure = g.summary();
    Ok(RayClassReport {
        record: groups.curve().record(),
        class_number: g.class_number(),
        order_law: structure.torsion_order == structure.expected_torsion_order,
        structure,
    })
}

/// L-data of one character.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterReport {
    pub character: CharacterData,
    pub exact_order: u32,
    pub conductor: DivisorTerms,
    pub constant: bool,
    pub l_polynomial: LPolyData,
    /// 2g - 2 + deg f_χ, for characters nontrivial on Cl^0
    pub predicted_degree: Option<usize>,
    pub degree_law: bool,
    /// Euler product equals the weighted point count up to the truncation
    pub euler_matches_weighted: Option<bool>,
    /// L(χ, T) = L(χ_g, ωT) up to the truncation
    pub twist_identity: Option<bool>,
    pub weil: WeilReport,
}

impl CharacterReport {
    pub fn passed(&self) -> bool {
        self.degree_law
            && self.weil.passed
            && self.euler_matches_weighted != Some(false)
            && self.twist_identity != Some(false)
    }
}

/// Computes the L-data of χ; the series checks run when `truncation` is set.
pub fn character_report(
    engine: &LSeriesEngine,
    chi: &Character,
    truncation: Option<usize>,
    tol: f64,
) -> Result<CharacterReport> {
    let q = engine.curve().q();
    let l = engine.l_polynomial(chi)?;
    let predicted = (!chi.is_constant()).then(|| engine.predicted_degree(chi));
    let degree_law = match predicted {
        Some(d) => l.degree() == d && l.is_polynomial(),
        None => !l.has_pole_at_one() || chi.is_trivial(),
    };
    let (euler_matches_weighted, twist_identity) = match truncation {
        Some(n) => (
            Some(engine.l_series_euler(chi, n)? == engine.l_series_weighted(chi, n)?),
            Some(engine.constant_twist_check(chi, n)?),
        ),
        None => (None, None),
    };
    Ok(CharacterReport {
        character: chi.data(),
        exact_order: chi.exact_order(),
        conductor: chi.conductor().literal(),
        constant: chi.is_constant(),
        weil: l.weil_check(q, tol)?,
        l_polynomial: l.data(),
        predicted_degree: predicted,
        degree_law,
        euler_matches_weighted,
        twist_identity,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LSeriesReport {
    pub record: CurveRecord,
    pub order: u32,
    pub truncation: Option<usize>,
    pub ray_class: RayClassSummary,
    pub characters: Vec<CharacterReport>,
}

impl LSeriesReport {
    pub fn passed(&self) -> bool {
        self.characters.iter().all(CharacterReport::passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "curve {}  D = {}  characters into μ_{}: {}",
            self.record,
            terms_string(&self.ray_class.modulus),
            self.order,
            self.characters.len()
        );
        for c in &self.characters {
            let d = &c.character;
            let _ = writeln!(
                s,
                "  χ{:?}/{}  ord {}  f = {}  deg L = {}{}  {}",
                d.torsion_exponents,
                d.degree_exponent,
                c.exact_order,
                terms_string(&c.conductor),
                c.l_polynomial.degree,
                if c.constant { " (constant)" } else { "" },
                verdict(c.passed())
            );
        }
        s
    }
}

pub fn lseries_report(
    engine: &LSeriesEngine,
    d: &Divisor,
    order: u32,
    truncation: Option<usize>,
    tol: f64,
) -> Result<LSeriesReport> {
    let g = engine.groups().get(d)?;
    let chars = characters(&g, order, &[]);
    let reports = chars
        .par_iter()
        .map(|chi| character_report(engine, chi, truncation, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(LSeriesReport {
        record: engine.curve().record(),
        order,
        truncation,
        ray_class: g.summary(),
        characters: reports,
    })
}

/// One cyclic cover Y → X cut out by a character of Cl_D.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub character: CharacterReport,
    pub zeta: CoverZeta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub modulus: DivisorTerms,
    pub remaining: Vec<PlaceDescriptor>,
    pub ray_class: RayClassSummary,
    /// characters of exact order n meeting the split constraint
    pub qualifying_characters: usize,
    /// one entry per cover (χ and its Galois conjugates give one cover)
    pub covers: Vec<CoverReport>,
}

/// Covers grouped by the places required to split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitGroup {
    pub remaining: Vec<PlaceDescriptor>,
    pub moduli: usize,
    pub covers: usize,
    /// N_1(Y), sorted
    pub n1: Vec<i64>,
    pub pointless_covers: usize,
    pub all_covers_pointed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveExperiment {
    pub name: String,
    pub zeta: ZetaReport,
    pub places: PlacesReport,
    pub moduli: Vec<ModulusReport>,
    pub groups: Vec<SplitGroup>,
    pub groups_all_covers_pointed: usize,
    pub every_group_has_pointless_cover: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    /// must hold
    Required,
    /// the per-S pattern; may be replaced by the fallback
    Pattern,
    /// sufficient when the pattern is not reproduced
    Fallback,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub claim: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

impl Verdict {
    fn new(
        kind: VerdictKind,
        claim: String,
        expected: impl ToString,
        observed: impl ToString,
    ) -> Self {
        let (expected, observed) = (expected.to_string(), observed.to_string());
        Verdict {
            kind,
            claim,
            passed: expected == observed,
            expected,
            observed,
        }
    }
}

/// Overall outcome: every required verdict holds, and either every pattern
/// verdict or some fallback verdict holds.
pub fn overall(verdicts: &[Verdict]) -> bool {
    let all = |k: VerdictKind| verdicts.iter().filter(|v| v.kind == k).all(|v| v.passed);
    let fallback = verdicts
        .iter()
        .any(|v| v.kind == VerdictKind::Fallback && v.passed);
    all(VerdictKind::Required) && (all(VerdictKind::Pattern) || fallback)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub curves: Vec<CurveExperiment>,
    pub compare: Option<CompareReport>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(format!("report: {}", e)))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("report: {}", e)))
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.curves {
            let _ = writeln!(
                s,
                "{}  {}  P(T) = {}  h = {}",
                c.name,
                c.zeta.record,
                poly_string(&c.zeta.l_polynomial),
                c.zeta.class_number
            );
            let _ = writeln!(
                s,
                "  moduli: {}  covers: {}",
                c.moduli.len(),
                c.moduli.iter().map(|m| m.covers.len()).sum::<usize>()
            );
            let _ = writeln!(
                s,
                "  {:<34} {:>6} {:>6}  {:<24} all N_1 ≥ 1",
                "split places", "moduli", "covers", "N_1(Y)"
            );
            for g in &c.groups {
                let names: Vec<String> = g.remaining.iter().map(|p| p.to_string()).collect();
                let n1: Vec<String> = g.n1.iter().map(|n| n.to_string()).collect();
                let _ = writeln!(
                    s,
                    "  {:<34} {:>6} {:>6}  {:<24} {}",
                    names.join(" "),
                    g.moduli,
                    g.covers,
                    n1.join(","),
                    if g.all_covers_pointed { "yes" } else { "no" }
                );
            }
        }
        if let Some(c) = &self.compare {
            s.push_str(&c.summary());
        }
        for v in &self.verdicts {
            let _ = writeln!(
                s,
                "[{}] {:?}: {} (expected {}, observed {})",
                verdict(v.passed),
                v.kind,
                v.claim,
                v.expected,
                v.observed
            );
        }
        let _ = writeln!(s, "overall: {}", verdict(self.passed));
        s
    }
}

/// Characters of exact order n trivial on `split`, one per kernel.
pub fn cover_characters(
    group: &Arc<crate::classgroup::RayClassGroup>,
    n: u32,
    split: &[crate::classgroup::GroupElem],
) -> Vec<Character> {
    let units: Vec<i64> = (1..n.max(2) as i64)
        .filter(|&j| num_integer::gcd(j, n as i64) == 1)
        .collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for chi in characters(group, n, split) {
        if chi.exact_order() != n {
            continue;
        }
        let key = units
            .iter()
            .map(|&j| chi.pow(j).data())
            .min()
            .unwrap_or_else(|| chi.data());
        if seen.insert(key) {
            out.push(chi);
        }
    }
    out
}

fn modulus_report(
    s: &CurveSession,
    choice: &ModulusChoice,
    cfg: &ExperimentConfig,
) -> Result<ModulusReport> {
    let engine = &s.engine;
    let g = s.groups().get(&choice.modulus)?;
    let split = if cfg.split_remaining {
        choice
            .remaining
            .iter()
            .map(|p| g.frobenius(p, cfg.orientation))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let chars = cover_characters(&g, cfg.order, &split);
    let truncation = cfg.check_weighted.then_some(cfg.bounds.truncation);
    let covers = chars
        .par_iter()
        .map(|chi| {
            Ok(CoverReport {
                character: character_report(engine, chi, truncation, cfg.weil_tolerance)?,
                zeta: engine.cover_zeta(chi, cfg.weil_tolerance)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModulusReport {
        modulus: choice.modulus.literal(),
        remaining: choice.remaining.iter().map(Place::descriptor).collect(),
        ray_class: g.summary(),
        qualifying_characters: characters(&g, cfg.order, &split)
            .iter()
            .filter(|c| c.exact_order() == cfg.order)
            .count(),
        covers,
    })
}

fn split_groups(moduli: &[ModulusReport]) -> Vec<SplitGroup> {
    let mut by: BTreeMap<Vec<PlaceDescriptor>, SplitGroup> = BTreeMap::new();
    for m in moduli {
        let g = by.entry(m.remaining.clone()).or_insert_with(|| SplitGroup {
            remaining: m.remaining.clone(),
            moduli: 0,
            covers: 0,
            n1: Vec::new(),
            pointless_covers: 0,
            all_covers_pointed: true,
        });
        g.moduli += 1;
        for c in &m.covers {
            g.covers += 1;
            g.n1.push(c.zeta.n1);
            if c.zeta.n1 == 0 {
                g.pointless_covers += 1;
                g.all_covers_pointed = false;
            }
        }
    }
    by.into_values()
        .map(|mut g| {
            g.n1.sort();
            g
        })
        .collect()
}

pub fn curve_experiment(s: &CurveSession, cfg: &ExperimentConfig) -> Result<CurveExperiment> {
    let c = &s.curve;
    let zeta = zeta_report(c, cfg.weil_tolerance)?;
    let places = places_report(c, cfg.modulus.place_degree.max(2), cfg.modulus.place_degree)?;
    let family = modulus_family(c, &cfg.modulus)?;
    let moduli = family
        .par_iter()
        .map(|m| {
            modulus_report(s, m, cfg).map_err(|e| match e {
                Error::InsufficientBounds(msg) => {
                    Error::InsufficientBounds(format!("D = {}: {}", m.modulus, msg))
                }
                e => e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let groups = split_groups(&moduli);
    Ok(CurveExperiment {
        name: s.name.clone(),
        zeta,
        places,
        groups_all_covers_pointed: groups.iter().filter(|g| g.all_covers_pointed).count(),
        every_group_has_pointless_cover: groups.iter().all(|g| g.pointless_covers > 0),
        moduli,
        groups,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let sessions = cfg
        .curves
        .iter()
        .map(|e| CurveSession::new(&e.name, &e.record(), &cfg.bounds))
        .collect::<Result<Vec<_>>>()?;
    let mut curves = Vec::new();
    let mut verdicts = Vec::new();
    for (s, e) in sessions.iter().zip(&cfg.curves) {
        let r = curve_experiment(s, cfg)?;
        if let Some(k) = cfg.modulus.expected_count {
            verdicts.push(Verdict::new(
                VerdictKind::Required,
                format!("{}: number of moduli of the given shape", e.name),
                k,
                r.moduli.len(),
            ));
        }
        verdicts.push(Verdict::new(
            VerdictKind::Required,
            format!(
                "{}: cover numerators integral and within the Weil bound",
                e.name
            ),
            true,
            r.moduli
                .iter()
                .flat_map(|m| &m.covers)
                .all(|c| c.zeta.weil.passed && c.character.passed()),
        ));
        if let Some(k) = e.expect_all_covers_pointed {
            verdicts.push(Verdict::new(
                VerdictKind::Pattern,
                format!(
                    "{}: groups in which every cover has a rational point",
                    e.name
                ),
                k,
                r.groups_all_covers_pointed,
            ));
        }
        if let Some(b) = e.expect_pointless_for_every_s {
            verdicts.push(Verdict::new(
                VerdictKind::Pattern,
                format!(
                    "{}: every group has a cover without rational points",
                    e.name
                ),
                b,
                r.every_group_has_pointless_cover,
            ));
        }
        curves.push(r);
    }
    let compare = if cfg.compare_spectra && sessions.len() >= 2 {
        let c = compare(&sessions[0], &sessions[1], &cfg.modulus, cfg.order)?;
        if let (Some(b), Some(sp)) = (cfg.expect_spectra_differ, &c.spectrum) {
            verdicts.push(Verdict::new(
                VerdictKind::Fallback,
                format!(
                    "{} / {}: L-spectra differ",
                    sessions[0].name, sessions[1].name
                ),
                b,
                !sp.equal,
            ));
        }
        Some(c)
    } else {
        None
    };
    let passed = overall(&verdicts);
    Ok(ExperimentReport {
        config: cfg.clone(),
        curves,
        compare,
        verdicts,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub order: u32,
    pub moduli: (usize, usize),
    pub sizes: (usize, usize),
    pub equal: bool,
    pub only_in_first: Vec<LPolyData>,
    pub only_in_second: Vec<LPolyData>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareReport {
    pub first: CurveRecord,
    pub second: CurveRecord,
    pub zeta: (Vec<i64>, Vec<i64>),
    pub n1: (u64, u64),
    pub zeta_equal: bool,
    /// the zeta functions already differ, spectra were not computed
    pub short_circuit: bool,
    pub spectrum: Option<SpectrumComparison>,
}

impl CompareReport {
    /// Curves are told apart by zeta or by spectrum.
    pub fn distinguished(&self) -> bool {
        !self.zeta_equal || self.spectrum.as_ref().is_some_and(|s| !s.equal)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "compare {} with {}", self.first, self.second);
        let _ = writeln!(
            s,
            "  zeta: {} vs {}  {}",
            poly_string(&self.zeta.0),
            poly_string(&self.zeta.1),
            if self.zeta_equal {
                "equal"
            } else {
                "different"
            }
        );
        if self.short_circuit {
            let _ = writeln!(
                s,
                "  N_1 = {} vs {}: zeta functions differ, spectra not computed",
                self.n1.0, self.n1.1
            );
        }
        if let Some(sp) = &self.spectrum {
            let _ = writeln!(
                s,
                "  L-spectrum of order {} over {} + {} moduli: {} + {} polynomials, {} ({} only in first, {} only in second)",
                sp.order,
                sp.moduli.0,
                sp.moduli.1,
                sp.sizes.0,
                sp.sizes.1,
                if sp.equal { "equal" } else { "different" },
                sp.only_in_first.len(),
                sp.only_in_second.len()
            );
        }
        s
    }
}

fn multiset_difference(a: &[LPolyData], b: &[LPolyData]) -> Vec<LPolyData> {
    let mut counts: BTreeMap<&LPolyData, i64> = BTreeMap::new();
    for x in a {
        *counts.entry(x).or_default() += 1;
    }
    for x in b {
        *counts.entry(x).or_default() -= 1;
    }
    counts
        .into_iter()
        .flat_map(|(x, k)| std::iter::repeat_n(x.clone(), k.max(0) as usize))
        .collect()
}

pub fn compare(
    a: &CurveSession,
    b: &CurveSession,
    shape: &ModulusShape,
    order: u32,
) -> Result<CompareReport> {
    let za = a.groups().bank().zeta();
    let zb = b.groups().bank().zeta();
    let n1 = (a.curve.count_points(1), b.curve.count_points(1));
    let zeta_equal = za.q == zb.q && za.coeffs == zb.coeffs;
    let mut report = CompareReport {
        first: a.curve.record(),
        second: b.curve.record(),
        zeta: (za.coeffs.clone(), zb.coeffs.clone()),
        n1,
        zeta_equal,
        short_circuit: !zeta_equal,
        spectrum: None,
    };
    if !zeta_equal {
        return Ok(report);
    }
    let spectrum = |s: &CurveSession| -> Result<(usize, Vec<LPolyData>)> {
        let fam: Vec<Divisor> = modulus_family(&s.curve, shape)?
            .into_iter()
            .map(|m| m.modulus)
            .collect();
        let mut sp: Vec<LPolyData> = s
            .engine
            .l_spectrum(&fam, order)?
            .iter()
            .map(|l| l.data())
            .collect();
        sp.sort();
        Ok((fam.len(), sp))
    };
    let (ma, sa) = spectrum(a)?;
    let (mb, sb) = spectrum(b)?;
    report.spectrum = Some(SpectrumComparison {
        order,
        moduli: (ma, mb),
        sizes: (sa.len(), sb.len()),
        equal: sa == sb,
        only_in_first: multiset_difference(&sa, &sb),
        only_in_second: multiset_difference(&sb, &sa),
    });
    Ok(report)
}

/// Builds the finite system for D and checks its laws.
pub fn dynsys_report(
    groups: &ClassGroupCache,
    d: &Divisor,
    orientation: Orientation,
    samples: usize,
    seed: u64,
) -> Result<DynamicsReport> {
    if d.is_zero() {
        return Err(Error::InvalidInput(
            "the finite system needs a nonzero modulus".into(),
        ));
    }
    let g = groups.get(d)?;
    FiniteSystem::new(g, &Default::default(), orientation)?.check_action_laws(samples, seed)
}

pub fn dynamics_summary(r: &DynamicsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "D = {}  seed {}  {} samples  |U_D| = {}",
        terms_string(&r.modulus),
        r.seed,
        r.samples,
        r.unit_group_order
    );
    for l in &r.laws {
        let _ = writeln!(
            s,
            "  {:<22} {:>6} checks  {}",
            l.law,
            l.checked,
            verdict(l.passed)
        );
        if let Some(c) = &l.counterexample {
            let _ = writeln!(s, "    counterexample: {}", c);
        }
    }
    let h = &r.h_subspace;
    let _ = writeln!(
        s,
        "  Cl_D^0 / ι(U_D) has order {} (h = {}): {}",
        h.quotient_order,
        h.class_number,
        verdict(h.bijective)
    );
    let _ = writeln!(s, "overall: {}", verdict(r.passed));
    s
}

fn verdict(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn poly_string(c: &[i64]) -> String {
    let mut parts = Vec::new();
    for (i, &a) in c.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let sign = if a < 0 { "-" } else { "+" };
        let mag = a.unsigned_abs();
        let body = match (i, mag) {
            (0, m) => m.to_string(),
            (1, 1) => "T".into(),
            (1, m) => format!("{}T", m),
            (i, 1) => format!("T^{}", i),
            (i, m) => format!("{}T^{}", m, i),
        };
        parts.push((sign, body));
    }
    if parts.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (sign, body)) in parts.iter().enumerate() {
        if k == 0 {
            if *sign == "-" {
                s.push('-');
            }
        } else {
            s.push_str(&format!(" {} ", sign));
        }
        s.push_str(body);
    }
    s
}

fn terms_string(t: &[(PlaceDescriptor, i64)]) -> String {
    if t.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = t.iter().map(|(p, m)| format!("{}*[{}]", m, p)).collect();
    parts.join(" + ")
}

fn structure_string(f: &[i64]) -> String {
    let parts: Vec<String> = f
        .iter()
        .map(|&d| {
            if d == 0 {
                "Z".into()
            } else {
                format!("Z/{}", d)
            }
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" ⊕ ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session(f: &[i64]) -> CurveSession {
        CurveSession::new(
            "X",
            &CurveRecord {
                q: 3,
                f: f.to_vec(),
            },
            &BoundsConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn default_config_round_trips_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_toml("oder = 3\n").unwrap_err();
        assert!(e.to_string().contains("oder"), "{}", e);
        let e = ExperimentConfig::from_toml("[modulus]\nshape = [2, 1]\n").unwrap_err();
        assert!(e.to_string().contains("shape"), "{}", e);
    }

    #[test]
    fn family_size_counts_shapes() {
        let s = ModulusShape::default();
        assert_eq!(s.family_size(4), 12);
        let s = ModulusShape {
            multiplicities: vec![1, 1],
            ..Default::default()
        };
        assert_eq!(s.family_size(4), 6);
        assert_eq!(s.family_size(1), 0);
    }

    #[test]
    fn twelve_moduli_with_one_remaining_place() {
        let s = session(&X_PLUS);
        let fam = modulus_family(&s.curve, &ModulusShape::default()).unwrap();
        assert_eq!(fam.len(), 12);
        for m in &fam {
            assert_eq!(m.modulus.degree(), 8);
            assert_eq!(m.remaining.len(), 1);
            assert_eq!(m.modulus.multiplicity(&m.remaining[0]), 0);
        }
    }

    #[test]
    fn elliptic_zeta_report() {
        let c = Curve::from_record(&CurveRecord {
            q: 3,
            f: vec![1, 1, 0, 1],
        })
        .unwrap();
        let r = zeta_report(&c, 1e-9).unwrap();
        assert_eq!(r.l_polynomial, vec![1, 0, 3]);
        assert_eq!(r.class_number, 4);
        assert!(r.passed());
        assert_eq!(poly_string(&r.l_polynomial), "1 + 3T^2");
    }

    #[test]
    fn order_one_covers_are_the_curve() {
        let s = session(&X_PLUS);
        let cfg = ExperimentConfig {
            order: 1,
            check_weighted: false,
            ..Default::default()
        };
        let fam = modulus_family(&s.curve, &cfg.modulus).unwrap();
        let r = modulus_report(&s, &fam[0], &cfg).unwrap();
        assert_eq!(r.covers.len(), 1);
        let z = &r.covers[0].zeta;
        assert_eq!(z.n1 as u64, s.curve.count_points(1));
        assert_eq!(z.numerator, s.groups().bank().zeta().coeffs);
    }

    #[test]
    fn comparing_a_curve_with_itself() {
        let a = session(&X_MINUS);
        let b = session(&X_MINUS);
        let r = compare(&a, &b, &ModulusShape::default(), 3).unwrap();
        assert!(r.zeta_equal && !r.short_circuit);
        let sp = r.spectrum.unwrap();
        assert!(sp.equal && sp.sizes.0 > 0);
    }

    #[test]
    fn different_point_counts_short_circuit() {
        let a = session(&X_PLUS);
        let b = session(&[1, -1, 0, 0, 0, 1]);
        let r = compare(&a, &b, &ModulusShape::default(), 3).unwrap();
        assert_ne!(r.n1.0, r.n1.1);
        assert!(r.short_circuit && r.spectrum.is_none() && r.distinguished());
    }

    #[test]
    fn zero_modulus_rejected_for_dynamics() {
        let s = session(&X_PLUS);
        let e = dynsys_report(s.groups(), &Divisor::zero(), Orientation::Place, 10, 0).unwrap_err();
        assert!(matches!(e, Error::InvalidInput(_)));
    }

    #[test]
    fn dynamics_report_is_deterministic() {
        let s = session(&X_PLUS);
        let p = s.curve.places_of_degree(2)[0].clone();
        let d = Divisor::single(p, 1);
        let a = dynsys_report(s.groups(), &d, Orientation::Place, 50, 7).unwrap();
        let b = dynsys_report(s.groups(), &d, Orientation::Place, 50, 7).unwrap();
        assert!(a.passed);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn curve_records_parse_from_text() {
        let r = CurveRecord::parse("{q: 3, f: [-1, -1, 1, 1, 0, 1]}").unwrap();
        assert_eq!(r.f, X_PLUS.to_vec());
        let r = CurveRecord::parse("{\"q\": \"3^1\", \"f\": [1, 1, 0, 1]}").unwrap();
        assert_eq!(r.q, 3);
        assert!(CurveRecord::parse("{q: 3, g: [1]}").is_err());
        assert!(CurveRecord::parse("{q: \"x^2\", f: [1]}").is_err());
        let c = Curve::from_record(&CurveRecord::parse(&r.to_string()).unwrap()).unwrap();
        let d = c.places_of_degree(2);
        let lit = Divisor::from_terms([(d[0].clone(), 2), (d[1].clone(), 1)]);
        assert_eq!(Divisor::parse(&c, &lit.to_string()).unwrap(), lit);
        assert!(Divisor::parse(&c, "2*[").is_err());
    }
}
