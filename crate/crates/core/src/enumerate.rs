//! Exhaustive enumeration of small theories and the oracle suites run over
//! them: EL formulations, NPCC formulations, EL ⇒ screening off, and the
//! CHSH bound for definite two-wing theories.

use std::collections::HashSet;
use std::sync::Arc;

use num::{BigRational, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bits;
use crate::conditions::{
    check_el_first, check_el_second, check_el_three_valued, check_freedom_of_settings, check_npcc_all, check_npcc_joint,
    check_npcc_mutual, el_first_at, el_second_at, unordered_spacelike_pairs, ConditionError, PastKind,
};
use crate::eprb::build_eprb_site;
use crate::histories::{Event, HistorySpace};
use crate::modelspec::serialize;
use crate::probability::{
    chsh_value, check_probabilistic_free_settings, check_screening_off_all, format_weight, local_deterministic_bound,
    ChshScenario, Distribution, Point, Weight,
};
use crate::site::CausalSite;
use crate::theory::{check_ontic_definiteness, derive_three_valued, Frame, OnticTheory, Theory};

pub const MAX_ENUM_OMEGA: usize = 5;
pub const MAX_ENUM_POINTS: usize = 5;
/// Random distributions drawn per theory in the screening-off and CHSH suites.
pub const DISTRIBUTIONS_PER_THEORY: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("{what} = {got} exceeds the enumeration bound {max}")]
    TooLarge { what: &'static str, got: usize, max: usize },
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error(transparent)]
    Condition(#[from] ConditionError),
}

/// Posets on `n` points up to isomorphism, as strict order pairs (i, j)
/// with i < j, transitively closed.
pub fn posets_up_to_isomorphism(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let perms = permutations(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for sel in 0u64..1 << pairs.len() {
        let rel: Vec<(usize, usize)> = bits::ones(sel).map(|k| pairs[k]).collect();
        let has = |a: usize, b: usize| rel.contains(&(a, b));
        let closed = rel.iter().all(|&(a, b)| (b + 1..n).all(|c| !has(b, c) || has(a, c)));
        if !closed {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| rel.iter().fold(0u64, |m, &(a, b)| m | 1 << (p[a] * n + p[b])))
            .min()
            .unwrap_or(0);
        if seen.insert(canon) {
            out.push(rel);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn point_name(i: usize) -> String {
    format!("x{i}")
}

/// Every site with `1..=max_points` points, up to isomorphism.
pub fn enumerate_sites(max_points: usize) -> Vec<Arc<CausalSite>> {
    (1..=max_points)
        .flat_map(|n| {
            posets_up_to_isomorphism(n).into_iter().map(move |rel| {
                Arc::new(CausalSite::from_indices((0..n).map(point_name).collect(), &rel).expect("enumerated order is acyclic"))
            })
        })
        .collect()
}

/// How events are attached to the points of an enumerated site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeltaFamily {
    /// One fixed assignment of (point, event) pairs.
    Fixed(Vec<(usize, Event)>),
    /// Each point carries no event or one non-trivial event, one
    /// representative per complement pair (complements generate the same
    /// algebra).
    OneEventPerPoint,
}

fn event_representatives(omega_size: usize) -> Vec<Event> {
    let all = bits::low_mask(omega_size);
    (1..all).filter(|e| e & 1 == 1).collect()
}

impl DeltaFamily {
    /// All delta instances for a site and history count.
    pub fn instances(&self, points: usize, omega_size: usize) -> Vec<Vec<(usize, Event)>> {
        match self {
            DeltaFamily::Fixed(v) => vec![v.clone()],
            DeltaFamily::OneEventPerPoint => {
                let reps = event_representatives(omega_size);
                let k = reps.len() + 1;
                let total = k.pow(points as u32);
                (0..total)
                    .map(|mut code| {
                        let mut inst = Vec::new();
                        for p in 0..points {
                            let c = code % k;
                            code /= k;
                            if c > 0 {
                                inst.push((p, reps[c - 1]));
                            }
                        }
                        inst
                    })
                    .collect()
            }
        }
    }
}

fn check_bounds(omega_size: usize, points: usize) -> Result<(), EnumerationError> {
    if omega_size == 0 {
        return Err(EnumerationError::Zero("omega size"));
    }
    if points == 0 {
        return Err(EnumerationError::Zero("point count"));
    }
    if omega_size > MAX_ENUM_OMEGA {
        return Err(EnumerationError::TooLarge { what: "omega size", got: omega_size, max: MAX_ENUM_OMEGA });
    }
    if points > MAX_ENUM_POINTS {
        return Err(EnumerationError::TooLarge { what: "point count", got: points, max: MAX_ENUM_POINTS });
    }
    Ok(())
}

fn frame_for(site: &Arc<CausalSite>, space: &Arc<HistorySpace>, delta: &[(usize, Event)]) -> Frame {
    let mut frame = Frame::new(site.clone(), space.clone());
    for &(p, e) in delta {
        let region = site.region_from_mask(1 << p);
        frame.add_event(format!("E_{}", site.name(p)), e, region).expect("one event per point");
    }
    frame
}

/// Every ontic theory on `site` with `omega_size` histories, every
/// non-empty Θ, and every delta instance of `family`, in a fixed order:
/// delta instances outermost, Θ increasing.
pub fn enumerate_theories(
    site: &Arc<CausalSite>,
    omega_size: usize,
    family: &DeltaFamily,
) -> Result<impl Iterator<Item = OnticTheory>, EnumerationError> {
    check_bounds(omega_size, site.len())?;
    let space = Arc::new(HistorySpace::numbered(omega_size).expect("bounded history count"));
    let site = site.clone();
    let all = space.all();
    let instances = family.instances(site.len(), omega_size);
    Ok(instances.into_iter().flat_map(move |delta| {
        let frame = frame_for(&site, &space, &delta);
        (1..=all).map(move |theta| OnticTheory::new(frame.clone(), theta).expect("non-empty Θ"))
    }))
}

/// Units of work for the oracle suites: (site, Ω size, delta instance).
/// (site, Ω, delta instance).
type WorkItem = (Arc<CausalSite>, Arc<HistorySpace>, Vec<(usize, Event)>);

fn work_items(max_points: usize, max_omega: usize) -> Vec<WorkItem> {
    let mut out = Vec::new();
    for site in enumerate_sites(max_points) {
        for m in 1..=max_omega {
            let space = Arc::new(HistorySpace::numbered(m).expect("bounded history count"));
            for delta in DeltaFamily::OneEventPerPoint.instances(site.len(), m) {
                out.push((site.clone(), space.clone(), delta));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleBounds {
    pub max_omega: usize,
    pub max_points: usize,
    pub seed: u64,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds { max_omega: 4, max_points: 4, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub suite: String,
    pub bounds: OracleBounds,
    pub theories: u64,
    pub agreements: u64,
    pub disagreements: u64,
    /// The first offending theory in canonical model form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample_note: Option<String>,
    /// Further counts, as (label, value).
    pub stats: Vec<(String, String)>,
    pub passed: bool,
}

/// Partial result for one work item, merged in item order.
#[derive(Default)]
struct Tally {
    theories: u64,
    /// Theories skipped as relabelings of an enumerated one.
    skipped: u64,
    disagreements: u64,
    first: Option<(usize, String, String)>,
    counts: Vec<u64>,
}

impl Tally {
    fn with_counts(n: usize) -> Self {
        Tally { counts: vec![0; n], ..Default::default() }
    }

    fn fail(&mut self, key: usize, t: &OnticTheory, note: String, dist: Option<&Distribution>) {
        self.disagreements += 1;
        if self.first.as_ref().is_none_or(|(k, ..)| key < *k) {
            self.first = Some((key, serialize(&t.clone().into(), dist), note));
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.theories += other.theories;
        self.skipped += other.skipped;
        self.disagreements += other.disagreements;
        if let Some(o) = other.first {
            if self.first.as_ref().is_none_or(|(k, ..)| o.0 < *k) {
                self.first = Some(o);
            }
        }
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self
    }
}

/// Bit-mask images of every event under every permutation of `m` histories.
fn relabelings(m: usize) -> Vec<Vec<Event>> {
    permutations(m)
        .into_iter()
        .map(|p| {
            (0..1u64 << m)
                .map(|e| bits::ones(e).fold(0, |acc, h| acc | 1 << p[h]))
                .collect()
        })
        .collect()
}

/// Whether (delta, Θ) is the least member of its orbit under history
/// relabeling. Events are compared by complement-pair representative.
fn is_canonical(delta: &[(usize, Event)], theta: Event, m: usize, maps: &[Vec<Event>]) -> bool {
    let all = bits::low_mask(m);
    let rep = |e: Event| if e & 1 == 1 { e } else { all & !e };
    let key = |map: &[Event]| -> Vec<Event> {
        let mut k: Vec<Event> = delta.iter().map(|&(_, e)| rep(map[e as usize])).collect();
        k.push(map[theta as usize]);
        k
    };
    let own = key(&maps[0]);
    maps.iter().skip(1).all(|map| own <= key(map))
}

fn run_suite(
    suite: &str,
    bounds: OracleBounds,
    n_counts: usize,
    body: impl Fn(usize, &OnticTheory, &mut Tally) -> Result<(), ConditionError> + Sync,
) -> Result<(Tally, OracleReport), EnumerationError> {
    check_bounds(bounds.max_omega, bounds.max_points)?;
    let items = work_items(bounds.max_points, bounds.max_omega);
    let maps: Vec<Vec<Vec<Event>>> = (0..=bounds.max_omega).map(relabelings).collect();
    let tally = items
        .par_iter()
        .enumerate()
        .map(|(i, (site, space, delta))| -> Result<Tally, ConditionError> {
            let mut tally = Tally::with_counts(n_counts);
            let frame = frame_for(site, space, delta);
            let m = space.len();
            for theta in 1..=space.all() {
                if !is_canonical(delta, theta, m, &maps[m]) {
                    tally.skipped += 1;
                    continue;
                }
                let t = OnticTheory::new(frame.clone(), theta).expect("non-empty Θ");
                tally.theories += 1;
                body(i << 8 | theta as usize, &t, &mut tally)?;
            }
            Ok(tally)
        })
        .try_reduce(|| Tally::with_counts(n_counts), |a, b| Ok(a.merge(b)))?;
    let (counterexample, counterexample_note) = match &tally.first {
        Some((_, text, note)) => (Some(text.clone()), Some(note.clone())),
        None => (None, None),
    };
    let report = OracleReport {
        suite: suite.into(),
        bounds,
        theories: tally.theories,
        agreements: tally.theories - tally.disagreements,
        disagreements: tally.disagreements,
        counterexample,
        counterexample_note,
        stats: vec![("relabelings skipped".into(), tally.skipped.to_string())],
        passed: tally.disagreements == 0,
    };
    Ok((tally, report))
}

/// Both EL formulations agree, globally and region by region.
pub fn oracle_el_equivalence(bounds: OracleBounds) -> Result<OracleReport, EnumerationError> {
    let (tally, mut report) = run_suite("el-equiv", bounds, 2, |key, t, tally| {
        let first = check_el_first(t)?.holds;
        let second = check_el_second(t)?.holds;
        let site = t.frame().site();
        let mut region_mismatch = None;
        for x in site.all_regions().filter(|r| !r.is_empty()) {
            tally.counts[1] += 1;
            if el_first_at(t, &x).is_none() != el_second_at(t, &x).is_none() {
                region_mismatch = Some(site.region_names(&x).join(", "));
                break;
            }
        }
        if first {
            tally.counts[0] += 1;
        }
        if first != second || region_mismatch.is_some() {
            let note = match region_mismatch {
                Some(r) => format!("verdicts differ at region {{{r}}}"),
                None => format!("first formulation {first}, second {second}"),
            };
            tally.fail(key, t, note, None);
        }
        Ok(())
    })?;
    report.stats.extend([
        ("theories satisfying EL".into(), tally.counts[0].to_string()),
        ("region verdicts compared".into(), tally.counts[1].to_string()),
    ]);
    Ok(report)
}

/// Joint-past and mutual-past NPCC: the suite verdict is the global
/// equivalence (over all spacelike pairs) and the per-pair implication
/// mutual ⇒ joint. Per-pair agreement is counted separately, with its own
/// first counterexample.
pub fn oracle_npcc_equivalence(bounds: OracleBounds) -> Result<OracleReport, EnumerationError> {
    let per_pair_first = std::sync::Mutex::new(None::<(usize, String, String)>);
    let (tally, mut report) = run_suite("npcc-equiv", bounds, 4, |key, t, tally| {
        let joint = check_npcc_all(t, PastKind::Joint)?.holds;
        let mutual = check_npcc_all(t, PastKind::Mutual)?.holds;
        let mut implication_broken = None;
        for (ra, rb) in unordered_spacelike_pairs(t.frame()) {
            tally.counts[0] += 1;
            let j = check_npcc_joint(t, &ra, &rb)?.holds;
            let m = check_npcc_mutual(t, &ra, &rb)?.holds;
            if j != m {
                tally.counts[1] += 1;
                let mut slot = per_pair_first.lock().expect("no poisoning");
                if slot.as_ref().is_none_or(|(k, ..)| key < *k) {
                    let names = |r| t.frame().site().region_names(r).join(", ");
                    *slot = Some((
                        key,
                        serialize(&t.clone().into(), None),
                        format!("pair {{{}}} | {{{}}}: joint {j}, mutual {m}", names(&ra), names(&rb)),
                    ));
                }
            }
            if m && !j {
                implication_broken = Some((ra, rb));
            }
        }
        if joint {
            tally.counts[2] += 1;
        }
        if joint != mutual {
            tally.fail(key, t, format!("over all pairs: joint {joint}, mutual {mutual}"), None);
        } else if let Some((ra, rb)) = implication_broken {
            let names = |r| t.frame().site().region_names(r).join(", ");
            tally.counts[3] += 1;
            tally.fail(key, t, format!("mutual holds but joint fails at {{{}}} | {{{}}}", names(&ra), names(&rb)), None);
        }
        Ok(())
    })?;
    report.stats.extend([
        ("spacelike pairs compared".into(), tally.counts[0].to_string()),
        ("pairs where the per-pair verdicts differ".into(), tally.counts[1].to_string()),
        ("theories satisfying NPCC over all pairs".into(), tally.counts[2].to_string()),
        ("pairs where mutual holds and joint fails".into(), tally.counts[3].to_string()),
    ]);
    if let Some((_, text, note)) = per_pair_first.into_inner().expect("no poisoning") {
        report.stats.push(("first per-pair difference".into(), note));
        report.stats.push(("first per-pair difference model".into(), text));
    }
    Ok(report)
}

/// A random distribution with support in `theta`: a random non-empty subset
/// with integer weights 1..=9, normalized exactly.
pub fn random_distribution(t: &OnticTheory, rng: &mut ChaCha8Rng) -> Distribution {
    let theta: Vec<usize> = bits::ones(t.theta()).collect();
    let support = loop {
        let s: Vec<usize> = theta.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
        if !s.is_empty() {
            break s;
        }
    };
    let raw: Vec<i64> = support.iter().map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = raw.iter().sum();
    let space = t.frame().space();
    Distribution::from_points(
        support
            .iter()
            .zip(raw)
            .map(|(&h, w)| Point { label: space.name(h).to_string(), set: 1 << h, weight: BigRational::new(w.into(), total.into()) })
            .collect(),
    )
}

/// Every EL-satisfying theory, under random distributions supported in Θ,
/// satisfies SO2 and SO1 for all spacelike pairs.
pub fn oracle_el_so2(bounds: OracleBounds, tol: f64) -> Result<OracleReport, EnumerationError> {
    let seed = bounds.seed;
    let (tally, mut report) = run_suite("el-so2", bounds, 3, move |key, t, tally| {
        if !check_el_second(t)?.holds {
            return Ok(());
        }
        tally.counts[0] += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (key as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        for _ in 0..DISTRIBUTIONS_PER_THEORY {
            let d = random_distribution(t, &mut rng);
            tally.counts[1] += 1;
            let so2 = check_screening_off_all(t, &d, PastKind::Joint, tol)?;
            let so1 = check_screening_off_all(t, &d, PastKind::Mutual, tol)?;
            if so1.holds != so2.holds {
                tally.counts[2] += 1;
            }
            if !so2.holds || !so1.holds {
                let which = if !so2.holds { "SO2" } else { "SO1" };
                tally.fail(key, t, format!("{which} fails under the attached distribution"), Some(&d));
                break;
            }
        }
        Ok(())
    })?;
    report.stats.extend([
        ("theories satisfying EL".into(), tally.counts[0].to_string()),
        ("distributions checked".into(), tally.counts[1].to_string()),
        ("distributions where SO1 and SO2 differ".into(), tally.counts[2].to_string()),
    ]);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Bell bound

/// Frame of definite two-wing theories. History 16λ + 8A_s + 4B_s + 2A_r + B_r.
struct BellFamily {
    frame: Frame,
    scenario: ChshScenario,
    /// Number of hidden values λ.
    hidden: usize,
}

fn bell_frame(hidden: usize) -> BellFamily {
    let s = build_eprb_site();
    let n = 16 * hidden;
    let decode = |h: usize| (h / 16, h >> 3 & 1 == 1, h >> 2 & 1 == 1, h >> 1 & 1 == 1, h & 1 == 1);
    let names: Vec<String> = (0..n)
        .map(|h| {
            let (l, a, b, x, y) = decode(h);
            format!("l{l}_{}{}{}{}", a as u8, b as u8, x as u8, y as u8)
        })
        .collect();
    let space = Arc::new(HistorySpace::new(names).expect("distinct"));
    let ev = |f: &dyn Fn(usize) -> bool| (0..n).filter(|&h| f(h)).fold(0u64, |m, h| m | 1 << h);
    let a_s = ev(&|h| decode(h).1);
    let b_s = ev(&|h| decode(h).2);
    let a_r = ev(&|h| decode(h).3);
    let b_r = ev(&|h| decode(h).4);
    let mut frame = Frame::new(s.site.clone(), space.clone());
    frame.add_event("A_s", a_s, s.a_s).expect("fresh");
    frame.add_event("B_s", b_s, s.b_s).expect("fresh");
    frame.add_event("A_r", a_r, s.a_r).expect("fresh");
    frame.add_event("B_r", b_r, s.b_r).expect("fresh");
    if hidden > 1 {
        frame.add_event("L", ev(&|h| decode(h).0 == 1), s.past).expect("fresh");
    }
    for (name, r) in [("A", s.wing_a), ("B", s.wing_b), ("P", s.past)] {
        frame.add_region(name, r).expect("fresh");
    }
    frame.add_setting("A_s", s.a_s).expect("at home");
    frame.add_setting("B_s", s.b_s).expect("at home");
    BellFamily { frame, scenario: ChshScenario { a_setting: a_s, b_setting: b_s, a_outcome: a_r, b_outcome: b_r, omega: space.all() }, hidden }
}

/// Θ sets of the two families: without a hidden variable, every choice of a
/// non-empty set of outcome pairs per setting cell; with a binary hidden
/// event at the common past, a deterministic local strategy per hidden value
/// and a non-empty set of allowed setting cells per hidden value.
fn bell_thetas(fam: &BellFamily) -> Vec<Event> {
    let mut out = Vec::new();
    if fam.hidden == 1 {
        for code in 0..15usize.pow(4) {
            let mut theta = 0u64;
            let mut c = code;
            for cell in 0..4 {
                let outcomes = (c % 15 + 1) as u64;
                c /= 15;
                for o in bits::ones(outcomes) {
                    theta |= 1 << (cell * 4 + o);
                }
            }
            out.push(theta);
        }
    } else {
        for strategies in 0..256usize {
            for cells in 0..225usize {
                let mut theta = 0u64;
                for l in 0..2 {
                    let strat = strategies >> (4 * l) & 0xf;
                    let allowed = (if l == 0 { cells % 15 } else { cells / 15 }) + 1;
                    for cell in bits::ones(allowed as u64) {
                        let (a, b) = (cell >> 1, cell & 1);
                        let x = strat >> a & 1;
                        let y = strat >> (2 + b) & 1;
                        theta |= 1 << (16 * l + (a << 3 | b << 2 | x << 1 | y));
                    }
                }
                out.push(theta);
            }
        }
    }
    out
}

/// Uniform over Θ, then random weights on every allowed history.
/// Uniform plus random product-form weights q(λ)·r(settings)·s(outcome | λ,
/// settings), which keep settings independent of the hidden event whenever
/// Θ allows it.
fn bell_distributions(t: &OnticTheory, rng: &mut ChaCha8Rng) -> Vec<Distribution> {
    let space = t.frame().space();
    let mut out = vec![Distribution::uniform(&t.clone().into())];
    for _ in 0..DISTRIBUTIONS_PER_THEORY {
        let q: [i64; 2] = [rng.gen_range(1..=9), rng.gen_range(1..=9)];
        let r: [i64; 4] = std::array::from_fn(|_| rng.gen_range(1..=9));
        let s: Vec<(usize, i64)> = bits::ones(t.theta()).map(|h| (h, rng.gen_range(1..=9))).collect();
        let group = |h: usize| h >> 2;
        let mut group_sum = [0i64; 8];
        for &(h, w) in &s {
            group_sum[group(h)] += w;
        }
        let raw: Vec<(usize, BigRational)> = s
            .iter()
            .map(|&(h, w)| (h, BigRational::new((q[h >> 4] * r[(h >> 2) & 3] * w).into(), group_sum[group(h)].into())))
            .collect();
        let total: BigRational = raw.iter().map(|(_, w)| w.clone()).sum();
        out.push(Distribution::from_points(
            raw.into_iter()
                .map(|(h, w)| Point { label: space.name(h).to_string(), set: 1 << h, weight: w / &total })
                .collect(),
        ));
    }
    out
}

/// Per Θ: accepted, distributions kept, best accepted CHSH, best rejected
/// CHSH, first violation.
type BellTally = (bool, u64, Weight, Weight, Option<(String, String)>);

/// Largest CHSH over definite two-wing theories that satisfy EL with
/// settings and freedom of settings, under distributions satisfying
/// probabilistic freedom of settings.
pub fn oracle_bell_bound(bounds: OracleBounds, tol: f64) -> Result<OracleReport, EnumerationError> {
    let bound = local_deterministic_bound();
    let mut theories = 0u64;
    let mut passing = 0u64;
    let mut dists = 0u64;
    let mut max = Weight::zero();
    let mut max_rejected = Weight::zero();
    let mut counterexample = None;
    for hidden in [1, 2] {
        let fam = bell_frame(hidden);
        let thetas = bell_thetas(&fam);
        let results: Vec<Result<BellTally, ConditionError>> = thetas
            .par_iter()
            .enumerate()
            .map(|(i, &theta)| {
                let t = OnticTheory::new(fam.frame.clone(), theta).expect("non-empty Θ");
                let th: Theory = t.clone().into();
                let el = check_el_three_valued(&th, true)?.holds;
                let fos = check_freedom_of_settings(&th)?.holds;
                let definite = check_ontic_definiteness(&derive_three_valued(&t)).holds;
                let ok = el && fos && definite;
                let mut rng = ChaCha8Rng::seed_from_u64(bounds.seed ^ ((hidden as u64) << 32 | i as u64));
                let (mut best, mut best_rejected, mut n, mut bad) = (Weight::zero(), Weight::zero(), 0u64, None);
                for d in bell_distributions(&t, &mut rng) {
                    let Ok(v) = chsh_value(&d, &fam.scenario) else { continue };
                    if !ok {
                        best_rejected = best_rejected.max(v);
                        continue;
                    }
                    if !check_probabilistic_free_settings(&th, &d, tol)?.holds {
                        continue;
                    }
                    n += 1;
                    if v > bound && bad.is_none() {
                        bad = Some((serialize(&th, Some(&d)), format!("CHSH {}", format_weight(&v))));
                    }
                    best = best.max(v);
                }
                Ok((ok, n, best, best_rejected, bad))
            })
            .collect();
        for r in results {
            let (ok, n, best, rejected, bad) = r?;
            theories += 1;
            passing += ok as u64;
            dists += n;
            max = max.max(best);
            max_rejected = max_rejected.max(rejected);
            if counterexample.is_none() {
                counterexample = bad;
            }
        }
    }
    let tol_r = BigRational::from_float(tol).unwrap_or_else(Zero::zero);
    let passed = counterexample.is_none() && (&max - &bound).abs() <= tol_r;
    let (counterexample, counterexample_note) = match counterexample {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    Ok(OracleReport {
        suite: "bell-bound".into(),
        bounds,
        theories,
        agreements: passing,
        disagreements: counterexample.is_some() as u64,
        counterexample,
        counterexample_note,
        stats: vec![
            ("theories satisfying EL with settings, freedom of settings and ontic definiteness".into(), passing.to_string()),
            ("distributions satisfying probabilistic freedom of settings".into(), dists.to_string()),
            ("max CHSH".into(), format_weight(&max)),
            ("local deterministic bound".into(), format_weight(&bound)),
            ("max CHSH among rejected theories".into(), format_weight(&max_rejected)),
        ],
        passed,
    })
}

/// Suite names accepted by [`run_oracle`].
pub const SUITES: [&str; 4] = ["el-equiv", "npcc-equiv", "el-so2", "bell-bound"];

pub fn run_oracle(suite: &str, bounds: OracleBounds, tol: f64) -> Option<Result<OracleReport, EnumerationError>> {
    Some(match suite {
        "el-equiv" => oracle_el_equivalence(bounds),
        "npcc-equiv" => oracle_npcc_equivalence(bounds),
        "el-so2" => oracle_el_so2(bounds, tol),
        "bell-bound" => oracle_bell_bound(bounds, tol),
        _ => return None,
    })
}
