//! Causal-condition checkers: Einstein Locality in both formulations and
//! both logics, the joint and mutual past common-cause principles, freedom
//! of settings and signal detection.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::bits;
use crate::histories::{Event, Subalgebra};
use crate::report::{ConditionReport, SubResult, Witness};
use crate::site::{Region, SiteError};
use crate::theory::{Frame, OnticTheory, Theory};
use crate::valuation::{evaluate, Truth};

/// Regions are quantified over every subset of the site.
pub const MAX_SITE_POINTS: usize = 20;
/// Largest subalgebra whose events are enumerated one by one.
pub const MAX_ENUMERATED_ATOMS: usize = 20;
/// State budget of the exact three-valued antecedent search.
pub const EL3V_STATE_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionError {
    #[error(transparent)]
    Site(#[from] SiteError),
    #[error("regions {0} and {1} are not spacelike")]
    NotSpacelike(String, String),
    #[error("{0}")]
    TooLarge(String),
    #[error("event is not in the subalgebra of region {0}")]
    NotInAlgebra(String),
    #[error("Einstein Locality fails at region {region}: histories `{first}` and `{second}` agree on the exclusive past but not on the past")]
    ElViolated { region: String, first: String, second: String },
    #[error("`{0}` is not a declared setting")]
    NotASetting(String),
    #[error("setting is not free: past event {0} is weakly correlated to it")]
    NotFree(String),
    #[error("event `{0}` is indefinite in some basic valuation")]
    Indefinite(String),
}

fn region_label(frame: &Frame, r: &Region) -> String {
    format!("{{{}}}", frame.region_names(r).join(", "))
}

fn event_label(frame: &Frame, e: Event) -> String {
    if let Some(name) = frame.event_label(e) {
        return name.to_string();
    }
    if let Some(name) = frame.event_label(frame.space().complement(e)) {
        return format!("{name}^c");
    }
    format!("{{{}}}", frame.space().event_names(e).join(", "))
}

fn check_site_size(frame: &Frame) -> Result<(), ConditionError> {
    if frame.site().len() > MAX_SITE_POINTS {
        return Err(ConditionError::TooLarge(format!(
            "site has {} points; conditions quantify over all regions and support at most {MAX_SITE_POINTS}",
            frame.site().len()
        )));
    }
    Ok(())
}

/// Regions X of the site, deduplicated by (past, exclusive past).
fn el_regions(frame: &Frame) -> Vec<(Region, Region, Region)> {
    let site = frame.site();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for x in site.all_regions() {
        let r = site.past(&x);
        let p = site.exclusive_past(&x);
        if seen.insert((r.members(), p.members())) {
            out.push((x, r, p));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Two-valued Einstein Locality

/// First formulation at one region: Θ-histories agreeing on the exclusive
/// past agree on the past. Returns a violating pair.
pub fn el_first_at(t: &OnticTheory, x: &Region) -> Option<(usize, usize)> {
    let frame = t.frame();
    let site = frame.site();
    let sr = frame.subalgebra_of(&site.past(x));
    let sp = frame.subalgebra_of(&site.exclusive_past(x));
    el_first_algebras(t.theta(), &sr, &sp)
}

fn el_first_algebras(theta: Event, sr: &Subalgebra, sp: &Subalgebra) -> Option<(usize, usize)> {
    for &q in sp.atoms() {
        let members = q & theta;
        if members == 0 {
            continue;
        }
        let h0 = members.trailing_zeros() as usize;
        let r = sr.atom_of(h0).expect("atoms cover the space");
        if let Some(h1) = bits::ones(members & !r).next() {
            return Some((h0, h1));
        }
    }
    None
}

/// Events of `alg` to quantify over: all of them when small, the atoms
/// otherwise (existence of correlates is closed under union).
fn quantified_events(alg: &Subalgebra) -> Vec<Event> {
    if alg.atom_count() <= 16 {
        alg.events().collect()
    } else {
        alg.atoms().to_vec()
    }
}

/// Second formulation at one region: every A in Σ|_R has a correlate in
/// Σ|_P. Returns an event without one.
pub fn el_second_at(t: &OnticTheory, x: &Region) -> Option<Event> {
    let frame = t.frame();
    let site = frame.site();
    let sr = frame.subalgebra_of(&site.past(x));
    let sp = frame.subalgebra_of(&site.exclusive_past(x));
    let theta = t.theta();
    quantified_events(&sr).into_iter().find(|&a| {
        let b = sp.atoms().iter().filter(|&&q| q & theta & !a == 0).fold(0, |acc, &q| acc | q);
        !t.correlated(a, b)
    })
}

pub fn check_el_first(t: &OnticTheory) -> Result<ConditionReport, ConditionError> {
    let frame = t.frame();
    check_site_size(frame)?;
    let mut detail = Vec::new();
    let mut witness = None;
    for (x, _, _) in el_regions(frame) {
        let v = el_first_at(t, &x);
        detail.push(SubResult { scope: region_label(frame, &x), holds: v.is_none() });
        if let (Some((h0, h1)), None) = (v, &witness) {
            let sp = frame.subalgebra_of(&frame.site().exclusive_past(&x));
            witness = Some(Witness {
                message: format!(
                    "allowed histories `{}` and `{}` lie in the same atom of the exclusive past but in different atoms of the past",
                    frame.space().name(h0),
                    frame.space().name(h1)
                ),
                region: Some(frame.region_names(&x)),
                events: vec![frame.witness_event("exclusive-past atom", sp.atom_of(h0).unwrap_or(0))],
                valuations: vec![frame.space().name(h0).to_string(), frame.space().name(h1).to_string()],
            });
        }
    }
    Ok(finish("el1", witness, detail))
}

pub fn check_el_second(t: &OnticTheory) -> Result<ConditionReport, ConditionError> {
    let frame = t.frame();
    check_site_size(frame)?;
    let mut detail = Vec::new();
    let mut witness = None;
    for (x, _, _) in el_regions(frame) {
        let v = el_second_at(t, &x);
        detail.push(SubResult { scope: region_label(frame, &x), holds: v.is_none() });
        if let (Some(a), None) = (v, &witness) {
            witness = Some(Witness {
                message: format!("event {} has no correlated event in the exclusive past", event_label(frame, a)),
                region: Some(frame.region_names(&x)),
                events: vec![frame.witness_event("A", a)],
                valuations: Vec::new(),
            });
        }
    }
    Ok(finish("el2", witness, detail))
}

fn finish(name: &str, witness: Option<Witness>, detail: Vec<SubResult>) -> ConditionReport {
    match witness {
        None => ConditionReport::pass(name),
        Some(w) => ConditionReport::fail(name, w),
    }
    .with_detail(detail)
}

/// The event of Σ|_P correlated to `a`: the union of exclusive-past atoms
/// whose allowed histories all satisfy `a`.
pub fn construct_causal_antecedent(t: &OnticTheory, x: &Region, a: Event) -> Result<Event, ConditionError> {
    let frame = t.frame();
    let site = frame.site();
    let sr = frame.subalgebra_of(&site.past(x));
    if !sr.contains(a) {
        return Err(ConditionError::NotInAlgebra(region_label(frame, &site.past(x))));
    }
    let sp = frame.subalgebra_of(&site.exclusive_past(x));
    if let Some((h0, h1)) = el_first_algebras(t.theta(), &sr, &sp) {
        return Err(ConditionError::ElViolated {
            region: region_label(frame, x),
            first: frame.space().name(h0).to_string(),
            second: frame.space().name(h1).to_string(),
        });
    }
    let theta = t.theta();
    Ok(sp.atoms().iter().filter(|&&q| q & theta & !a == 0).fold(0, |acc, &q| acc | q))
}

// ---------------------------------------------------------------------------
// Three-valued Einstein Locality

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct El3vOptions {
    /// Settings in the past of X are their own antecedents.
    pub exempt_settings: bool,
    /// Events associated to minimal points are their own antecedents.
    pub exempt_earliest: bool,
}

impl El3vOptions {
    pub fn new(exempt_settings: bool) -> Self {
        El3vOptions { exempt_settings, exempt_earliest: true }
    }

    pub fn strict() -> Self {
        El3vOptions { exempt_settings: false, exempt_earliest: false }
    }
}

/// Subalgebra in which antecedents for region X are sought.
pub fn antecedent_algebra(frame: &Frame, x: &Region, opts: El3vOptions) -> Subalgebra {
    let site = frame.site();
    let r = site.past(x);
    let p = site.exclusive_past(x);
    let mut gens = frame.delta().generators_within(&p);
    if opts.exempt_settings {
        gens.extend(frame.settings().iter().filter(|s| s.home.is_subset(&r)).map(|s| frame.setting_event(s)));
    }
    if opts.exempt_earliest {
        let earliest = r.intersection(&site.minimal_points());
        gens.extend(frame.delta().generators_within(&earliest));
    }
    Subalgebra::generate(frame.omega(), &gens)
}

/// Per-basic touch masks: bit k set when atom meets basic k.
fn touch_masks(atoms: &[Event], basics: &[Event]) -> Vec<u64> {
    atoms
        .iter()
        .map(|&a| basics.iter().enumerate().filter(|(_, &x)| x & a != 0).fold(0, |acc, (k, _)| acc | 1 << k))
        .collect()
}

/// Whether some union of `atoms` takes the value `target[k]` under every
/// basic k. `None` when the search budget runs out.
fn solve_values(atoms: &[Event], basics: &[Event], target: &[Truth], budget: &mut usize) -> Option<Option<Event>> {
    let touch = touch_masks(atoms, basics);
    // per basic: mask over atom indices
    let sets: Vec<u64> = (0..basics.len())
        .map(|k| touch.iter().enumerate().filter(|(_, &t)| t >> k & 1 == 1).fold(0, |acc, (i, _)| acc | 1 << i))
        .collect();
    let mut forced_in = 0u64;
    let mut forced_out = 0u64;
    for (k, &t) in target.iter().enumerate() {
        match t {
            Truth::True => forced_in |= sets[k],
            Truth::False => forced_out |= sets[k],
            Truth::Half => {}
        }
    }
    if forced_in & forced_out != 0 {
        return Some(None);
    }
    let halves: Vec<u64> = target.iter().enumerate().filter(|(_, &t)| t == Truth::Half).map(|(k, _)| sets[k]).collect();
    fn search(halves: &[u64], inn: u64, out: u64, budget: &mut usize) -> Option<Option<u64>> {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let Some(&s) = halves.iter().find(|&&s| s & inn == 0 || s & out == 0) else {
            return Some(Some(inn));
        };
        let free = s & !inn & !out;
        let (need_in, need_out) = (s & inn == 0, s & out == 0);
        if free == 0 || (need_in && need_out && free.count_ones() < 2) {
            return Some(None);
        }
        for i in bits::ones(free) {
            let bit = 1u64 << i;
            let r = if need_in { search(halves, inn | bit, out, budget) } else { search(halves, inn, out | bit, budget) };
            match r {
                Some(Some(sol)) => return Some(Some(sol)),
                Some(None) => {}
                None => return None,
            }
        }
        Some(None)
    }
    let sol = search(&halves, forced_in, forced_out, budget)?;
    Some(sol.map(|sel| bits::ones(sel).fold(0, |acc, i| acc | atoms[i])))
}

/// Set of per-basic (in seen, out seen) states reachable by unions of
/// `atoms`, with a representative union for each.
pub(crate) fn reachable_states(atoms: &[Event], basics: &[Event]) -> Result<HashMap<u128, Event>, ConditionError> {
    let touch = touch_masks(atoms, basics);
    let mut states: HashMap<u128, Event> = HashMap::from([(0u128, 0)]);
    for (i, &t) in touch.iter().enumerate() {
        if t == 0 {
            continue;
        }
        let mut next = HashMap::with_capacity(states.len() * 2);
        for (&s, &rep) in &states {
            next.entry(s | t as u128).or_insert(rep | atoms[i]);
            next.entry(s | (t as u128) << 64).or_insert(rep);
        }
        if next.len() > EL3V_STATE_BUDGET {
            return Err(ConditionError::TooLarge(format!(
                "three-valued antecedent search exceeds {EL3V_STATE_BUDGET} value patterns"
            )));
        }
        states = next;
    }
    Ok(states)
}

/// Three-valued EL at one region for the valuations derived from `basics`.
/// Returns an event of Σ|_R without a correlate in the antecedent algebra.
pub fn el3v_at(frame: &Frame, basics: &[Event], x: &Region, opts: El3vOptions) -> Result<Option<Event>, ConditionError> {
    let site = frame.site();
    let r = site.past(x);
    let sr = frame.subalgebra_of(&r);
    let sq = antecedent_algebra(frame, x, opts);
    let u = basics.iter().fold(0, |a, &b| a | b);

    // every antecedent atom meets U inside one atom of Σ|_R
    let refines = sq.atoms().iter().all(|&q| {
        let part = q & u;
        part == 0 || sr.atoms().iter().any(|&a| part & !a == 0)
    });
    if refines {
        return Ok(None);
    }

    let mut candidates: Vec<Event> = sr.atoms().to_vec();
    candidates.extend(frame.delta().generators_within(&r));
    let comps: Vec<Event> = candidates.iter().map(|&a| frame.space().complement(a)).collect();
    candidates.extend(comps);
    let q_atoms: Vec<Event> = sq.atoms().iter().copied().filter(|&q| q & u != 0).collect();
    let mut budget = 100_000usize;
    for &a in &candidates {
        let target: Vec<Truth> = basics.iter().map(|&b| evaluate(b, a)).collect();
        match solve_values(&q_atoms, basics, &target, &mut budget) {
            Some(None) => return Ok(Some(a)),
            Some(Some(_)) => {}
            None => break,
        }
    }

    let r_atoms: Vec<Event> = sr.atoms().iter().copied().filter(|&a| a & u != 0).collect();
    let vr = reachable_states(&r_atoms, basics)?;
    let vq = reachable_states(&q_atoms, basics)?;
    Ok(vr.into_iter().filter(|(s, _)| !vq.contains_key(s)).map(|(_, rep)| rep).min())
}

pub fn check_el_three_valued(theory: &Theory, exempt_settings: bool) -> Result<ConditionReport, ConditionError> {
    check_el_three_valued_with(theory, El3vOptions::new(exempt_settings))
}

pub fn check_el_three_valued_with(theory: &Theory, opts: El3vOptions) -> Result<ConditionReport, ConditionError> {
    let frame = theory.frame();
    check_site_size(frame)?;
    let basics = theory.basic_sets();
    let mut detail = Vec::new();
    let mut witness = None;
    for (x, _, _) in el_regions(frame) {
        let v = el3v_at(frame, &basics, &x, opts)?;
        detail.push(SubResult { scope: region_label(frame, &x), holds: v.is_none() });
        if let (Some(a), None) = (v, &witness) {
            witness = Some(Witness {
                message: format!(
                    "event {} has no event with the same three-valued truth values among its allowed antecedents",
                    event_label(frame, a)
                ),
                region: Some(frame.region_names(&x)),
                events: vec![frame.witness_event("A", a)],
                valuations: Vec::new(),
            });
        }
    }
    Ok(finish("el3v", witness, detail))
}

// ---------------------------------------------------------------------------
// Common-cause principles

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PastKind {
    Joint,
    Mutual,
}

/// Distinct non-empty parts `atom ∩ theta`.
fn theta_parts(alg: &Subalgebra, theta: Event) -> Vec<Event> {
    alg.atoms().iter().map(|&a| a & theta).filter(|&p| p != 0).collect()
}

fn is_union_of(parts: &[Event], e: Event) -> bool {
    parts.iter().all(|&p| p & e == 0 || p & !e == 0)
}

/// NPCC for one pair given the common-cause region. Returns (A, B) correlated
/// or anticorrelated without a common cause.
pub fn npcc_at(t: &OnticTheory, ra: &Region, rb: &Region, past: &Region) -> Result<Option<(Event, Event)>, ConditionError> {
    let frame = t.frame();
    let theta = t.theta();
    let sa = frame.subalgebra_of(ra);
    let sb = frame.subalgebra_of(rb);
    let sc = frame.subalgebra_of(past);
    let a_parts = theta_parts(&sa, theta);
    if a_parts.len() > MAX_ENUMERATED_ATOMS {
        return Err(ConditionError::TooLarge(format!(
            "region {} distinguishes {} allowed classes; at most {MAX_ENUMERATED_ATOMS} are enumerated",
            region_label(frame, ra),
            a_parts.len()
        )));
    }
    let b_parts = theta_parts(&sb, theta);
    let c_parts = theta_parts(&sc, theta);
    for sel in bits::subsets(bits::low_mask(a_parts.len())) {
        let a_theta = bits::ones(sel).fold(0, |acc, i| acc | a_parts[i]);
        if !is_union_of(&b_parts, a_theta) || is_union_of(&c_parts, a_theta) {
            continue;
        }
        let a = sa.atoms().iter().filter(|&&x| x & a_theta != 0).fold(0, |acc, &x| acc | x);
        let b = sb.atoms().iter().filter(|&&x| x & a_theta != 0).fold(0, |acc, &x| acc | x);
        return Ok(Some((a, b)));
    }
    Ok(None)
}

fn npcc_pair(t: &OnticTheory, ra: &Region, rb: &Region, kind: PastKind) -> Result<Option<(Event, Event)>, ConditionError> {
    let site = t.frame().site();
    if !site.is_spacelike(ra, rb)? {
        return Err(ConditionError::NotSpacelike(region_label(t.frame(), ra), region_label(t.frame(), rb)));
    }
    let past = match kind {
        PastKind::Joint => site.joint_past(ra, rb)?,
        PastKind::Mutual => site.mutual_past(ra, rb)?,
    };
    npcc_at(t, ra, rb, &past)
}

fn npcc_name(kind: PastKind) -> &'static str {
    match kind {
        PastKind::Joint => "npccj",
        PastKind::Mutual => "npccm",
    }
}

fn npcc_witness(t: &OnticTheory, ra: &Region, rb: &Region, a: Event, b: Event, kind: PastKind) -> Witness {
    let frame = t.frame();
    let where_ = match kind {
        PastKind::Joint => "joint",
        PastKind::Mutual => "mutual",
    };
    Witness {
        message: format!(
            "{} in {} and {} in {} are correlated but no event of their {where_} past is correlated to both",
            event_label(frame, a),
            region_label(frame, ra),
            event_label(frame, b),
            region_label(frame, rb)
        ),
        region: Some(frame.region_names(&ra.union(rb))),
        events: vec![frame.witness_event("A", a), frame.witness_event("B", b)],
        valuations: Vec::new(),
    }
}

pub fn check_npcc(t: &OnticTheory, ra: &Region, rb: &Region, kind: PastKind) -> Result<ConditionReport, ConditionError> {
    Ok(match npcc_pair(t, ra, rb, kind)? {
        None => ConditionReport::pass(npcc_name(kind)),
        Some((a, b)) => ConditionReport::fail(npcc_name(kind), npcc_witness(t, ra, rb, a, b, kind)),
    })
}

pub fn check_npcc_joint(t: &OnticTheory, ra: &Region, rb: &Region) -> Result<ConditionReport, ConditionError> {
    check_npcc(t, ra, rb, PastKind::Joint)
}

pub fn check_npcc_mutual(t: &OnticTheory, ra: &Region, rb: &Region) -> Result<ConditionReport, ConditionError> {
    check_npcc(t, ra, rb, PastKind::Mutual)
}

/// Unordered spacelike pairs of non-empty regions.
pub fn unordered_spacelike_pairs(frame: &Frame) -> Vec<(Region, Region)> {
    frame.site().spacelike_pairs().into_iter().filter(|(a, b)| a.members() < b.members()).collect()
}

/// The principle for every spacelike pair of regions of the site.
pub fn check_npcc_all(t: &OnticTheory, kind: PastKind) -> Result<ConditionReport, ConditionError> {
    let frame = t.frame();
    check_site_size(frame)?;
    let mut detail = Vec::new();
    let mut witness = None;
    for (ra, rb) in unordered_spacelike_pairs(frame) {
        let v = npcc_pair(t, &ra, &rb, kind)?;
        detail.push(SubResult {
            scope: format!("{} | {}", region_label(frame, &ra), region_label(frame, &rb)),
            holds: v.is_none(),
        });
        if let (Some((a, b)), None) = (v, &witness) {
            witness = Some(npcc_witness(t, &ra, &rb, a, b, kind));
        }
    }
    Ok(finish(npcc_name(kind), witness, detail))
}

// ---------------------------------------------------------------------------
// Freedom of settings

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FosViolation {
    /// Region the setting event belongs to.
    pub setting_region: Region,
    pub setting: Event,
    /// The weakly correlated event.
    pub influence: Event,
    /// Region of the influencing event (a past region or another setting region).
    pub influence_region: Region,
    pub from_setting: bool,
}

/// Distinct unions of setting home regions.
fn home_unions(frame: &Frame) -> Result<Vec<Region>, ConditionError> {
    let mut homes: Vec<Region> = Vec::new();
    for s in frame.settings() {
        if !homes.contains(&s.home) {
            homes.push(s.home);
        }
    }
    if homes.len() > 16 {
        return Err(ConditionError::TooLarge(format!("{} distinct setting regions; at most 16 are supported", homes.len())));
    }
    let mut out: Vec<Region> = Vec::new();
    for sel in bits::subsets(bits::low_mask(homes.len())).filter(|&s| s != 0) {
        let h = bits::ones(sel).fold(frame.site().empty_region(), |acc, i| acc.union(&homes[i]));
        if !out.contains(&h) {
            out.push(h);
        }
    }
    Ok(out)
}

fn setting_algebra(frame: &Frame, h: &Region) -> Subalgebra {
    let gens: Vec<Event> = frame.settings().iter().filter(|s| s.home.is_subset(h)).map(|s| frame.setting_event(s)).collect();
    Subalgebra::generate(frame.omega(), &gens)
}

/// Some falsifiable A in `settings` and non-trivial C in `influences` with
/// C weakly correlated to A.
fn weak_influence(settings: &Subalgebra, influences: &Subalgebra, basics: &[Event]) -> Result<Option<(Event, Event)>, ConditionError> {
    if settings.atom_count() > MAX_ENUMERATED_ATOMS {
        return Err(ConditionError::TooLarge(format!(
            "setting subalgebra has {} atoms; at most {MAX_ENUMERATED_ATOMS} are enumerated",
            settings.atom_count()
        )));
    }
    for a in settings.events() {
        // union of derivation sets of the basics falsifying A
        let z = basics.iter().filter(|&&x| x & a == 0).fold(0, |acc, &x| acc | x);
        if z == 0 {
            continue;
        }
        let c_max = influences.atoms().iter().filter(|&&q| q & z == 0).fold(0, |acc, &q| acc | q);
        if let Some(&x) = basics.iter().find(|&&x| x & !c_max == 0) {
            let c = influences.atoms().iter().filter(|&&q| q & x != 0).fold(0, |acc, &q| acc | q);
            return Ok(Some((a, c)));
        }
    }
    Ok(None)
}

/// Freedom of settings for the valuations derived from `basics`.
pub fn fos_violation(frame: &Frame, basics: &[Event]) -> Result<Option<FosViolation>, ConditionError> {
    let site = frame.site();
    let unions = home_unions(frame)?;
    for h in &unions {
        let settings = setting_algebra(frame, h);
        let past_region = site.exclusive_past(h);
        let past = frame.subalgebra_of(&past_region);
        if let Some((a, c)) = weak_influence(&settings, &past, basics)? {
            return Ok(Some(FosViolation { setting_region: *h, setting: a, influence: c, influence_region: past_region, from_setting: false }));
        }
    }
    for h1 in &unions {
        for h2 in unions.iter().filter(|h2| h2.intersection(h1).is_empty()) {
            let s1 = setting_algebra(frame, h1);
            let s2 = setting_algebra(frame, h2);
            if let Some((a, c)) = weak_influence(&s1, &s2, basics)? {
                return Ok(Some(FosViolation { setting_region: *h1, setting: a, influence: c, influence_region: *h2, from_setting: true }));
            }
        }
    }
    Ok(None)
}

pub fn check_freedom_of_settings(theory: &Theory) -> Result<ConditionReport, ConditionError> {
    let frame = theory.frame();
    Ok(match fos_violation(frame, &theory.basic_sets())? {
        None => ConditionReport::pass("fos"),
        Some(v) => ConditionReport::fail("fos", fos_witness(frame, &v)),
    })
}

fn fos_witness(frame: &Frame, v: &FosViolation) -> Witness {
    let kind = if v.from_setting { "setting" } else { "past" };
    Witness {
        message: format!(
            "{kind} event {} in {} is weakly correlated to setting {} of {}",
            event_label(frame, v.influence),
            region_label(frame, &v.influence_region),
            event_label(frame, v.setting),
            region_label(frame, &v.setting_region)
        ),
        region: Some(frame.region_names(&v.setting_region)),
        events: vec![frame.witness_event("C", v.influence), frame.witness_event("A", v.setting)],
        valuations: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Signalling

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    None,
    Weak,
    Strong,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signal {
    pub kind: SignalKind,
    /// The pair (outcome-side event, setting-side event) exhibiting it.
    pub witness: Option<(Event, Event)>,
}

/// Classify the signal from setting `a` (in `ra`) to event `b` (in `rb`).
pub fn detect_signal(theory: &Theory, a: Event, ra: &Region, b: Event, rb: &Region) -> Result<Signal, ConditionError> {
    let frame = theory.frame();
    let site = frame.site();
    if !site.is_spacelike(ra, rb)? {
        return Err(ConditionError::NotSpacelike(region_label(frame, ra), region_label(frame, rb)));
    }
    if !frame.settings().iter().any(|s| frame.setting_event(s) == a) {
        return Err(ConditionError::NotASetting(event_label(frame, a)));
    }
    let basics = theory.basic_sets();
    if let Some(v) = fos_violation(frame, &basics)? {
        return Err(ConditionError::NotFree(event_label(frame, v.influence)));
    }
    for e in [a, b] {
        if basics.iter().any(|&x| evaluate(x, e) == Truth::Half) {
            return Err(ConditionError::Indefinite(event_label(frame, e)));
        }
    }
    let constant = |e: Event| {
        let first = evaluate(basics[0], e);
        basics.iter().all(|&x| evaluate(x, e) == first)
    };
    if constant(a) || constant(b) {
        return Ok(Signal { kind: SignalKind::None, witness: None });
    }
    let omega = frame.omega();
    let (ac, bc) = (!a & omega, !b & omega);
    for bb in [b, bc] {
        if theory.correlated(bb, a) {
            return Ok(Signal { kind: SignalKind::Strong, witness: Some((bb, a)) });
        }
    }
    for bb in [b, bc] {
        for aa in [a, ac] {
            if theory.weakly_correlated(bb, aa) {
                return Ok(Signal { kind: SignalKind::Weak, witness: Some((bb, aa)) });
            }
        }
    }
    Ok(Signal { kind: SignalKind::None, witness: None })
}

/// No setting signals to a definite named event at a spacelike region.
/// Requires freedom of settings.
pub fn check_no_signalling(theory: &Theory) -> Result<ConditionReport, ConditionError> {
    let frame = theory.frame();
    let site = frame.site();
    let basics = theory.basic_sets();
    let mut detail = Vec::new();
    let mut witness = None;
    for s in frame.settings() {
        let a = frame.setting_event(s);
        for e in frame.events() {
            if e.region.is_empty() || !site.is_spacelike(&s.home, &e.region)? {
                continue;
            }
            if basics.iter().any(|&x| evaluate(x, e.event) == Truth::Half) {
                continue;
            }
            let signal = detect_signal(theory, a, &s.home, e.event, &e.region)?;
            let holds = signal.kind == SignalKind::None;
            detail.push(SubResult { scope: format!("{} -> {}", frame.setting_name(s), e.name), holds });
            if let (Some((b, c)), None) = (signal.witness, &witness) {
                witness = Some(Witness {
                    message: format!(
                        "setting {} signals {} to {}",
                        frame.setting_name(s),
                        if signal.kind == SignalKind::Strong { "strongly" } else { "weakly" },
                        e.name
                    ),
                    region: Some(frame.region_names(&e.region)),
                    events: vec![frame.witness_event("B", b), frame.witness_event("A", c)],
                    valuations: Vec::new(),
                });
            }
        }
    }
    Ok(match witness {
        None => ConditionReport::pass("signal"),
        Some(w) => ConditionReport::fail("signal", w),
    }
    .with_detail(detail))
}
