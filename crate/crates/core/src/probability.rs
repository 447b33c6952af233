//! Distributions over allowed histories or basic valuations, conditioning,
//! screening off, probabilistic freedom of settings, and CHSH evaluation.
//! Weights are exact rationals.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::bits;
use crate::conditions::{reachable_states, unordered_spacelike_pairs, ConditionError, PastKind};
use crate::histories::{Event, Subalgebra};
use crate::report::{ConditionReport, SubResult, Witness};
use crate::site::Region;
use crate::theory::{OnticTheory, Theory};
use crate::valuation::{evaluate, Truth};

pub type Weight = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbabilityError {
    #[error("weight `{0}` is not a non-negative rational or decimal")]
    MalformedWeight(String),
    #[error("`{0}` is not an allowed history or basic valuation")]
    OutsideSupport(String),
    #[error("weights sum to {0}, not 1")]
    Normalization(String),
    #[error("duplicate weight for `{0}`")]
    Duplicate(String),
    #[error("conditioning event has probability zero")]
    ZeroProbability,
    #[error("setting cell ({0}, {1}) has probability zero")]
    ZeroCell(bool, bool),
    #[error("outcome event is indefinite on a valuation with positive weight")]
    IndefiniteOutcome,
    #[error(transparent)]
    Condition(#[from] ConditionError),
}

/// Parse `p/q`, an integer, or a decimal into an exact rational.
pub fn parse_weight(s: &str) -> Option<Weight> {
    let s = s.trim();
    if s.is_empty() || s.starts_with('-') || s.starts_with('+') {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    Some(BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32)))
}

/// Lowest-terms display: `p/q` or an integer.
pub fn format_weight(w: &Weight) -> String {
    if w.is_integer() {
        w.numer().to_string()
    } else {
        format!("{}/{}", w.numer(), w.denom())
    }
}

pub fn to_f64(w: &Weight) -> f64 {
    w.to_f64().unwrap_or(f64::NAN)
}

fn tol_rational(tol: f64) -> Weight {
    BigRational::from_float(tol.abs()).unwrap_or_else(Zero::zero)
}

/// One weighted point: a history (singleton derivation set) or a basic
/// valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    pub label: String,
    pub set: Event,
    pub weight: Weight,
}

/// μ over the points of a theory. Only points with positive weight are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    points: Vec<Point>,
}

impl Distribution {
    /// Weights keyed by history name (ontic) or basic valuation name
    /// (three-valued); must be non-negative and sum to 1.
    pub fn new(theory: &Theory, weights: Vec<(String, Weight)>) -> Result<Self, ProbabilityError> {
        let mut points: Vec<Point> = Vec::new();
        let mut total = Weight::zero();
        for (label, weight) in weights {
            if weight.is_negative() {
                return Err(ProbabilityError::MalformedWeight(format_weight(&weight)));
            }
            if points.iter().any(|p| p.label == label) {
                return Err(ProbabilityError::Duplicate(label));
            }
            let set = support_point(theory, &label).ok_or_else(|| ProbabilityError::OutsideSupport(label.clone()))?;
            total += &weight;
            if !weight.is_zero() {
                points.push(Point { label, set, weight });
            }
        }
        if total != Weight::one() {
            return Err(ProbabilityError::Normalization(format_weight(&total)));
        }
        Ok(Distribution { points })
    }

    /// Equal weight on every allowed history or basic valuation.
    pub fn uniform(theory: &Theory) -> Self {
        let labels = support_labels(theory);
        let w = BigRational::new(BigInt::one(), BigInt::from(labels.len()));
        Distribution {
            points: labels
                .into_iter()
                .map(|(label, set)| Point { label, set, weight: w.clone() })
                .collect(),
        }
    }

    /// Raw points; weights must already be normalized.
    pub fn from_points(points: Vec<Point>) -> Self {
        Distribution { points: points.into_iter().filter(|p| !p.weight.is_zero()).collect() }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weight_of(&self, label: &str) -> Weight {
        self.points.iter().find(|p| p.label == label).map(|p| p.weight.clone()).unwrap_or_else(Zero::zero)
    }

    /// μ(e): total weight of points on which `e` is true.
    pub fn prob(&self, e: Event) -> Weight {
        self.points.iter().filter(|p| p.set & !e == 0).map(|p| &p.weight).sum()
    }

    /// Weight of the points selected by `mask` (bit i = point i).
    fn mass(&self, mask: u64) -> Weight {
        bits::ones(mask).map(|i| &self.points[i].weight).sum()
    }

    pub fn total(&self) -> Weight {
        self.points.iter().map(|p| &p.weight).sum()
    }

    pub fn condition(&self, e: Event) -> Result<Distribution, ProbabilityError> {
        let z = self.prob(e);
        if z.is_zero() {
            return Err(ProbabilityError::ZeroProbability);
        }
        Ok(Distribution {
            points: self
                .points
                .iter()
                .filter(|p| p.set & !e == 0)
                .map(|p| Point { label: p.label.clone(), set: p.set, weight: &p.weight / &z })
                .collect(),
        })
    }
}

fn support_labels(theory: &Theory) -> Vec<(String, Event)> {
    match theory {
        Theory::Ontic(t) => bits::ones(t.theta()).map(|h| (t.frame().space().name(h).to_string(), 1u64 << h)).collect(),
        Theory::ThreeValued(t) => t.basics().iter().map(|v| (v.name.clone(), v.valuation.derivation())).collect(),
    }
}

fn support_point(theory: &Theory, label: &str) -> Option<Event> {
    match theory {
        Theory::Ontic(t) => {
            let h = t.frame().space().history(label)?;
            (t.theta() >> h & 1 == 1).then_some(1u64 << h)
        }
        Theory::ThreeValued(t) => t.basic(label).map(|v| v.valuation.derivation()),
    }
}

// ---------------------------------------------------------------------------
// Screening off

/// Factorization μ(A∩B∩P)μ(P) = μ(A∩P)μ(B∩P) over atoms of Σ|_A, Σ|_B for
/// every full specification P of `past`. Returns a violating (P, A, B).
pub fn screening_off_at(
    t: &OnticTheory,
    d: &Distribution,
    ra: &Region,
    rb: &Region,
    past: &Region,
    tol: f64,
) -> Option<(Event, Event, Event)> {
    let frame = t.frame();
    let sa = frame.subalgebra_of(ra);
    let sb = frame.subalgebra_of(rb);
    let sp = frame.subalgebra_of(past);
    let tol = tol_rational(tol);
    for &p in sp.atoms() {
        let mp = d.prob(p);
        if mp.is_zero() {
            continue;
        }
        for &a in sa.atoms() {
            let map = d.prob(a & p);
            for &b in sb.atoms() {
                let lhs = d.prob(a & b & p) * &mp;
                let rhs = &map * d.prob(b & p);
                // compare conditional probabilities
                if ((lhs - rhs) / (&mp * &mp)).abs() > tol {
                    return Some((p, a, b));
                }
            }
        }
    }
    None
}

fn so_name(kind: PastKind) -> &'static str {
    match kind {
        PastKind::Joint => "so2",
        PastKind::Mutual => "so1",
    }
}

pub fn check_screening_off(
    t: &OnticTheory,
    d: &Distribution,
    ra: &Region,
    rb: &Region,
    kind: PastKind,
    tol: f64,
) -> Result<ConditionReport, ConditionError> {
    let frame = t.frame();
    let site = frame.site();
    if !site.is_spacelike(ra, rb)? {
        return Err(ConditionError::NotSpacelike(
            frame.region_names(ra).join(", "),
            frame.region_names(rb).join(", "),
        ));
    }
    let past = match kind {
        PastKind::Joint => site.joint_past(ra, rb)?,
        PastKind::Mutual => site.mutual_past(ra, rb)?,
    };
    Ok(match screening_off_at(t, d, ra, rb, &past, tol) {
        None => ConditionReport::pass(so_name(kind)),
        Some((p, a, b)) => ConditionReport::fail(so_name(kind), so_witness(t, d, ra, rb, p, a, b)),
    })
}

fn so_witness(t: &OnticTheory, d: &Distribution, ra: &Region, rb: &Region, p: Event, a: Event, b: Event) -> Witness {
    let frame = t.frame();
    let mp = d.prob(p);
    let joint = d.prob(a & b & p) / &mp;
    let product = (d.prob(a & p) / &mp) * (d.prob(b & p) / &mp);
    Witness {
        message: format!(
            "given the full specification P, μ(A∩B|P) = {} but μ(A|P)μ(B|P) = {}",
            format_weight(&joint),
            format_weight(&product)
        ),
        region: Some(frame.region_names(&ra.union(rb))),
        events: vec![frame.witness_event("P", p), frame.witness_event("A", a), frame.witness_event("B", b)],
        valuations: Vec::new(),
    }
}

pub fn check_so2(t: &OnticTheory, d: &Distribution, ra: &Region, rb: &Region, tol: f64) -> Result<ConditionReport, ConditionError> {
    check_screening_off(t, d, ra, rb, PastKind::Joint, tol)
}

pub fn check_so1(t: &OnticTheory, d: &Distribution, ra: &Region, rb: &Region, tol: f64) -> Result<ConditionReport, ConditionError> {
    check_screening_off(t, d, ra, rb, PastKind::Mutual, tol)
}

/// Screening off for every unordered spacelike pair of regions.
pub fn check_screening_off_all(t: &OnticTheory, d: &Distribution, kind: PastKind, tol: f64) -> Result<ConditionReport, ConditionError> {
    let frame = t.frame();
    let mut detail = Vec::new();
    let mut witness = None;
    for (ra, rb) in unordered_spacelike_pairs(frame) {
        let r = check_screening_off(t, d, &ra, &rb, kind, tol)?;
        detail.push(SubResult {
            scope: format!("{{{}}} | {{{}}}", frame.region_names(&ra).join(", "), frame.region_names(&rb).join(", ")),
            holds: r.holds,
        });
        if witness.is_none() {
            witness = r.witness;
        }
    }
    Ok(match witness {
        None => ConditionReport::pass(so_name(kind)),
        Some(w) => ConditionReport::fail(so_name(kind), w),
    }
    .with_detail(detail))
}

// ---------------------------------------------------------------------------
// Probabilistic freedom of settings

/// Which past events the probabilistic freedom-of-settings check ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PastEventScope {
    /// The events associated with regions inside the past, one at a time.
    #[default]
    Associated,
    /// Every event of the past subalgebra, including compounds whose
    /// definiteness can itself depend on the settings.
    All,
}

/// For each union H of setting regions, each full specification S of the
/// H-settings and each associated event C of the region J⁻(H)\H:
/// μ(C=1 | C definite, S) = μ(C=1 | C definite) whenever μ(C definite, S) > 0.
pub fn check_probabilistic_free_settings(theory: &Theory, d: &Distribution, tol: f64) -> Result<ConditionReport, ConditionError> {
    check_probabilistic_free_settings_with(theory, d, tol, PastEventScope::Associated)
}

pub fn check_probabilistic_free_settings_with(
    theory: &Theory,
    d: &Distribution,
    tol: f64,
    scope: PastEventScope,
) -> Result<ConditionReport, ConditionError> {
    let frame = theory.frame();
    let site = frame.site();
    let tol = tol_rational(tol);
    let sets: Vec<Event> = d.points().iter().map(|p| p.set).collect();
    if sets.len() > 64 {
        return Err(ConditionError::TooLarge("distribution has more than 64 support points".into()));
    }
    let mut homes: Vec<Region> = Vec::new();
    for s in frame.settings() {
        if !homes.contains(&s.home) {
            homes.push(s.home);
        }
    }
    let mut seen = Vec::new();
    for sel in bits::subsets(bits::low_mask(homes.len().min(16))).filter(|&s| s != 0) {
        let h = bits::ones(sel).fold(site.empty_region(), |acc, i| acc.union(&homes[i]));
        if seen.contains(&h) {
            continue;
        }
        seen.push(h);
        let gens: Vec<Event> = frame.settings().iter().filter(|s| s.home.is_subset(&h)).map(|s| frame.setting_event(s)).collect();
        let settings = Subalgebra::generate(frame.omega(), &gens);
        let past_region = site.exclusive_past(&h);
        // (points where C is 1, points where C is definite, C)
        let candidates: Vec<(u64, u64, Event)> = match scope {
            PastEventScope::Associated => frame
                .delta()
                .generators_within(&past_region)
                .into_iter()
                .map(|c| {
                    let t = point_mask(&sets, |x| evaluate(x, c) == Truth::True);
                    let f = point_mask(&sets, |x| evaluate(x, c) == Truth::False);
                    (t, t | f, c)
                })
                .collect(),
            PastEventScope::All => {
                let past_atoms: Vec<Event> = frame.subalgebra_of(&past_region).atoms().to_vec();
                reachable_states(&past_atoms, &sets)?
                    .into_iter()
                    .map(|(state, c)| {
                        let inn = state as u64;
                        let out = (state >> 64) as u64;
                        let t = inn & !out;
                        (t, t | (out & !inn), c)
                    })
                    .collect()
            }
        };
        for &s in settings.atoms() {
            let s_mask = point_mask(&sets, |x| evaluate(x, s) == Truth::True);
            if s_mask == 0 {
                continue;
            }
            for &(c_true, c_def, c) in &candidates {
                let def_s = d.mass(c_def & s_mask);
                if def_s.is_zero() {
                    continue;
                }
                let given_s = d.mass(c_true & s_mask) / &def_s;
                let overall = d.mass(c_true) / d.mass(c_def);
                if (&given_s - &overall).abs() > tol {
                    return Ok(ConditionReport::fail(
                        "probabilistic-fos",
                        Witness {
                            message: format!(
                                "μ(C=1 | C definite, S) = {} but μ(C=1 | C definite) = {}",
                                format_weight(&given_s),
                                format_weight(&overall)
                            ),
                            region: Some(frame.region_names(&h)),
                            events: vec![frame.witness_event("C", c), frame.witness_event("S", s)],
                            valuations: Vec::new(),
                        },
                    ));
                }
            }
        }
    }
    Ok(ConditionReport::pass("probabilistic-fos"))
}

fn point_mask(sets: &[Event], pred: impl Fn(Event) -> bool) -> u64 {
    sets.iter().enumerate().filter(|(_, &x)| pred(x)).fold(0, |acc, (i, _)| acc | 1 << i)
}

// ---------------------------------------------------------------------------
// CHSH

/// Setting and outcome events of a two-wing experiment. Truth value 1 of an
/// outcome is encoded as +1, value 0 as −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChshScenario {
    pub a_setting: Event,
    pub b_setting: Event,
    pub a_outcome: Event,
    pub b_outcome: Event,
    pub omega: Event,
}

impl ChshScenario {
    fn cell(&self, sa: bool, sb: bool) -> Event {
        let a = if sa { self.a_setting } else { !self.a_setting & self.omega };
        let b = if sb { self.b_setting } else { !self.b_setting & self.omega };
        a & b
    }
}

fn sign(t: Truth) -> Result<i32, ProbabilityError> {
    match t {
        Truth::True => Ok(1),
        Truth::False => Ok(-1),
        Truth::Half => Err(ProbabilityError::IndefiniteOutcome),
    }
}

/// E(sa, sb): expectation of the product of ±1 outcomes in a setting cell.
pub fn correlator(d: &Distribution, scen: &ChshScenario, sa: bool, sb: bool) -> Result<Weight, ProbabilityError> {
    let cell = scen.cell(sa, sb);
    let mass = d.prob(cell);
    if mass.is_zero() {
        return Err(ProbabilityError::ZeroCell(sa, sb));
    }
    let mut sum = Weight::zero();
    for p in d.points().iter().filter(|p| p.set & !cell == 0) {
        let s = sign(evaluate(p.set, scen.a_outcome))? * sign(evaluate(p.set, scen.b_outcome))?;
        sum += &p.weight * BigRational::from_integer(BigInt::from(s));
    }
    Ok(sum / mass)
}

/// |E(0,0) + E(0,1) + E(1,0) − E(1,1)|.
pub fn chsh_value(d: &Distribution, scen: &ChshScenario) -> Result<Weight, ProbabilityError> {
    let e = |a, b| correlator(d, scen, a, b);
    Ok((e(false, false)? + e(false, true)? + e(true, false)? - e(true, true)?).abs())
}

/// CHSH of every deterministic local strategy pair: each wing's outcome
/// (±1) is a function of its own setting.
pub fn deterministic_strategy_values() -> Vec<i32> {
    let strategies: [[i32; 2]; 4] = [[1, 1], [1, -1], [-1, 1], [-1, -1]];
    let mut out = Vec::with_capacity(16);
    for a in &strategies {
        for b in &strategies {
            let e = |x: usize, y: usize| a[x] * b[y];
            out.push((e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1)).abs());
        }
    }
    out
}

/// Maximum CHSH over deterministic local strategies.
pub fn local_deterministic_bound() -> Weight {
    let max = deterministic_strategy_values().into_iter().max().expect("16 strategies");
    BigRational::from_integer(BigInt::from(max))
}

/// Outcome marginals of each wing do not depend on the other wing's
/// setting. Returns the offending wing and settings on failure.
pub fn check_no_signalling_marginals(d: &Distribution, scen: &ChshScenario, tol: f64) -> Result<ConditionReport, ProbabilityError> {
    let tol = tol_rational(tol);
    let marginal = |outcome: Event, sa: bool, sb: bool| -> Result<Weight, ProbabilityError> {
        let cell = scen.cell(sa, sb);
        let mass = d.prob(cell);
        if mass.is_zero() {
            return Err(ProbabilityError::ZeroCell(sa, sb));
        }
        Ok(d.prob(cell & outcome) / mass)
    };
    for own in [false, true] {
        let a0 = marginal(scen.a_outcome, own, false)?;
        let a1 = marginal(scen.a_outcome, own, true)?;
        if (&a0 - &a1).abs() > tol {
            return Ok(ConditionReport::fail(
                "no-signalling",
                Witness {
                    message: format!(
                        "μ(A_r | A_s={}, B_s=0) = {} differs from μ(A_r | A_s={}, B_s=1) = {}",
                        own as u8,
                        format_weight(&a0),
                        own as u8,
                        format_weight(&a1)
                    ),
                    ..Witness::default()
                },
            ));
        }
        let b0 = marginal(scen.b_outcome, false, own)?;
        let b1 = marginal(scen.b_outcome, true, own)?;
        if (&b0 - &b1).abs() > tol {
            return Ok(ConditionReport::fail(
                "no-signalling",
                Witness {
                    message: format!(
                        "μ(B_r | A_s=0, B_s={}) = {} differs from μ(B_r | A_s=1, B_s={}) = {}",
                        own as u8,
                        format_weight(&b0),
                        own as u8,
                        format_weight(&b1)
                    ),
                    ..Witness::default()
                },
            ));
        }
    }
    Ok(ConditionReport::pass("no-signalling"))
}
