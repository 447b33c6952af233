//! Built-in models: the EPRB site and its 16-valuation three-valued model,
//! the PR-box distribution, the box/ball example and the conspiriton.

use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bits;
use crate::conditions::{check_el_three_valued, check_freedom_of_settings, ConditionError};
use crate::histories::{Event, HistorySpace};
use crate::probability::{
    chsh_value, check_no_signalling_marginals, check_probabilistic_free_settings, correlator, format_weight,
    local_deterministic_bound, to_f64, ChshScenario, Distribution, Point, ProbabilityError, Weight,
};
use crate::report::ConditionReport;
use crate::site::{CausalSite, Region};
use crate::theory::{check_ontic_definiteness, Frame, OnticTheory, ThreeValuedTheory, Theory};
use crate::valuation::{evaluate, Truth};

/// Column order of the truth table.
pub const EVENT_NAMES: [&str; 8] = ["A_s", "B_s", "A_r", "B_r", "P_A0", "P_A1", "P_B0", "P_B1"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EprbError {
    #[error("row {row}: {reason}")]
    InvalidDerivation { row: usize, reason: String },
    #[error("conjunction values of the indefinite past events differ between rows {0:?}")]
    NonUniformClosure(Vec<usize>),
    #[error("setting weights must be strictly positive")]
    ZeroSettingWeight,
    #[error("setting weights sum to {0}, not 1")]
    Normalization(String),
}

/// The EPRB causal site: p ≺ a_s ≺ a_r and p ≺ b_s ≺ b_r.
#[derive(Debug, Clone)]
pub struct EprbSite {
    pub site: Arc<CausalSite>,
    pub wing_a: Region,
    pub wing_b: Region,
    pub past: Region,
    pub a_s: Region,
    pub a_r: Region,
    pub b_s: Region,
    pub b_r: Region,
}

pub fn build_eprb_site() -> EprbSite {
    let site = CausalSite::new(
        ["p", "a_s", "a_r", "b_s", "b_r"],
        [("p", "a_s"), ("a_s", "a_r"), ("p", "b_s"), ("b_s", "b_r")],
    )
    .expect("fixed acyclic order");
    let r = |names: &[&str]| site.region(names.iter().copied()).expect("known points");
    EprbSite {
        wing_a: r(&["a_s", "a_r"]),
        wing_b: r(&["b_s", "b_r"]),
        past: r(&["p"]),
        a_s: r(&["a_s"]),
        a_r: r(&["a_r"]),
        b_s: r(&["b_s"]),
        b_r: r(&["b_r"]),
        site: Arc::new(site),
    }
}

/// Definite values (A_s, B_s, A_r, B_r) of 0-based row `r`.
pub fn row_bits(r: usize) -> [bool; 4] {
    [r >> 3 & 1 == 1, r >> 2 & 1 == 1, r >> 1 & 1 == 1, r & 1 == 1]
}

/// The 16 × 8 table of values, rows in the order (A_s, B_s, A_r, B_r)
/// counting up in binary.
pub fn eprb_truth_table() -> [[Truth; 8]; 16] {
    let mut table = [[Truth::False; 8]; 16];
    for (r, row) in table.iter_mut().enumerate() {
        let [a_s, b_s, a_r, b_r] = row_bits(r);
        let t = Truth::from_bool;
        let (pa0, pa1) = if a_s { (Truth::Half, t(a_r)) } else { (t(a_r), Truth::Half) };
        let (pb0, pb1) = if b_s { (Truth::Half, t(b_r)) } else { (t(b_r), Truth::Half) };
        *row = [t(a_s), t(b_s), t(a_r), t(b_r), pa0, pa1, pb0, pb1];
    }
    table
}

/// Histories of row `r` (0-based) are `4r + c`, where completion `c` sets
/// the indefinite A-side past event to `c >> 1` and the B-side to `c & 1`.
pub fn history_index(r: usize, c: usize) -> usize {
    4 * r + c
}

fn history_values(r: usize, c: usize) -> [bool; 8] {
    let [a_s, b_s, a_r, b_r] = row_bits(r);
    let (pa, pb) = (c >> 1 == 1, c & 1 == 1);
    let (pa0, pa1) = if a_s { (pa, a_r) } else { (a_r, pa) };
    let (pb0, pb1) = if b_s { (pb, b_r) } else { (b_r, pb) };
    [a_s, b_s, a_r, b_r, pa0, pa1, pb0, pb1]
}

/// Which completions of each row derive its basic valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivationChoice {
    /// All four completions.
    Full,
    /// Completions 0 and 3: both indefinite events false, or both true.
    Pair14,
    /// Completions 1 and 2: exactly one indefinite event true.
    Pair23,
    /// Per-row masks over completions.
    Explicit([u8; 16]),
}

impl DerivationChoice {
    fn mask(&self, r: usize) -> u8 {
        match self {
            DerivationChoice::Full => 0b1111,
            DerivationChoice::Pair14 => 0b1001,
            DerivationChoice::Pair23 => 0b0110,
            DerivationChoice::Explicit(m) => m[r],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DerivationChoice::Full => "full",
            DerivationChoice::Pair14 => "pair14",
            DerivationChoice::Pair23 => "pair23",
            DerivationChoice::Explicit(_) => "explicit",
        }
    }
}

/// Values (w, x, y, z) of I_A ∩ I_B, I_A ∩ I_Bᶜ, I_Aᶜ ∩ I_B, I_Aᶜ ∩ I_Bᶜ for
/// the indefinite past events I_A, I_B of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Closure {
    pub w: Truth,
    pub x: Truth,
    pub y: Truth,
    pub z: Truth,
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(w, x, y, z) = ({}, {}, {}, {})", self.w, self.x, self.y, self.z)
    }
}

/// Named events of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EprbEvents {
    pub a_s: Event,
    pub b_s: Event,
    pub a_r: Event,
    pub b_r: Event,
    pub p_a0: Event,
    pub p_a1: Event,
    pub p_b0: Event,
    pub p_b1: Event,
}

impl EprbEvents {
    pub fn as_array(&self) -> [Event; 8] {
        [self.a_s, self.b_s, self.a_r, self.b_r, self.p_a0, self.p_a1, self.p_b0, self.p_b1]
    }
}

#[derive(Debug, Clone)]
pub struct EprbModel {
    pub theory: ThreeValuedTheory,
    pub site: EprbSite,
    pub events: EprbEvents,
    pub closure: Closure,
    pub derivation: DerivationChoice,
}

impl EprbModel {
    pub fn omega(&self) -> Event {
        self.theory.frame().omega()
    }

    pub fn complement(&self, e: Event) -> Event {
        !e & self.omega()
    }

    pub fn scenario(&self) -> ChshScenario {
        ChshScenario {
            a_setting: self.events.a_s,
            b_setting: self.events.b_s,
            a_outcome: self.events.a_r,
            b_outcome: self.events.b_r,
            omega: self.omega(),
        }
    }

    /// Basic valuation of 1-based row `i`.
    pub fn row(&self, i: usize) -> Event {
        self.theory.basics()[i - 1].valuation.derivation()
    }

    /// Full specifications F_1..F_16 of the past events, ordered by the
    /// complement pattern (P_A0ᶜ, P_A1ᶜ, P_B0ᶜ, P_B1ᶜ) read as a binary number.
    pub fn past_full_specifications(&self) -> Vec<Event> {
        let e = &self.events;
        let ps = [e.p_a0, e.p_a1, e.p_b0, e.p_b1];
        (0..16)
            .map(|j| {
                ps.iter().enumerate().fold(self.omega(), |acc, (k, &p)| {
                    if j >> (3 - k) & 1 == 1 {
                        acc & self.complement(p)
                    } else {
                        acc & p
                    }
                })
            })
            .collect()
    }

    /// (A_s ∩ P_A1) ∪ (A_sᶜ ∩ P_A0), and the B analogue.
    pub fn antecedents(&self) -> (Event, Event) {
        let e = &self.events;
        (
            (e.a_s & e.p_a1) | (self.complement(e.a_s) & e.p_a0),
            (e.b_s & e.p_b1) | (self.complement(e.b_s) & e.p_b0),
        )
    }
}

fn closure_of(x: Event, events: &EprbEvents, r: usize, omega: Event) -> Closure {
    let [a_s, b_s, ..] = row_bits(r);
    let ia = if a_s { events.p_a0 } else { events.p_a1 };
    let ib = if b_s { events.p_b0 } else { events.p_b1 };
    let (na, nb) = (!ia & omega, !ib & omega);
    Closure { w: evaluate(x, ia & ib), x: evaluate(x, ia & nb), y: evaluate(x, na & ib), z: evaluate(x, na & nb) }
}

pub fn build_eprb_model(choice: DerivationChoice) -> Result<EprbModel, EprbError> {
    let site = build_eprb_site();
    let names: Vec<String> = (0..64).map(|h| format!("h{:02}_{}", h / 4 + 1, h % 4)).collect();
    let space = Arc::new(HistorySpace::new(names).expect("64 distinct names"));
    let mut ev = [0u64; 8];
    for r in 0..16 {
        for c in 0..4 {
            for (k, v) in history_values(r, c).into_iter().enumerate() {
                if v {
                    ev[k] |= 1 << history_index(r, c);
                }
            }
        }
    }
    let events = EprbEvents {
        a_s: ev[0],
        b_s: ev[1],
        a_r: ev[2],
        b_r: ev[3],
        p_a0: ev[4],
        p_a1: ev[5],
        p_b0: ev[6],
        p_b1: ev[7],
    };
    let mut frame = Frame::new(site.site.clone(), space);
    let regions = [site.a_s, site.b_s, site.a_r, site.b_r, site.past, site.past, site.past, site.past];
    for k in 0..8 {
        frame.add_event(EVENT_NAMES[k], ev[k], regions[k]).expect("fresh names");
    }
    for (name, region) in [
        ("A", site.wing_a),
        ("B", site.wing_b),
        ("P", site.past),
        ("p", site.past),
        ("a_s", site.a_s),
        ("a_r", site.a_r),
        ("b_s", site.b_s),
        ("b_r", site.b_r),
    ] {
        frame.add_region(name, region).expect("fresh names");
    }
    frame.add_setting("A_s", site.a_s).expect("A_s lives at a_s");
    frame.add_setting("B_s", site.b_s).expect("B_s lives at b_s");

    let table = eprb_truth_table();
    let omega = frame.omega();
    let mut basics = Vec::with_capacity(16);
    let mut closures = Vec::with_capacity(16);
    for (r, row) in table.iter().enumerate() {
        let m = choice.mask(r);
        if m == 0 || m > 0b1111 {
            return Err(EprbError::InvalidDerivation { row: r + 1, reason: "derivation set must be a non-empty subset of the four completions".into() });
        }
        let x = bits::ones(m as u64).fold(0u64, |acc, c| acc | 1 << history_index(r, c));
        for (k, &e) in ev.iter().enumerate() {
            if evaluate(x, e) != row[k] {
                return Err(EprbError::InvalidDerivation {
                    row: r + 1,
                    reason: format!("derived value of {} is {}, the table requires {}", EVENT_NAMES[k], evaluate(x, e), row[k]),
                });
            }
        }
        basics.push((format!("v{:02}", r + 1), x));
        closures.push(closure_of(x, &events, r, omega));
    }
    let odd: Vec<usize> = (0..16).filter(|&r| closures[r] != closures[0]).map(|r| r + 1).collect();
    if !odd.is_empty() {
        let mut rows = vec![1];
        rows.extend(odd);
        return Err(EprbError::NonUniformClosure(rows));
    }
    let theory = ThreeValuedTheory::new(frame, basics).expect("row derivation sets are disjoint");
    Ok(EprbModel { theory, site, events, closure: closures[0], derivation: choice })
}

/// Setting weights indexed by 2·A_s + B_s.
fn checked_setting_weights(w: &[Weight; 4]) -> Result<(), EprbError> {
    if w.iter().any(|x| *x <= Weight::zero()) {
        return Err(EprbError::ZeroSettingWeight);
    }
    let total: Weight = w.iter().sum();
    if total != Weight::one() {
        return Err(EprbError::Normalization(format_weight(&total)));
    }
    Ok(())
}

pub fn uniform_settings() -> [Weight; 4] {
    std::array::from_fn(|_| BigRational::new(BigInt::one(), BigInt::from(4)))
}

/// PR box: in each setting cell the outcome pair is uniform over the two
/// pairs with A_r XOR B_r = A_s AND B_s.
pub fn pr_box_distribution(model: &EprbModel, setting_weights: &[Weight; 4]) -> Result<Distribution, EprbError> {
    checked_setting_weights(setting_weights)?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    Ok(row_distribution(model, |r| {
        let [a_s, b_s, a_r, b_r] = row_bits(r);
        if (a_r ^ b_r) == (a_s && b_s) {
            &setting_weights[2 * a_s as usize + b_s as usize] * &half
        } else {
            Weight::zero()
        }
    }))
}

/// Outcomes independent and uniform in every setting cell.
pub fn independent_outcome_distribution(model: &EprbModel, setting_weights: &[Weight; 4]) -> Result<Distribution, EprbError> {
    checked_setting_weights(setting_weights)?;
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    Ok(row_distribution(model, |r| {
        let [a_s, b_s, ..] = row_bits(r);
        &setting_weights[2 * a_s as usize + b_s as usize] * &quarter
    }))
}

fn row_distribution(model: &EprbModel, weight: impl Fn(usize) -> Weight) -> Distribution {
    Distribution::from_points(
        model
            .theory
            .basics()
            .iter()
            .enumerate()
            .map(|(r, v)| Point { label: v.name.clone(), set: v.valuation.derivation(), weight: weight(r) })
            .collect(),
    )
}

/// Box/ball example: events A (box open) and B (ball inside). Returns the
/// ontic theory and the indefinite theory in which the closed box leaves B
/// indefinite.
pub fn build_box_ball_models() -> (OnticTheory, ThreeValuedTheory) {
    let site = Arc::new(CausalSite::new(["here"], Vec::<(&str, &str)>::new()).expect("one point"));
    let space = Arc::new(HistorySpace::new(["open_in", "open_out", "closed_in", "closed_out"]).expect("distinct"));
    let here = site.region(["here"]).expect("known point");
    let mut frame = Frame::new(site, space);
    frame.add_event("A", 0b0011, here).expect("fresh");
    frame.add_event("B", 0b0101, here).expect("fresh");
    frame.add_region("here", here).expect("fresh");
    let ontic = OnticTheory::new(frame.clone(), 0b1111).expect("non-empty");
    let indefinite = ThreeValuedTheory::new(
        frame,
        vec![("open_in".into(), 0b0001), ("open_out".into(), 0b0010), ("closed".into(), 0b1100)],
    )
    .expect("basic");
    (ontic, indefinite)
}

/// A past event C perfectly correlated with a setting A and an outcome B.
pub fn build_conspiriton_model() -> OnticTheory {
    let site = Arc::new(CausalSite::new(["c", "a", "b"], [("c", "a"), ("c", "b")]).expect("acyclic"));
    let space = Arc::new(HistorySpace::new(["h0", "h1"]).expect("distinct"));
    let r = |n: &str| site.region([n]).expect("known point");
    let mut frame = Frame::new(site.clone(), space);
    frame.add_event("A", 0b10, r("a")).expect("fresh");
    frame.add_event("B", 0b10, r("b")).expect("fresh");
    frame.add_event("C", 0b10, r("c")).expect("fresh");
    for n in ["a", "b", "c"] {
        frame.add_region(n, r(n)).expect("fresh");
    }
    frame.add_setting("A", r("a")).expect("A lives at a");
    OnticTheory::new(frame, 0b11).expect("non-empty")
}

/// One line of the composite EPRB verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationItem {
    pub item: String,
    pub holds: bool,
    pub expected: bool,
    pub report: ConditionReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct EprbReport {
    pub derivation: String,
    pub closure: Closure,
    pub items: Vec<VerificationItem>,
    pub correlators: [String; 4],
    pub chsh: String,
    pub chsh_value: f64,
    pub local_bound: f64,
    /// Every item agrees with its expected verdict.
    pub as_expected: bool,
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Probability(#[from] ProbabilityError),
}

/// Past full specifications F_j that are non-trivially weakly correlated
/// to some setting full specification S, as (j, S) pairs (1-based j).
pub fn weakly_correlated_past_specs(model: &EprbModel) -> Vec<(usize, Event)> {
    let e = &model.events;
    let (na, nb) = (model.complement(e.a_s), model.complement(e.b_s));
    let specs = [e.a_s & e.b_s, e.a_s & nb, na & e.b_s, na & nb];
    let t = &model.theory;
    let mut out = Vec::new();
    for (j, f) in model.past_full_specifications().into_iter().enumerate() {
        let nontrivial = t.basics().iter().any(|v| v.valuation.value(f) == Truth::True);
        for &s in &specs {
            if nontrivial && t.weakly_correlated(f, s) {
                out.push((j + 1, s));
            }
        }
    }
    out
}

pub fn verify_eprb(model: &EprbModel, dist: &Distribution, tol: f64) -> Result<EprbReport, VerifyError> {
    let theory: Theory = model.theory.clone().into();
    let mut items = Vec::new();
    let mut push = |item: &str, expected: bool, report: ConditionReport| {
        items.push(VerificationItem { item: item.into(), holds: report.holds, expected, report });
    };

    let (ant_a, ant_b) = model.antecedents();
    let t = &model.theory;
    let identity = t.correlated(ant_a, model.events.a_r) && t.correlated(ant_b, model.events.b_r);
    push(
        "causal-antecedent identity",
        true,
        if identity {
            ConditionReport::pass("antecedent-identity")
        } else {
            ConditionReport::fail(
                "antecedent-identity",
                crate::report::Witness { message: "an outcome differs from its antecedent in some row".into(), ..Default::default() },
            )
        },
    );
    push("einstein locality (settings exempt)", true, check_el_three_valued(&theory, true)?);

    let mut fos = check_freedom_of_settings(&theory)?;
    let sweep = weakly_correlated_past_specs(model);
    if fos.holds && !sweep.is_empty() {
        fos = ConditionReport::fail(
            "fos",
            crate::report::Witness {
                message: format!("past full specification F_{} is weakly correlated to a setting", sweep[0].0),
                ..Default::default()
            },
        );
    }
    push("freedom of settings", true, fos);
    push("ontic definiteness", false, check_ontic_definiteness(t));

    let scen = model.scenario();
    push("no-signalling marginals", true, check_no_signalling_marginals(dist, &scen, tol)?);
    push("probabilistic free settings", true, check_probabilistic_free_settings(&theory, dist, tol)?);

    let cells = [(false, false), (false, true), (true, false), (true, true)];
    let mut correlators: [String; 4] = Default::default();
    for (i, &(a, b)) in cells.iter().enumerate() {
        correlators[i] = format_weight(&correlator(dist, &scen, a, b)?);
    }
    let chsh = chsh_value(dist, &scen)?;
    let as_expected = items.iter().all(|i| i.holds == i.expected);
    Ok(EprbReport {
        derivation: model.derivation.name().to_string(),
        closure: model.closure,
        items,
        correlators,
        chsh_value: to_f64(&chsh),
        chsh: format_weight(&chsh),
        local_bound: to_f64(&local_deterministic_bound()),
        as_expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{check_el_second, detect_signal, El3vOptions};
    use crate::probability::{check_probabilistic_free_settings_with, PastEventScope};
    use crate::theory::derive_three_valued;
    use Truth::{False as O, Half as H, True as I};

    /// Reference values, one row per basic valuation.
    const REFERENCE_TABLE: [[Truth; 8]; 16] = [
        [O, O, O, O, O, H, O, H],
        [O, O, O, I, O, H, I, H],
        [O, O, I, O, I, H, O, H],
        [O, O, I, I, I, H, I, H],
        [O, I, O, O, O, H, H, O],
        [O, I, O, I, O, H, H, I],
        [O, I, I, O, I, H, H, O],
        [O, I, I, I, I, H, H, I],
        [I, O, O, O, H, O, O, H],
        [I, O, O, I, H, O, I, H],
        [I, O, I, O, H, I, O, H],
        [I, O, I, I, H, I, I, H],
        [I, I, O, O, H, O, H, O],
        [I, I, O, I, H, O, H, I],
        [I, I, I, O, H, I, H, O],
        [I, I, I, I, H, I, H, I],
    ];

    #[test]
    fn truth_table_matches_reference() {
        assert_eq!(eprb_truth_table(), REFERENCE_TABLE);
        assert_eq!(eprb_truth_table()[0], [O, O, O, O, O, H, O, H]);
        assert_eq!(eprb_truth_table()[10], [I, O, I, O, H, I, O, H]);
        assert_eq!(eprb_truth_table()[15], [I, I, I, I, H, I, H, I]);
    }

    #[test]
    fn model_valuations_reproduce_table() {
        for choice in [DerivationChoice::Full, DerivationChoice::Pair14, DerivationChoice::Pair23] {
            let m = build_eprb_model(choice).unwrap();
            assert_eq!(m.theory.basics().len(), 16);
            for (r, v) in m.theory.basics().iter().enumerate() {
                for (k, e) in m.events.as_array().into_iter().enumerate() {
                    assert_eq!(v.valuation.value(e), REFERENCE_TABLE[r][k]);
                }
            }
        }
    }

    #[test]
    fn site_examples() {
        let s = build_eprb_site();
        assert!(s.site.is_spacelike(&s.wing_a, &s.wing_b).unwrap());
        assert_eq!(s.site.mutual_past(&s.wing_a, &s.wing_b).unwrap(), s.past);
        assert_eq!(s.site.joint_past(&s.wing_a, &s.wing_b).unwrap(), s.past);
        assert_eq!(s.site.exclusive_past(&s.a_r), s.past.union(&s.a_s));
        assert_eq!(s.site.past(&s.wing_b), s.wing_b.union(&s.past));
    }

    #[test]
    fn closure_values() {
        let c = |w, x, y, z| Closure { w, x, y, z };
        assert_eq!(build_eprb_model(DerivationChoice::Full).unwrap().closure, c(H, H, H, H));
        assert_eq!(build_eprb_model(DerivationChoice::Pair14).unwrap().closure, c(H, O, O, H));
        assert_eq!(build_eprb_model(DerivationChoice::Pair23).unwrap().closure, c(O, H, H, O));
    }

    #[test]
    fn pair23_makes_the_disjunction_true() {
        let m = build_eprb_model(DerivationChoice::Pair23).unwrap();
        assert_eq!(evaluate(m.row(1), m.events.p_b1 | m.events.p_a1), I);
        let full = build_eprb_model(DerivationChoice::Full).unwrap();
        assert_eq!(evaluate(full.row(1), full.events.p_b1 | full.events.p_a1), H);
    }

    #[test]
    fn explicit_choices_are_validated() {
        let mut masks = [0b1111u8; 16];
        masks[3] = 0b0011; // the B-side indefinite event alone varies
        assert!(matches!(
            build_eprb_model(DerivationChoice::Explicit(masks)),
            Err(EprbError::InvalidDerivation { row: 4, .. })
        ));
        let mut mixed = [0b1111u8; 16];
        mixed[5] = 0b1001;
        assert!(matches!(build_eprb_model(DerivationChoice::Explicit(mixed)), Err(EprbError::NonUniformClosure(rows)) if rows == vec![1, 6]));
        let three = [0b0111u8; 16];
        let m = build_eprb_model(DerivationChoice::Explicit(three)).unwrap();
        assert_eq!(m.closure, Closure { w: O, x: H, y: H, z: H });
    }

    #[test]
    fn antecedent_identity_and_definiteness_pattern() {
        let m = build_eprb_model(DerivationChoice::Full).unwrap();
        let (ant_a, ant_b) = m.antecedents();
        let e = &m.events;
        for r in 1..=16 {
            let x = m.row(r);
            assert_eq!(evaluate(x, ant_a), evaluate(x, e.a_r));
            assert_eq!(evaluate(x, ant_b), evaluate(x, e.b_r));
            let a_s = evaluate(x, e.a_s) == I;
            assert_eq!(evaluate(x, e.p_a1) == H, !a_s);
            assert_eq!(evaluate(x, e.p_a0) == H, a_s);
            let b_s = evaluate(x, e.b_s) == I;
            assert_eq!(evaluate(x, e.p_b1) == H, !b_s);
            assert_eq!(evaluate(x, e.p_b0) == H, b_s);
        }
        assert!(m.theory.correlated(ant_a, e.a_r));
        assert!(m.theory.is_complementary(e.p_a0, e.p_a1));
        assert!(m.theory.is_complementary(e.p_b0, e.p_b1));
        assert!(!m.theory.is_complementary(e.a_s, e.b_s));
        assert_eq!(m.theory.is_definite_event(e.p_a1), 0xff00);
    }

    #[test]
    fn past_full_specifications_are_the_past_atoms() {
        let m = build_eprb_model(DerivationChoice::Full).unwrap();
        let fj = m.past_full_specifications();
        let past = m.theory.frame().subalgebra_of(&m.site.past);
        let mut atoms = past.full_specifications();
        let mut sorted = fj.clone();
        atoms.sort();
        sorted.sort();
        assert_eq!(atoms, sorted);
        let e = &m.events;
        assert_eq!(fj[0], e.p_a0 & e.p_a1 & e.p_b0 & e.p_b1);
        assert_eq!(fj[1], e.p_a0 & e.p_a1 & e.p_b0 & m.complement(e.p_b1));
        // the all-true specification takes w on rows 4, 8, 12, 16 and 0 elsewhere
        for r in 1..=16 {
            let expect = if r % 4 == 0 { m.closure.w } else { O };
            assert_eq!(evaluate(m.row(r), fj[0]), expect);
        }
    }

    /// The four-row block identity does not hold; the argument only needs
    /// every past specification that is non-zero somewhere to be non-zero
    /// in a row outside the A_s ∩ B_s block.
    #[test]
    fn past_specifications_nonzero_outside_each_setting_block() {
        for choice in [DerivationChoice::Full, DerivationChoice::Pair14, DerivationChoice::Pair23] {
            let m = build_eprb_model(choice).unwrap();
            for f in m.past_full_specifications() {
                let nonzero: Vec<usize> = (1..=16).filter(|&r| evaluate(m.row(r), f) != O).collect();
                for block in 0..4 {
                    let outside = nonzero.iter().any(|&r| (r - 1) / 4 != block);
                    assert!(nonzero.is_empty() || outside);
                }
            }
            assert!(weakly_correlated_past_specs(&m).is_empty());
        }
    }

    #[test]
    fn block_identity_counterexample() {
        let m = build_eprb_model(DerivationChoice::Full).unwrap();
        let e = &m.events;
        let f = m.complement(e.p_a0) & m.complement(e.p_a1) & m.complement(e.p_b0) & e.p_b1;
        assert_eq!(evaluate(m.row(2), f), O);
        assert_eq!(evaluate(m.row(6), f), m.closure.z);
        assert_eq!(evaluate(m.row(1), f), m.closure.y);
        assert_eq!(evaluate(m.row(5), f), O);
    }

    #[test]
    fn pr_box_weights() {
        let m = build_eprb_model(DerivationChoice::Full).unwrap();
        let d = pr_box_distribution(&m, &uniform_settings()).unwrap();
        let eighth = BigRational::new(BigInt::one(), BigInt::from(8));
        assert_eq!(d.weight_of("v01"), eighth);
        assert_eq!(d.weight_of("v16"), Weight::zero());
        assert_eq!(d.total(), Weight::one());
        let mut zero = uniform_settings();
        zero[0] = Weight::zero();
        assert_eq!(pr_box_distribution(&m, &zero).unwrap_err(), EprbError::ZeroSettingWeight);
    }

    #[test]
    fn verification_suite_full_derivation() {
        let m = build_eprb_model(DerivationChoice::Full).unwrap();
        let d = pr_box_distribution(&m, &uniform_settings()).unwrap();
        let r = verify_eprb(&m, &d, 1e-9).unwrap();
        assert!(r.as_expected, "{:#?}", r.items);
        assert_eq!(r.chsh, "4");
        assert_eq!(r.correlators, ["1", "1", "1", "-1"].map(String::from));
        let u = independent_outcome_distribution(&m, &uniform_settings()).unwrap();
        let r = verify_eprb(&m, &u, 1e-9).unwrap();
        assert!(r.as_expected);
        assert_eq!(r.chsh, "0");
    }

    /// With two-history derivation sets a disjunction of two past full
    /// specifications can be 1 on a row where each disjunct is 1/2, which
    /// breaks freedom of settings. Every other item keeps its verdict.
    #[test]
    fn pair_derivations_violate_freedom_of_settings() {
        for choice in [DerivationChoice::Pair14, DerivationChoice::Pair23] {
            let m = build_eprb_model(choice).unwrap();
            let d = pr_box_distribution(&m, &uniform_settings()).unwrap();
            let r = verify_eprb(&m, &d, 1e-9).unwrap();
            assert_eq!(r.chsh, "4");
            for item in &r.items {
                if item.item == "freedom of settings" {
                    assert!(!item.holds);
                } else {
                    assert_eq!(item.holds, item.expected, "{}", item.item);
                }
            }
            assert!(weakly_correlated_past_specs(&m).is_empty());
            // brute force: some union of two past atoms is 1 on a row and 0 on
            // every row where some union of setting blocks is 0
            let fj = m.past_full_specifications();
            let mut found = false;
            for a in 0..16 {
                for b in a + 1..16 {
                    let c = fj[a] | fj[b];
                    for blocks in 1..15u32 {
                        let zero_rows: Vec<usize> = (1..=16).filter(|r| blocks >> ((r - 1) / 4) & 1 == 0).collect();
                        let one_somewhere = (1..=16).any(|r| evaluate(m.row(r), c) == I);
                        if one_somewhere && zero_rows.iter().all(|&r| evaluate(m.row(r), c) == O) {
                            found = true;
                        }
                    }
                }
            }
            assert!(found);
        }
    }

    #[test]
    fn settings_are_not_their_own_antecedents_without_exemption() {
        let m = build_eprb_model(DerivationChoice::Full).unwrap();
        let t: Theory = m.theory.clone().into();
        let r = check_el_three_valued(&t, false).unwrap();
        assert!(!r.holds);
        assert!(check_el_three_valued(&t, true).unwrap().holds);
        assert!(!crate::conditions::check_el_three_valued_with(&t, El3vOptions::strict()).unwrap().holds);
    }

    #[test]
    fn box_ball_examples() {
        let (ontic, indefinite) = build_box_ball_models();
        assert_eq!(derive_three_valued(&ontic).basics().len(), 4);
        assert!(check_ontic_definiteness(&derive_three_valued(&ontic)).holds);
        assert!(!check_ontic_definiteness(&indefinite).holds);
        let f = indefinite.frame();
        let (a, b) = (f.event("A").unwrap(), f.event("B").unwrap());
        assert!(!indefinite.correlated(a, b));
        assert_eq!(indefinite.is_definite_event(b), indefinite.meta_event(a, I));
    }

    #[test]
    fn conspiriton_examples() {
        let c = build_conspiriton_model();
        let t: Theory = c.clone().into();
        let fos = check_freedom_of_settings(&t).unwrap();
        assert!(!fos.holds);
        assert_eq!(fos.witness.as_ref().unwrap().events[0].label, "C");
        assert!(fos.witness.unwrap().message.starts_with("past event"));
        let site = c.frame().site();
        let (a, b) = (site.region(["a"]).unwrap(), site.region(["b"]).unwrap());
        let ev = |n| c.frame().event(n).unwrap();
        assert!(matches!(detect_signal(&t, ev("A"), &a, ev("B"), &b), Err(ConditionError::NotFree(_))));
        // the literal principle has no antecedent for C at the earliest point
        assert!(!check_el_second(&c).unwrap().holds);
    }

    #[test]
    fn no_signal_from_pr_box_settings() {
        let m = build_eprb_model(DerivationChoice::Full).unwrap();
        let t: Theory = m.theory.clone().into();
        let s = &m.site;
        let sig = detect_signal(&t, m.events.a_s, &s.a_s, m.events.b_r, &s.b_r).unwrap();
        assert_eq!(sig.kind, crate::conditions::SignalKind::None);
    }

    #[test]
    fn probabilistic_free_settings_examples() {
        let m = build_eprb_model(DerivationChoice::Full).unwrap();
        let t: Theory = m.theory.clone().into();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let on_rows = |a: usize, b: usize| {
            Distribution::from_points(
                [a, b]
                    .iter()
                    .map(|&r| Point { label: format!("v{r:02}"), set: m.row(r), weight: half.clone() })
                    .collect(),
            )
        };
        let uniform = Distribution::uniform(&t);
        assert!(check_probabilistic_free_settings(&t, &uniform, 1e-9).unwrap().holds);
        let pr = pr_box_distribution(&m, &uniform_settings()).unwrap();
        assert!(check_probabilistic_free_settings(&t, &pr, 1e-9).unwrap().holds);
        // rows 1 and 16 share no definite past value with unequal truth values
        assert!(check_probabilistic_free_settings(&t, &on_rows(1, 16), 1e-9).unwrap().holds);
        // rows 1 and 7: P_A0 is 0 under B_s = 0 and 1 under B_s = 1
        let r = check_probabilistic_free_settings(&t, &on_rows(1, 7), 1e-9).unwrap();
        assert!(!r.holds);
        // over every past event, compounds such as P_A0 ∪ P_B0 are definite
        // on a settings-dependent set of rows and the PR box fails
        let all = check_probabilistic_free_settings_with(&t, &pr, 1e-9, PastEventScope::All).unwrap();
        assert!(!all.holds);
    }

    #[test]
    fn pr_box_marginals() {
        let m = build_eprb_model(DerivationChoice::Full).unwrap();
        let d = pr_box_distribution(&m, &uniform_settings()).unwrap();
        assert!(check_no_signalling_marginals(&d, &m.scenario(), 1e-12).unwrap().holds);
        let _ = to_f64(&Weight::one());
    }
}
