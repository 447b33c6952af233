//! Ontic and three-valued theories over a shared frame (site, histories,
//! named events with their regions, settings), correlation in both logics,
//! derivation of the epistemic theory and the ontic-definiteness check.

use std::sync::Arc;

use thiserror::Error;

use crate::bits;
use crate::histories::{AssociationMap, Event, HistorySpace, Subalgebra};
use crate::report::{ConditionReport, EventWitness, Witness};
use crate::site::{CausalSite, Region};
use crate::valuation::{evaluate, ThreeValuation, Truth};

/// Meta-space events are u64 masks over basic valuations.
pub const MAX_BASICS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("region does not belong to the theory's site")]
    ForeignRegion,
    #[error("event `{0}` contains histories outside the history space")]
    EventOutsideSpace(String),
    #[error("setting `{0}` is not in the subalgebra of its home region")]
    SettingNotInHome(String),
    #[error("the allowed set of histories is empty")]
    EmptyTheta,
    #[error("allowed histories lie outside the history space")]
    ThetaOutsideSpace,
    #[error("valuation `{0}` has an empty derivation set")]
    EmptyDerivation(String),
    #[error("valuation `{0}` is derivable from the other basic valuations {1:?}")]
    NonBasic(String, Vec<String>),
    #[error("at least one basic valuation is required")]
    NoBasics,
    #[error("{0} basic valuations given, at most {MAX_BASICS} are supported")]
    TooManyBasics(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedEvent {
    pub name: String,
    pub event: Event,
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedRegion {
    pub name: String,
    pub region: Region,
}

/// A setting generator: an event (index into the frame's events) and the
/// region it is a setting of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Setting {
    pub event: usize,
    pub home: Region,
}

/// Everything a theory carries apart from its law (Θ or the basics).
#[derive(Debug, Clone)]
pub struct Frame {
    site: Arc<CausalSite>,
    space: Arc<HistorySpace>,
    events: Vec<NamedEvent>,
    regions: Vec<NamedRegion>,
    settings: Vec<Setting>,
    delta: AssociationMap,
}

impl Frame {
    pub fn new(site: Arc<CausalSite>, space: Arc<HistorySpace>) -> Self {
        Frame { site, space, events: Vec::new(), regions: Vec::new(), settings: Vec::new(), delta: AssociationMap::new() }
    }

    /// Declare an event associated to `region`.
    pub fn add_event(&mut self, name: impl Into<String>, event: Event, region: Region) -> Result<usize, TheoryError> {
        let name = name.into();
        if self.events.iter().any(|e| e.name == name) {
            return Err(TheoryError::DuplicateName(name));
        }
        if !self.site.owns(&region) {
            return Err(TheoryError::ForeignRegion);
        }
        if event & !self.space.all() != 0 {
            return Err(TheoryError::EventOutsideSpace(name));
        }
        self.delta.push(region, event);
        self.events.push(NamedEvent { name, event, region });
        Ok(self.events.len() - 1)
    }

    pub fn add_region(&mut self, name: impl Into<String>, region: Region) -> Result<(), TheoryError> {
        let name = name.into();
        if self.regions.iter().any(|r| r.name == name) {
            return Err(TheoryError::DuplicateName(name));
        }
        if !self.site.owns(&region) {
            return Err(TheoryError::ForeignRegion);
        }
        self.regions.push(NamedRegion { name, region });
        Ok(())
    }

    /// Flag a declared event as a setting of `home`.
    pub fn add_setting(&mut self, event_name: &str, home: Region) -> Result<(), TheoryError> {
        let idx = self.event_index(event_name).ok_or_else(|| TheoryError::UnknownEvent(event_name.to_string()))?;
        if !self.site.owns(&home) {
            return Err(TheoryError::ForeignRegion);
        }
        if !self.subalgebra_of(&home).contains(self.events[idx].event) {
            return Err(TheoryError::SettingNotInHome(event_name.to_string()));
        }
        if self.settings.iter().any(|s| s.event == idx) {
            return Err(TheoryError::DuplicateName(event_name.to_string()));
        }
        self.settings.push(Setting { event: idx, home });
        Ok(())
    }

    pub fn site(&self) -> &CausalSite {
        &self.site
    }

    pub fn site_arc(&self) -> &Arc<CausalSite> {
        &self.site
    }

    pub fn space(&self) -> &HistorySpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<HistorySpace> {
        &self.space
    }

    pub fn omega(&self) -> Event {
        self.space.all()
    }

    pub fn events(&self) -> &[NamedEvent] {
        &self.events
    }

    pub fn regions(&self) -> &[NamedRegion] {
        &self.regions
    }

    pub fn settings(&self) -> &[Setting] {
        &self.settings
    }

    pub fn delta(&self) -> &AssociationMap {
        &self.delta
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|e| e.name == name)
    }

    pub fn event(&self, name: &str) -> Option<Event> {
        self.event_index(name).map(|i| self.events[i].event)
    }

    pub fn named_region(&self, name: &str) -> Option<Region> {
        self.regions.iter().find(|r| r.name == name).map(|r| r.region)
    }

    pub fn setting_event(&self, s: &Setting) -> Event {
        self.events[s.event].event
    }

    pub fn setting_name(&self, s: &Setting) -> &str {
        &self.events[s.event].name
    }

    /// Σ|_R.
    pub fn subalgebra_of(&self, region: &Region) -> Subalgebra {
        self.delta.subalgebra_of(self.omega(), region)
    }

    pub fn region_names(&self, region: &Region) -> Vec<String> {
        self.site.region_names(region)
    }

    pub fn witness_event(&self, label: impl Into<String>, e: Event) -> EventWitness {
        EventWitness { label: label.into(), histories: self.space.event_names(e) }
    }

    /// Name of a declared event equal to `e`, if any.
    pub fn event_label(&self, e: Event) -> Option<&str> {
        self.events.iter().find(|n| n.event == e).map(|n| n.name.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct OnticTheory {
    frame: Frame,
    theta: Event,
}

impl OnticTheory {
    pub fn new(frame: Frame, theta: Event) -> Result<Self, TheoryError> {
        if theta == 0 {
            return Err(TheoryError::EmptyTheta);
        }
        if theta & !frame.omega() != 0 {
            return Err(TheoryError::ThetaOutsideSpace);
        }
        Ok(OnticTheory { frame, theta })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn theta(&self) -> Event {
        self.theta
    }

    pub fn correlated(&self, a: Event, b: Event) -> bool {
        a & self.theta == b & self.theta
    }

    pub fn weakly_correlated(&self, a: Event, b: Event) -> bool {
        a & self.theta & !b == 0
    }

    pub fn with_theta(&self, theta: Event) -> Result<Self, TheoryError> {
        OnticTheory::new(self.frame.clone(), theta)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedValuation {
    pub name: String,
    pub valuation: ThreeValuation,
}

#[derive(Debug, Clone)]
pub struct ThreeValuedTheory {
    frame: Frame,
    basics: Vec<NamedValuation>,
}

impl ThreeValuedTheory {
    /// Validates non-empty derivation sets, distinct names and basicness.
    pub fn new(frame: Frame, basics: Vec<(String, Event)>) -> Result<Self, TheoryError> {
        if basics.is_empty() {
            return Err(TheoryError::NoBasics);
        }
        if basics.len() > MAX_BASICS {
            return Err(TheoryError::TooManyBasics(basics.len()));
        }
        let mut out: Vec<NamedValuation> = Vec::with_capacity(basics.len());
        for (name, x) in basics {
            if out.iter().any(|v| v.name == name) {
                return Err(TheoryError::DuplicateName(name));
            }
            if x & !frame.omega() != 0 {
                return Err(TheoryError::EventOutsideSpace(name));
            }
            let valuation = ThreeValuation::new(x).ok_or_else(|| TheoryError::EmptyDerivation(name.clone()))?;
            out.push(NamedValuation { name, valuation });
        }
        for (i, v) in out.iter().enumerate() {
            let x = v.valuation.derivation();
            let parts: Vec<&NamedValuation> = out
                .iter()
                .enumerate()
                .filter(|&(j, w)| j != i && w.valuation.derivation() & !x == 0)
                .map(|(_, w)| w)
                .collect();
            if parts.iter().fold(0, |acc, w| acc | w.valuation.derivation()) == x {
                return Err(TheoryError::NonBasic(v.name.clone(), parts.iter().map(|w| w.name.clone()).collect()));
            }
        }
        Ok(ThreeValuedTheory { frame, basics: out })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn basics(&self) -> &[NamedValuation] {
        &self.basics
    }

    pub fn basic_sets(&self) -> Vec<Event> {
        self.basics.iter().map(|v| v.valuation.derivation()).collect()
    }

    pub fn basic(&self, name: &str) -> Option<&NamedValuation> {
        self.basics.iter().find(|v| v.name == name)
    }

    /// Union of all derivation sets.
    pub fn support(&self) -> Event {
        self.basics.iter().fold(0, |acc, v| acc | v.valuation.derivation())
    }

    pub fn values(&self, e: Event) -> Vec<Truth> {
        self.basics.iter().map(|v| v.valuation.value(e)).collect()
    }

    pub fn correlated(&self, a: Event, b: Event) -> bool {
        self.basics.iter().all(|v| v.valuation.value(a) == v.valuation.value(b))
    }

    /// Every basic giving `b` the value 0 gives `a` the value 0.
    pub fn weakly_correlated(&self, a: Event, b: Event) -> bool {
        self.basics.iter().all(|v| v.valuation.value(b) != Truth::False || v.valuation.value(a) == Truth::False)
    }

    /// Complementarity: each basic leaves exactly one of `a`, `b` indefinite.
    pub fn is_complementary(&self, a: Event, b: Event) -> bool {
        self.basics.iter().all(|v| (v.valuation.value(a) == Truth::Half) == (v.valuation.value(b) != Truth::Half))
    }

    /// ?E as a meta-event: the mask of basics (by index) on which `e` is
    /// definite.
    pub fn is_definite_event(&self, e: Event) -> u64 {
        self.basics
            .iter()
            .enumerate()
            .filter(|(_, v)| v.valuation.is_definite_on(e))
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Mask of basics (by index) giving `e` the value `t`.
    pub fn meta_event(&self, e: Event, t: Truth) -> u64 {
        self.basics
            .iter()
            .enumerate()
            .filter(|(_, v)| v.valuation.value(e) == t)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }
}

/// Either kind of theory.
#[derive(Debug, Clone)]
pub enum Theory {
    Ontic(OnticTheory),
    ThreeValued(ThreeValuedTheory),
}

impl Theory {
    pub fn frame(&self) -> &Frame {
        match self {
            Theory::Ontic(t) => t.frame(),
            Theory::ThreeValued(t) => t.frame(),
        }
    }

    pub fn is_three_valued(&self) -> bool {
        matches!(self, Theory::ThreeValued(_))
    }

    /// Derivation sets of the basic valuations; singletons of Θ for an ontic
    /// theory.
    pub fn basic_sets(&self) -> Vec<Event> {
        match self {
            Theory::Ontic(t) => bits::ones(t.theta()).map(|h| 1u64 << h).collect(),
            Theory::ThreeValued(t) => t.basic_sets(),
        }
    }

    pub fn correlated(&self, a: Event, b: Event) -> bool {
        match self {
            Theory::Ontic(t) => t.correlated(a, b),
            Theory::ThreeValued(t) => t.correlated(a, b),
        }
    }

    pub fn weakly_correlated(&self, a: Event, b: Event) -> bool {
        match self {
            Theory::Ontic(t) => t.weakly_correlated(a, b),
            Theory::ThreeValued(t) => t.weakly_correlated(a, b),
        }
    }

    /// Three-valued view: the theory itself, or the derived theory.
    pub fn to_three_valued(&self) -> ThreeValuedTheory {
        match self {
            Theory::Ontic(t) => derive_three_valued(t),
            Theory::ThreeValued(t) => t.clone(),
        }
    }
}

impl From<OnticTheory> for Theory {
    fn from(t: OnticTheory) -> Self {
        Theory::Ontic(t)
    }
}

impl From<ThreeValuedTheory> for Theory {
    fn from(t: ThreeValuedTheory) -> Self {
        Theory::ThreeValued(t)
    }
}

/// Basics are the singleton valuations of Θ, named after their histories.
pub fn derive_three_valued(ontic: &OnticTheory) -> ThreeValuedTheory {
    let frame = ontic.frame().clone();
    let basics = bits::ones(ontic.theta())
        .map(|h| (frame.space().name(h).to_string(), 1u64 << h))
        .collect();
    ThreeValuedTheory::new(frame, basics).expect("distinct singletons are basic")
}

/// Ontic definiteness. With D the histories whose singleton valuation is a
/// basic, the condition holds iff every basic derives from a subset of D.
pub fn check_ontic_definiteness(theory: &ThreeValuedTheory) -> ConditionReport {
    let definite = theory
        .basics()
        .iter()
        .filter(|v| v.valuation.is_two_valued())
        .fold(0, |acc, v| acc | v.valuation.derivation());
    match theory.basics().iter().find(|v| v.valuation.derivation() & !definite != 0) {
        None => ConditionReport::pass("onticdef"),
        Some(v) => {
            let x = v.valuation.derivation();
            let frame = theory.frame();
            let undefined = x & !definite;
            let indefinite: Vec<String> = frame
                .events()
                .iter()
                .filter(|e| evaluate(x, e.event) == Truth::Half)
                .map(|e| e.name.clone())
                .collect();
            let mut message = format!(
                "valuation `{}` is not a coarse-graining of allowed definite histories: {} have no allowed definite valuation",
                v.name,
                frame.space().event_names(undefined).join(", ")
            );
            if !indefinite.is_empty() {
                message.push_str(&format!("; it leaves {} indefinite", indefinite.join(", ")));
            }
            ConditionReport::fail(
                "onticdef",
                Witness {
                    message,
                    events: vec![frame.witness_event("derivation set", x)],
                    valuations: vec![v.name.clone()],
                    ..Witness::default()
                },
            )
        }
    }
}
