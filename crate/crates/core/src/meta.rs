//! The meta-level lift: the basic valuations of a three-valued theory become
//! the histories of a definite theory whose events are statements
//! "γ̃(E) = t" about the named events.

use std::sync::Arc;

use serde::Serialize;

use crate::conditions::{check_freedom_of_settings, ConditionError};
use crate::eprb::EprbModel;
use crate::histories::{Event, HistorySpace};
use crate::report::ConditionReport;
use crate::theory::{Frame, OnticTheory, ThreeValuedTheory, Theory};
use crate::valuation::Truth;

const VALUES: [Truth; 3] = [Truth::False, Truth::Half, Truth::True];

/// Name of the meta-event "γ̃(E) = t".
pub fn meta_event_name(event: &str, t: Truth) -> String {
    format!("{event}={t}")
}

#[derive(Debug, Clone)]
pub struct MetaTheory {
    ontic: OnticTheory,
    /// Source event names, in source order.
    sources: Vec<String>,
}

impl MetaTheory {
    pub fn ontic(&self) -> &OnticTheory {
        &self.ontic
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn history_count(&self) -> usize {
        self.ontic.frame().space().len()
    }

    /// "γ̃(E) = t" as a set of meta-histories.
    pub fn meta_event(&self, event: &str, t: Truth) -> Option<Event> {
        self.ontic.frame().event(&meta_event_name(event, t))
    }

    /// ?E: the meta-histories on which E is definite.
    pub fn is_definite(&self, event: &str) -> Option<Event> {
        Some(!self.meta_event(event, Truth::Half)? & self.ontic.frame().omega())
    }
}

/// One meta-history per basic valuation. Each named event E yields three
/// meta-events associated where E was. Declared settings are lifted to
/// "E = 1".
pub fn meta_lift(theory: &ThreeValuedTheory) -> MetaTheory {
    let src = theory.frame();
    let names: Vec<String> = theory.basics().iter().map(|v| v.name.clone()).collect();
    let space = Arc::new(HistorySpace::new(names).expect("basic names are distinct"));
    let mut frame = Frame::new(src.site_arc().clone(), space);
    let mut sources = Vec::new();
    for e in src.events() {
        for t in VALUES {
            let mask = theory.meta_event(e.event, t);
            frame.add_event(meta_event_name(&e.name, t), mask, e.region).expect("distinct source names");
        }
        sources.push(e.name.clone());
    }
    for r in src.regions() {
        frame.add_region(r.name.clone(), r.region).expect("distinct source names");
    }
    for s in src.settings() {
        let name = meta_event_name(src.setting_name(s), Truth::True);
        frame.add_setting(&name, s.home).expect("lifted setting lives at its home");
    }
    let omega = frame.omega();
    MetaTheory { ontic: OnticTheory::new(frame, omega).expect("at least one basic"), sources }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetaObjection {
    /// ?P_A1 is correlated with "A_s = 1" among the meta-histories.
    pub definiteness_determines_setting: bool,
    /// ?P_A1 is a non-trivial weak influence on the lifted setting.
    pub definiteness_weakly_influences_setting: bool,
    /// Freedom of settings on the meta-level theory with ?-events in the past.
    pub meta_fos: ConditionReport,
    /// Three-valued freedom of settings on the model itself.
    pub object_fos: ConditionReport,
    /// The objection holds: (a) and (b) hold at the meta-level while the
    /// object-level check passes.
    pub contrast_shown: bool,
}

pub fn demonstrate_meta_objection(model: &EprbModel) -> Result<MetaObjection, ConditionError> {
    let meta = meta_lift(&model.theory);
    let q = meta.is_definite("P_A1").expect("model event");
    let a_s = meta.meta_event("A_s", Truth::True).expect("model event");
    let o = meta.ontic();
    let correlated = o.correlated(q, a_s);
    let weak = q & o.theta() != 0 && o.weakly_correlated(q, a_s);
    let meta_fos = check_freedom_of_settings(&Theory::from(o.clone()))?;
    let object_fos = check_freedom_of_settings(&Theory::from(model.theory.clone()))?;
    let contrast_shown = correlated && weak && !meta_fos.holds && object_fos.holds;
    Ok(MetaObjection {
        definiteness_determines_setting: correlated,
        definiteness_weakly_influences_setting: weak,
        meta_fos,
        object_fos,
        contrast_shown,
    })
}
