//! Line-oriented text format for models.
//!
//! ```text
//! # comments run to end of line
//! site:
//!   points = {c, a, b}
//!   order = {c < a, c < b}
//! histories:
//!   names = {h0, h1}
//! theta:                      # ontic models only; defaults to every history
//!   histories = {h0, h1}
//! events:
//!   A = {h1}
//! regions:
//!   left = {a}
//! assoc:
//!   A = left                  # a region name or an inline point set
//! settings:
//!   A = {a}                   # home region of a setting event
//! valuations:                 # present => three-valued model
//!   v1 = {h0}
//! values:                     # optional checks against derived values
//!   v1 = {A: 0}
//! distribution:
//!   v1 = 1
//! ```
//!
//! Diagnostics carry a stable code and a 1-based line and column.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::histories::{Event, HistoryError, HistorySpace};
use crate::probability::{format_weight, parse_weight, Distribution, ProbabilityError, Weight};
use crate::site::{CausalSite, Region, SiteError};
use crate::theory::{Frame, OnticTheory, ThreeValuedTheory, Theory, TheoryError};
use crate::valuation::Truth;

pub mod codes {
    pub const MISSING_SECTION: &str = "E001";
    pub const UNKNOWN_SECTION: &str = "E002";
    pub const DUPLICATE: &str = "E003";
    pub const UNRESOLVED: &str = "E004";
    pub const CYCLIC_ORDER: &str = "E005";
    pub const MALFORMED_WEIGHT: &str = "E006";
    pub const SYNTAX: &str = "E007";
    pub const DUPLICATE_SECTION: &str = "E008";
    pub const UNASSOCIATED_EVENT: &str = "E009";
    pub const CONFLICTING_SECTIONS: &str = "E010";
    pub const EMPTY_DERIVATION: &str = "E101";
    pub const VALUE_MISMATCH: &str = "E102";
    pub const EVENT_OUTSIDE_OMEGA: &str = "E103";
    pub const SETTING_NOT_IN_HOME: &str = "E104";
    pub const NON_BASIC: &str = "E105";
    pub const OUTSIDE_SUPPORT: &str = "E106";
    pub const NORMALIZATION: &str = "E107";
    pub const INVALID_THEORY: &str = "E108";
    pub const TOO_LARGE: &str = "E109";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Loc {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: &'static str,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl Diagnostic {
    fn new(code: &'static str, loc: Loc, message: impl Into<String>) -> Self {
        Diagnostic { code, line: loc.line, column: loc.column, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.code, self.message)
    }
}

/// Render a diagnostic list one per line.
pub fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry<T> {
    pub name: String,
    pub value: T,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionRef {
    Named(String),
    Points(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelDocument {
    pub points: Vec<String>,
    pub order: Vec<(String, String)>,
    pub order_loc: Loc,
    pub histories: Vec<String>,
    pub theta: Option<Vec<String>>,
    pub theta_loc: Loc,
    pub events: Vec<Entry<Vec<String>>>,
    pub regions: Vec<Entry<Vec<String>>>,
    pub assoc: Vec<Entry<RegionRef>>,
    pub settings: Vec<Entry<RegionRef>>,
    pub valuations: Option<Vec<Entry<Vec<String>>>>,
    pub values: Vec<Entry<Vec<(String, Truth)>>>,
    pub distribution: Option<Vec<Entry<Weight>>>,
}

const SECTIONS: [&str; 10] =
    ["site", "histories", "theta", "events", "regions", "assoc", "settings", "valuations", "values", "distribution"];

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '\'' | '-' | '+'))
}

struct RawLine<'a> {
    name: &'a str,
    value: &'a str,
    name_loc: Loc,
    value_loc: Loc,
}

fn col_of(line: &str, part: &str) -> usize {
    let offset = part.as_ptr() as usize - line.as_ptr() as usize;
    line[..offset].chars().count() + 1
}

/// Items of `{a, b, c}`; `None` if the braces are missing.
fn braced_items(v: &str) -> Option<Vec<&str>> {
    let inner = v.strip_prefix('{')?.strip_suffix('}')?.trim();
    if inner.is_empty() {
        return Some(Vec::new());
    }
    Some(inner.split(',').map(str::trim).collect())
}

fn parse_name_set(v: &str, loc: Loc, diags: &mut Vec<Diagnostic>) -> Option<Vec<String>> {
    let Some(items) = braced_items(v) else {
        diags.push(Diagnostic::new(codes::SYNTAX, loc, format!("expected a set `{{a, b}}`, found `{v}`")));
        return None;
    };
    let mut out = Vec::new();
    for it in items {
        if !is_name(it) {
            diags.push(Diagnostic::new(codes::SYNTAX, loc, format!("`{it}` is not a valid name")));
            return None;
        }
        if out.iter().any(|o| o == it) {
            diags.push(Diagnostic::new(codes::DUPLICATE, loc, format!("`{it}` is listed twice")));
            continue;
        }
        out.push(it.to_string());
    }
    Some(out)
}

fn parse_order(v: &str, loc: Loc, diags: &mut Vec<Diagnostic>) -> Vec<(String, String)> {
    let Some(items) = braced_items(v) else {
        diags.push(Diagnostic::new(codes::SYNTAX, loc, format!("expected `{{a < b, ...}}`, found `{v}`")));
        return Vec::new();
    };
    let mut pairs = Vec::new();
    for it in items {
        let chain: Vec<&str> = it.split('<').map(str::trim).collect();
        if chain.len() < 2 || !chain.iter().all(|n| is_name(n)) {
            diags.push(Diagnostic::new(codes::SYNTAX, loc, format!("`{it}` is not of the form `a < b`")));
            continue;
        }
        for w in chain.windows(2) {
            pairs.push((w[0].to_string(), w[1].to_string()));
        }
    }
    pairs
}

fn parse_region_ref(v: &str, loc: Loc, diags: &mut Vec<Diagnostic>) -> Option<RegionRef> {
    if v.starts_with('{') {
        parse_name_set(v, loc, diags).map(RegionRef::Points)
    } else if is_name(v) {
        Some(RegionRef::Named(v.to_string()))
    } else {
        diags.push(Diagnostic::new(codes::SYNTAX, loc, format!("expected a region name or point set, found `{v}`")));
        None
    }
}

fn parse_values(v: &str, loc: Loc, diags: &mut Vec<Diagnostic>) -> Option<Vec<(String, Truth)>> {
    let Some(items) = braced_items(v) else {
        diags.push(Diagnostic::new(codes::SYNTAX, loc, format!("expected `{{E: 0, F: 1/2}}`, found `{v}`")));
        return None;
    };
    let mut out: Vec<(String, Truth)> = Vec::new();
    for it in items {
        let parsed = it.split_once(':').and_then(|(e, t)| {
            let (e, t) = (e.trim(), t.trim());
            Some((is_name(e).then_some(e)?, t.parse::<Truth>().ok()?))
        });
        match parsed {
            Some((e, _)) if out.iter().any(|(o, _)| o == e) => {
                diags.push(Diagnostic::new(codes::DUPLICATE, loc, format!("value of `{e}` is given twice")));
            }
            Some((e, t)) => out.push((e.to_string(), t)),
            None => diags.push(Diagnostic::new(codes::SYNTAX, loc, format!("`{it}` is not of the form `event: 0|1/2|1`"))),
        }
    }
    Some(out)
}

/// Parse and cross-check a document. All diagnostics found are returned.
pub fn parse(text: &str) -> Result<ModelDocument, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut sections: HashMap<&str, (Loc, Vec<RawLine>)> = HashMap::new();
    let mut current: Option<&str> = None;
    for (i, full) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = full.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let loc = Loc { line: line_no, column: col_of(full, trimmed) };
        if let Some(head) = trimmed.strip_suffix(':').filter(|h| !h.contains('=')) {
            let head = head.trim();
            if !SECTIONS.contains(&head) {
                diags.push(Diagnostic::new(codes::UNKNOWN_SECTION, loc, format!("unknown section `{head}`")));
                current = None;
                continue;
            }
            let name = SECTIONS.iter().copied().find(|s| *s == head).expect("known section");
            if sections.contains_key(name) {
                diags.push(Diagnostic::new(codes::DUPLICATE_SECTION, loc, format!("section `{name}` appears twice")));
                current = None;
                continue;
            }
            sections.insert(name, (loc, Vec::new()));
            current = Some(name);
            continue;
        }
        let Some((lhs, rhs)) = trimmed.split_once('=') else {
            diags.push(Diagnostic::new(codes::SYNTAX, loc, format!("expected `name = value`, found `{trimmed}`")));
            continue;
        };
        let (name, value) = (lhs.trim(), rhs.trim());
        if !is_name(name) {
            diags.push(Diagnostic::new(codes::SYNTAX, loc, format!("`{name}` is not a valid name")));
            continue;
        }
        let Some(sec) = current else {
            if !diags.iter().any(|d| d.line == line_no) {
                diags.push(Diagnostic::new(codes::SYNTAX, loc, "entry outside of a known section"));
            }
            continue;
        };
        let value_loc = if value.is_empty() { loc } else { Loc { line: line_no, column: col_of(full, value) } };
        sections.get_mut(sec).expect("open section").1.push(RawLine { name, value, name_loc: loc, value_loc });
    }

    let mut doc = ModelDocument::default();
    let keyed = |sec: &str, key: &str, diags: &mut Vec<Diagnostic>| -> Option<(String, Loc)> {
        let (loc, lines) = sections.get(sec)?;
        let mut found = None;
        for l in lines {
            if l.name != key {
                diags.push(Diagnostic::new(codes::SYNTAX, l.name_loc, format!("unknown key `{}` in section `{sec}`", l.name)));
            } else if found.is_some() {
                diags.push(Diagnostic::new(codes::DUPLICATE, l.name_loc, format!("key `{key}` given twice")));
            } else {
                found = Some((l.value.to_string(), l.value_loc));
            }
        }
        if found.is_none() {
            diags.push(Diagnostic::new(codes::MISSING_SECTION, *loc, format!("section `{sec}` has no `{key}` entry")));
        }
        found
    };

    let top = Loc { line: 1, column: 1 };
    match sections.get("site") {
        None => diags.push(Diagnostic::new(codes::MISSING_SECTION, top, "missing site section")),
        Some((_, lines)) => {
            for l in lines {
                match l.name {
                    "points" if doc.points.is_empty() => {
                        doc.points = parse_name_set(l.value, l.value_loc, &mut diags).unwrap_or_default();
                    }
                    "order" if doc.order.is_empty() => {
                        doc.order = parse_order(l.value, l.value_loc, &mut diags);
                        doc.order_loc = l.value_loc;
                    }
                    "points" | "order" => {
                        diags.push(Diagnostic::new(codes::DUPLICATE, l.name_loc, format!("key `{}` given twice", l.name)))
                    }
                    other => diags.push(Diagnostic::new(codes::SYNTAX, l.name_loc, format!("unknown key `{other}` in section `site`"))),
                }
            }
            if doc.points.is_empty() && !diags.iter().any(|d| d.code == codes::SYNTAX) {
                diags.push(Diagnostic::new(codes::MISSING_SECTION, sections["site"].0, "site declares no points"));
            }
        }
    }
    match sections.get("histories") {
        None => diags.push(Diagnostic::new(codes::MISSING_SECTION, top, "missing histories section")),
        Some(_) => {
            if let Some((v, loc)) = keyed("histories", "names", &mut diags) {
                doc.histories = parse_name_set(&v, loc, &mut diags).unwrap_or_default();
            }
        }
    }
    if sections.contains_key("theta") {
        if let Some((v, loc)) = keyed("theta", "histories", &mut diags) {
            doc.theta = parse_name_set(&v, loc, &mut diags);
            doc.theta_loc = loc;
        }
    }

    let entries = |sec: &str| sections.get(sec).map(|(_, ls)| ls.as_slice()).unwrap_or(&[]);
    let unique = |sec: &str, diags: &mut Vec<Diagnostic>| -> Vec<&RawLine> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for l in entries(sec) {
            if seen.insert(l.name) {
                out.push(l);
            } else {
                diags.push(Diagnostic::new(codes::DUPLICATE, l.name_loc, format!("`{}` is declared twice in `{sec}`", l.name)));
            }
        }
        out
    };
    for l in unique("events", &mut diags) {
        if let Some(v) = parse_name_set(l.value, l.value_loc, &mut diags) {
            doc.events.push(Entry { name: l.name.into(), value: v, loc: l.name_loc });
        }
    }
    for l in unique("regions", &mut diags) {
        if let Some(v) = parse_name_set(l.value, l.value_loc, &mut diags) {
            doc.regions.push(Entry { name: l.name.into(), value: v, loc: l.name_loc });
        }
    }
    for l in unique("assoc", &mut diags) {
        if let Some(v) = parse_region_ref(l.value, l.value_loc, &mut diags) {
            doc.assoc.push(Entry { name: l.name.into(), value: v, loc: l.name_loc });
        }
    }
    for l in unique("settings", &mut diags) {
        if let Some(v) = parse_region_ref(l.value, l.value_loc, &mut diags) {
            doc.settings.push(Entry { name: l.name.into(), value: v, loc: l.name_loc });
        }
    }
    if sections.contains_key("valuations") {
        let mut vals = Vec::new();
        for l in unique("valuations", &mut diags) {
            if let Some(v) = parse_name_set(l.value, l.value_loc, &mut diags) {
                vals.push(Entry { name: l.name.into(), value: v, loc: l.name_loc });
            }
        }
        doc.valuations = Some(vals);
    }
    for l in unique("values", &mut diags) {
        if let Some(v) = parse_values(l.value, l.value_loc, &mut diags) {
            doc.values.push(Entry { name: l.name.into(), value: v, loc: l.name_loc });
        }
    }
    if sections.contains_key("distribution") {
        let mut dist = Vec::new();
        for l in unique("distribution", &mut diags) {
            match parse_weight(l.value) {
                Some(w) => dist.push(Entry { name: l.name.into(), value: w, loc: l.name_loc }),
                None => diags.push(Diagnostic::new(
                    codes::MALFORMED_WEIGHT,
                    l.value_loc,
                    format!("`{}` is not a non-negative rational `p/q` or decimal", l.value),
                )),
            }
        }
        doc.distribution = Some(dist);
    }
    if doc.theta.is_some() && doc.valuations.is_some() {
        diags.push(Diagnostic::new(codes::CONFLICTING_SECTIONS, sections["theta"].0, "theta and valuations cannot both be given"));
    }

    resolve(&doc, &mut diags);
    if diags.is_empty() {
        Ok(doc)
    } else {
        diags.sort_by_key(|d| (d.line, d.column));
        Err(diags)
    }
}

/// Cross-reference checks.
fn resolve(doc: &ModelDocument, diags: &mut Vec<Diagnostic>) {
    let points: HashSet<&str> = doc.points.iter().map(String::as_str).collect();
    let hist: HashSet<&str> = doc.histories.iter().map(String::as_str).collect();
    let events: HashSet<&str> = doc.events.iter().map(|e| e.name.as_str()).collect();
    let regions: HashSet<&str> = doc.regions.iter().map(|e| e.name.as_str()).collect();
    let unresolved = |kind: &str, name: &str, loc: Loc| Diagnostic::new(codes::UNRESOLVED, loc, format!("unknown {kind} `{name}`"));

    let mut order_ok = true;
    for (a, b) in &doc.order {
        for p in [a, b] {
            if !points.contains(p.as_str()) {
                diags.push(unresolved("point", p, doc.order_loc));
                order_ok = false;
            }
        }
    }
    if order_ok && !doc.points.is_empty() {
        if let Err(SiteError::Cycle(a, b)) = CausalSite::new(doc.points.clone(), doc.order.clone()) {
            diags.push(Diagnostic::new(codes::CYCLIC_ORDER, doc.order_loc, format!("order is cyclic: `{a}` and `{b}` precede each other")));
        }
    }
    if let Some(theta) = &doc.theta {
        for h in theta {
            if !hist.contains(h.as_str()) {
                diags.push(unresolved("history", h, doc.theta_loc));
            }
        }
    }
    for e in &doc.events {
        for h in &e.value {
            if !hist.contains(h.as_str()) {
                diags.push(Diagnostic::new(codes::EVENT_OUTSIDE_OMEGA, e.loc, format!("event `{}` contains `{h}`, which is not a declared history", e.name)));
            }
        }
        if !doc.assoc.iter().any(|a| a.name == e.name) {
            diags.push(Diagnostic::new(codes::UNASSOCIATED_EVENT, e.loc, format!("event `{}` has no assoc entry", e.name)));
        }
    }
    for r in &doc.regions {
        for p in &r.value {
            if !points.contains(p.as_str()) {
                diags.push(unresolved("point", p, r.loc));
            }
        }
    }
    let check_ref = |r: &RegionRef, loc: Loc, diags: &mut Vec<Diagnostic>| match r {
        RegionRef::Named(n) if !regions.contains(n.as_str()) => diags.push(unresolved("region", n, loc)),
        RegionRef::Points(ps) => {
            for p in ps {
                if !points.contains(p.as_str()) {
                    diags.push(unresolved("point", p, loc));
                }
            }
        }
        _ => {}
    };
    for a in doc.assoc.iter().chain(&doc.settings) {
        if !events.contains(a.name.as_str()) {
            diags.push(unresolved("event", &a.name, a.loc));
        }
        check_ref(&a.value, a.loc, diags);
    }
    let vals: HashSet<&str> = doc.valuations.iter().flatten().map(|v| v.name.as_str()).collect();
    for v in doc.valuations.iter().flatten() {
        for h in &v.value {
            if !hist.contains(h.as_str()) {
                diags.push(unresolved("history", h, v.loc));
            }
        }
    }
    for v in &doc.values {
        if !vals.contains(v.name.as_str()) {
            diags.push(unresolved("valuation", &v.name, v.loc));
        }
        for (e, _) in &v.value {
            if !events.contains(e.as_str()) {
                diags.push(unresolved("event", e, v.loc));
            }
        }
    }
}

/// A built model: the theory and an optional distribution over its
/// histories (ontic) or basic valuations (three-valued).
#[derive(Debug, Clone)]
pub struct Model {
    pub theory: Theory,
    pub distribution: Option<Distribution>,
}

fn find_loc<T>(entries: &[Entry<T>], name: &str) -> Loc {
    entries.iter().find(|e| e.name == name).map(|e| e.loc).unwrap_or(Loc { line: 1, column: 1 })
}

pub fn build_theory(doc: &ModelDocument) -> Result<Model, Vec<Diagnostic>> {
    let top = Loc { line: 1, column: 1 };
    let one = |code, loc, msg: String| vec![Diagnostic::new(code, loc, msg)];
    let site = CausalSite::new(doc.points.clone(), doc.order.clone()).map_err(|e| match e {
        SiteError::TooManyPoints(_) => one(codes::TOO_LARGE, top, e.to_string()),
        SiteError::Cycle(..) => one(codes::CYCLIC_ORDER, doc.order_loc, e.to_string()),
        _ => one(codes::UNRESOLVED, doc.order_loc, e.to_string()),
    })?;
    let site = Arc::new(site);
    let space = HistorySpace::new(doc.histories.clone()).map_err(|e| match e {
        HistoryError::TooMany(_) => one(codes::TOO_LARGE, top, e.to_string()),
        HistoryError::Empty => one(codes::MISSING_SECTION, top, e.to_string()),
        _ => one(codes::DUPLICATE, top, e.to_string()),
    })?;
    let space = Arc::new(space);
    let set_of = |names: &[String]| space.event(names.iter().map(String::as_str)).expect("resolved histories");
    let points_of = |names: &[String]| site.region(names.iter().map(String::as_str)).expect("resolved points");
    let named: HashMap<&str, Region> = doc.regions.iter().map(|r| (r.name.as_str(), points_of(&r.value))).collect();
    let region_of = |r: &RegionRef| match r {
        RegionRef::Named(n) => named[n.as_str()],
        RegionRef::Points(ps) => points_of(ps),
    };

    let mut frame = Frame::new(site.clone(), space.clone());
    for e in &doc.events {
        let a = doc.assoc.iter().find(|a| a.name == e.name).expect("resolved association");
        frame.add_event(e.name.clone(), set_of(&e.value), region_of(&a.value)).map_err(|err| one(codes::INVALID_THEORY, e.loc, err.to_string()))?;
    }
    for r in &doc.regions {
        frame.add_region(r.name.clone(), named[r.name.as_str()]).map_err(|err| one(codes::DUPLICATE, r.loc, err.to_string()))?;
    }
    for s in &doc.settings {
        frame.add_setting(&s.name, region_of(&s.value)).map_err(|err| {
            let code = if matches!(err, TheoryError::SettingNotInHome(_)) { codes::SETTING_NOT_IN_HOME } else { codes::INVALID_THEORY };
            one(code, s.loc, err.to_string())
        })?;
    }

    let theory: Theory = match &doc.valuations {
        None => {
            let theta = doc.theta.as_ref().map(|t| set_of(t)).unwrap_or_else(|| space.all());
            OnticTheory::new(frame, theta).map_err(|e| one(codes::INVALID_THEORY, doc.theta_loc, e.to_string()))?.into()
        }
        Some(vals) => {
            for v in vals {
                if v.value.is_empty() {
                    return Err(one(codes::EMPTY_DERIVATION, v.loc, format!("valuation `{}` has an empty derivation set", v.name)));
                }
            }
            let basics = vals.iter().map(|v| (v.name.clone(), set_of(&v.value))).collect();
            ThreeValuedTheory::new(frame, basics)
                .map_err(|e| match &e {
                    TheoryError::NonBasic(n, _) => one(codes::NON_BASIC, find_loc(vals, n), e.to_string()),
                    TheoryError::EmptyDerivation(n) => one(codes::EMPTY_DERIVATION, find_loc(vals, n), e.to_string()),
                    TheoryError::TooManyBasics(_) => one(codes::TOO_LARGE, top, e.to_string()),
                    _ => one(codes::INVALID_THEORY, top, e.to_string()),
                })?
                .into()
        }
    };

    let mut diags = Vec::new();
    if let Theory::ThreeValued(t) = &theory {
        for v in &doc.values {
            let x = t.basic(&v.name).expect("resolved valuation");
            for (e, want) in &v.value {
                let got = x.valuation.value(t.frame().event(e).expect("resolved event"));
                if got != *want {
                    diags.push(Diagnostic::new(
                        codes::VALUE_MISMATCH,
                        v.loc,
                        format!("valuation `{}` gives `{e}` the value {got}, declared {want}", v.name),
                    ));
                }
            }
        }
    } else if !doc.values.is_empty() {
        diags.push(Diagnostic::new(codes::CONFLICTING_SECTIONS, doc.values[0].loc, "values require a valuations section"));
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let distribution = match &doc.distribution {
        None => None,
        Some(entries) => {
            let weights = entries.iter().map(|e| (e.name.clone(), e.value.clone())).collect();
            Some(Distribution::new(&theory, weights).map_err(|e| match &e {
                ProbabilityError::OutsideSupport(n) => one(codes::OUTSIDE_SUPPORT, find_loc(entries, n), e.to_string()),
                ProbabilityError::Normalization(_) => {
                    one(codes::NORMALIZATION, entries.first().map(|e| e.loc).unwrap_or(top), e.to_string())
                }
                ProbabilityError::Duplicate(n) => one(codes::DUPLICATE, find_loc(entries, n), e.to_string()),
                _ => one(codes::MALFORMED_WEIGHT, top, e.to_string()),
            })?)
        }
    };
    Ok(Model { theory, distribution })
}

/// Parse then build.
pub fn load(text: &str) -> Result<Model, Vec<Diagnostic>> {
    build_theory(&parse(text)?)
}

/// Name-based content of a theory, independent of declaration order and of
/// the bit positions of histories and points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub points: BTreeSet<String>,
    pub order: BTreeSet<(String, String)>,
    pub histories: BTreeSet<String>,
    pub theta: Option<BTreeSet<String>>,
    pub events: BTreeMap<String, (BTreeSet<String>, BTreeSet<String>)>,
    pub regions: BTreeMap<String, BTreeSet<String>>,
    pub settings: BTreeMap<String, BTreeSet<String>>,
    pub valuations: Option<BTreeMap<String, BTreeSet<String>>>,
}

pub fn normal_form(theory: &Theory) -> NormalForm {
    let f = theory.frame();
    let site = f.site();
    let space = f.space();
    let hs = |e: Event| space.event_names(e).into_iter().collect::<BTreeSet<_>>();
    let ps = |r: &Region| site.region_names(r).into_iter().collect::<BTreeSet<_>>();
    NormalForm {
        points: site.names().iter().cloned().collect(),
        order: site.covering_pairs().into_iter().map(|(a, b)| (site.name(a).to_string(), site.name(b).to_string())).collect(),
        histories: hs(f.omega()),
        theta: match theory {
            Theory::Ontic(t) => Some(hs(t.theta())),
            Theory::ThreeValued(_) => None,
        },
        events: f.events().iter().map(|e| (e.name.clone(), (hs(e.event), ps(&e.region)))).collect(),
        regions: f.regions().iter().map(|r| (r.name.clone(), ps(&r.region))).collect(),
        settings: f.settings().iter().map(|s| (f.setting_name(s).to_string(), ps(&s.home))).collect(),
        valuations: match theory {
            Theory::Ontic(_) => None,
            Theory::ThreeValued(t) => {
                Some(t.basics().iter().map(|v| (v.name.clone(), hs(v.valuation.derivation()))).collect())
            }
        },
    }
}

/// Equality up to declaration order and internal indexing.
pub fn theories_equal(a: &Theory, b: &Theory) -> bool {
    normal_form(a) == normal_form(b)
}

fn set_text<'a>(items: impl IntoIterator<Item = &'a String>) -> String {
    let v: Vec<&str> = items.into_iter().map(String::as_str).collect();
    format!("{{{}}}", v.join(", "))
}

/// Canonical text: fixed section order, entries sorted by name, order given
/// by its covering pairs, weights in lowest terms.
pub fn serialize(theory: &Theory, distribution: Option<&Distribution>) -> String {
    let nf = normal_form(theory);
    let mut out = String::new();
    let mut section = |name: &str, lines: Vec<String>, always: bool| {
        if lines.is_empty() && !always {
            return;
        }
        out.push_str(name);
        out.push_str(":\n");
        for l in lines {
            out.push_str("  ");
            out.push_str(&l);
            out.push('\n');
        }
    };
    let order: Vec<String> = nf.order.iter().map(|(a, b)| format!("{a} < {b}")).collect();
    section(
        "site",
        vec![format!("points = {}", set_text(&nf.points)), format!("order = {{{}}}", order.join(", "))],
        true,
    );
    section("histories", vec![format!("names = {}", set_text(&nf.histories))], true);
    if let Some(theta) = &nf.theta {
        section("theta", vec![format!("histories = {}", set_text(theta))], true);
    }
    section("events", nf.events.iter().map(|(n, (h, _))| format!("{n} = {}", set_text(h))).collect(), false);
    section("regions", nf.regions.iter().map(|(n, p)| format!("{n} = {}", set_text(p))).collect(), false);
    section("assoc", nf.events.iter().map(|(n, (_, p))| format!("{n} = {}", set_text(p))).collect(), false);
    section("settings", nf.settings.iter().map(|(n, p)| format!("{n} = {}", set_text(p))).collect(), false);
    if let Some(vals) = &nf.valuations {
        section("valuations", vals.iter().map(|(n, h)| format!("{n} = {}", set_text(h))).collect(), true);
    }
    if let Some(d) = distribution {
        let sorted: BTreeMap<&str, String> = d.points().iter().map(|p| (p.label.as_str(), format_weight(&p.weight))).collect();
        section("distribution", sorted.into_iter().map(|(n, w)| format!("{n} = {w}")).collect(), true);
    }
    out
}

/// Weights by label, for comparing distributions across builds.
pub fn distribution_weights(d: &Distribution) -> BTreeMap<String, Weight> {
    d.points().iter().map(|p| (p.label.clone(), p.weight.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eprb::{build_box_ball_models, build_conspiriton_model, build_eprb_model, pr_box_distribution, uniform_settings, DerivationChoice};
    use crate::theory::derive_three_valued;

    const TRIVIAL: &str = "site:\n  points = {x}\nhistories:\n  names = {h}\n";

    fn codes_of(text: &str) -> Vec<&'static str> {
        match load(text) {
            Ok(_) => Vec::new(),
            Err(d) => d.into_iter().map(|d| d.code).collect(),
        }
    }

    #[test]
    fn empty_input_is_missing_site() {
        let d = parse("").unwrap_err();
        assert_eq!(d[0].code, codes::MISSING_SECTION);
        assert!(d.iter().any(|d| d.message == "missing site section"));
    }

    #[test]
    fn minimal_document() {
        let m = load(TRIVIAL).unwrap();
        let Theory::Ontic(t) = &m.theory else { panic!("ontic expected") };
        assert_eq!(t.theta(), 1);
        assert_eq!(t.frame().site().len(), 1);
        assert!(m.distribution.is_none());
    }

    #[test]
    fn diagnostics_have_codes_and_locations() {
        let d = parse("site:\n  points = {a}\nhistories:\n  names = {h}\nbogus:\n").unwrap_err();
        assert_eq!(d, vec![Diagnostic { code: "E002", line: 5, column: 1, message: "unknown section `bogus`".into() }]);

        let d = parse("site:\n  points = {a, b}\n  order = {a < b, b < a}\nhistories:\n  names = {h}\n").unwrap_err();
        assert_eq!((d[0].code, d[0].line, d[0].column), ("E005", 3, 11));

        let d = parse(&format!("{TRIVIAL}events:\n  A = {{h}}\n  A = {{h}}\nassoc:\n  A = {{x}}\n")).unwrap_err();
        assert_eq!((d[0].code, d[0].line, d[0].column), ("E003", 7, 3));

        let d = parse(&format!("{TRIVIAL}events:\n  A = {{h}}\nassoc:\n  A = nowhere\n")).unwrap_err();
        assert_eq!((d[0].code, d[0].line), ("E004", 8));

        let d = parse(&format!("{TRIVIAL}distribution:\n  h = 1/0\n")).unwrap_err();
        assert_eq!((d[0].code, d[0].line, d[0].column), ("E006", 6, 7));

        let d = parse("site:\n  points = {a}\nsite:\nhistories:\n  names = {h}\n").unwrap_err();
        assert_eq!(d[0].code, "E008");

        let d = parse("site:\n  points = {a\nhistories:\n  names = {h}\n").unwrap_err();
        assert_eq!(d[0].code, "E007");
    }

    #[test]
    fn build_diagnostics() {
        let base = format!("{TRIVIAL}events:\n  A = {{h}}\nassoc:\n  A = {{x}}\n");
        assert_eq!(codes_of(&format!("{base}valuations:\n  v = {{}}\n")), ["E101"]);
        assert_eq!(codes_of(&format!("{base}valuations:\n  v = {{h}}\nvalues:\n  v = {{A: 0}}\n")), ["E102"]);
        assert_eq!(codes_of(&format!("{TRIVIAL}events:\n  A = {{g}}\nassoc:\n  A = {{x}}\n")), ["E103"]);
        assert_eq!(codes_of(&format!("{base}distribution:\n  g = 1\n")), ["E106"]);
        assert_eq!(codes_of(&format!("{base}distribution:\n  h = 1/2\n")), ["E107"]);
        assert_eq!(codes_of(&format!("{TRIVIAL}events:\n  A = {{h}}\n")), ["E009"]);
        let two = "site:\n  points = {x, y}\nhistories:\n  names = {h, g}\nevents:\n  A = {h}\n  B = {h}\nassoc:\n  A = {x}\n  B = {y}\n";
        let three = "site:\n  points = {x, y}\nhistories:\n  names = {h, g, k}\nevents:\n  A = {h}\n  B = {g}\nassoc:\n  A = {x}\n  B = {y}\n";
        assert_eq!(codes_of(&format!("{three}settings:\n  B = {{x}}\n")), ["E104"]);
        assert_eq!(codes_of(&format!("{three}settings:\n  B = {{y}}\n")), Vec::<&str>::new());
        assert_eq!(codes_of(&format!("{two}valuations:\n  v = {{h}}\n  w = {{g}}\n  u = {{h, g}}\n")), ["E105"]);
        assert_eq!(codes_of(&format!("{two}theta:\n  histories = {{h}}\nvaluations:\n  v = {{h}}\n")), ["E010"]);
    }

    #[test]
    fn comments_and_whitespace() {
        let text = "# model\nsite:   # header\n  points={ x , y }\n  order = { x<y }\nhistories:\n\tnames = {h}\n";
        let m = load(text).unwrap();
        assert!(m.theory.frame().site().precedes_or_eq(0, 1));
    }

    fn builtins() -> Vec<(Theory, Option<Distribution>)> {
        let mut out = Vec::new();
        for c in [DerivationChoice::Full, DerivationChoice::Pair14, DerivationChoice::Pair23] {
            let m = build_eprb_model(c).unwrap();
            let d = pr_box_distribution(&m, &uniform_settings()).unwrap();
            out.push((Theory::from(m.theory.clone()), Some(d)));
        }
        let (o, i) = build_box_ball_models();
        out.push((o.clone().into(), None));
        out.push((derive_three_valued(&o).into(), None));
        out.push((i.into(), None));
        out.push((build_conspiriton_model().into(), None));
        out
    }

    #[test]
    fn round_trip_builtins() {
        for (t, d) in builtins() {
            let text = serialize(&t, d.as_ref());
            let m = load(&text).unwrap_or_else(|e| panic!("{}\n{text}", render_diagnostics(&e)));
            assert!(theories_equal(&t, &m.theory));
            assert_eq!(d.as_ref().map(distribution_weights), m.distribution.as_ref().map(distribution_weights));
            assert_eq!(serialize(&m.theory, m.distribution.as_ref()), text);
        }
    }

    #[test]
    fn permuted_declarations_serialize_identically() {
        let a = "site:\n  points = {a, b, c}\n  order = {a < b, b < c, a < c}\nhistories:\n  names = {h1, h0}\nevents:\n  B = {h0}\n  A = {h1}\nassoc:\n  A = {a}\n  B = {c}\n";
        let b = "histories:\n  names = {h0, h1}\nsite:\n  order = {a < b < c}\n  points = {c, b, a}\nassoc:\n  B = {c}\n  A = {a}\nevents:\n  A = {h1}\n  B = {h0}\n";
        let (ma, mb) = (load(a).unwrap(), load(b).unwrap());
        assert_eq!(serialize(&ma.theory, None), serialize(&mb.theory, None));
        assert!(serialize(&ma.theory, None).contains("order = {a < b, b < c}"));
    }
}
