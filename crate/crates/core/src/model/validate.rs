use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::doc::{ModelDoc, NodeKind, TableRow};
use crate::effectual::validate_synergy;
use crate::event::{format_subset, EventId};

/// Tolerance on causal tables summing to one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Explicit tables larger than this many keys are rejected outright.
pub const MAX_TABLE_ARITY: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    InvalidId,
    DuplicateEvent,
    UnknownEvent,
    ReservedId,
    Omega,
    BipartiteViolation,
    DuplicateEdge,
    CycleError,
    Orphan,
    TableDomainError,
    RangeError,
    NormalizationError,
    SynergyError,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One broken model invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub location: String,
    pub message: String,
}

impl Violation {
    fn new(rule: Rule, location: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            rule,
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.rule, self.location, self.message)
    }
}

/// Checks every structural and table invariant of a model description.
pub fn validate_doc(doc: &ModelDoc) -> Vec<Violation> {
    validate_doc_with(doc, false)
}

pub(crate) fn validate_doc_with(doc: &ModelDoc, allow_reserved: bool) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut kinds: HashMap<&EventId, NodeKind> = HashMap::new();
    for e in &doc.events {
        if !e.id.is_well_formed() {
            out.push(Violation::new(Rule::InvalidId, e.id.as_str(), "ids must be non-empty tokens without whitespace, commas or braces"));
        }
        if !allow_reserved && e.id.is_reserved() {
            out.push(Violation::new(Rule::ReservedId, e.id.as_str(), "prefix is reserved for inserted pass-through nodes"));
        }
        if kinds.insert(&e.id, e.kind).is_some() {
            out.push(Violation::new(Rule::DuplicateEvent, e.id.as_str(), "declared more than once"));
        }
    }

    match kinds.get(&doc.omega) {
        None => out.push(Violation::new(Rule::Omega, doc.omega.as_str(), "root event is not declared")),
        Some(NodeKind::Simple) => out.push(Violation::new(Rule::Omega, doc.omega.as_str(), "root event must be a process")),
        Some(NodeKind::Process) => {}
    }

    // Edge typing.
    let mut effects: BTreeMap<&EventId, BTreeSet<&EventId>> = BTreeMap::new();
    let mut triggers: BTreeMap<&EventId, BTreeSet<&EventId>> = BTreeMap::new();
    let mut caused_by: BTreeMap<&EventId, BTreeSet<&EventId>> = BTreeMap::new();
    let mut adjacency: BTreeMap<&EventId, Vec<&EventId>> = BTreeMap::new();
    let mut edge_ok = true;
    for (set, from_kind, label) in [
        (&doc.causes, NodeKind::Process, "causes"),
        (&doc.triggers, NodeKind::Simple, "triggers"),
    ] {
        for (from, to) in set.iter() {
            let loc = format!("{label} edge {from}->{to}");
            let (Some(&fk), Some(&tk)) = (kinds.get(from), kinds.get(to)) else {
                let missing = if kinds.contains_key(from) { to } else { from };
                out.push(Violation::new(Rule::UnknownEvent, loc, format!("`{missing}` is not declared")));
                edge_ok = false;
                continue;
            };
            if fk != from_kind || tk == from_kind {
                let want = if from_kind == NodeKind::Process {
                    "process -> simple"
                } else {
                    "simple -> process"
                };
                out.push(Violation::new(Rule::BipartiteViolation, loc, format!("`{label}` edges must go {want}")));
                edge_ok = false;
                continue;
            }
            let fresh = if from_kind == NodeKind::Process {
                caused_by.entry(to).or_default().insert(from);
                effects.entry(from).or_default().insert(to)
            } else {
                triggers.entry(to).or_default().insert(from)
            };
            if !fresh {
                out.push(Violation::new(Rule::DuplicateEdge, loc, "edge listed twice"));
            } else {
                adjacency.entry(from).or_default().push(to);
            }
        }
    }

    if let Some(cycle) = find_cycle(&doc.events.iter().map(|e| &e.id).collect::<Vec<_>>(), &adjacency) {
        let path: Vec<&str> = cycle.iter().map(|e| e.as_str()).collect();
        out.push(Violation::new(Rule::CycleError, path.join("->"), "edges form a cycle"));
    }

    // Root and reachability.
    if triggers.contains_key(&doc.omega) {
        out.push(Violation::new(Rule::Omega, doc.omega.as_str(), "root event cannot be triggered"));
    }
    if edge_ok {
        for e in &doc.events {
            if e.id == doc.omega {
                continue;
            }
            match e.kind {
                NodeKind::Process if !triggers.contains_key(&e.id) => out.push(Violation::new(
                    Rule::Orphan,
                    e.id.as_str(),
                    "only the root process may lack triggers; route priors through the root's causal table",
                )),
                NodeKind::Simple if !caused_by.contains_key(&e.id) => out.push(Violation::new(
                    Rule::Orphan,
                    e.id.as_str(),
                    "simple event has no cause; uncaused events must be effects of the root",
                )),
                _ => {}
            }
        }
    }

    // Tables.
    let empty = BTreeSet::new();
    let mut synergy_targets: BTreeSet<&EventId> = BTreeSet::new();
    for spec in &doc.synergy {
        let loc = spec.target.as_str();
        if kinds.get(&spec.target) != Some(&NodeKind::Process) {
            out.push(Violation::new(Rule::TableDomainError, loc, "synergy block target is not a declared process"));
            continue;
        }
        if !synergy_targets.insert(&spec.target) {
            out.push(Violation::new(Rule::TableDomainError, loc, "more than one synergy block"));
        }
        if spec.target == doc.omega {
            out.push(Violation::new(Rule::Omega, loc, "root event occurs with probability one and takes no effectual table"));
            continue;
        }
        if doc.effectual.contains_key(&spec.target) {
            out.push(Violation::new(Rule::TableDomainError, loc, "both an explicit effectual table and a synergy block"));
        }
        let parents: BTreeSet<&EventId> = spec.parents.iter().collect();
        let trig = triggers.get(&spec.target).unwrap_or(&empty);
        if &parents != trig {
            out.push(Violation::new(
                Rule::TableDomainError,
                loc,
                format!(
                    "synergy parents {{{}}} differ from triggers {{{}}}",
                    format_subset(parents.iter().copied()),
                    format_subset(trig.iter().copied())
                ),
            ));
            continue;
        }
        for v in validate_synergy(spec) {
            out.push(Violation::new(Rule::SynergyError, loc, v.to_string()));
        }
    }

    for id in doc.effectual.keys().chain(doc.causal.keys()) {
        if kinds.get(id) != Some(&NodeKind::Process) {
            out.push(Violation::new(Rule::TableDomainError, id.as_str(), "tables may only be attached to processes"));
        }
    }

    for e in doc.events.iter().filter(|e| e.kind == NodeKind::Process) {
        let p = &e.id;
        if *p == doc.omega {
            if let Some(rows) = doc.effectual.get(p) {
                let certain = rows.len() == 1 && rows[0].subset.is_empty() && rows[0].p == 1.0;
                if !certain {
                    out.push(Violation::new(Rule::Omega, p.as_str(), "root effectual table must be {{}: 1}"));
                }
            }
        } else if !synergy_targets.contains(p) {
            match doc.effectual.get(p) {
                Some(rows) => check_table(&mut out, p, "effectual", rows, triggers.get(p).unwrap_or(&empty)),
                None => out.push(Violation::new(Rule::TableDomainError, p.as_str(), "missing effectual table")),
            }
        }

        let eff = effects.get(p).unwrap_or(&empty);
        match doc.causal.get(p) {
            Some(rows) => {
                let before = out.len();
                check_table(&mut out, p, "causal", rows, eff);
                if out.len() == before {
                    let sum: f64 = rows.iter().map(|r| r.p).sum();
                    if (sum - 1.0).abs() > NORMALIZATION_TOL {
                        out.push(Violation::new(
                            Rule::NormalizationError,
                            p.as_str(),
                            format!("causal table sums to {sum}"),
                        ));
                    }
                }
            }
            None if eff.is_empty() => {}
            None => out.push(Violation::new(Rule::TableDomainError, p.as_str(), "missing causal table")),
        }
    }

    out
}

fn check_table(out: &mut Vec<Violation>, p: &EventId, which: &str, rows: &[TableRow], domain: &BTreeSet<&EventId>) {
    if domain.len() > MAX_TABLE_ARITY {
        out.push(Violation::new(
            Rule::TableDomainError,
            p.as_str(),
            format!("{which} table over {} events exceeds the explicit limit of {MAX_TABLE_ARITY}", domain.len()),
        ));
        return;
    }
    let mut keys = BTreeSet::new();
    for row in rows {
        let key: BTreeSet<&EventId> = row.subset.iter().collect();
        let label = format_subset(key.iter().copied());
        if key.len() != row.subset.len() {
            out.push(Violation::new(Rule::TableDomainError, p.as_str(), format!("{which} key {{{label}}} repeats an id")));
        }
        if let Some(stray) = key.iter().find(|k| !domain.contains(*k)) {
            out.push(Violation::new(
                Rule::TableDomainError,
                p.as_str(),
                format!("{which} key {{{label}}} mentions `{stray}` outside the table domain"),
            ));
            continue;
        }
        if !keys.insert(key) {
            out.push(Violation::new(Rule::TableDomainError, p.as_str(), format!("{which} key {{{label}}} listed twice")));
        }
        if !row.p.is_finite() || !(0.0..=1.0).contains(&row.p) {
            out.push(Violation::new(
                Rule::RangeError,
                p.as_str(),
                format!("{which} value {} for {{{label}}} outside [0,1]", row.p),
            ));
        }
    }
    let expected = 1usize << domain.len();
    if keys.len() < expected {
        let members: Vec<&EventId> = domain.iter().copied().collect();
        let first_missing = (0..expected)
            .map(|m| {
                members
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| m >> i & 1 == 1)
                    .map(|(_, e)| *e)
                    .collect::<BTreeSet<_>>()
            })
            .find(|s| !keys.contains(s))
            .unwrap_or_default();
        out.push(Violation::new(
            Rule::TableDomainError,
            p.as_str(),
            format!(
                "{which} table covers {} of {expected} subsets; missing e.g. {{{}}}",
                keys.len(),
                format_subset(first_missing.iter().copied()).trim_matches(|c| c == '{' || c == '}')
            ),
        ));
    }
}

fn find_cycle<'a>(nodes: &[&'a EventId], adjacency: &BTreeMap<&'a EventId, Vec<&'a EventId>>) -> Option<Vec<&'a EventId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark: HashMap<&EventId, Mark> = nodes.iter().map(|n| (*n, Mark::New)).collect();
    for &start in nodes {
        if mark[start] != Mark::New {
            continue;
        }
        // (node, next child index)
        let mut stack: Vec<(&EventId, usize)> = vec![(start, 0)];
        mark.insert(start, Mark::Open);
        while let Some((node, child)) = stack.last_mut() {
            let next = adjacency.get(node).and_then(|c| c.get(*child)).copied();
            *child += 1;
            match next {
                None => {
                    mark.insert(node, Mark::Done);
                    stack.pop();
                }
                Some(n) => match mark.get(n).copied().unwrap_or(Mark::Done) {
                    Mark::New => {
                        mark.insert(n, Mark::Open);
                        stack.push((n, 0));
                    }
                    Mark::Open => {
                        let from = stack.iter().position(|(s, _)| *s == n).unwrap_or(0);
                        let mut cycle: Vec<&EventId> = stack[from..].iter().map(|(s, _)| *s).collect();
                        cycle.push(n);
                        return Some(cycle);
                    }
                    Mark::Done => {}
                },
            }
        }
    }
    None
}
