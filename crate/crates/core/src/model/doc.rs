use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::effectual::SynergySpec;
use crate::event::EventId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Process,
    Simple,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventDecl {
    pub id: EventId,
    pub kind: NodeKind,
}

/// One entry of an effectual or causal table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub subset: Vec<EventId>,
    pub p: f64,
}

impl TableRow {
    pub fn new(subset: &[&str], p: f64) -> Self {
        TableRow {
            subset: subset.iter().map(|s| EventId::from(*s)).collect(),
            p,
        }
    }
}

/// Unvalidated model description, as stored on disk.
///
/// `causes` holds process → simple edges and `triggers` simple → process
/// edges, each as `[from, to]`. Tables are keyed by process id. A process
/// whose effectual table is given as a synergy block must not also have an
/// explicit one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub events: Vec<EventDecl>,
    pub omega: EventId,
    #[serde(default)]
    pub causes: Vec<(EventId, EventId)>,
    #[serde(default)]
    pub triggers: Vec<(EventId, EventId)>,
    #[serde(default)]
    pub effectual: BTreeMap<EventId, Vec<TableRow>>,
    #[serde(default)]
    pub causal: BTreeMap<EventId, Vec<TableRow>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub synergy: Vec<SynergySpec>,
}

impl ModelDoc {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize")
    }

    pub fn kind_of(&self, id: &EventId) -> Option<NodeKind> {
        self.events.iter().find(|e| &e.id == id).map(|e| e.kind)
    }
}

/// Small builder for hand-written model documents.
#[derive(Clone, Debug)]
pub struct DocBuilder {
    doc: ModelDoc,
}

impl DocBuilder {
    pub fn new(omega: &str) -> Self {
        DocBuilder {
            doc: ModelDoc {
                events: vec![EventDecl {
                    id: omega.into(),
                    kind: NodeKind::Process,
                }],
                omega: omega.into(),
                causes: Vec::new(),
                triggers: Vec::new(),
                effectual: BTreeMap::new(),
                causal: BTreeMap::new(),
                synergy: Vec::new(),
            },
        }
    }

    pub fn process(mut self, id: &str) -> Self {
        self.doc.events.push(EventDecl {
            id: id.into(),
            kind: NodeKind::Process,
        });
        self
    }

    pub fn simple(mut self, id: &str) -> Self {
        self.doc.events.push(EventDecl {
            id: id.into(),
            kind: NodeKind::Simple,
        });
        self
    }

    pub fn causes(mut self, process: &str, simple: &str) -> Self {
        self.doc.causes.push((process.into(), simple.into()));
        self
    }

    pub fn triggers(mut self, simple: &str, process: &str) -> Self {
        self.doc.triggers.push((simple.into(), process.into()));
        self
    }

    pub fn effectual(mut self, process: &str, rows: &[(&[&str], f64)]) -> Self {
        self.doc.effectual.insert(
            process.into(),
            rows.iter().map(|(s, p)| TableRow::new(s, *p)).collect(),
        );
        self
    }

    pub fn causal(mut self, process: &str, rows: &[(&[&str], f64)]) -> Self {
        self.doc.causal.insert(
            process.into(),
            rows.iter().map(|(s, p)| TableRow::new(s, *p)).collect(),
        );
        self
    }

    pub fn effectual_rows(mut self, process: &str, rows: Vec<TableRow>) -> Self {
        self.doc.effectual.insert(process.into(), rows);
        self
    }

    pub fn causal_rows(mut self, process: &str, rows: Vec<TableRow>) -> Self {
        self.doc.causal.insert(process.into(), rows);
        self
    }

    pub fn synergy(mut self, spec: SynergySpec) -> Self {
        self.doc.synergy.push(spec);
        self
    }

    pub fn build(self) -> ModelDoc {
        self.doc
    }
}
