use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::doc::{EventDecl, ModelDoc, NodeKind, TableRow};
use super::validate::{validate_doc_with, Violation};
use crate::effectual::{CompiledSynergy, SynergySpec};
use crate::event::{mask_members, EventId};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model: {}", summarize(.0))]
    Invalid(Vec<Violation>),
    #[error("cannot parse model: {0}")]
    Parse(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(EventId),
    #[error("`{0}` is not a process")]
    NotProcess(EventId),
}

impl ModelError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ModelError::Invalid(v) => v,
            _ => &[],
        }
    }
}

fn summarize(v: &[Violation]) -> String {
    let shown: Vec<String> = v.iter().take(3).map(ToString::to_string).collect();
    let mut s = shown.join("; ");
    if v.len() > 3 {
        s.push_str(&format!("; and {} more", v.len() - 3));
    }
    s
}

/// Effectual table of one process, in whichever form it was supplied.
#[derive(Clone, Debug, PartialEq)]
pub enum EffectualTable {
    /// Probability per exact trigger subset, indexed by bitmask over the
    /// process's triggers in id order.
    Explicit(Vec<f64>),
    Compressed(SynergySpec),
}

/// A validated causal model. Immutable once built.
///
/// Events are addressed internally by index. Adjacency lists are sorted by
/// event id, and every table is indexed by a bitmask over the corresponding
/// sorted list: bit `i` of an effect mask stands for `effects_of(p)[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalModel {
    events: Vec<EventDecl>,
    index: HashMap<EventId, usize>,
    omega: usize,
    effects: Vec<Vec<usize>>,
    causes: Vec<Vec<usize>>,
    triggers: Vec<Vec<usize>>,
    triggered: Vec<Vec<usize>>,
    effectual: Vec<Option<EffectualTable>>,
    compiled: Vec<Option<CompiledSynergy>>,
    causal: Vec<Vec<f64>>,
    // tables left out of the source document (root effectual, empty causal)
    implicit_effectual: Vec<bool>,
    implicit_causal: Vec<bool>,
}

impl CausalModel {
    pub fn from_doc(doc: &ModelDoc) -> Result<Self, ModelError> {
        Self::from_doc_with(doc, false)
    }

    /// Like [`CausalModel::from_doc`]; `allow_reserved` accepts ids carrying
    /// the pass-through prefix, as produced by structure normalization.
    pub fn from_doc_with(doc: &ModelDoc, allow_reserved: bool) -> Result<Self, ModelError> {
        let violations = validate_doc_with(doc, allow_reserved);
        if !violations.is_empty() {
            return Err(ModelError::Invalid(violations));
        }
        Ok(Self::index_valid(doc))
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc = ModelDoc::from_json(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        let reserved = doc.events.iter().any(|e| e.id.is_reserved());
        Self::from_doc_with(&doc, reserved)
    }

    pub fn to_json(&self) -> String {
        self.to_doc().to_json()
    }

    fn index_valid(doc: &ModelDoc) -> Self {
        let events = doc.events.clone();
        let n = events.len();
        let index: HashMap<EventId, usize> = events
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();
        let by_id = |list: &mut Vec<usize>| list.sort_by(|a, b| events[*a].id.cmp(&events[*b].id));

        let mut effects = vec![Vec::new(); n];
        let mut causes = vec![Vec::new(); n];
        let mut triggers = vec![Vec::new(); n];
        let mut triggered = vec![Vec::new(); n];
        for (p, s) in &doc.causes {
            effects[index[p]].push(index[s]);
            causes[index[s]].push(index[p]);
        }
        for (s, p) in &doc.triggers {
            triggers[index[p]].push(index[s]);
            triggered[index[s]].push(index[p]);
        }
        for list in effects
            .iter_mut()
            .chain(causes.iter_mut())
            .chain(triggers.iter_mut())
            .chain(triggered.iter_mut())
        {
            by_id(list);
        }

        let omega = index[&doc.omega];
        let synergy: BTreeMap<&EventId, &SynergySpec> =
            doc.synergy.iter().map(|s| (&s.target, s)).collect();
        let mut effectual = vec![None; n];
        let mut compiled = vec![None; n];
        let mut causal = vec![Vec::new(); n];
        let mut implicit_effectual = vec![false; n];
        let mut implicit_causal = vec![false; n];

        let mask_of = |list: &[usize], subset: &[EventId]| -> usize {
            subset
                .iter()
                .map(|id| 1usize << list.iter().position(|&i| events[i].id == *id).expect("validated key"))
                .sum()
        };

        for (p, decl) in events.iter().enumerate() {
            if decl.kind != NodeKind::Process {
                continue;
            }
            if let Some(spec) = synergy.get(&decl.id) {
                let order: Vec<EventId> = triggers[p].iter().map(|&i| events[i].id.clone()).collect();
                compiled[p] = Some(CompiledSynergy::compile(spec, &order));
                effectual[p] = Some(EffectualTable::Compressed((*spec).clone()));
            } else if let Some(rows) = doc.effectual.get(&decl.id) {
                let mut table = vec![0.0; 1 << triggers[p].len()];
                for row in rows {
                    table[mask_of(&triggers[p], &row.subset)] = row.p;
                }
                effectual[p] = Some(EffectualTable::Explicit(table));
            } else {
                debug_assert_eq!(p, omega);
                implicit_effectual[p] = true;
                effectual[p] = Some(EffectualTable::Explicit(vec![1.0]));
            }

            match doc.causal.get(&decl.id) {
                Some(rows) => {
                    let mut table = vec![0.0; 1 << effects[p].len()];
                    for row in rows {
                        table[mask_of(&effects[p], &row.subset)] = row.p;
                    }
                    causal[p] = table;
                }
                None => {
                    implicit_causal[p] = true;
                    causal[p] = vec![1.0];
                }
            }
        }

        CausalModel {
            events,
            index,
            omega,
            effects,
            causes,
            triggers,
            triggered,
            effectual,
            compiled,
            causal,
            implicit_effectual,
            implicit_causal,
        }
    }

    /// Rebuilds the document form. Subset keys come out sorted by id.
    pub fn to_doc(&self) -> ModelDoc {
        let mut doc = ModelDoc {
            events: self.events.clone(),
            omega: self.events[self.omega].id.clone(),
            causes: Vec::new(),
            triggers: Vec::new(),
            effectual: BTreeMap::new(),
            causal: BTreeMap::new(),
            synergy: Vec::new(),
        };
        for p in self.processes() {
            for &s in &self.effects[p] {
                doc.causes.push((self.id(p).clone(), self.id(s).clone()));
            }
            for &s in &self.triggers[p] {
                doc.triggers.push((self.id(s).clone(), self.id(p).clone()));
            }
            match self.effectual[p].as_ref().expect("processes carry effectual tables") {
                _ if self.implicit_effectual[p] => {}
                EffectualTable::Compressed(spec) => doc.synergy.push(spec.clone()),
                EffectualTable::Explicit(table) => {
                    doc.effectual
                        .insert(self.id(p).clone(), self.rows(&self.triggers[p], table));
                }
            }
            if !self.implicit_causal[p] {
                doc.causal
                    .insert(self.id(p).clone(), self.rows(&self.effects[p], &self.causal[p]));
            }
        }
        doc
    }

    fn rows(&self, domain: &[usize], table: &[f64]) -> Vec<TableRow> {
        table
            .iter()
            .enumerate()
            .map(|(mask, &p)| TableRow {
                subset: mask_members(domain, mask as u64)
                    .map(|&i| self.id(i).clone())
                    .collect(),
                p,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[EventDecl] {
        &self.events
    }

    pub fn id(&self, i: usize) -> &EventId {
        &self.events[i].id
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        self.events[i].kind
    }

    pub fn index_of(&self, id: &EventId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn omega(&self) -> usize {
        self.omega
    }

    pub fn omega_id(&self) -> &EventId {
        self.id(self.omega)
    }

    pub fn processes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.kind(i) == NodeKind::Process)
    }

    pub fn effects_of(&self, p: usize) -> &[usize] {
        &self.effects[p]
    }

    pub fn causes_of(&self, s: usize) -> &[usize] {
        &self.causes[s]
    }

    pub fn triggers_of(&self, p: usize) -> &[usize] {
        &self.triggers[p]
    }

    pub fn triggered_by(&self, s: usize) -> &[usize] {
        &self.triggered[s]
    }

    pub fn effectual_table(&self, p: usize) -> Option<&EffectualTable> {
        self.effectual[p].as_ref()
    }

    /// `pr(p | exactly the triggers in trigger_mask occurred)`.
    pub fn effectual_prob(&self, p: usize, trigger_mask: u64) -> f64 {
        match (&self.effectual[p], &self.compiled[p]) {
            (_, Some(c)) => c.eval(trigger_mask).clamp(0.0, 1.0),
            (Some(EffectualTable::Explicit(t)), None) => t[trigger_mask as usize],
            _ => panic!("`{}` is not a process", self.id(p)),
        }
    }

    /// Causal table of `p`, indexed by bitmask over `effects_of(p)`.
    pub fn causal_table(&self, p: usize) -> &[f64] {
        &self.causal[p]
    }

    pub fn causal_rows(&self, p: usize) -> Vec<TableRow> {
        self.rows(&self.effects[p], &self.causal[p])
    }

    /// Chance that `p`, once it occurs, causes `s` (alone or with others).
    pub fn causal_marginal(&self, p: usize, s: usize) -> f64 {
        let Some(bit) = self.effects[p].iter().position(|&e| e == s) else {
            return 0.0;
        };
        self.causal[p]
            .iter()
            .enumerate()
            .filter(|(mask, _)| mask >> bit & 1 == 1)
            .map(|(_, &m)| m)
            .sum()
    }

    pub fn has_reserved_ids(&self) -> bool {
        self.events.iter().any(|e| e.id.is_reserved())
    }

    /// Re-runs document validation on this model.
    pub fn validate(&self) -> Vec<Violation> {
        validate_doc_with(&self.to_doc(), self.has_reserved_ids())
    }

    /// Returns a copy with `p`'s causal table replaced.
    pub fn with_causal_table(&self, p: &EventId, rows: Vec<TableRow>) -> Result<CausalModel, ModelError> {
        let pi = self
            .index_of(p)
            .ok_or_else(|| ModelError::UnknownEvent(p.clone()))?;
        if self.kind(pi) != NodeKind::Process {
            return Err(ModelError::NotProcess(p.clone()));
        }
        let mut doc = self.to_doc();
        doc.causal.insert(p.clone(), rows);
        CausalModel::from_doc_with(&doc, self.has_reserved_ids())
    }
}

/// Validation entry point over an unbuilt description.
pub fn validate_model(doc: &ModelDoc) -> Vec<Violation> {
    super::validate::validate_doc(doc)
}

/// Validates a model description and indexes it.
pub fn build_model(doc: &ModelDoc) -> Result<CausalModel, ModelError> {
    CausalModel::from_doc(doc)
}
