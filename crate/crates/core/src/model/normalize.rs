use super::causal_model::{CausalModel, EffectualTable};
use super::doc::{EventDecl, ModelDoc, NodeKind, TableRow};
use super::levels::assign_levels;
use crate::event::{EventId, RESERVED_PREFIX};

/// Inserts pass-through nodes so that every edge joins adjacent levels.
///
/// An edge that skips levels is replaced by a chain of alternating dummy
/// processes and dummy simple events. Each dummy process occurs exactly when
/// its single trigger does and then causes its single effect with
/// probability one, so the distribution over the original events is
/// unchanged. Dummy ids start with [`RESERVED_PREFIX`].
pub fn normalize_structure(model: &CausalModel) -> CausalModel {
    let levels = assign_levels(model);
    let mut doc = model.to_doc();
    let mut changed = false;

    let mut causes = Vec::new();
    for (p, s) in std::mem::take(&mut doc.causes) {
        let (pi, si) = (idx(model, &p), idx(model, &s));
        let gap = levels.level(si) - levels.level(pi);
        if gap <= 1 {
            causes.push((p, s));
            continue;
        }
        changed = true;
        let chain = dummy_chain(&p, &s, gap - 1, NodeKind::Simple);
        rename_in_causal(&mut doc, &p, &s, &chain[0]);
        causes.push((p.clone(), chain[0].clone()));
        link_chain(&mut doc, &chain, &s, &mut causes);
    }
    doc.causes = causes;

    let mut triggers = Vec::new();
    for (s, p) in std::mem::take(&mut doc.triggers) {
        // chains inserted for cause edges are already adjacent
        let (Some(si), Some(pi)) = (model.index_of(&s), model.index_of(&p)) else {
            triggers.push((s, p));
            continue;
        };
        let gap = levels.level(pi) - levels.level(si);
        if gap <= 1 {
            triggers.push((s, p));
            continue;
        }
        changed = true;
        let chain = dummy_chain(&s, &p, gap - 1, NodeKind::Process);
        let last = chain.last().expect("gap > 1").clone();
        rename_in_effectual(&mut doc, model, &p, &s, &last);
        triggers.push((s.clone(), chain[0].clone()));
        link_chain_from_simple(&mut doc, &s, &chain, &mut triggers);
        triggers.push((last, p));
    }
    doc.triggers = triggers;

    if !changed {
        return model.clone();
    }
    CausalModel::from_doc_with(&doc, true).expect("normalization preserves validity")
}

fn idx(model: &CausalModel, id: &EventId) -> usize {
    model.index_of(id).expect("edge endpoints exist")
}

/// Declares `len` alternating dummy events, the first of kind `first`.
fn dummy_chain(from: &EventId, to: &EventId, len: usize, first: NodeKind) -> Vec<EventId> {
    let mut kind = first;
    (0..len)
        .map(|k| {
            let tag = if kind == NodeKind::Process { 'p' } else { 's' };
            kind = if kind == NodeKind::Process {
                NodeKind::Simple
            } else {
                NodeKind::Process
            };
            EventId::new(format!("{RESERVED_PREFIX}{from}->{to}/{tag}{k}"))
        })
        .collect()
}

fn declare(doc: &mut ModelDoc, id: &EventId, kind: NodeKind) {
    doc.events.push(EventDecl {
        id: id.clone(),
        kind,
    });
}

fn pass_through(doc: &mut ModelDoc, process: &EventId, trigger: &EventId, effect: &EventId) {
    doc.effectual.insert(
        process.clone(),
        vec![
            TableRow {
                subset: vec![],
                p: 0.0,
            },
            TableRow {
                subset: vec![trigger.clone()],
                p: 1.0,
            },
        ],
    );
    doc.causal.insert(
        process.clone(),
        vec![
            TableRow {
                subset: vec![],
                p: 0.0,
            },
            TableRow {
                subset: vec![effect.clone()],
                p: 1.0,
            },
        ],
    );
}

/// Chain `s0 -> p0 -> s1 -> ... -> p_last -> target`, starting at a dummy simple event.
fn link_chain(doc: &mut ModelDoc, chain: &[EventId], target: &EventId, causes: &mut Vec<(EventId, EventId)>) {
    for pair in chain.chunks(2) {
        let (s, p) = (&pair[0], &pair[1]);
        declare(doc, s, NodeKind::Simple);
        declare(doc, p, NodeKind::Process);
        doc.triggers.push((s.clone(), p.clone()));
    }
    for (k, pair) in chain.chunks(2).enumerate() {
        let (s, p) = (&pair[0], &pair[1]);
        let next = chain.get(2 * k + 2).unwrap_or(target);
        pass_through(doc, p, s, next);
        causes.push((p.clone(), next.clone()));
    }
}

/// Chain `p0 -> s0 -> p1 -> ... -> s_last`, starting at a dummy process
/// triggered by the original simple event.
fn link_chain_from_simple(
    doc: &mut ModelDoc,
    source: &EventId,
    chain: &[EventId],
    triggers: &mut Vec<(EventId, EventId)>,
) {
    for (k, pair) in chain.chunks(2).enumerate() {
        let (p, s) = (&pair[0], &pair[1]);
        declare(doc, p, NodeKind::Process);
        declare(doc, s, NodeKind::Simple);
        doc.causes.push((p.clone(), s.clone()));
        let trigger = if k == 0 { source.clone() } else { chain[2 * k - 1].clone() };
        if k > 0 {
            triggers.push((trigger.clone(), p.clone()));
        }
        pass_through(doc, p, &trigger, s);
    }
}

fn rename_in_causal(doc: &mut ModelDoc, process: &EventId, old: &EventId, new: &EventId) {
    if let Some(rows) = doc.causal.get_mut(process) {
        for row in rows {
            rename_subset(&mut row.subset, old, new);
        }
    }
}

fn rename_in_effectual(doc: &mut ModelDoc, model: &CausalModel, process: &EventId, old: &EventId, new: &EventId) {
    let pi = idx(model, process);
    match model.effectual_table(pi) {
        Some(EffectualTable::Compressed(_)) => {
            let spec = doc
                .synergy
                .iter_mut()
                .find(|s| &s.target == process)
                .expect("compressed table has a synergy block");
            for p in &mut spec.parents {
                if p == old {
                    *p = new.clone();
                }
            }
            if let Some(v) = spec.base.remove(old) {
                spec.base.insert(new.clone(), v);
            }
            if let Some(v) = spec.necessity.remove(old) {
                spec.necessity.insert(new.clone(), v);
            }
            for term in &mut spec.synergy {
                rename_subset(&mut term.subset, old, new);
            }
        }
        _ => {
            if let Some(rows) = doc.effectual.get_mut(process) {
                for row in rows {
                    rename_subset(&mut row.subset, old, new);
                }
            }
        }
    }
}

fn rename_subset(subset: &mut [EventId], old: &EventId, new: &EventId) {
    for id in subset.iter_mut() {
        if id == old {
            *id = new.clone();
        }
    }
    subset.sort();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fixtures, DocBuilder};

    #[test]
    fn already_adjacent_models_are_untouched() {
        let m = fixtures::m1();
        assert_eq!(normalize_structure(&m), m);
        let m = fixtures::co_occurrence();
        assert_eq!(normalize_structure(&m), m);
    }

    #[test]
    fn long_trigger_edge_gets_chain() {
        let doc = DocBuilder::new("omega")
            .simple("s")
            .simple("u")
            .process("p1")
            .simple("s1")
            .process("p2")
            .simple("s2")
            .process("q")
            .causes("omega", "s")
            .causes("omega", "u")
            .triggers("u", "p1")
            .causes("p1", "s1")
            .triggers("s1", "p2")
            .causes("p2", "s2")
            .triggers("s2", "q")
            .triggers("s", "q")
            .causal("omega", &[(&[], 0.1), (&["s"], 0.2), (&["u"], 0.3), (&["s", "u"], 0.4)])
            .effectual("p1", &[(&[], 0.0), (&["u"], 0.8)])
            .causal("p1", &[(&[], 0.5), (&["s1"], 0.5)])
            .effectual("p2", &[(&[], 0.1), (&["s1"], 0.7)])
            .causal("p2", &[(&[], 0.4), (&["s2"], 0.6)])
            .effectual("q", &[(&[], 0.05), (&["s"], 0.3), (&["s2"], 0.6), (&["s", "s2"], 0.9)])
            .build();
        let m = CausalModel::from_doc(&doc).unwrap();
        assert_eq!(assign_levels(&m).level_of(&"q".into()), Some(6));
        let n = normalize_structure(&m);
        assert!(n.validate().is_empty(), "{:?}", n.validate());
        assert_eq!(n.len(), m.len() + 4);
        let levels = assign_levels(&n);
        for i in 0..n.len() {
            for &c in crate::model::levels::children(&n, i) {
                assert_eq!(levels.level(c), levels.level(i) + 1, "{} -> {}", n.id(i), n.id(c));
            }
        }
    }
}
