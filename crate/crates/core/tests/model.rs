mod common;

use causalkit::inference::{brute_force_oracle, joint_distribution, joint_distribution_with, InferenceConfig};
use causalkit::model::fixtures::{self, warning_fragment_doc};
use causalkit::model::{
    assign_levels, build_model, edge_event, import_dgraph, normalize_structure, prior_event, validate_model, CausalModel,
    CptRow, DiscreteBayesNet, DocBuilder, ImportError, ModelDoc, NetVariable, Rule, TableRow,
};
use causalkit::random::{random_model_doc, random_net, RandomModelConfig};
use causalkit::EventId;
use common::ids;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rules(doc: &ModelDoc) -> Vec<Rule> {
    validate_model(doc).into_iter().map(|v| v.rule).collect()
}

#[test]
fn m1_is_valid_with_depth_three() {
    let doc = fixtures::m1_doc();
    assert!(validate_model(&doc).is_empty());
    let m = build_model(&doc).unwrap();
    let levels = assign_levels(&m);
    assert_eq!(levels.depth(), 3);
    let map = levels.as_map();
    assert_eq!(map[&EventId::from("omega")], 0);
    assert_eq!(map[&EventId::from("u")], 1);
    assert_eq!(map[&EventId::from("p")], 2);
    assert_eq!(map[&EventId::from("s")], 3);
}

#[test]
fn causal_table_off_by_a_tenth() {
    let mut doc = fixtures::m1_doc();
    doc.causal.get_mut(&EventId::from("p")).unwrap()[0].p = 0.6;
    assert_eq!(rules(&doc), vec![Rule::NormalizationError]);
    assert!(build_model(&doc).is_err());
}

#[test]
fn simple_to_simple_edge() {
    let mut doc = fixtures::m1_doc();
    doc.causes.push(("u".into(), "s".into()));
    assert!(rules(&doc).contains(&Rule::BipartiteViolation));
}

#[test]
fn missing_empty_row() {
    let mut doc = fixtures::m1_doc();
    doc.causal.get_mut(&EventId::from("p")).unwrap().retain(|r| !r.subset.is_empty());
    let v = validate_model(&doc);
    assert!(v.iter().any(|x| x.rule == Rule::TableDomainError && x.location.contains('p')), "{v:?}");
}

#[test]
fn value_out_of_range() {
    let mut doc = fixtures::m1_doc();
    doc.effectual.get_mut(&EventId::from("p")).unwrap()[0].p = 1.5;
    assert!(rules(&doc).contains(&Rule::RangeError));
}

#[test]
fn cycle_is_named() {
    let doc = DocBuilder::new("omega")
        .simple("u")
        .process("p")
        .simple("s")
        .causes("omega", "u")
        .triggers("u", "p")
        .causes("p", "s")
        .triggers("s", "p")
        .causal("omega", &[(&["u"], 1.0), (&[], 0.0)])
        .effectual("p", &[(&[], 0.0), (&["u"], 0.5), (&["s"], 0.5), (&["s", "u"], 0.5)])
        .causal("p", &[(&["s"], 0.5), (&[], 0.5)])
        .build();
    let v = validate_model(&doc);
    let cycle = v.iter().find(|x| x.rule == Rule::CycleError).expect("cycle reported");
    assert_eq!(cycle.location, "p->s->p");
}

#[test]
fn warning_fragment_is_valid() {
    let doc = warning_fragment_doc();
    assert!(validate_model(&doc).is_empty(), "{:?}", validate_model(&doc));
    let m = build_model(&doc).unwrap();
    assert_eq!(assign_levels(&m).level_of(&"sensor-report".into()), Some(4));
}

#[test]
fn second_root_process_rejected() {
    let mut doc = fixtures::m1_doc();
    doc.events.push(causalkit::model::EventDecl {
        id: "q".into(),
        kind: causalkit::NodeKind::Process,
    });
    doc.effectual.insert("q".into(), vec![TableRow::new(&[], 1.0)]);
    assert!(rules(&doc).contains(&Rule::Orphan));
}

#[test]
fn reserved_prefix_needs_opt_in() {
    let mut doc = fixtures::m1_doc();
    let json = doc.to_json().replace("\"s\"", "\"__dummy/s\"");
    doc = ModelDoc::from_json(&json).unwrap();
    assert!(rules(&doc).contains(&Rule::ReservedId));
}

#[test]
fn co_occurrence_levels() {
    let m = fixtures::co_occurrence();
    let l = assign_levels(&m);
    for p in ["a", "b"] {
        assert_eq!(l.level_of(&p.into()), Some(2));
    }
    for s in ["x", "y"] {
        assert_eq!(l.level_of(&s.into()), Some(3));
    }
}

#[test]
fn lone_root() {
    let m = CausalModel::from_doc(&DocBuilder::new("omega").build()).unwrap();
    assert_eq!(assign_levels(&m).depth(), 0);
    let jd = joint_distribution(&m).unwrap();
    assert_eq!(jd.mass_of(&ids(&["omega"])).unwrap(), 1.0);
}

#[test]
fn json_round_trip_is_bit_exact() {
    let m = fixtures::m1();
    let text = m.to_json();
    let back = CausalModel::from_json(&text).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.to_json(), text);
}

#[test]
fn normalization_preserves_the_joint() {
    let doc = DocBuilder::new("omega")
        .simple("s")
        .simple("u")
        .process("p1")
        .simple("s1")
        .process("p2")
        .simple("s2")
        .process("q")
        .simple("out")
        .causes("omega", "s")
        .causes("omega", "u")
        .triggers("u", "p1")
        .causes("p1", "s1")
        .triggers("s1", "p2")
        .causes("p2", "s2")
        .triggers("s2", "q")
        .triggers("s", "q")
        .causes("q", "out")
        .causal("omega", &[(&[], 0.1), (&["s"], 0.2), (&["u"], 0.3), (&["s", "u"], 0.4)])
        .effectual("p1", &[(&[], 0.0), (&["u"], 0.8)])
        .causal("p1", &[(&[], 0.5), (&["s1"], 0.5)])
        .effectual("p2", &[(&[], 0.1), (&["s1"], 0.7)])
        .causal("p2", &[(&[], 0.4), (&["s2"], 0.6)])
        .effectual("q", &[(&[], 0.05), (&["s"], 0.3), (&["s2"], 0.6), (&["s", "s2"], 0.9)])
        .causal("q", &[(&[], 0.25), (&["out"], 0.75)])
        .build();
    let m = CausalModel::from_doc(&doc).unwrap();
    let n = normalize_structure(&m);
    assert!(n.len() > m.len());
    let before = brute_force_oracle(&m).unwrap();
    let after = joint_distribution(&n).unwrap();
    assert_eq!(after.domain().len(), m.len(), "pass-through nodes stay out of results");
    assert!(before.linf_distance(&after).unwrap() <= 1e-9);
    let round = CausalModel::from_json(&n.to_json()).unwrap();
    assert_eq!(round, n);
}

#[test]
fn normalizing_an_adjacent_model_is_identity() {
    for m in [fixtures::m1(), fixtures::co_occurrence()] {
        assert_eq!(normalize_structure(&m), m);
    }
}

fn two_node_net() -> DiscreteBayesNet {
    DiscreteBayesNet {
        variables: vec![
            NetVariable {
                id: "a".into(),
                arity: 2,
                parents: vec![],
                cpt: vec![CptRow { given: vec![], p: 0.5 }],
            },
            NetVariable {
                id: "b".into(),
                arity: 2,
                parents: vec!["a".into()],
                cpt: vec![
                    CptRow { given: vec!["a".into()], p: 0.8 },
                    CptRow { given: vec![], p: 0.2 },
                ],
            },
        ],
    }
}

#[test]
fn import_two_node_chain() {
    let m = import_dgraph(&two_node_net()).unwrap();
    let s = edge_event(&"a".into(), &"b".into());
    assert!(m.index_of(&s).is_some());
    assert!(m.index_of(&prior_event(&"a".into())).is_some());
    let simple = m.events().iter().filter(|e| e.kind == causalkit::NodeKind::Simple).count();
    assert_eq!(simple, 2);
    let jd = joint_distribution(&m).unwrap();
    assert!((jd.prob(&ids(&["b"]), &[]).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn import_single_root() {
    let net = DiscreteBayesNet {
        variables: vec![NetVariable {
            id: "a".into(),
            arity: 2,
            parents: vec![],
            cpt: vec![CptRow { given: vec![], p: 0.3 }],
        }],
    };
    let m = import_dgraph(&net).unwrap();
    let jd = joint_distribution(&m).unwrap();
    assert!((jd.prob(&ids(&["a"]), &[]).unwrap() - 0.3).abs() < 1e-15);
}

#[test]
fn import_rejects_non_binary() {
    let mut net = two_node_net();
    net.variables[0].arity = 3;
    assert!(matches!(import_dgraph(&net), Err(ImportError::NonBinary { .. })));
}

#[test]
fn import_counts_simple_events() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let net = random_net(&mut rng, 5, 3);
        let m = import_dgraph(&net).unwrap();
        let roots = net.variables.iter().filter(|v| v.parents.is_empty()).count();
        let simple = m.events().iter().filter(|e| e.kind == causalkit::NodeKind::Simple).count();
        assert_eq!(simple, net.edge_count() + roots);
    }
}

#[test]
fn root_name_clash_is_avoided() {
    let mut net = two_node_net();
    net.variables[0].id = "omega".into();
    net.variables[1].parents = vec!["omega".into()];
    net.variables[1].cpt[0].given = vec!["omega".into()];
    let m = import_dgraph(&net).unwrap();
    assert_eq!(m.omega_id().as_str(), "omega_");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_models_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let doc = random_model_doc(&mut rng, &RandomModelConfig::default());
        let m = CausalModel::from_doc(&doc).unwrap();
        let back = CausalModel::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(&back, &m);
        for p in m.processes() {
            let a: Vec<u64> = m.causal_table(p).iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = back.causal_table(p).iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn levels_grade_every_edge(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = CausalModel::from_doc(&random_model_doc(&mut rng, &RandomModelConfig::default())).unwrap();
        let l = assign_levels(&m);
        for i in 0..m.len() {
            let parents: Vec<usize> = match m.kind(i) {
                causalkit::NodeKind::Process => m.triggers_of(i).to_vec(),
                causalkit::NodeKind::Simple => m.causes_of(i).to_vec(),
            };
            for &q in &parents {
                prop_assert!(l.level(q) < l.level(i));
            }
            if i != m.omega() {
                prop_assert!(parents.iter().any(|&q| l.level(q) + 1 == l.level(i)));
            }
            let even = l.level(i).is_multiple_of(2);
            prop_assert_eq!(even, m.kind(i) == causalkit::NodeKind::Process);
        }
    }

    #[test]
    fn normalization_preserves_random_joints(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = CausalModel::from_doc(&random_model_doc(&mut rng, &RandomModelConfig::default())).unwrap();
        let n = normalize_structure(&m);
        let config = InferenceConfig { max_live_events: 64, ..InferenceConfig::default() };
        let (jd, _) = joint_distribution_with(&n, &config).unwrap();
        let d = brute_force_oracle(&m).unwrap().linf_distance(&jd).unwrap();
        prop_assert!(d <= 1e-9);
    }
}
