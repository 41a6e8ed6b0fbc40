mod common;

use causalkit::inference::{
    brute_force_oracle, estimate_query, forward_sample, joint_distribution, joint_with_elimination_with, query,
    query_with, relevant_subgraph, InferenceConfig, InferenceError, Query,
};
use causalkit::model::{fixtures, CausalModel, DocBuilder};
use causalkit::random::{random_model, RandomModelConfig};
use common::ids;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `omega -> s0 -> p1 -> s1 -> ... -> p{n} -> s{n}`, `n` processes after the root.
fn chain(n: usize) -> CausalModel {
    let mut b = DocBuilder::new("omega").simple("s0").causes("omega", "s0");
    b = b.causal("omega", &[(&["s0"], 0.7), (&[], 0.3)]);
    for i in 1..=n {
        let (p, prev, s) = (format!("p{i}"), format!("s{}", i - 1), format!("s{i}"));
        b = b
            .process(&p)
            .simple(&s)
            .triggers(&prev, &p)
            .causes(&p, &s)
            .effectual(&p, &[(&[], 0.1), (&[prev.as_str()], 0.9)])
            .causal(&p, &[(&[s.as_str()], 0.8), (&[], 0.2)]);
    }
    CausalModel::from_doc(&b.build()).unwrap()
}

#[test]
fn long_chain_with_endpoints_stays_small() {
    let m = chain(6);
    assert!(m.len() >= 12);
    let (jd, stats) =
        joint_with_elimination_with(&m, &ids(&["s0", "s6"]), &InferenceConfig::default()).unwrap();
    assert!(stats.peak_atoms <= 16, "{stats:?}");
    let full = brute_force_oracle(&m).unwrap().marginal(&ids(&["s0", "s6"])).unwrap();
    assert!(full.linf_distance(&jd).unwrap() < 1e-12);
}

#[test]
fn chain_too_long_for_a_full_joint() {
    let m = chain(12);
    let err = joint_distribution(&m).unwrap_err();
    assert!(matches!(err, InferenceError::ModelTooLarge { cap: 20, .. }));
    let q = Query::new(&["s12"], &["s0"], &[]);
    let v = query(&m, &q).unwrap();
    assert!(v > 0.0 && v < 1.0);
}

#[test]
fn m1_queries() {
    let m = fixtures::m1();
    assert!((query(&m, &Query::new(&["s"], &[], &[])).unwrap() - 0.406).abs() < 1e-12);
    assert!((query(&m, &Query::new(&["p"], &["s"], &[])).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(query(&m, &Query::new(&["s"], &[], &["p"])).unwrap(), 0.0);
    let v = query(&m, &Query::new(&["u"], &[], &["s"])).unwrap();
    let jd = joint_distribution(&m).unwrap();
    let expect = jd.prob(&ids(&["u"]), &ids(&["s"])).unwrap() / jd.prob(&[], &ids(&["s"])).unwrap();
    assert!((v - expect).abs() < 1e-12);
}

#[test]
fn query_errors() {
    let m = fixtures::m1();
    assert!(matches!(
        query(&m, &Query::new(&["nope"], &[], &[])),
        Err(InferenceError::UnknownEvent(_))
    ));
    assert!(matches!(
        query(&m, &Query::new(&["s"], &["u"], &["u"])),
        Err(InferenceError::InvalidQuery(_))
    ));
    assert_eq!(query(&m, &Query::new(&[], &["u"], &[])), Ok(1.0));
    let impossible = Query::new(&["u"], &["s"], &["p"]);
    assert_eq!(query(&m, &impossible), Err(InferenceError::ZeroEvidence));
}

#[test]
fn tight_cap_fails_cleanly() {
    let config = InferenceConfig {
        max_live_events: 2,
        ..InferenceConfig::default()
    };
    let err = query_with(&fixtures::m1(), &Query::new(&["s"], &[], &[]), &config).unwrap_err();
    assert!(matches!(err, InferenceError::ModelTooLarge { cap: 2, .. }));
}

#[test]
fn query_deserializes_with_missing_fields() {
    let q: Query = serde_json::from_str(r#"{"targets":["s"]}"#).unwrap();
    assert_eq!(q, Query::new(&["s"], &[], &[]));
}

#[test]
fn samples_repeat_for_a_seed() {
    let m = fixtures::co_occurrence();
    for seed in 0..20 {
        assert_eq!(forward_sample(&m, seed), forward_sample(&m, seed));
    }
    let s = forward_sample(&m, 3);
    assert!(s.contains("omega"));
}

#[test]
fn sampled_estimate_is_close() {
    let m = fixtures::m1();
    let q = Query::new(&["s"], &[], &[]);
    let e = estimate_query(&m, &q, 20_000, 11).unwrap();
    assert_eq!(e.accepted, 20_000);
    assert!((e.estimate - 0.406).abs() <= 4.0 * e.std_error, "{e:?}");
}

#[test]
fn sampling_with_impossible_evidence() {
    let m = fixtures::m1();
    let q = Query::new(&["u"], &["s"], &["p"]);
    assert_eq!(estimate_query(&m, &q, 500, 1), Err(InferenceError::NoAcceptedSamples));
    assert_eq!(
        estimate_query(&m, &Query::new(&["s"], &[], &[]), 0, 1),
        Err(InferenceError::InvalidSampleCount)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sweep_matches_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, &RandomModelConfig::default());
        let jd = joint_distribution(&m).unwrap();
        prop_assert!((jd.total() - 1.0).abs() < 1e-9);
        prop_assert!(brute_force_oracle(&m).unwrap().linf_distance(&jd).unwrap() <= 1e-9);
    }

    #[test]
    fn pruning_does_not_change_answers(seed in any::<u64>(), pick in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&mut rng, &RandomModelConfig::default());
        let names: Vec<&str> = m.events().iter().map(|e| e.id.as_str()).collect();
        let t = names[(pick % names.len() as u64) as usize];
        let e = names[(pick / 7 % names.len() as u64) as usize];
        prop_assume!(t != e);
        let q = Query::new(&[t], &[e], &[]);
        let jd = joint_distribution(&m).unwrap();
        let ev = jd.prob(&ids(&[e]), &[]).unwrap();
        prop_assume!(ev > 1e-9);
        let expect = jd.prob(&ids(&[t, e]), &[]).unwrap() / ev;
        let sub = relevant_subgraph(&m, &q).unwrap();
        prop_assert!(sub.len() <= m.len());
        prop_assert!((query(&m, &q).unwrap() - expect).abs() < 1e-9);
    }
}
