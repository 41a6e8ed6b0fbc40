use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use causalkit::model::{fixtures, DocBuilder, ModelDoc};
use causalkit_service::{app, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

struct Harness {
    dir: TempDir,
    state: Arc<AppState>,
}

impl Harness {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let state = AppState::open(dir.path()).unwrap();
        Harness { dir, state }
    }

    fn app(&self) -> Router {
        app(self.state.clone())
    }

    async fn send(&self, method: &str, uri: &str, body: Option<String>) -> (StatusCode, String) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.map(Body::from).unwrap_or_else(Body::empty))
            .unwrap();
        let resp = self.app().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, String::from_utf8(bytes.to_vec()).unwrap())
    }

    async fn json(&self, method: &str, uri: &str, body: Value) -> (StatusCode, Value) {
        let (status, text) = self.send(method, uri, Some(body.to_string())).await;
        (status, serde_json::from_str(&text).unwrap_or(Value::Null))
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        let (status, text) = self.send("GET", uri, None).await;
        (status, serde_json::from_str(&text).unwrap_or(Value::Null))
    }

    async fn create(&self, doc: &ModelDoc) -> String {
        let (status, text) = self.send("POST", "/models", Some(doc.to_json())).await;
        assert_eq!(status, StatusCode::CREATED, "{text}");
        serde_json::from_str::<Value>(&text).unwrap()["id"].as_str().unwrap().to_owned()
    }

    async fn start(&self, model: &str, process: &str) -> String {
        let (status, v) = self
            .json("POST", &format!("/models/{model}/sessions"), json!({ "process": process }))
            .await;
        assert_eq!(status, StatusCode::CREATED, "{v}");
        v["id"].as_str().unwrap().to_owned()
    }
}

fn assert_error(v: &Value, code: &str) {
    assert_eq!(v["code"], code, "{v}");
    assert!(v["message"].is_string());
    assert!(v.get("details").is_some());
}

#[tokio::test]
async fn model_lifecycle() {
    let h = Harness::new();
    let text = fixtures::m1_doc().to_json();
    let (status, body) = h.send("POST", "/models", Some(text.clone())).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = serde_json::from_str::<Value>(&body).unwrap()["id"].as_str().unwrap().to_owned();

    let (status, body) = h.send("GET", &format!("/models/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    #[derive(serde::Deserialize)]
    struct Env<'a> {
        version: u64,
        #[serde(borrow)]
        document: &'a serde_json::value::RawValue,
    }
    let env: Env = serde_json::from_str(&body).unwrap();
    assert_eq!(env.version, 1);
    assert_eq!(env.document.get(), text.trim());

    let (_, again) = h.send("GET", &format!("/models/{id}"), None).await;
    assert_eq!(again, body);

    let (_, list) = h.get("/models").await;
    assert_eq!(list["models"][0]["id"], id.as_str());

    let (status, _) = h.send("DELETE", &format!("/models/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, v) = h.get(&format!("/models/{id}")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&v, "NotFound");
}

#[tokio::test]
async fn invalid_models_are_rejected() {
    let h = Harness::new();
    let mut doc = fixtures::m1_doc();
    doc.triggers.push(("s".into(), "p".into()));
    let (status, v) = h.json("POST", "/models", serde_json::from_str(&doc.to_json()).unwrap()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&v, "InvalidModel");
    let rules: Vec<&str> = v["details"]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["rule"].as_str().unwrap())
        .collect();
    assert!(rules.contains(&"CycleError"), "{rules:?}");

    let (status, text) = h.send("POST", "/models", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&serde_json::from_str(&text).unwrap(), "MalformedRequest");
    assert!(h.get("/models").await.1["models"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn unknown_model() {
    let h = Harness::new();
    let (status, v) = h.get("/models/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&v, "NotFound");
    let (status, _) = h.json("POST", "/models/nope/query", json!({ "targets": ["s"] })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn exact_queries() {
    let h = Harness::new();
    let m1 = h.create(&fixtures::m1_doc()).await;
    let (status, v) = h
        .json("POST", &format!("/models/{m1}/query"), json!({ "targets": ["p"], "evidence_true": ["s"] }))
        .await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert!((v["probability"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let fig = h.create(&fixtures::co_occurrence_doc(&Default::default())).await;
    let (_, v) = h
        .json(
            "POST",
            &format!("/models/{fig}/query"),
            json!({ "targets": ["b"], "evidence_true": ["a", "x", "y"], "method": "exact" }),
        )
        .await;
    let p = v["probability"].as_f64().unwrap();
    assert!((p - 0.76923).abs() < 1e-5, "{p}");
    assert!((p - 0.2 / 0.26).abs() < 1e-12);

    let (status, v) = h
        .json(
            "POST",
            &format!("/models/{m1}/query"),
            json!({ "targets": ["u"], "evidence_true": ["s"], "evidence_false": ["p"] }),
        )
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&v, "ZeroEvidence");

    let (status, v) = h.json("POST", &format!("/models/{m1}/query"), json!({ "targets": ["zz"] })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&v, "UnknownEvent");
}

#[tokio::test]
async fn probabilities_survive_the_wire() {
    let h = Harness::new();
    let fig = h.create(&fixtures::co_occurrence_doc(&Default::default())).await;
    let body = json!({ "targets": ["b"], "evidence_true": ["a", "x", "y"] });
    let (_, text) = h.send("POST", &format!("/models/{fig}/query"), Some(body.to_string())).await;
    let v: Value = serde_json::from_str(&text).unwrap();
    let direct = causalkit::inference::query(
        &causalkit::model::fixtures::co_occurrence(),
        &causalkit::inference::Query::new(&["b"], &["a", "x", "y"], &[]),
    )
    .unwrap();
    assert_eq!(v["probability"].as_f64().unwrap().to_bits(), direct.to_bits());
}

/// `omega` triggers `n` independent chains `t{i} -> q{i} -> r{i}`.
fn wide_doc(n: usize) -> ModelDoc {
    let t: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let mut b = DocBuilder::new("omega");
    for (i, ti) in t.iter().enumerate() {
        let (qi, ri) = (format!("q{i}"), format!("r{i}"));
        b = b
            .simple(ti)
            .process(&qi)
            .simple(&ri)
            .causes("omega", ti)
            .triggers(ti, &qi)
            .causes(&qi, &ri)
            .effectual(&qi, &[(&[], 0.0), (&[ti.as_str()], 1.0)])
            .causal(&qi, &[(&[], 0.0), (&[ri.as_str()], 1.0)]);
    }
    let rows: Vec<Vec<&str>> = (0u32..1 << n)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| t[i].as_str()).collect())
        .collect();
    let p = 1.0 / (1u32 << n) as f64;
    let table: Vec<(&[&str], f64)> = rows.iter().map(|r| (r.as_slice(), p)).collect();
    b.causal("omega", &table).build()
}

#[tokio::test]
async fn oversize_exact_query_suggests_sampling() {
    let h = Harness::new();
    let id = h.create(&wide_doc(11)).await;
    let targets: Vec<String> = (0..11).map(|i| format!("r{i}")).collect();
    let (status, v) = h
        .json("POST", &format!("/models/{id}/query"), json!({ "targets": targets, "method": "exact" }))
        .await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_error(&v, "ModelTooLarge");
    assert_eq!(v["details"]["suggest"], "sample");

    let (status, v) = h
        .json(
            "POST",
            &format!("/models/{id}/query"),
            json!({ "targets": targets, "method": "sample", "n": 4000, "seed": 5 }),
        )
        .await;
    assert_eq!(status, StatusCode::OK);
    let p = v["probability"].as_f64().unwrap();
    assert!((p - 1.0 / 2048.0).abs() < 0.002, "{v}");
    let (_, again) = h
        .json(
            "POST",
            &format!("/models/{id}/query"),
            json!({ "targets": targets, "method": "sample", "n": 4000, "seed": 5 }),
        )
        .await;
    assert_eq!(again["probability"], v["probability"]);
}

#[tokio::test]
async fn session_flow_with_out_of_range_commit() {
    let h = Harness::new();
    let fig = h.create(&fixtures::co_occurrence_doc(&Default::default())).await;
    let sid = h.start(&fig, "a").await;

    let (_, state) = h.get(&format!("/sessions/{sid}")).await;
    let subsets: Vec<Value> = state["sequence"].as_array().unwrap().iter().map(|e| e["subset"].clone()).collect();
    assert_eq!(subsets, vec![json!(["x"]), json!(["y"]), json!(["x", "y"])]);
    assert_eq!(state["sequence"][0]["status"], "current");

    for v in [0.5, 0.5] {
        let (status, _) = h.json("POST", &format!("/sessions/{sid}/commit"), json!({ "value": v })).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (_, r) = h.get(&format!("/sessions/{sid}/range")).await;
    assert_eq!(r["subset"], json!(["x", "y"]));
    assert!(r["lo"].as_f64().unwrap().abs() < 1e-9 && (r["hi"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    let (status, v) = h.json("POST", &format!("/sessions/{sid}/commit"), json!({ "value": 0.6 })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&v, "OutOfRange");
    assert!((v["details"]["range"]["hi"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(v["details"]["range"]["lo"].as_f64().unwrap().abs() < 1e-9);

    let (status, v) = h.json("POST", &format!("/sessions/{sid}/default"), json!({})).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["finished"], true);

    let (status, v) = h.json("POST", &format!("/sessions/{sid}/complete"), json!({})).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["version"], 2);
    for row in v["table"].as_array().unwrap() {
        assert!((row["p"].as_f64().unwrap() - 0.25).abs() < 1e-9, "{row}");
    }
    let (_, env) = h.get(&format!("/models/{fig}")).await;
    assert_eq!(env["version"], 2);
    let installed = causalkit::CausalModel::from_json(&env["document"].to_string()).unwrap();
    let a = installed.index_of(&"a".into()).unwrap();
    assert!(installed.causal_table(a).iter().all(|p| (p - 0.25).abs() < 1e-9));

    for (method, uri) in [
        ("POST", "complete"),
        ("POST", "commit"),
        ("POST", "default"),
        ("GET", "range"),
    ] {
        let body = (method == "POST").then(|| json!({ "value": 0.1 }).to_string());
        let (status, text) = h.send(method, &format!("/sessions/{sid}/{uri}"), body).await;
        assert_eq!(status, StatusCode::GONE, "{uri}: {text}");
    }
    let (status, state) = h.get(&format!("/sessions/{sid}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(state["completed"], true);
}

#[tokio::test]
async fn singleton_default_and_conditional_commit() {
    let h = Harness::new();
    let fig = h.create(&fixtures::co_occurrence_doc(&Default::default())).await;
    let sid = h.start(&fig, "a").await;
    let (status, v) = h.json("POST", &format!("/sessions/{sid}/default"), json!({})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&v, "SingletonDefault");

    h.json("POST", &format!("/sessions/{sid}/commit"), json!({ "value": 0.4 })).await;
    h.json("POST", &format!("/sessions/{sid}/commit"), json!({ "value": 0.5 })).await;
    let (status, v) = h
        .json("POST", &format!("/sessions/{sid}/commit"), json!({ "value": 0.5, "given": ["x"] }))
        .await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert!((v["sequence"][2]["value"].as_f64().unwrap() - 0.2).abs() < 1e-15);
    assert_eq!(v["log"][2]["action"], "commit_conditional");
}

#[tokio::test]
async fn session_errors() {
    let h = Harness::new();
    let m1 = h.create(&fixtures::m1_doc()).await;
    let (status, _) = h.json("POST", &format!("/models/{m1}/sessions"), json!({ "process": "zz" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, v) = h.json("POST", &format!("/models/{m1}/sessions"), json!({ "process": "s" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&v, "NotProcess");
    let fig = h.create(&fixtures::co_occurrence_doc(&Default::default())).await;
    let (status, v) = h
        .json(
            "POST",
            &format!("/models/{fig}/sessions"),
            json!({ "process": "a", "order": ["x,y", "x", "y"] }),
        )
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&v, "IllegalOrder");
    let (status, _) = h.get("/sessions/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let sid = h.start(&fig, "a").await;
    let (status, v) = h.json("POST", &format!("/sessions/{sid}/complete"), json!({})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&v, "NotFinished");
}

#[tokio::test]
async fn stale_position_loses() {
    let h = Harness::new();
    let fig = h.create(&fixtures::co_occurrence_doc(&Default::default())).await;
    let sid = h.start(&fig, "a").await;
    let uri = format!("/sessions/{sid}/commit");
    let body = json!({ "value": 0.3, "position": 0 });
    let (a, b) = tokio::join!(h.json("POST", &uri, body.clone()), h.json("POST", &uri, body.clone()));
    let mut statuses = [a.0, b.0];
    statuses.sort();
    assert_eq!(statuses, [StatusCode::OK, StatusCode::CONFLICT]);
    let loser = if a.0 == StatusCode::CONFLICT { a.1 } else { b.1 };
    assert_error(&loser, "StalePosition");
    assert_eq!(h.get(&format!("/sessions/{sid}")).await.1["position"], 1);
}

#[tokio::test]
async fn state_survives_restart() {
    let h = Harness::new();
    let fig = h.create(&fixtures::co_occurrence_doc(&Default::default())).await;
    let sid = h.start(&fig, "a").await;
    h.json("POST", &format!("/sessions/{sid}/commit"), json!({ "value": 0.3 })).await;

    let reopened = Harness {
        state: AppState::open(h.dir.path()).unwrap(),
        dir: h.dir,
    };
    let (status, v) = reopened.get(&format!("/sessions/{sid}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["position"], 1);
    assert_eq!(reopened.get(&format!("/models/{fig}")).await.1["version"], 1);
    let leftovers: Vec<_> = std::fs::read_dir(reopened.dir.path().join("models"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[tokio::test]
async fn synergy_preview() {
    let h = Harness::new();
    let spec = json!({ "target": "x", "parents": ["a", "b"], "base": { "a": 0.6, "b": 0.5 } });
    let (status, v) = h.json("POST", "/synergy/expand", spec).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert!(v["violations"].as_array().unwrap().is_empty());

    let spec = json!({
        "target": "x", "parents": ["a", "b"], "base": { "a": 0.5, "b": 0.5 },
        "synergy": [{ "subset": ["a", "b"], "sy": 1.5 }]
    });
    let (_, v) = h.json("POST", "/synergy/expand", spec).await;
    assert!(v["rows"].is_null());
    assert_eq!(v["violations"][0]["rule"], "SynergyAboveOne");

    let spec = json!({
        "target": "x", "parents": ["a", "b", "c"], "base": { "a": 0.6, "b": 0.5, "c": 0.4 },
        "necessity": { "c": 1.0 }
    });
    let (_, v) = h.json("POST", "/synergy/expand", spec).await;
    for row in v["rows"].as_array().unwrap() {
        if !row["subset"].as_array().unwrap().contains(&json!("c")) {
            assert_eq!(row["p"], 0.0);
        }
    }

    let (status, v) = h.json("POST", "/synergy/expand", json!({ "target": 3 })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&v, "MalformedRequest");
}
