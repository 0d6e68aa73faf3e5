mod common;

use std::fs;
use std::time::Duration;

use recorder_core::model::schema::{dump_schemas, ID_BASE};
use recorder_core::model::{SessionStatus, StreamId};
use recorder_core::sim::generate::demo_scenario;
use recorder_server::schema::api_schemas;
use reqwest::Method;
use serde_json::{json, Value};

fn validator(name: &str) -> jsonschema::Validator {
    let mut opts = jsonschema::options();
    for (file, doc) in dump_schemas() {
        opts = opts.with_resource(
            format!("{ID_BASE}/{file}"),
            jsonschema::Resource::from_contents(doc).unwrap(),
        );
    }
    opts.build(&api_schemas()[&format!("api/{name}.schema.json")])
        .unwrap()
}

fn conforms(name: &str, v: &Value) {
    let val = validator(name);
    let errs: Vec<String> = val
        .iter_errors(v)
        .map(|e| format!("{e} at {}", e.instance_path))
        .collect();
    assert!(errs.is_empty(), "{name}: {errs:?}");
}

#[tokio::test(flavor = "multi_thread")]
async fn virtual_session_lifecycle_ends_valid() {
    let srv = common::spawn(|_| {}).await;
    let body = json!({
        "config": common::small_config(),
        "scenario": demo_scenario(3, 10_000),
        "clock": common::virtual_clock(),
    });
    conforms("create-session.request", &body);
    let (status, created) = srv.post("/sessions", body).await;
    assert_eq!(status, 201);
    conforms("session-created", &created);
    let id = created["session_id"].as_str().unwrap().to_string();

    let s = srv.wait_closed(&id, Duration::from_secs(60)).await;
    assert_eq!(s.status, SessionStatus::Closed);
    assert_eq!(s.duration_ms, 10_000);

    let (status, verdict) = srv.get(&format!("/sessions/{id}/verify")).await;
    assert_eq!(status, 200);
    assert_eq!(verdict["verdict"], "valid");
    conforms("verify-result", &verdict);

    let (_, detail) = srv.get(&format!("/sessions/{id}")).await;
    conforms("session-detail", &detail);
    let (_, list) = srv.get("/sessions").await;
    conforms("session-list", &list);
    assert!(list
        .as_array()
        .unwrap()
        .iter()
        .any(|s| s["session_id"] == id.as_str()));

    let (status, report) = srv.get(&format!("/sessions/{id}/rate-report")).await;
    assert_eq!(status, 200);
    conforms("rate-report", &report);
    assert_eq!(report["streams"]["eeg-raw"]["samples"], 1_280);

    // Paging with a small limit returns the same items as one big page.
    let (_, one) = srv
        .get(&format!(
            "/sessions/{id}/samples?streams=gsr,cognition&limit=10000"
        ))
        .await;
    conforms("samples-page", &one);
    assert!(one["next"].is_null());
    let paged = srv.all_samples(&id, "gsr,cognition", 7).await;
    assert_eq!(&paged, one["items"].as_array().unwrap());
    assert_eq!(paged.len(), 10 + 20);
    let (_, window) = srv
        .get(&format!(
            "/sessions/{id}/samples?streams=eeg-raw&from_ms=2000&to_ms=3000&limit=10000"
        ))
        .await;
    assert_eq!(window["items"].as_array().unwrap().len(), 128);

    let (status, err) = srv.post(&format!("/sessions/{id}/stop"), json!({})).await;
    assert_eq!(status, 409);
    conforms("error", &err);
}

#[tokio::test(flavor = "multi_thread")]
async fn unknown_ids_and_bad_queries() {
    let srv = common::spawn(|_| {}).await;
    let ghost = uuid::Uuid::new_v4();
    for path in [
        format!("/sessions/{ghost}"),
        format!("/sessions/{ghost}/samples"),
        format!("/sessions/{ghost}/verify"),
        format!("/sessions/{ghost}/rate-report"),
        "/sessions/not-a-uuid".to_string(),
    ] {
        let (status, body) = srv.get(&path).await;
        assert_eq!(status, 404, "{path}");
        conforms("error", &body);
    }
    assert_eq!(
        srv.post(&format!("/sessions/{ghost}/stop"), json!({}))
            .await
            .0,
        404
    );

    let id = srv
        .create(json!({"config": common::small_config(), "scenario": demo_scenario(1, 2_000), "clock": common::virtual_clock()}))
        .await;
    srv.wait_closed(&id, Duration::from_secs(30)).await;
    for (query, path) in [
        ("streams=eeg-raw,bogus", "streams"),
        ("from_ms=9&to_ms=3", "from_ms"),
        ("limit=0", "limit"),
        ("limit=abc", "limit"),
        ("after=12.nope.3", "after"),
    ] {
        let (status, body) = srv.get(&format!("/sessions/{id}/samples?{query}")).await;
        assert_eq!(status, 422, "{query}");
        assert_eq!(
            body["report"]["violations"][0]["path"], path,
            "{query}: {body}"
        );
    }
    let (status, _) = srv
        .get(&format!("/sessions/{id}/media/../manifest.json"))
        .await;
    assert_eq!(status, 404);
}

#[tokio::test(flavor = "multi_thread")]
async fn invalid_session_requests_are_422_with_paths() {
    let srv = common::spawn(|_| {}).await;
    let mut bad_cfg = serde_json::to_value(common::small_config()).unwrap();
    bad_cfg["image"]["rate"] = json!(-1.0);
    let cases = [
        (
            json!({"scenario": demo_scenario(1, 0)}),
            "scenario.duration_ms",
        ),
        (
            json!({"config": bad_cfg, "scenario": demo_scenario(1, 1_000)}),
            "config.image.rate",
        ),
        (json!({"scenario": {"seed": 1}}), "scenario"),
        (
            json!({"scenario": demo_scenario(1, 1_000), "extra": 1}),
            "extra",
        ),
        (
            json!({"scenario": demo_scenario(1, 1_000), "clock": {"mode": "real_time", "step_ms": 10, "speed": 0.0}}),
            "clock.speed",
        ),
    ];
    for (body, path) in cases {
        let (status, err) = srv.post("/sessions", body.clone()).await;
        assert_eq!(status, 422, "{body}");
        conforms("error", &err);
        let paths: Vec<&str> = err["report"]["violations"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v["path"].as_str().unwrap())
            .collect();
        assert!(paths.contains(&path), "{path} not in {paths:?}");
    }
    let r = srv
        .http
        .post(srv.url("/sessions"))
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status().as_u16(), 400);
    // Nothing was created.
    assert_eq!(srv.get("/sessions").await.1, json!([]));
}

#[tokio::test(flavor = "multi_thread")]
async fn config_defaults_are_validated_and_persisted() {
    let srv = common::spawn(|_| {}).await;
    let (status, cfg) = srv.get("/config").await;
    assert_eq!(status, 200);
    assert_eq!(cfg["image"]["rate"], 1.0);

    let mut bad = cfg.clone();
    bad["image"]["rate"] = json!(-1.0);
    let (status, err) = srv.send(Method::PUT, "/config", Some(bad)).await;
    assert_eq!(status, 422);
    assert_eq!(err["report"]["violations"][0]["path"], "image.rate");
    assert_eq!(
        srv.get("/config").await.1,
        cfg,
        "rejected PUT changed nothing"
    );

    let mut good = cfg.clone();
    good["subject_id"] = json!("subject-0042");
    good["streams"]["image-frame"]["target_kb_per_s"] = json!(12.0);
    assert_eq!(
        srv.send(Method::PUT, "/config", Some(good.clone())).await.0,
        200
    );
    assert_eq!(srv.get("/config").await.1, good);

    // Sessions without a config use the stored defaults.
    let id = srv
        .create(json!({"scenario": demo_scenario(1, 1_000), "clock": common::virtual_clock()}))
        .await;
    let s = srv.wait_closed(&id, Duration::from_secs(30)).await;
    assert_eq!(s.subject_id, "subject-0042");

    let reopened = recorder_server::AppState::open(&recorder_server::ServerConfig::new(
        srv.dir.path().join("data"),
    ))
    .unwrap();
    assert_eq!(
        serde_json::to_value(&*reopened.defaults.read().unwrap()).unwrap(),
        good
    );
}

#[tokio::test(flavor = "multi_thread")]
async fn consent_crud() {
    let srv = common::spawn(|_| {}).await;
    let rec = json!({"person_id": "alice", "face_signature": "sig-a", "scope": "global"});
    let (status, body) = srv.post("/consent", rec.clone()).await;
    assert_eq!(status, 201, "{body}");
    assert_eq!(srv.post("/consent", rec.clone()).await.0, 409);
    let bob = json!({"person_id": "bob", "face_signature": "sig-b", "scope": {"granted_to": ["subject-0001"]}});
    assert_eq!(srv.post("/consent", bob.clone()).await.0, 201);
    let (_, list) = srv.get("/consent").await;
    conforms("consent-list", &list);
    assert_eq!(list, json!([rec, bob]));

    let (status, _) = srv.post("/consent", json!({"person_id": "carol"})).await;
    assert_eq!(status, 422);

    assert_eq!(
        srv.send(Method::DELETE, "/consent/alice", None).await.0,
        200
    );
    assert_eq!(
        srv.send(Method::DELETE, "/consent/alice", None).await.0,
        404
    );
    let stored: Value =
        serde_json::from_slice(&fs::read(srv.dir.path().join("data/consent.json")).unwrap())
            .unwrap();
    assert_eq!(stored, json!([bob]));
}

#[tokio::test(flavor = "multi_thread")]
async fn projections_endpoint() {
    let srv = common::spawn(|_| {}).await;
    let (status, p) = srv.get("/projections?target_gb=40&mode=full").await;
    assert_eq!(status, 200);
    conforms("projection", &p);
    // 40 GB over 664.037 kB/s for 57 600 s per day.
    let want = 40.0 / (664.037e3 * 57_600.0 / 1e9);
    assert!((p["days"].as_f64().unwrap() - want).abs() < 1e-9);
    let (_, p) = srv.get("/projections?target_gb=5&mode=text").await;
    assert!((p["days"].as_f64().unwrap() - 5.0 / (14.027e3 * 57_600.0 / 1e9)).abs() < 1e-9);

    let (_, table) = srv.get("/projections").await;
    conforms("projection-table", &table);
    assert_eq!(table.as_array().unwrap().len(), 6);
    for (q, path) in [
        ("target_gb=-1", "target_gb"),
        ("target_gb=5&mode=audio", "mode"),
        ("target_gb=x", "target_gb"),
    ] {
        let (status, err) = srv.get(&format!("/projections?{q}")).await;
        assert_eq!(status, 422, "{q}");
        assert_eq!(err["report"]["violations"][0]["path"], path);
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn bearer_token_guards_every_route() {
    let srv = common::spawn(|c| c.bearer_token = Some("s3cret".into())).await;
    for path in ["/sessions", "/config", "/consent", "/projections"] {
        assert_eq!(srv.get(path).await.0, 401, "{path}");
        let r = srv
            .http
            .get(srv.url(path))
            .bearer_auth("s3cret")
            .send()
            .await
            .unwrap();
        assert_eq!(r.status().as_u16(), 200, "{path}");
        let r = srv
            .http
            .get(srv.url(path))
            .bearer_auth("s3creT")
            .send()
            .await
            .unwrap();
        assert_eq!(r.status().as_u16(), 401, "{path}");
    }
    let r = srv
        .http
        .get(srv.url("/config?token=s3cret"))
        .send()
        .await
        .unwrap();
    assert_eq!(r.status().as_u16(), 200);
}

#[tokio::test(flavor = "multi_thread")]
async fn static_bundle_is_served_outside_the_api() {
    let ui = tempfile::tempdir().unwrap();
    fs::write(ui.path().join("index.html"), "<html>recorder</html>").unwrap();
    let path = ui.path().to_path_buf();
    let srv = common::spawn(move |c| c.static_dir = Some(path)).await;
    let r = srv.http.get(srv.url("/index.html")).send().await.unwrap();
    assert_eq!(r.status().as_u16(), 200);
    assert_eq!(r.text().await.unwrap(), "<html>recorder</html>");
    assert_eq!(srv.get("/config").await.0, 200);
}

#[test]
fn api_schema_documents_compile() {
    let docs = api_schemas();
    assert!(docs.keys().all(|k| k.starts_with("api/")));
    for name in docs.keys() {
        validator(
            name.trim_start_matches("api/")
                .trim_end_matches(".schema.json"),
        );
    }
    let cfg = serde_json::to_value(recorder_server::ServerConfig::new("/tmp/data")).unwrap();
    conforms("server-config", &cfg);
    assert!(!validator("server-config").is_valid(&json!({"data_dir": "/x", "port": 1})));
    let _ = StreamId::ALL;
}
