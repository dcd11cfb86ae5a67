use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use outbreak_core::model_file::LoadedModel;
use outbreak_service::{router, AppState, ErrorBody, ModelDescriptor, QueryResponse, RiskResponse, ScenarioBody, Session, SessionStore};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(dir: &std::path::Path) -> Router {
    router(AppState::roosevelt(SessionStore::open(dir).unwrap()))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn json_call<T: serde::de::DeserializeOwned>(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, T) {
    let (status, bytes) = call(app, method, uri, body).await;
    let parsed = serde_json::from_slice(&bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&bytes)));
    (status, parsed)
}

async fn error_code(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let (status, err): (_, ErrorBody) = json_call(app, method, uri, body).await;
    (status, err.code)
}

fn prob(resp: &QueryResponse, target: &str, state: &str) -> f64 {
    resp.posteriors
        .iter()
        .find(|p| p.target == target)
        .and_then(|p| p.distribution.iter().find(|s| s.state == state))
        .map(|s| s.probability)
        .unwrap()
}

#[tokio::test]
async fn model_descriptor_lists_nodes_groups_and_pi_table() {
    let dir = tempfile::tempdir().unwrap();
    let (status, d): (_, ModelDescriptor) = json_call(&app(dir.path()), Method::GET, "/model", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(d.variables.len(), 15);
    let has_covid = d.variables.iter().find(|v| v.name == "HasCovid").unwrap();
    assert_eq!(has_covid.parents, ["InfectionRate", "PreventionIndex", "Vulnerable"]);
    assert!(d.variables.iter().all(|v| v.group.is_some()));
    let table = d.pi_table.unwrap();
    assert_eq!(table.entries.len(), 128);
    assert_eq!(table.measures[0], "HandWash");
    let hand_wash_only = table
        .entries
        .iter()
        .find(|e| e.taken.iter().enumerate().all(|(i, &t)| t == (i == 0)))
        .unwrap();
    assert!((hand_wash_only.pi - 1.0373).abs() < 1e-4);
}

#[tokio::test]
async fn query_examples() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (status, r): (_, QueryResponse) = json_call(
        &app,
        Method::POST,
        "/query",
        Some(json!({"evidence": {}, "targets": ["HandWash"]})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!((prob(&r, "HandWash", "Yes") - 0.9188).abs() < 1e-4);
    assert!((prob(&r, "HandWash", "No") - 0.0812).abs() < 1e-4);

    let (_, r): (_, QueryResponse) = json_call(
        &app,
        Method::POST,
        "/query",
        Some(json!({"evidence": {"HasCovid": "Yes"}, "targets": ["Vulnerable", "Symptoms"]})),
    )
    .await;
    assert!((prob(&r, "Vulnerable", "Yes") * 100.0 - 84.36).abs() <= 5.0);
    assert_eq!(r.posteriors[1].distribution.len(), 5);
}

#[tokio::test]
async fn query_errors_are_structured() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let cases = [
        (json!({"evidence": {"HandWash": "Purple"}, "targets": ["HasCovid"]}), "EVIDENCE_UNKNOWN_STATE"),
        (json!({"evidence": {"Mood": "Happy"}, "targets": ["HasCovid"]}), "UNKNOWN_VARIABLE"),
        (json!({"evidence": {}, "targets": ["Mood"]}), "UNKNOWN_VARIABLE"),
        (json!({"evidence": {"HasCovid": "Yes"}, "targets": ["HasCovid"]}), "TARGET_OBSERVED"),
        (
            json!({"evidence": {"InfectionRate": "0", "HasCovid": "Yes"}, "targets": ["Age"]}),
            "IMPOSSIBLE_EVIDENCE",
        ),
    ];
    for (body, code) in cases {
        assert_eq!(
            error_code(&app, Method::POST, "/query", Some(body)).await,
            (StatusCode::UNPROCESSABLE_ENTITY, code.to_string())
        );
    }
    for body in [json!({"evidence": {}, "targets": []}), json!({"evidence": {"Age": 3}, "targets": ["HasCovid"]})] {
        assert_eq!(
            error_code(&app, Method::POST, "/query", Some(body)).await,
            (StatusCode::BAD_REQUEST, "BAD_REQUEST".to_string())
        );
    }
    let req = Request::post("/query").header("content-type", "application/json").body(Body::from("{nope")).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    assert_eq!(error_code(&app, Method::GET, "/nowhere", None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn identical_queries_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let body = json!({"evidence": {"Symptoms": ">8", "Gender": "Female"}, "targets": ["HasCovid", "InfectionRate"]});
    let (_, first) = call(&app, Method::POST, "/query", Some(body.clone())).await;
    call(&app, Method::POST, "/sessions", Some(json!({"label": "noise"}))).await;
    let (_, second) = call(&app, Method::POST, "/query", Some(body)).await;
    assert_eq!(first, second);
}

#[tokio::test]
async fn risk_examples() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let impacts = json!({"u": 4, "k": 3, "q": 2, "c": 1});
    for (fpr, fnr, p, n) in [(0.01, 0.20, 3.20, 1.01), (0.1088, 0.0979, 3.0979, 1.1088), (1.0, 1.0, 4.0, 2.0)] {
        let (status, r): (_, RiskResponse) = json_call(
            &app,
            Method::POST,
            "/risk",
            Some(json!({"fpr": fpr, "fnr": fnr, "impacts": impacts})),
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        assert!((r.risk_p - p).abs() < 1e-9 && (r.risk_n - n).abs() < 1e-9, "{r:?}");
    }
    let (_, r): (_, RiskResponse) = json_call(&app, Method::POST, "/risk", Some(json!({}))).await;
    assert!((r.fpr - 16.0 / 147.0).abs() < 1e-12 && (r.fnr - 23.0 / 235.0).abs() < 1e-12);
    assert_eq!(
        error_code(&app, Method::POST, "/risk", Some(json!({"fpr": 1.5, "fnr": 0.1}))).await,
        (StatusCode::UNPROCESSABLE_ENTITY, "RATE_OUT_OF_RANGE".to_string())
    );
}

#[tokio::test]
async fn scenario_runs_as_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (status, body): (_, ScenarioBody) = json_call(&app, Method::POST, "/scenarios/2/run", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body.rows.len(), 6);
    assert_eq!(body.rows[4].label, "Symptoms=>8");
    assert_eq!(body.rows[4].reference, Some(70.73));

    let (status, csv) = call(&app, Method::POST, "/scenarios/2/run?format=csv", None).await;
    assert_eq!(status, StatusCode::OK);
    let csv = String::from_utf8(csv).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("scenario,evidence,computed,reference,abs_diff\n"));

    assert_eq!(
        error_code(&app, Method::POST, "/scenarios/9/run", None).await,
        (StatusCode::NOT_FOUND, "SCENARIO_NOT_FOUND".to_string())
    );
    assert_eq!(
        error_code(&app, Method::POST, "/scenarios/x/run", None).await.0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        error_code(&app, Method::POST, "/scenarios/1/run?format=xml", None).await,
        (StatusCode::BAD_REQUEST, "BAD_REQUEST".to_string())
    );
}

#[tokio::test]
async fn custom_model_without_scenario_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"variables":[{"name":"A","states":["x","y"]}],
        "cpts":[{"child":"A","parents":[],"probabilities":[0.25,0.75]}]}"#;
    let model: LoadedModel = outbreak_core::model_file::parse_model(text).unwrap();
    let app = router(AppState::new(model, SessionStore::open(dir.path()).unwrap()));
    let (_, d): (_, ModelDescriptor) = json_call(&app, Method::GET, "/model", None).await;
    assert!(d.pi_table.is_none());
    assert_eq!(d.variables[0].group, None);
    let (status, _) = call(&app, Method::POST, "/scenarios/2/run", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&app, Method::POST, "/risk", Some(json!({}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn session_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let mut ids = Vec::new();
    for (label, ev) in [("a", json!({"Symptoms": ">8"})), ("b", json!({})), ("c", json!({"Age": "18-24", "Gender": "Male"}))] {
        let (status, s): (_, Session) =
            json_call(&app, Method::POST, "/sessions", Some(json!({"label": label, "evidence": ev}))).await;
        assert_eq!(status, StatusCode::CREATED);
        assert_eq!(serde_json::to_value(&s.evidence).unwrap(), ev);
        ids.push(s.id);
    }
    let (_, list): (_, Vec<Session>) = json_call(&app, Method::GET, "/sessions", None).await;
    assert_eq!(list.iter().map(|s| s.id.clone()).collect::<Vec<_>>(), ids);

    let (status, s): (_, Session) = json_call(
        &app,
        Method::POST,
        &format!("/sessions/{}", ids[0]),
        Some(json!({"evidence": {"Symptoms": "0"}})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((s.label.as_str(), s.evidence.get("Symptoms")), ("a", Some("0")));

    let (status, _) = call(&app, Method::DELETE, &format!("/sessions/{}", ids[1]), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    for (method, body) in [(Method::GET, None), (Method::DELETE, None), (Method::POST, Some(json!({"label": "z"})))] {
        assert_eq!(
            error_code(&app, method, &format!("/sessions/{}", ids[1]), body).await,
            (StatusCode::NOT_FOUND, "NOT_FOUND".to_string())
        );
    }
    assert_eq!(
        error_code(&app, Method::POST, "/sessions", Some(json!({"evidence": {"HandWash": "Purple"}}))).await,
        (StatusCode::UNPROCESSABLE_ENTITY, "EVIDENCE_UNKNOWN_STATE".to_string())
    );
}

#[tokio::test]
async fn sessions_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let saved: Session = {
        let app = app(dir.path());
        let (_, s) = json_call(
            &app,
            Method::POST,
            "/sessions",
            Some(json!({"label": "ward 3", "evidence": {"Symptoms": "6-8", "HandWash": "No"}})),
        )
        .await;
        s
    };
    let app = app(dir.path());
    let (status, loaded): (_, Session) = json_call(&app, Method::GET, &format!("/sessions/{}", saved.id), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(loaded, saved);
}
