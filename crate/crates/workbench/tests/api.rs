use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use signwriting_core::acceptability::RuleSet;
use signwriting_core::registry::Registry;
use signwriting_core::store::Store;
use signwriting_workbench::service::{router, Workbench};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(rel: &str) -> String {
    fs::read_to_string(fixtures().join(rel)).unwrap()
}

fn workbench(manifest: &str, store: Store) -> Arc<Workbench> {
    let registry = Registry::load(fixtures().join(manifest)).unwrap();
    Arc::new(Workbench::new(registry, store, RuleSet::default()))
}

fn app() -> Router {
    router(workbench("catalog.manifest", Store::in_memory()))
}

struct Reply {
    status: StatusCode,
    content_type: String,
    text: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

async fn send(app: &Router, method: Method, uri: &str, headers: &[(&str, &str)], body: Option<Value>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    for (k, v) in headers {
        req = req.header(*k, *v);
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let content_type = resp.headers().get("content-type").map(|v| v.to_str().unwrap().to_string()).unwrap_or_default();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply { status, content_type, text: String::from_utf8(bytes.to_vec()).unwrap() }
}

async fn get(app: &Router, uri: &str, headers: &[(&str, &str)]) -> Reply {
    send(app, Method::GET, uri, headers, None).await
}

async fn post(app: &Router, uri: &str, headers: &[(&str, &str)], body: Value) -> Reply {
    send(app, Method::POST, uri, headers, Some(body)).await
}

fn assert_error(reply: &Reply, status: StatusCode, code: &str) {
    assert_eq!(reply.status, status, "{}", reply.text);
    let body = reply.json();
    assert_eq!(body["code"], code, "{}", reply.text);
    assert!(body["message"].as_str().is_some_and(|m| !m.is_empty()));
    assert!(body["diagnostics"].is_array());
}

const SESSION_A: &[(&str, &str)] = &[("x-session", "sa"), ("x-author", "ann")];
const SESSION_B: &[(&str, &str)] = &[("x-session", "sb"), ("x-author", "bob")];
const RESEARCHER: &[(&str, &str)] = &[("x-role", "researcher")];

async fn submit(app: &Router, headers: &[(&str, &str)], tags: &[&str]) -> Value {
    let reply = post(app, "/userglyphs", headers, json!({ "sketch": fixture("sketches/head-bar.txt"), "tags": tags })).await;
    assert_eq!(reply.status, StatusCode::CREATED, "{}", reply.text);
    reply.json()
}

#[tokio::test]
async fn taxonomy_navigation() {
    let app = app();
    let top = get(&app, "/registry/categories", &[]).await.json();
    assert_eq!(top["labels"], json!(["hands", "head", "movement"]));

    let groups = get(&app, "/registry/children?path=hands", &[]).await.json();
    assert_eq!(groups["labels"], json!(["fist", "index", "pinch"]));
    let glyphs = get(&app, "/registry/children?path=hands/fist", &[]).await.json();
    let ids: Vec<&str> = glyphs["glyphs"].as_array().unwrap().iter().map(|g| g["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["01-02-001-01-01-01", "01-02-001-01-02-01"]);

    assert_error(&get(&app, "/registry/children?path=nowhere", &[]).await, StatusCode::NOT_FOUND, "unknown-prefix");
    assert_error(&get(&app, "/registry/children?path=a/b/c/d", &[]).await, StatusCode::BAD_REQUEST, "prefix-too-deep");
}

#[tokio::test]
async fn glyph_detail_and_errors() {
    let app = app();
    let nod = get(&app, "/registry/glyph/04-02-001-01-01-01", &[]).await;
    assert_eq!(nod.status, StatusCode::OK);
    let nod = nod.json();
    assert_eq!(nod["name"], "head-nod");
    assert_eq!(nod["status"], "official-2004");
    assert_eq!(nod["taxonomy"], json!(["movement", "head-movement", "nod"]));
    assert!(nod["path"].as_str().unwrap().starts_with('M'));

    assert_error(&get(&app, "/registry/glyph/07-01-001-01-01-01", &[]).await, StatusCode::NOT_FOUND, "unknown-glyph");
    assert_error(&get(&app, "/registry/glyph/nonsense", &[]).await, StatusCode::BAD_REQUEST, "bad-id");
    assert_error(&get(&app, "/no/such/route", &[]).await, StatusCode::NOT_FOUND, "not-found");
}

#[tokio::test]
async fn matching_accepts_text_and_strokes() {
    let app = app();
    let text = post(&app, "/match", &[], json!({ "sketch": fixture("sketches/index-hand.txt"), "k": 3 })).await.json();
    let matches = text["matches"].as_array().unwrap();
    assert_eq!(matches.len(), 3);
    assert_eq!(matches[0]["id"], "01-01-001-01-01-01");
    assert_eq!(matches[0]["distance"], 0.0);

    let strokes = json!({ "width": 64, "height": 64, "strokes": [
        [[20, 60], [44, 60], [44, 36], [20, 36], [20, 60]],
        [[32, 36], [32, 4]],
        [[44, 48], [56, 40]],
    ]});
    let same = post(&app, "/match", &[], json!({ "sketch": strokes })).await.json();
    assert_eq!(same["matches"].as_array().unwrap().len(), 5);
    assert_eq!(same["matches"][0], text["matches"][0]);

    assert_error(&post(&app, "/match", &[], json!({ "sketch": "canvas 10 10\n5,5" })).await, StatusCode::BAD_REQUEST, "malformed-sketch");
    assert_error(&post(&app, "/match", &[], json!({ "sketch": "0,0 5,5", "k": 0 })).await, StatusCode::BAD_REQUEST, "match-failed");
    assert_error(&post(&app, "/match", &[], json!({ "k": 2 })).await, StatusCode::BAD_REQUEST, "malformed-body");
}

#[tokio::test]
async fn signs_round_trip_as_canonical_xml_and_svg() {
    let app = app();
    let saved = post(&app, "/signs", SESSION_A, json!({ "xml": fixture("signs/nod.xml") })).await;
    assert_eq!(saved.status, StatusCode::CREATED, "{}", saved.text);
    let saved = saved.json();
    assert_eq!(saved["id"], "S-1");
    assert_eq!(saved["author"], "ann");

    let xml = get(&app, "/signs/S-1.xml", &[]).await;
    assert_eq!(xml.content_type, "application/xml");
    assert_eq!(xml.text, fixture("signs/nod.xml"));

    let svg = get(&app, "/signs/S-1.svg?scale=2", &[]).await;
    assert_eq!(svg.content_type, "image/svg+xml");
    assert!(svg.text.contains("width=\"400\""), "{}", svg.text);

    assert_eq!(get(&app, "/signs/S-1", &[]).await.json()["xml"], saved["xml"]);
    assert_error(&get(&app, "/signs/S-9", &[]).await, StatusCode::NOT_FOUND, "unknown-sign");
    assert_error(&get(&app, "/signs/S-1.png", &[]).await, StatusCode::NOT_FOUND, "unknown-format");
    assert_error(&get(&app, "/signs/S-1.svg?scale=-1", &[]).await, StatusCode::BAD_REQUEST, "bad-scale");
}

#[tokio::test]
async fn invalid_signs_are_rejected_with_diagnostics() {
    let app = app();
    let reply = post(&app, "/signs", SESSION_A, json!({ "xml": fixture("signs/out-of-bounds.xml") })).await;
    assert_error(&reply, StatusCode::UNPROCESSABLE_ENTITY, "rejected");
    assert_eq!(reply.json()["diagnostics"][0]["code"], "out-of-bounds");

    let reply = post(&app, "/signs", SESSION_A, json!({ "xml": "<sign w=\"10\" h=\"10\">" })).await;
    assert_error(&reply, StatusCode::BAD_REQUEST, "malformed-sign");

    let dup = "<sign w=\"100\" h=\"100\">\n  <glyph ref=\"04-01-001-01-01-01\" x=\"0\" y=\"0\" z=\"1\"/>\n  <glyph ref=\"04-01-001-01-01-01\" x=\"0\" y=\"0\" z=\"1\"/>\n</sign>";
    let reply = post(&app, "/signs", SESSION_A, json!({ "xml": dup })).await;
    assert_error(&reply, StatusCode::BAD_REQUEST, "malformed-sign");
    assert!(reply.json()["message"].as_str().unwrap().contains("line 3"), "{}", reply.text);
}

#[tokio::test]
async fn user_glyph_submission_requires_session_and_tags() {
    let app = app();
    let body = json!({ "sketch": fixture("sketches/head-bar.txt"), "tags": ["head-movement"] });
    assert_error(&post(&app, "/userglyphs", &[], body).await, StatusCode::BAD_REQUEST, "missing-session");
    let untagged = json!({ "sketch": fixture("sketches/head-bar.txt"), "tags": [" "] });
    assert_error(&post(&app, "/userglyphs", SESSION_A, untagged).await, StatusCode::BAD_REQUEST, "missing-tags");
    assert_error(&get(&app, "/userglyphs", &[("x-role", "admin")]).await, StatusCode::BAD_REQUEST, "bad-role");
}

#[tokio::test]
async fn redundant_glyph_is_stored_with_warning_and_suggestions() {
    let app = app();
    let reply = post(&app, "/userglyphs", SESSION_A, json!({ "sketch": fixture("sketches/index-hand.txt"), "tags": ["hand-config"] })).await;
    assert_eq!(reply.status, StatusCode::CREATED);
    let body = reply.json();
    assert_eq!(body["id"], "U-1");
    assert_eq!(body["verdict"]["overall"], "warn");
    assert_eq!(body["verdict"]["suggestion"]["id"], "01-01-001-01-01-01");
    assert_eq!(body["suggestions"][0]["id"], "01-01-001-01-01-01");
    assert_eq!(body["suggestions"].as_array().unwrap().len(), 3);
    assert_eq!(body["provenance"]["kind"], "drawn");
    assert_eq!(body["provenance"]["session"], "sa");
}

#[tokio::test]
async fn placement_context_drives_coherence() {
    let app = app();
    let sign = fixture("signs/nod.xml");
    let beside = json!({ "sketch": fixture("sketches/head-bar.txt"), "tags": ["head-movement"], "placement": { "xml": sign, "x": 130, "y": 90 } });
    let body = post(&app, "/userglyphs", SESSION_A, beside).await.json();
    assert_eq!(body["verdict"]["overall"], "fail");
    let rules: Vec<&str> = body["verdict"]["coherence"]["diagnostics"].as_array().unwrap().iter().map(|d| d["rule"].as_str().unwrap()).collect();
    assert!(rules.contains(&"head-above-face"));

    let above = json!({ "sketch": fixture("sketches/head-bar.txt"), "tags": ["head-movement"], "placement": { "xml": sign, "x": 86, "y": 64 } });
    let body = post(&app, "/userglyphs", SESSION_A, above).await.json();
    assert_eq!(body["verdict"]["coherence"]["status"], "pass");
    // failing glyphs are still stored for research
    assert_eq!(get(&app, "/userglyphs", RESEARCHER).await.json()["glyphs"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn overlay_scale_maps_back_to_sign_units() {
    let app = app();
    let big = "canvas 80 80\n0,20 56,20\n8,0 8,40\n48,0 48,40\n";
    let body = post(&app, "/userglyphs", SESSION_A, json!({ "sketch": big, "tags": ["head-movement"], "scale": 2 })).await.json();
    assert_eq!(body["path"], "M0,10 L28,10 M4,0 L4,20 M24,0 L24,20");
}

#[tokio::test]
async fn reuse_policy_on_palette_and_signs() {
    let app = app();
    let id = submit(&app, SESSION_A, &["head-movement"]).await["id"].as_str().unwrap().to_string();

    let own = get(&app, &format!("/userglyphs/{id}"), SESSION_A).await;
    assert_eq!(own.status, StatusCode::OK);
    assert_eq!(own.json()["tags"], json!(["head-movement"]));
    assert_error(&get(&app, &format!("/userglyphs/{id}"), SESSION_B).await, StatusCode::FORBIDDEN, "policy-violation");
    assert_error(&get(&app, &format!("/registry/glyph/{id}"), SESSION_B).await, StatusCode::FORBIDDEN, "policy-violation");
    assert_eq!(get(&app, &format!("/userglyphs/{id}"), RESEARCHER).await.status, StatusCode::OK);
    assert_error(&get(&app, "/userglyphs/U-99", RESEARCHER).await, StatusCode::NOT_FOUND, "unknown-glyph");

    let sign = fixture("signs/with-user-glyph.xml");
    let reply = post(&app, "/signs", SESSION_B, json!({ "xml": sign })).await;
    assert_error(&reply, StatusCode::UNPROCESSABLE_ENTITY, "rejected");
    assert_eq!(reply.json()["diagnostics"][0]["code"], "policy-violation");
    assert_eq!(post(&app, "/signs", SESSION_A, json!({ "xml": sign })).await.status, StatusCode::CREATED);
}

#[tokio::test]
async fn listings_are_role_gated() {
    let app = app();
    submit(&app, SESSION_A, &["head-movement"]).await;
    submit(&app, SESSION_B, &["annotation"]).await;

    let mine = get(&app, "/userglyphs", SESSION_A).await.json();
    let ids: Vec<&str> = mine["glyphs"].as_array().unwrap().iter().map(|g| g["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["U-1"]);
    let all = get(&app, "/userglyphs", RESEARCHER).await.json();
    let glyphs = all["glyphs"].as_array().unwrap();
    assert_eq!(glyphs.len(), 2);
    assert_eq!(glyphs[1]["provenance"]["author"], "bob");
    assert!(get(&app, "/userglyphs", &[]).await.json()["glyphs"].as_array().unwrap().is_empty());

    let hits = get(&app, "/search?tags=annotation", SESSION_B).await.json();
    assert_eq!(hits["glyphs"].as_array().unwrap().len(), 1);
    assert!(get(&app, "/search?tags=annotation", SESSION_A).await.json()["glyphs"].as_array().unwrap().is_empty());
    let heads = get(&app, "/search?path=movement/head-movement", &[]).await.json();
    assert_eq!(heads["glyphs"].as_array().unwrap().len(), 2);
    assert_error(&get(&app, "/search", &[]).await, StatusCode::BAD_REQUEST, "malformed-query");
}

#[tokio::test]
async fn closure_report_formats() {
    let app = router(workbench("fig5.manifest", Store::in_memory()));
    let report = get(&app, "/reports/closure", &[]).await.json();
    assert_eq!(report["added"].as_array().unwrap().len(), 3);
    assert_eq!(report["records"].as_array().unwrap().len(), 3);
    let text = get(&app, "/reports/closure?format=text", &[]).await.text;
    assert!(text.contains("added: 3"));
    assert_eq!(get(&app, "/reports/closure?format=records", &[]).await.text.lines().count(), 3);
    assert_error(&get(&app, "/reports/closure?format=pdf", &[]).await, StatusCode::BAD_REQUEST, "unknown-format");
}

fn one_glyph_sign(id: &str) -> String {
    format!("<sign w=\"100\" h=\"100\"><glyph ref=\"{id}\" x=\"10\" y=\"10\" z=\"1\"/></sign>")
}

#[tokio::test]
async fn corpus_query_by_function() {
    let app = app();
    for id in ["01-02-001-01-01-01", "04-02-001-01-01-01", "03-02-001-01-01-01"] {
        assert_eq!(post(&app, "/signs", RESEARCHER, json!({ "xml": one_glyph_sign(id) })).await.status, StatusCode::CREATED);
    }
    let hits = get(&app, "/corpus/query?class=head-movement", &[]).await.json();
    assert_eq!(hits["signs"], json!(["S-2"]));
    assert_error(&get(&app, "/corpus/query", &[]).await, StatusCode::BAD_REQUEST, "missing-class");
}

#[tokio::test]
async fn concurrent_writers_get_distinct_ids() {
    let wb = workbench("catalog.manifest", Store::in_memory());
    let app = router(wb.clone());
    let mut tasks = Vec::new();
    for i in 0..16 {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            let session = format!("s{i}");
            let headers = [("x-session", session.as_str())];
            let glyph = post(&app, "/userglyphs", &headers, json!({ "sketch": format!("0,0 {},9", i + 1), "tags": ["t"] })).await;
            let sign = post(&app, "/signs", &headers, json!({ "xml": one_glyph_sign("04-01-001-01-01-01") })).await;
            (glyph.json()["id"].as_str().unwrap().to_string(), sign.json()["id"].as_str().unwrap().to_string())
        }));
    }
    let mut glyphs = Vec::new();
    let mut signs = Vec::new();
    for t in tasks {
        let (g, s) = t.await.unwrap();
        glyphs.push(g);
        signs.push(s);
    }
    glyphs.sort();
    glyphs.dedup();
    signs.sort();
    signs.dedup();
    assert_eq!((glyphs.len(), signs.len()), (16, 16));
    assert_eq!(wb.read_store().signs().count(), 16);
}

#[tokio::test]
async fn persistent_store_survives_service_restart() {
    let dir = tempfile::tempdir().unwrap();
    {
        let app = router(workbench("catalog.manifest", Store::open(dir.path()).unwrap()));
        submit(&app, SESSION_A, &["head-movement"]).await;
        assert_eq!(post(&app, "/signs", SESSION_A, json!({ "xml": fixture("signs/with-user-glyph.xml") })).await.status, StatusCode::CREATED);
    }
    let app = router(workbench("catalog.manifest", Store::open(dir.path()).unwrap()));
    assert_eq!(get(&app, "/signs/S-1.xml", &[]).await.text, fixture("signs/with-user-glyph.xml"));
    let glyph = get(&app, "/userglyphs/U-1", SESSION_A).await.json();
    assert_eq!(glyph["path"], "M0,10 L28,10 M4,0 L4,20 M24,0 L24,20");
}
