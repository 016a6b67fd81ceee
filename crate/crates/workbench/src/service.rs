//! HTTP API over the registry, the recognizer and the store.
//!
//! Callers identify themselves with three headers: `X-Role` (`user` or
//! `researcher`, default `user`), `X-Session` (the editing session token)
//! and `X-Author`. Every error body has the shape
//! `{"code": ..., "message": ..., "diagnostics": [...]}`.

use std::collections::BTreeSet;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use signwriting_core::acceptability::{PlacementContext, RuleConfigError, RuleSet};
use signwriting_core::closure::{closure_report, ClosureReport};
use signwriting_core::document::SignDocument;
use signwriting_core::geometry::{Geometry, Point};
use signwriting_core::policy::{Role, Viewer};
use signwriting_core::recognition::{FormIndex, Match, ShapeDescriptor, StrokeSketch};
use signwriting_core::registry::{GlyphEntry, ManifestError, Registry, RegistryError, TaxonomyChildren};
use signwriting_core::search::{corpus_query, taxonomy_search, TaxonomyQuery};
use signwriting_core::store::{GlyphDraft, SignId, Store, StoreError, StoredSign, StoredUserGlyph};
use signwriting_core::symbol::{GlyphRef, UserGlyphId};

pub const DEFAULT_MATCHES: usize = 5;
pub const DEFAULT_SUGGESTIONS: usize = 3;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub manifest: PathBuf,
    /// Directory for the sign and glyph store; in memory when absent.
    pub store: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub bind: SocketAddr,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("manifest {path}: {source}")]
    Manifest { path: PathBuf, source: ManifestError },
    #[error("store: {0}")]
    Store(#[from] StoreError),
    #[error("rules {path}: {source}")]
    RulesIo { path: PathBuf, source: io::Error },
    #[error("rules: {0}")]
    Rules(#[from] RuleConfigError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error("server: {0}")]
    Serve(io::Error),
}

/// Everything a request handler reads; only the store is mutable.
pub struct Workbench {
    pub registry: Registry,
    pub index: FormIndex,
    pub rules: RuleSet,
    pub closure: ClosureReport,
    store: RwLock<Store>,
}

impl Workbench {
    pub fn new(registry: Registry, store: Store, rules: RuleSet) -> Self {
        let index = FormIndex::build(&registry);
        let closure = closure_report(&registry);
        Self { registry, index, rules, closure, store: RwLock::new(store) }
    }

    pub fn load(config: &ServiceConfig) -> Result<Self, LoadError> {
        let registry = Registry::load(&config.manifest)
            .map_err(|source| LoadError::Manifest { path: config.manifest.clone(), source })?;
        let store = match &config.store {
            Some(dir) => Store::open(dir)?,
            None => Store::in_memory(),
        };
        let rules = match &config.rules {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| LoadError::RulesIo { path: path.clone(), source })?;
                RuleSet::parse(&text)?
            }
            None => RuleSet::default(),
        };
        Ok(Self::new(registry, store, rules))
    }

    // a panicking writer cannot leave the store half-updated: every mutation
    // appends to the journal before touching the maps
    pub fn read_store(&self) -> RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write_store(&self) -> RwLockWriteGuard<'_, Store> {
        self.store.write().unwrap_or_else(|e| e.into_inner())
    }
}

pub type Shared = Arc<Workbench>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/registry/categories", get(categories))
        .route("/registry/children", get(children))
        .route("/registry/glyph/{id}", get(glyph))
        .route("/search", get(search))
        .route("/match", axum::routing::post(match_sketch))
        .route("/signs", axum::routing::post(save_sign))
        .route("/signs/{id}", get(get_sign))
        .route("/userglyphs", get(list_user_glyphs).post(submit_user_glyph))
        .route("/userglyphs/{id}", get(palette_glyph))
        .route("/reports/closure", get(closure))
        .route("/corpus/query", get(corpus))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not-found", "no such endpoint") })
        .with_state(state)
}

pub async fn serve(config: ServiceConfig) -> Result<(), LoadError> {
    let state = Arc::new(Workbench::load(&config)?);
    let listener = tokio::net::TcpListener::bind(config.bind)
        .await
        .map_err(|source| LoadError::Bind { addr: config.bind, source })?;
    tracing::info!(addr = %config.bind, glyphs = state.registry.len(), "serving");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(LoadError::Serve)
}

// ---------------------------------------------------------------------------
// Errors and caller identity

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    diagnostics: Vec<Value>,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self { status, code, message: message.into(), diagnostics: Vec::new() }
    }

    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "diagnostics": self.diagnostics });
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Xml(x) => ApiError::bad_request("malformed-sign", x.to_string()),
            StoreError::Rejected(diagnostics) => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                code: "rejected",
                message: format!("sign failed validation with {} diagnostic(s)", diagnostics.len()),
                diagnostics: diagnostics.iter().map(|d| serde_json::to_value(d).expect("diagnostics serialize")).collect(),
            },
            StoreError::Policy(p) => ApiError::new(StatusCode::FORBIDDEN, "policy-violation", p.to_string()),
            other => {
                tracing::error!(error = %other, "store failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "store-failure", other.to_string())
            }
        }
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload.map(|Json(v)| v).map_err(|e| ApiError::bad_request("malformed-body", e.body_text()))
}

fn query<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(v)| v).map_err(|e| ApiError::bad_request("malformed-query", e.body_text()))
}

/// The requesting party, from the role, session and author headers.
#[derive(Debug, Clone)]
pub struct Caller {
    pub viewer: Viewer,
    pub author: String,
}

impl<S: Send + Sync> FromRequestParts<S> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _state: &S) -> Result<Self, Self::Rejection> {
        let header = |name: &str| -> Result<Option<String>, ApiError> {
            match parts.headers.get(name) {
                None => Ok(None),
                Some(v) => v
                    .to_str()
                    .map(|s| Some(s.trim().to_string()).filter(|s| !s.is_empty()))
                    .map_err(|_| ApiError::bad_request("bad-header", format!("{name} is not valid text"))),
            }
        };
        let role = match header("x-role")? {
            Some(r) => r.parse::<Role>().map_err(|_| ApiError::bad_request("bad-role", format!("unknown role {r:?}")))?,
            None => Role::User,
        };
        let session = header("x-session")?;
        let author = header("x-author")?.or_else(|| session.clone()).unwrap_or_else(|| "anonymous".into());
        Ok(Caller { viewer: Viewer { role, session }, author })
    }
}

// ---------------------------------------------------------------------------
// Registry

fn glyph_summary(e: &GlyphEntry) -> Value {
    json!({
        "id": e.id,
        "name": e.name,
        "status": e.status,
        "taxonomy": e.taxonomy,
        "tags": e.feature_tags,
    })
}

fn glyph_detail(e: &GlyphEntry) -> Value {
    let (w, h) = e.geometry.box_size();
    let mut v = glyph_summary(e);
    v["motion"] = json!(e.motion.as_ref().map(|m| m.to_string()));
    v["provenance"] = serde_json::to_value(&e.provenance).expect("provenance serializes");
    v["path"] = json!(e.geometry.to_path());
    v["width"] = json!(w);
    v["height"] = json!(h);
    v
}

async fn categories(State(wb): State<Shared>) -> Json<Value> {
    let labels = match wb.registry.taxonomy_children::<&str>(&[]) {
        Ok(TaxonomyChildren::Labels(l)) => l,
        _ => Vec::new(),
    };
    Json(json!({ "labels": labels }))
}

#[derive(Deserialize)]
struct PathQuery {
    #[serde(default)]
    path: String,
}

async fn children(State(wb): State<Shared>, q: Result<Query<PathQuery>, QueryRejection>) -> Result<Json<Value>, ApiError> {
    let q = query(q)?;
    let path: Vec<&str> = q.path.split('/').filter(|s| !s.is_empty()).collect();
    match wb.registry.taxonomy_children(&path) {
        Ok(TaxonomyChildren::Labels(labels)) => Ok(Json(json!({ "path": path, "labels": labels }))),
        Ok(TaxonomyChildren::Glyphs(glyphs)) => {
            let glyphs: Vec<Value> = glyphs.into_iter().map(glyph_summary).collect();
            Ok(Json(json!({ "path": path, "glyphs": glyphs })))
        }
        Err(e @ RegistryError::PrefixTooDeep(_)) => Err(ApiError::bad_request("prefix-too-deep", e.to_string())),
        Err(e) => Err(ApiError::new(StatusCode::NOT_FOUND, "unknown-prefix", e.to_string())),
    }
}

fn parse_glyph_ref(raw: &str) -> Result<GlyphRef, ApiError> {
    GlyphRef::parse(raw).map_err(|e| ApiError::bad_request("bad-id", e.to_string()))
}

async fn glyph(State(wb): State<Shared>, caller: Caller, Path(id): Path<String>) -> Result<Response, ApiError> {
    match parse_glyph_ref(&id)? {
        GlyphRef::User(user) => palette_response(&wb, user, &caller.viewer),
        symbol => {
            let entry = wb
                .registry
                .get(&symbol)
                .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown-glyph", format!("no glyph {symbol}")))?;
            Ok(Json(glyph_detail(entry)).into_response())
        }
    }
}

#[derive(Deserialize)]
struct SearchQuery {
    tags: Option<String>,
    path: Option<String>,
}

async fn search(State(wb): State<Shared>, caller: Caller, q: Result<Query<SearchQuery>, QueryRejection>) -> Result<Json<Value>, ApiError> {
    let split = |s: &str, sep: char| s.split(sep).map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect::<Vec<_>>();
    let q = query(q)?;
    let search = match (q.tags.as_deref(), q.path.as_deref()) {
        (Some(tags), None) => TaxonomyQuery::Tags(split(tags, ',')),
        (None, Some(path)) => TaxonomyQuery::Path(split(path, '/')),
        _ => return Err(ApiError::bad_request("malformed-query", "give exactly one of tags= or path=")),
    };
    let store = wb.read_store();
    let hits = taxonomy_search(&wb.registry, &*store, &caller.viewer, &search);
    Ok(Json(json!({ "glyphs": hits })))
}

// ---------------------------------------------------------------------------
// Recognition

/// A sketch in the text format, or as JSON strokes.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SketchInput {
    Text(String),
    Strokes { width: f64, height: f64, strokes: Vec<Vec<[f64; 2]>> },
}

impl SketchInput {
    fn parse(self) -> Result<StrokeSketch, ApiError> {
        let parsed = match self {
            SketchInput::Text(text) => StrokeSketch::parse(&text),
            SketchInput::Strokes { width, height, strokes } => StrokeSketch::new(
                strokes.into_iter().map(|s| s.into_iter().map(|[x, y]| Point::new(x, y)).collect()).collect(),
                width,
                height,
            ),
        };
        parsed.map_err(|e| ApiError::bad_request("malformed-sketch", e.to_string()))
    }
}

fn match_json(wb: &Workbench, m: &Match) -> Value {
    let entry = wb.registry.get(&m.id);
    json!({
        "id": m.id,
        "distance": m.distance,
        "name": entry.map(|e| e.name.as_str()),
        "status": entry.map(|e| e.status),
    })
}

#[derive(Deserialize)]
struct MatchRequest {
    sketch: SketchInput,
    k: Option<usize>,
}

async fn match_sketch(State(wb): State<Shared>, payload: Result<Json<MatchRequest>, JsonRejection>) -> Result<Json<Value>, ApiError> {
    let req = body(payload)?;
    let sketch = req.sketch.parse()?;
    let k = req.k.unwrap_or(DEFAULT_MATCHES);
    let ranked = wb
        .index
        .match_sketch(&sketch, k)
        .map_err(|e| ApiError::bad_request("match-failed", e.to_string()))?;
    Ok(Json(json!({ "matches": ranked.iter().map(|m| match_json(&wb, m)).collect::<Vec<_>>() })))
}

// ---------------------------------------------------------------------------
// Signs

#[derive(Deserialize)]
struct SignRequest {
    xml: String,
}

fn sign_json(s: &StoredSign) -> Value {
    json!({ "id": s.id, "xml": s.xml, "author": s.author, "session": s.session, "saved_at": s.saved_at })
}

async fn save_sign(
    State(wb): State<Shared>,
    caller: Caller,
    payload: Result<Json<SignRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let req = body(payload)?;
    let mut store = wb.write_store();
    let saved = store.save_sign(&req.xml, &wb.registry, &caller.viewer, &caller.author)?;
    Ok((StatusCode::CREATED, Json(sign_json(saved))))
}

#[derive(Deserialize)]
struct RenderQuery {
    scale: Option<f64>,
}

async fn get_sign(
    State(wb): State<Shared>,
    Path(raw): Path<String>,
    q: Result<Query<RenderQuery>, QueryRejection>,
) -> Result<Response, ApiError> {
    let (id, format) = match raw.rsplit_once('.') {
        Some((id, ext @ ("xml" | "svg"))) => (id, ext),
        Some(_) => return Err(ApiError::new(StatusCode::NOT_FOUND, "unknown-format", "use .xml or .svg")),
        None => (raw.as_str(), "json"),
    };
    let id: SignId = id.parse().map_err(|e: signwriting_core::store::SignIdError| ApiError::bad_request("bad-id", e.to_string()))?;
    let store = wb.read_store();
    let sign = store
        .get_sign(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown-sign", format!("no sign {id}")))?;
    match format {
        "xml" => Ok(([(header::CONTENT_TYPE, "application/xml")], sign.xml.clone()).into_response()),
        "svg" => {
            let scale = query(q)?.scale.unwrap_or(1.0);
            if !(scale.is_finite() && scale > 0.0) {
                return Err(ApiError::bad_request("bad-scale", "scale must be positive"));
            }
            let svg = sign
                .document
                .render_svg(&(&wb.registry, &*store), scale)
                .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unrenderable", e.to_string()))?;
            Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg).into_response())
        }
        _ => Ok(Json(sign_json(sign)).into_response()),
    }
}

// ---------------------------------------------------------------------------
// User glyphs

#[derive(Deserialize)]
struct Placement {
    /// The sign being composed, for placement rules.
    xml: String,
    x: u32,
    y: u32,
}

#[derive(Deserialize)]
struct UserGlyphRequest {
    sketch: SketchInput,
    tags: Vec<String>,
    /// Magnification of the drawing overlay relative to sign units.
    scale: Option<f64>,
    placement: Option<Placement>,
    k: Option<usize>,
}

fn user_glyph_json(g: &StoredUserGlyph) -> Value {
    json!({
        "id": g.glyph.id,
        "tags": g.glyph.tags,
        "path": g.glyph.geometry.to_path(),
        "provenance": g.glyph.to_entry().provenance,
        "verdict": g.verdict,
    })
}

async fn submit_user_glyph(
    State(wb): State<Shared>,
    caller: Caller,
    payload: Result<Json<UserGlyphRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let req = body(payload)?;
    let session = caller
        .viewer
        .session
        .clone()
        .ok_or_else(|| ApiError::bad_request("missing-session", "user glyphs belong to a session; send X-Session"))?;
    let tags: BTreeSet<String> = req.tags.iter().map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
    if tags.is_empty() {
        return Err(ApiError::bad_request("missing-tags", "declare at least one function tag"));
    }
    let sketch = req.sketch.parse()?;
    let scale = req.scale.unwrap_or(1.0);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(ApiError::bad_request("bad-scale", "scale must be positive"));
    }
    let geometry: Geometry = sketch.to_geometry().scaled(1.0 / scale, 1.0 / scale);

    let context = match &req.placement {
        Some(p) => {
            let doc = SignDocument::from_xml(&p.xml).map_err(|e| ApiError::bad_request("malformed-sign", e.to_string()))?;
            let store = wb.read_store();
            PlacementContext::proposed(&doc, &geometry, p.x, p.y, &wb.registry, &*store)
        }
        None => PlacementContext::default(),
    };
    let draft = GlyphDraft { geometry, tags, author: caller.author.clone(), session };
    // descriptor work happens before the write lock is taken
    let verdict = draft.assess(&context, &wb.index, &wb.rules);
    let suggestions: Vec<Value> = ShapeDescriptor::of_geometry(&draft.geometry)
        .map(|d| wb.index.nearest(&d, req.k.unwrap_or(DEFAULT_SUGGESTIONS), |_, status| status.is_conventional()))
        .unwrap_or_default()
        .iter()
        .map(|m| match_json(&wb, m))
        .collect();

    let mut store = wb.write_store();
    let stored = store.insert_user_glyph(draft, verdict)?;
    let mut out = user_glyph_json(stored);
    out["suggestions"] = json!(suggestions);
    Ok((StatusCode::CREATED, Json(out)))
}

async fn list_user_glyphs(State(wb): State<Shared>, caller: Caller) -> Json<Value> {
    let store = wb.read_store();
    let glyphs: Vec<Value> = store.list_user_glyphs(&caller.viewer).into_iter().map(user_glyph_json).collect();
    Json(json!({ "glyphs": glyphs }))
}

fn palette_response(wb: &Workbench, id: UserGlyphId, viewer: &Viewer) -> Result<Response, ApiError> {
    let store = wb.read_store();
    match store.palette_glyph(id, viewer) {
        Ok(Some(g)) => Ok(Json(user_glyph_json(g)).into_response()),
        Ok(None) => Err(ApiError::new(StatusCode::NOT_FOUND, "unknown-glyph", format!("no user glyph {id}"))),
        Err(p) => Err(StoreError::Policy(p).into()),
    }
}

async fn palette_glyph(State(wb): State<Shared>, caller: Caller, Path(raw): Path<String>) -> Result<Response, ApiError> {
    match parse_glyph_ref(&raw)? {
        GlyphRef::User(id) => palette_response(&wb, id, &caller.viewer),
        GlyphRef::Symbol(_) => Err(ApiError::bad_request("bad-id", "user glyph ids look like U-<n>")),
    }
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Deserialize)]
struct FormatQuery {
    format: Option<String>,
}

async fn closure(State(wb): State<Shared>, q: Result<Query<FormatQuery>, QueryRejection>) -> Result<Response, ApiError> {
    match query(q)?.format.as_deref() {
        None | Some("json") => Ok(Json(&wb.closure).into_response()),
        Some("text") => Ok(wb.closure.render_text().into_response()),
        Some("records") => Ok(wb.closure.render_records().into_response()),
        Some(other) => Err(ApiError::bad_request("unknown-format", format!("unknown format {other:?}"))),
    }
}

#[derive(Deserialize)]
struct ClassQuery {
    class: Option<String>,
}

async fn corpus(State(wb): State<Shared>, q: Result<Query<ClassQuery>, QueryRejection>) -> Result<Json<Value>, ApiError> {
    let class = query(q)?
        .class
        .filter(|c| !c.is_empty())
        .ok_or_else(|| ApiError::bad_request("missing-class", "class= is required"))?;
    let store = wb.read_store();
    let signs = corpus_query(&store, &wb.registry, &class);
    Ok(Json(json!({ "class": class, "signs": signs })))
}

/// Header map for a caller, for clients and tests.
pub fn caller_headers(role: Role, session: Option<&str>) -> HeaderMap {
    let mut headers = HeaderMap::new();
    headers.insert("x-role", role.to_string().parse().expect("role is ascii"));
    if let Some(s) = session {
        if let Ok(v) = s.parse() {
            headers.insert("x-session", v);
        }
    }
    headers
}
