//! HTTP render service.
//!
//! | method | path            | body                         | response                         |
//! |--------|-----------------|------------------------------|----------------------------------|
//! | POST   | `/api/render`   | scene document               | PNG or PPM, `X-Render-Stats`     |
//! | GET    | `/api/presets`  |                              | preset catalogue                 |
//! | POST   | `/api/validate` | equation text or JSON        | [`Diagnostics`], always 200      |
//! | POST   | `/api/curve`    | [`CurveRequest`]             | SVG or polyline JSON             |
//! | POST   | `/api/lift`     | [`LiftRequest`]              | OBJ or mesh JSON                 |
//!
//! Errors are JSON `{"error": kind, "message": text}` with status 400
//! (schema), 422 (equation), 413 (over the size cap) or 429 (queue full).

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Request, State};
use axum::http::{header, HeaderName, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde_json::{json, Value};
use surfmotif::motif::catalog_json;
use surfmotif::scene::SceneDoc;
use tokio::sync::Semaphore;

use crate::diagnostics::{validate, Diagnostics};
use crate::pipeline::{self, parse_size, CurveRequest, FacadeError, LiftRequest, Limits, Payload};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_QUEUE: usize = 32;
pub const STATS_HEADER: &str = "x-render-stats";

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub bind: IpAddr,
    pub port: u16,
    pub limits: Limits,
    /// Requests admitted at once, running or waiting; more get 429.
    pub queue: usize,
    /// Jobs running at once.
    pub workers: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: DEFAULT_PORT,
            limits: Limits::default(),
            queue: DEFAULT_QUEUE,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl Config {
    /// Defaults overridden by `SURFMOTIF_PORT`, `SURFMOTIF_MAX_SIZE`
    /// (`WxH` or a single side) and `SURFMOTIF_QUEUE`.
    pub fn from_env() -> Result<Config, String> {
        let mut config = Config::default();
        if let Ok(port) = std::env::var("SURFMOTIF_PORT") {
            config.port = port.parse().map_err(|_| format!("SURFMOTIF_PORT: invalid port '{port}'"))?;
        }
        if let Ok(size) = std::env::var("SURFMOTIF_MAX_SIZE") {
            let (w, h) = parse_size(&size).map_err(|e| format!("SURFMOTIF_MAX_SIZE: {e}"))?;
            config.limits = Limits { max_width: w, max_height: h, ..config.limits };
        }
        if let Ok(queue) = std::env::var("SURFMOTIF_QUEUE") {
            config.queue = queue.parse().map_err(|_| format!("SURFMOTIF_QUEUE: invalid count '{queue}'"))?;
        }
        Ok(config)
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }
}

/// An error response.
#[derive(Debug)]
pub enum ApiError {
    Facade(FacadeError),
    Busy,
    NotFound,
    MethodNotAllowed,
    Internal(String),
}

impl From<FacadeError> for ApiError {
    fn from(e: FacadeError) -> Self {
        ApiError::Facade(e)
    }
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Facade(FacadeError::Schema(_)) => StatusCode::BAD_REQUEST,
            ApiError::Facade(FacadeError::Equation(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Facade(FacadeError::TooLarge(_)) => StatusCode::PAYLOAD_TOO_LARGE,
            ApiError::Facade(FacadeError::Io(_)) | ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ApiError::Busy => StatusCode::TOO_MANY_REQUESTS,
            ApiError::NotFound => StatusCode::NOT_FOUND,
            ApiError::MethodNotAllowed => StatusCode::METHOD_NOT_ALLOWED,
        }
    }

    fn kind_and_message(&self) -> (&'static str, String) {
        match self {
            ApiError::Facade(e) => (e.kind(), e.to_string()),
            ApiError::Busy => ("busy", "render queue is full, retry later".into()),
            ApiError::NotFound => ("not_found", "no such endpoint".into()),
            ApiError::MethodNotAllowed => ("method_not_allowed", "method not allowed on this endpoint".into()),
            ApiError::Internal(m) => ("internal", m.clone()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (kind, message) = self.kind_and_message();
        json_response(self.status(), json!({ "error": kind, "message": message }).to_string())
    }
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn payload_response(p: Payload) -> Response {
    ([(header::CONTENT_TYPE, p.content_type)], p.body).into_response()
}

struct Inner {
    config: Config,
    in_flight: AtomicUsize,
    workers: Arc<Semaphore>,
}

/// Shared service state; cheap to clone.
#[derive(Clone)]
pub struct Service {
    inner: Arc<Inner>,
}

/// Holds one queue slot until dropped.
struct Ticket(Arc<Inner>);

impl Drop for Ticket {
    fn drop(&mut self) {
        self.0.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

impl Service {
    pub fn new(config: Config) -> Service {
        let workers = Arc::new(Semaphore::new(config.workers.max(1)));
        Service { inner: Arc::new(Inner { config, in_flight: AtomicUsize::new(0), workers }) }
    }

    pub fn config(&self) -> &Config {
        &self.inner.config
    }

    /// Admitted requests not yet finished.
    pub fn in_flight(&self) -> usize {
        self.inner.in_flight.load(Ordering::SeqCst)
    }

    fn admit(&self) -> Option<Ticket> {
        let prev = self.inner.in_flight.fetch_add(1, Ordering::SeqCst);
        let ticket = Ticket(self.inner.clone());
        (prev < self.inner.config.queue).then_some(ticket)
    }

    /// Runs `job` on the blocking pool once a worker is free. The queue slot
    /// is held until the job finishes, even if the client goes away.
    async fn execute<T, F>(&self, job: F) -> Result<T, ApiError>
    where
        T: Send + 'static,
        F: FnOnce() -> T + Send + 'static,
    {
        let ticket = self.admit().ok_or(ApiError::Busy)?;
        let permit = self.inner.workers.clone().acquire_owned().await.map_err(|e| ApiError::Internal(e.to_string()))?;
        tokio::task::spawn_blocking(move || {
            let _held = (ticket, permit);
            job()
        })
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))
    }

    pub fn router(&self) -> Router {
        Router::new()
            .route("/api/render", post(render))
            .route("/api/presets", get(presets))
            .route("/api/validate", post(validate_equation))
            .route("/api/curve", post(curve))
            .route("/api/lift", post(lift))
            .fallback(|| async { ApiError::NotFound })
            .method_not_allowed_fallback(|| async { ApiError::MethodNotAllowed })
            .layer(middleware::from_fn(cors))
            .with_state(self.clone())
    }
}

/// Lets a studio page served from another origin call the API and read the
/// stats header.
async fn cors(req: Request, next: Next) -> Response {
    let mut resp =
        if req.method() == Method::OPTIONS { StatusCode::NO_CONTENT.into_response() } else { next.run(req).await };
    let h = resp.headers_mut();
    h.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, HeaderValue::from_static("*"));
    h.insert(header::ACCESS_CONTROL_ALLOW_METHODS, HeaderValue::from_static("GET, POST, OPTIONS"));
    h.insert(header::ACCESS_CONTROL_ALLOW_HEADERS, HeaderValue::from_static("content-type"));
    h.insert(header::ACCESS_CONTROL_EXPOSE_HEADERS, HeaderValue::from_static(STATS_HEADER));
    resp
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| FacadeError::Schema(format!("invalid request: {e}")).into())
}

async fn render(State(svc): State<Service>, body: Bytes) -> Result<Response, ApiError> {
    let doc = SceneDoc::from_slice(&body).map_err(FacadeError::from)?;
    let resolved = pipeline::prepare(&doc, &svc.config().limits)?;
    let rendered = svc.execute(move || pipeline::render(&resolved, None)).await??;
    let mut resp = payload_response(rendered.payload);
    let stats =
        HeaderValue::from_str(&rendered.diagnostics.to_json()).map_err(|e| ApiError::Internal(e.to_string()))?;
    resp.headers_mut().insert(HeaderName::from_static(STATS_HEADER), stats);
    Ok(resp)
}

async fn presets() -> Response {
    json_response(StatusCode::OK, catalog_json())
}

/// Accepts `{"equation": "..."}`, a JSON string, or the bare equation text.
fn equation_text(body: &[u8]) -> Result<String, ApiError> {
    let text = std::str::from_utf8(body).map_err(|_| FacadeError::Schema("body is not UTF-8".into()))?;
    match serde_json::from_str::<Value>(text) {
        Ok(Value::String(s)) => Ok(s),
        Ok(Value::Object(map)) => match (map.len(), map.get("equation")) {
            (1, Some(Value::String(s))) => Ok(s.clone()),
            _ => Err(FacadeError::Schema("expected {\"equation\": \"...\"}".into()).into()),
        },
        _ => Ok(text.to_string()),
    }
}

async fn validate_equation(body: Bytes) -> Result<Response, ApiError> {
    let text = equation_text(&body)?;
    let diagnostics: Diagnostics = validate(&text);
    Ok(json_response(StatusCode::OK, diagnostics.to_json()))
}

async fn curve(State(svc): State<Service>, body: Bytes) -> Result<Response, ApiError> {
    let req: CurveRequest = parse_json(&body)?;
    let limits = svc.config().limits;
    Ok(payload_response(svc.execute(move || pipeline::curve(&req, &limits)).await??))
}

async fn lift(State(svc): State<Service>, body: Bytes) -> Result<Response, ApiError> {
    let req: LiftRequest = parse_json(&body)?;
    let limits = svc.config().limits;
    Ok(payload_response(svc.execute(move || pipeline::lift(&req, &limits)).await??))
}

/// Binds and serves until Ctrl-C.
pub async fn serve(config: Config) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.addr()).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    let app = Service::new(config).router();
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equation_bodies() {
        assert_eq!(equation_text(br#"{"equation":"x+1"}"#).unwrap(), "x+1");
        assert_eq!(equation_text(br#""x+1""#).unwrap(), "x+1");
        assert_eq!(equation_text(b"x^2+*y").unwrap(), "x^2+*y");
        assert_eq!(equation_text(b"2").unwrap(), "2");
        assert!(equation_text(br#"{"eq":"x"}"#).is_err());
        assert!(equation_text(&[0xff, 0xfe]).is_err());
    }

    #[test]
    fn queue_slots_are_returned() {
        let svc = Service::new(Config { queue: 2, ..Config::default() });
        let a = svc.admit().unwrap();
        let b = svc.admit().unwrap();
        assert!(svc.admit().is_none());
        assert_eq!(svc.in_flight(), 2);
        drop((a, b));
        assert_eq!(svc.in_flight(), 0);
    }
}
