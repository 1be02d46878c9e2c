use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::Router;

use super::{ExceptionCode, Reply, Service, ServiceException, SERVICE, VERSION};
use crate::notify::drained_to_xml;
use crate::task::format_instant;
use crate::xml::{self as x, XmlWriter, SPS_NS};

const MAX_WAIT: Duration = Duration::from_secs(30);

fn xml(status: u16, body: String) -> Response {
    (
        StatusCode::from_u16(status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
        [(header::CONTENT_TYPE, "application/xml; charset=utf-8")],
        body,
    )
        .into_response()
}

fn reply(r: Reply) -> Response {
    xml(r.status, r.body)
}

fn exception(e: ServiceException) -> Response {
    xml(e.code.http_status(), e.to_xml())
}

async fn post_sps(State(svc): State<Arc<Service>>, body: String) -> Response {
    reply(svc.dispatch(&body))
}

async fn get_sps(State(svc): State<Arc<Service>>, Query(q): Query<HashMap<String, String>>) -> Response {
    let get = |k: &str| q.iter().find(|(key, _)| key.eq_ignore_ascii_case(k)).map(|(_, v)| v.as_str());
    match (get("service"), get("request")) {
        (Some(SERVICE), Some("GetCapabilities")) => xml(200, svc.capabilities()),
        (Some(SERVICE), Some(other)) => exception(
            ServiceException::new(
                ExceptionCode::OperationNotSupported,
                format!("'{other}' is not available through GET"),
            )
            .at("request"),
        ),
        (Some(s), _) if s != SERVICE => exception(
            ServiceException::new(ExceptionCode::InvalidParameterValue, format!("service must be {SERVICE}")).at("service"),
        ),
        _ => exception(ServiceException::new(ExceptionCode::InvalidRequest, "service and request are required")),
    }
}

async fn topics(State(svc): State<Arc<Service>>) -> Response {
    xml(200, svc.topics())
}

async fn subscribe(State(svc): State<Arc<Service>>, body: String) -> Response {
    let filter = match x::parse(&body) {
        Ok(doc) => {
            let root = doc.root_element();
            if !x::is_sps(&root, "Subscribe") {
                return exception(ServiceException::new(ExceptionCode::InvalidRequest, "expected sps:Subscribe"));
            }
            match root.attribute("topicFilter") {
                Some(f) => f.to_string(),
                None => {
                    return exception(
                        ServiceException::new(ExceptionCode::InvalidRequest, "missing topicFilter").at("topicFilter"),
                    )
                }
            }
        }
        Err((offset, m)) => {
            return exception(
                ServiceException::new(ExceptionCode::InvalidRequest, format!("malformed XML at byte {offset}: {m}"))
                    .at(offset.to_string()),
            )
        }
    };
    match svc.subscribe(&filter) {
        Ok(s) => {
            let mut w = XmlWriter::new();
            w.start("sps:SubscribeResponse")
                .attr("xmlns:sps", SPS_NS)
                .attr("version", VERSION)
                .attr("subscription", &s.id)
                .attr("topicFilter", &s.topic_filter)
                .end();
            xml(200, w.finish())
        }
        Err(e) => exception(e),
    }
}

async fn unsubscribe(State(svc): State<Arc<Service>>, Path(id): Path<String>) -> Response {
    match svc.unsubscribe(&id) {
        Ok(()) => StatusCode::NO_CONTENT.into_response(),
        Err(e) => exception(e),
    }
}

async fn events(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Response {
    let max = q.get("max").and_then(|m| m.parse().ok());
    let wait = q
        .get("wait")
        .and_then(|w| w.parse::<f64>().ok())
        .filter(|w| w.is_finite() && *w > 0.0)
        .map_or(Duration::ZERO, |w| Duration::from_secs_f64(w).min(MAX_WAIT));
    let deadline = Instant::now() + wait;
    loop {
        match svc.drain(&id, max) {
            Ok(d) if !d.events.is_empty() || d.overflowed || Instant::now() >= deadline => {
                return xml(200, drained_to_xml(&d))
            }
            Ok(_) => tokio::time::sleep(Duration::from_millis(20)).await,
            Err(e) => return exception(e),
        }
    }
}

async fn result_doc(State(svc): State<Arc<Service>>, Path((task, n)): Path<(String, usize)>) -> Response {
    match svc.result_document(&task, n) {
        Some(doc) => xml(200, doc),
        None => exception(
            ServiceException::new(ExceptionCode::UnknownTask, format!("no result {n} for task '{task}'")).at(task),
        ),
    }
}

fn clock_doc(now: chrono::DateTime<chrono::Utc>, virtual_mode: bool) -> String {
    let mut w = XmlWriter::new();
    w.start("sps:Clock")
        .attr("xmlns:sps", SPS_NS)
        .attr("now", &format_instant(now))
        .attr("mode", if virtual_mode { "virtual" } else { "system" })
        .end();
    w.finish()
}

async fn clock(State(svc): State<Arc<Service>>) -> Response {
    xml(200, clock_doc(svc.now(), svc.is_virtual()))
}

async fn advance(State(svc): State<Arc<Service>>, Query(q): Query<HashMap<String, String>>) -> Response {
    if !svc.clock_control_enabled() {
        let e = ServiceException::new(ExceptionCode::InvalidRequest, "clock control is disabled");
        return xml(403, e.to_xml());
    }
    let Some(secs) = q.get("seconds").and_then(|s| s.parse::<i64>().ok()).filter(|s| *s >= 0) else {
        return exception(
            ServiceException::new(ExceptionCode::InvalidParameterValue, "seconds must be a non-negative integer")
                .at("seconds"),
        );
    };
    let svc2 = svc.clone();
    let now = tokio::task::spawn_blocking(move || svc2.advance_clock(secs)).await.ok().flatten();
    match now {
        Some(now) => xml(200, clock_doc(now, true)),
        None => xml(403, ServiceException::new(ExceptionCode::InvalidRequest, "clock is not virtual").to_xml()),
    }
}

async fn semantic_query(State(svc): State<Arc<Service>>, Query(q): Query<HashMap<String, String>>) -> Response {
    match svc.semantic_query(q.get("q").map_or("", String::as_str)) {
        Ok(body) => xml(200, body),
        Err(e) => exception(e),
    }
}

async fn semantic_dump(State(svc): State<Arc<Service>>) -> Response {
    (
        StatusCode::OK,
        [(header::CONTENT_TYPE, "application/n-triples; charset=utf-8")],
        svc.semantic_dump(),
    )
        .into_response()
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/sps", post(post_sps).get(get_sps))
        .route("/sps/topics", get(topics))
        .route("/sps/subscriptions", post(subscribe))
        .route("/sps/subscriptions/{id}", delete(unsubscribe))
        .route("/sps/subscriptions/{id}/events", get(events))
        .route("/results/{task}/{n}", get(result_doc))
        .route("/clock", get(clock))
        .route("/clock/advance", post(advance))
        .route("/sps/semantics/query", get(semantic_query))
        .route("/sps/semantics/dump", get(semantic_dump))
        .with_state(svc)
}

/// Serves until `shutdown` resolves. Under the system clock a ticker fires
/// due timers.
pub async fn serve(
    svc: Arc<Service>,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    if !svc.is_virtual() {
        let ticker = svc.clone();
        tokio::spawn(async move {
            let mut iv = tokio::time::interval(Duration::from_millis(200));
            loop {
                iv.tick().await;
                let t = ticker.clone();
                let _ = tokio::task::spawn_blocking(move || t.tick()).await;
            }
        });
    }
    axum::serve(listener, router(svc)).with_graceful_shutdown(shutdown).await
}

/// A server running on its own thread; stopped on drop.
pub struct ServerHandle {
    pub addr: SocketAddr,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl ServerHandle {
    /// Base URL of the operation endpoint, e.g. `http://127.0.0.1:1234/sps`.
    pub fn endpoint(&self) -> String {
        format!("http://{}/sps", self.addr)
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        if let Some(s) = self.stop.take() {
            let _ = s.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Binds `addr` (port 0 picks a free one) and serves in the background.
pub fn spawn(svc: Arc<Service>, addr: SocketAddr) -> std::io::Result<ServerHandle> {
    let std_listener = std::net::TcpListener::bind(addr)?;
    std_listener.set_nonblocking(true)?;
    let addr = std_listener.local_addr()?;
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let rt = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()?;
    let thread = std::thread::Builder::new().name("sps-http".into()).spawn(move || {
        rt.block_on(async move {
            match tokio::net::TcpListener::from_std(std_listener) {
                Ok(l) => {
                    if let Err(e) = serve(svc, l, async {
                        let _ = rx.await;
                    })
                    .await
                    {
                        log::error!("server stopped: {e}");
                    }
                }
                Err(e) => log::error!("cannot adopt listener: {e}"),
            }
        });
    })?;
    Ok(ServerHandle {
        addr,
        stop: Some(tx),
        thread: Some(thread),
    })
}
