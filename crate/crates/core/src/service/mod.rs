//! XML-over-HTTP facade: configuration, request dispatch, HTTP routes.

pub mod config;
mod engine;
mod exception;
pub mod http;
mod ops;
pub mod requests;

use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, Duration, Utc};

pub use config::{default_config, load, load_from_args, ClockMode, ConfigError, LoadedConfig, Procedure, ServiceConfig};
pub use engine::{Engine, TaskCommand, TaskingOutcome};
pub use exception::{parse_exception_report, ExceptionCode, ServiceException};
pub use ops::{capabilities_document, Listener, RequestOperator, OPERATIONS, SERVICE, VERSION};

use crate::notify::{topic_namespace_document, Drained, NotificationHub, NotifyError, Subscription};
use crate::semantic::{bindings_to_xml, parse_bgp};

/// HTTP status and body of a dispatched request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub status: u16,
    pub body: String,
}

impl From<Result<String, ServiceException>> for Reply {
    fn from(r: Result<String, ServiceException>) -> Self {
        match r {
            Ok(body) => Reply { status: 200, body },
            Err(e) => Reply {
                status: e.code.http_status(),
                body: e.to_xml(),
            },
        }
    }
}

fn notify_exception(e: NotifyError) -> ServiceException {
    let code = match e {
        NotifyError::UnknownTopic(_) => ExceptionCode::UnknownTopic,
        NotifyError::UnknownSubscription(_) => ExceptionCode::UnknownSubscription,
        NotifyError::PayloadTypeMismatch { .. } => ExceptionCode::InvalidRequest,
    };
    ServiceException::new(code, e.to_string())
}

/// A running service instance: one engine behind a lock, plus the
/// notification hub which has its own.
pub struct Service {
    engine: Mutex<Engine>,
    hub: Arc<NotificationHub>,
    operator: RequestOperator,
    debug_clock: bool,
    port: u16,
}

impl Service {
    pub fn new(cfg: LoadedConfig) -> Result<Self, ConfigError> {
        let hub = Arc::new(NotificationHub::new(cfg.service.queue_capacity));
        let debug_clock = cfg.service.debug_clock;
        let port = cfg.service.port;
        Ok(Service {
            engine: Mutex::new(Engine::new(cfg, hub.clone())?),
            hub,
            operator: RequestOperator::standard(),
            debug_clock,
            port,
        })
    }

    pub fn with_default_config() -> Self {
        Self::new(default_config()).expect("default configuration is valid")
    }

    fn lock(&self) -> MutexGuard<'_, Engine> {
        self.engine.lock().unwrap_or_else(|p| p.into_inner())
    }

    /// Runs `f` with exclusive access to the engine.
    pub fn with_engine<R>(&self, f: impl FnOnce(&mut Engine) -> R) -> R {
        f(&mut self.lock())
    }

    pub fn port(&self) -> u16 {
        self.port
    }

    pub fn operations(&self) -> Vec<&'static str> {
        self.operator.operations()
    }

    pub fn try_dispatch(&self, xml: &str) -> Result<String, ServiceException> {
        let mut engine = self.lock();
        self.operator.dispatch(&mut engine, xml)
    }

    pub fn dispatch(&self, xml: &str) -> Reply {
        self.try_dispatch(xml).into()
    }

    pub fn capabilities(&self) -> String {
        capabilities_document(&self.lock())
    }

    pub fn topics(&self) -> String {
        topic_namespace_document()
    }

    pub fn hub(&self) -> &NotificationHub {
        &self.hub
    }

    pub fn subscribe(&self, topic_filter: &str) -> Result<Subscription, ServiceException> {
        self.hub.subscribe(topic_filter).map_err(notify_exception)
    }

    pub fn unsubscribe(&self, id: &str) -> Result<(), ServiceException> {
        self.hub.unsubscribe(id).map_err(notify_exception)
    }

    pub fn drain(&self, id: &str, max: Option<usize>) -> Result<Drained, ServiceException> {
        self.hub.drain(id, max).map_err(notify_exception)
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.lock().now()
    }

    pub fn is_virtual(&self) -> bool {
        self.lock().is_virtual()
    }

    /// Whether clock control is exposed over HTTP.
    pub fn clock_control_enabled(&self) -> bool {
        self.debug_clock && self.is_virtual()
    }

    /// Advances the virtual clock; `None` under the system clock.
    pub fn advance_clock(&self, seconds: i64) -> Option<DateTime<Utc>> {
        self.lock().advance(Duration::seconds(seconds))
    }

    pub fn tick(&self) {
        self.lock().tick()
    }

    pub fn result_document(&self, task_id: &str, n: usize) -> Option<String> {
        self.lock().result_content(task_id, n)
    }

    /// Evaluates a text basic graph pattern against the inferred store.
    pub fn semantic_query(&self, text: &str) -> Result<String, ServiceException> {
        let malformed = |e: crate::semantic::MalformedPattern| {
            ServiceException::new(ExceptionCode::MalformedPattern, e.to_string()).at("q")
        };
        let patterns = parse_bgp(text).map_err(malformed)?;
        let engine = self.lock();
        let rows = engine.semantic().query(&patterns).map_err(malformed)?;
        Ok(bindings_to_xml(&rows, &patterns))
    }

    pub fn semantic_dump(&self) -> String {
        self.lock().semantic().dump()
    }

    pub fn fingerprint(&self) -> String {
        self.lock().fingerprint()
    }
}
