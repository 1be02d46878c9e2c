//! Sensor Planning Service core.
//!
//! - [`swe`]: tasking-parameter descriptions and the token/block text encoding
//! - [`task`]: tasking requests, tasks and their lifecycle under an injectable clock
//! - [`notify`]: the SPS topic namespace, subscriptions and ordered delivery
//! - [`asset`]: simulated assets answering feasibility and executing tasks
//! - [`service`]: the XML-over-HTTP operation dispatcher and server
//! - [`semantic`]: RDF view of requests and tasks, pattern queries, RDFS closure
//! - [`cli`]: client used by the `sps` binary

pub mod swe;
pub mod xml;
pub mod task;
pub mod notify;
pub mod asset;
pub mod semantic;
pub mod service;
pub mod cli;
