use std::collections::BTreeMap;

use roxmltree::Node;

use super::engine::{Engine, TaskCommand, TaskingOutcome};
use super::exception::{ExceptionCode, ServiceException};
use crate::swe::{read_parameter_data, write_description, write_encoded_values, TextEncoding};
use crate::task::{
    format_instant, write_reservation_report, write_status_report, HistoryEvent, RequestKind, ReservationReport, Task,
    TaskState,
};
use crate::xml::{self as x, XmlWriter, OWS_NS, SPS_NS, XML_DECL};

pub const SERVICE: &str = "SPS";
pub const VERSION: &str = "2.0";

/// Every dispatchable operation, in capabilities order.
pub const OPERATIONS: [&str; 12] = [
    "GetCapabilities",
    "DescribeSensor",
    "DescribeTasking",
    "GetFeasibility",
    "Submit",
    "Reserve",
    "Confirm",
    "Update",
    "Cancel",
    "GetStatus",
    "GetTask",
    "DescribeResultAccess",
];

pub type Handler = fn(&mut Engine, &Node) -> Result<String, ServiceException>;

/// Handles one operation.
#[derive(Clone, Copy)]
pub struct Listener {
    pub operation: &'static str,
    handler: Handler,
}

/// Validates incoming documents and hands each to the listener for its
/// root element.
pub struct RequestOperator {
    listeners: BTreeMap<&'static str, Listener>,
}

impl Default for RequestOperator {
    fn default() -> Self {
        Self::standard()
    }
}

fn invalid(text: impl Into<String>) -> ServiceException {
    ServiceException::new(ExceptionCode::InvalidRequest, text)
}

fn response(op: &str) -> XmlWriter {
    let mut w = XmlWriter::new();
    w.start(&format!("sps:{op}Response"))
        .attr("xmlns:sps", SPS_NS)
        .attr("version", VERSION);
    w
}

fn done(mut w: XmlWriter) -> String {
    w.end();
    w.finish()
}

fn required(node: &Node, local: &str) -> Result<String, ServiceException> {
    x::sps_child_text(node, local)
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .ok_or_else(|| invalid(format!("missing sps:{local}")).at(local))
}

fn tasking_parameters(node: &Node) -> Result<(TextEncoding, String), ServiceException> {
    let pd = x::sps_child(node, "taskingParameters")
        .and_then(|tp| x::sps_child(&tp, "ParameterData"))
        .ok_or_else(|| invalid("missing sps:taskingParameters/sps:ParameterData").at("taskingParameters"))?;
    read_parameter_data(&pd).map_err(|e| invalid(e.to_string()).at("taskingParameters"))
}

impl RequestOperator {
    pub fn standard() -> Self {
        let table: [(&'static str, Handler); 12] = [
            ("GetCapabilities", |e, _| Ok(capabilities_document(e))),
            ("DescribeSensor", describe_sensor),
            ("DescribeTasking", describe_tasking),
            ("GetFeasibility", |e, n| tasking(e, n, RequestKind::Feasibility)),
            ("Submit", |e, n| tasking(e, n, RequestKind::Submit)),
            ("Reserve", |e, n| tasking(e, n, RequestKind::Reserve)),
            ("Confirm", |e, n| task_command(e, n, "Confirm")),
            ("Update", |e, n| task_command(e, n, "Update")),
            ("Cancel", |e, n| task_command(e, n, "Cancel")),
            ("GetStatus", get_status),
            ("GetTask", get_task),
            ("DescribeResultAccess", describe_result_access),
        ];
        RequestOperator {
            listeners: table
                .into_iter()
                .map(|(operation, handler)| (operation, Listener { operation, handler }))
                .collect(),
        }
    }

    pub fn operations(&self) -> Vec<&'static str> {
        self.listeners.keys().copied().collect()
    }

    /// Parses, validates and routes one operation document.
    pub fn dispatch(&self, engine: &mut Engine, raw: &str) -> Result<String, ServiceException> {
        let doc = x::parse(raw)
            .map_err(|(offset, msg)| invalid(format!("malformed XML at byte {offset}: {msg}")).at(offset.to_string()))?;
        let root = doc.root_element();
        let name = root.tag_name().name();
        let listener = match (root.tag_name().namespace(), self.listeners.get(name)) {
            (Some(SPS_NS), Some(l)) => l,
            _ => {
                return Err(ServiceException::new(
                    ExceptionCode::OperationNotSupported,
                    format!("no operation '{name}' in the SPS namespace"),
                )
                .at(name))
            }
        };
        match root.attribute("service") {
            Some(SERVICE) => {}
            Some(other) => {
                return Err(ServiceException::new(
                    ExceptionCode::InvalidParameterValue,
                    format!("service must be {SERVICE}, got '{other}'"),
                )
                .at("service"))
            }
            None => return Err(invalid("missing service attribute").at("service")),
        }
        match root.attribute("version") {
            Some(VERSION) => {}
            None if listener.operation == "GetCapabilities" => {}
            Some(other) => {
                return Err(ServiceException::new(
                    ExceptionCode::InvalidParameterValue,
                    format!("version must be {VERSION}, got '{other}'"),
                )
                .at("version"))
            }
            None => return Err(invalid("missing version attribute").at("version")),
        }
        (listener.handler)(engine, &root)
    }
}

pub fn capabilities_document(engine: &Engine) -> String {
    let cfg = engine.config();
    let mut w = XmlWriter::new();
    w.start("sps:Capabilities")
        .attr("xmlns:sps", SPS_NS)
        .attr("xmlns:ows", OWS_NS)
        .attr("version", VERSION);
    w.start("sps:ServiceIdentification");
    w.leaf("sps:title", &cfg.title);
    w.leaf("sps:serviceType", SERVICE);
    w.leaf("sps:serviceTypeVersion", VERSION);
    w.end();
    w.start("sps:ServiceProvider");
    w.leaf("sps:providerName", &cfg.provider);
    w.end();
    w.start("sps:OperationsMetadata");
    for op in OPERATIONS {
        w.start("sps:Operation").attr("name", op).end();
    }
    w.end();
    w.start("sps:Contents");
    for a in engine.assets() {
        w.start("sps:offering");
        w.leaf("sps:procedure", &a.procedure_id);
        w.leaf("sps:asset", &a.asset_id);
        w.leaf("sps:encoding", "TextEncoding");
        w.end();
    }
    w.end();
    w.start("sps:topics").attr("href", "/sps/topics").end();
    done(w)
}

fn describe_sensor(engine: &mut Engine, node: &Node) -> Result<String, ServiceException> {
    let id = required(node, "procedure")?;
    let p = engine.procedure(&id)?;
    let body = p.sensor_document.trim_start();
    let body = body.strip_prefix(XML_DECL).unwrap_or(body).trim();
    let mut w = response("DescribeSensor");
    w.leaf("sps:procedure", &id);
    w.start("sps:description").raw(body).end();
    Ok(done(w))
}

fn describe_tasking(engine: &mut Engine, node: &Node) -> Result<String, ServiceException> {
    let id = required(node, "procedure")?;
    let p = engine.procedure(&id)?;
    let mut w = response("DescribeTasking");
    write_description(&mut w, &p.description);
    Ok(done(w))
}

fn write_task_report(w: &mut XmlWriter, engine: &Engine, task: &Task) -> Result<(), ServiceException> {
    let status = engine.status(&task.id)?;
    match task.reservation_expiration {
        Some(exp) if task.state == TaskState::Reserved => write_reservation_report(
            w,
            &ReservationReport {
                status,
                reservation_expiration: exp,
            },
        ),
        _ => write_status_report(w, &status),
    }
    Ok(())
}

fn tasking_response(engine: &Engine, kind: RequestKind, o: &TaskingOutcome) -> Result<String, ServiceException> {
    let mut w = response(kind.operation());
    w.leaf("sps:request", &o.request.id);
    w.leaf("sps:requestStatus", o.request.status().as_str());
    if let Some(f) = o.feasible {
        w.leaf("sps:feasible", if f { "true" } else { "false" });
    }
    if let Some(t) = &o.task {
        w.leaf("sps:task", &t.id);
    }
    w.leaf("sps:statusMessage", &o.message);
    if !o.alternatives.is_empty() {
        w.start("sps:alternatives");
        for a in &o.alternatives {
            write_encoded_values(&mut w, &a.encoding, &a.values);
        }
        w.end();
    }
    if let Some(t) = &o.task {
        let current = engine.task(&t.id)?.clone();
        write_task_report(&mut w, engine, &current)?;
    }
    Ok(done(w))
}

fn tasking(engine: &mut Engine, node: &Node, kind: RequestKind) -> Result<String, ServiceException> {
    let procedure = required(node, "procedure")?;
    let (enc, values) = tasking_parameters(node)?;
    let fid = x::sps_child_text(node, "feasibilityID").map(|t| t.trim().to_string());
    let outcome = engine.tasking_request(kind, &procedure, &enc, &values, fid.as_deref())?;
    tasking_response(engine, kind, &outcome)
}

fn task_command(engine: &mut Engine, node: &Node, op: &str) -> Result<String, ServiceException> {
    let task_id = required(node, "task")?;
    let cmd = match op {
        "Confirm" => TaskCommand::Confirm,
        "Cancel" => TaskCommand::Cancel,
        _ => {
            engine.task(&task_id)?;
            let (encoding, values) = tasking_parameters(node)?;
            TaskCommand::Update { encoding, values }
        }
    };
    let task = engine.command(&task_id, cmd)?;
    let mut w = response(op);
    write_task_report(&mut w, engine, &task)?;
    Ok(done(w))
}

fn get_status(engine: &mut Engine, node: &Node) -> Result<String, ServiceException> {
    let id = x::sps_child_text(node, "task")
        .or_else(|| x::sps_child_text(node, "request"))
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .ok_or_else(|| invalid("GetStatus needs sps:task or sps:request").at("task"))?;
    let report = engine.status(&id)?;
    let mut w = response("GetStatus");
    write_status_report(&mut w, &report);
    Ok(done(w))
}

fn history_label(e: &HistoryEvent) -> String {
    match e {
        HistoryEvent::Created { state, .. } => format!("Created:{state}"),
        other => other.label().to_string(),
    }
}

fn get_task(engine: &mut Engine, node: &Node) -> Result<String, ServiceException> {
    let id = required(node, "task")?;
    let task = engine.task(&id)?.clone();
    let mut w = response("GetTask");
    w.start("sps:Task");
    w.leaf("sps:identifier", &task.id);
    w.leaf("sps:kind", task.kind.as_str());
    w.leaf("sps:taskStatus", task.state.as_str());
    w.leaf("sps:procedure", &task.procedure_id);
    w.leaf("sps:asset", &task.asset_id);
    w.leaf("sps:request", &task.request_id);
    w.leaf("sps:createdAt", &format_instant(task.created_at));
    w.leaf("sps:percentCompletion", &task.progress.to_string());
    if let Some(e) = task.reservation_expiration {
        w.leaf("sps:reservationExpiration", &format_instant(e));
    }
    w.start("sps:taskingParameters");
    if let Some(enc) = engine.encode(&task.procedure_id, &task.parameters) {
        write_encoded_values(&mut w, &enc.encoding, &enc.values);
    }
    w.end();
    w.start("sps:history");
    for h in task.history() {
        w.start("sps:entry")
            .attr("seq", &h.seq.to_string())
            .attr("at", &format_instant(h.at))
            .text(&history_label(&h.event))
            .end();
    }
    w.end();
    w.end();
    Ok(done(w))
}

fn describe_result_access(engine: &mut Engine, node: &Node) -> Result<String, ServiceException> {
    let id = required(node, "task")?;
    let refs = engine.result_references(&id)?;
    let mut w = response("DescribeResultAccess");
    w.leaf("sps:task", &id);
    w.start("sps:results").attr("count", &refs.len().to_string());
    for r in &refs {
        w.start("sps:ResultReference")
            .attr("uri", &r.uri)
            .attr("producedAt", &format_instant(r.produced_at))
            .attr("partial", if r.partial { "true" } else { "false" })
            .text(&r.description)
            .end();
    }
    w.end();
    Ok(done(w))
}
