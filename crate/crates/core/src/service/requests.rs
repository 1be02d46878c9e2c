//! Builders for operation documents.

use super::{SERVICE, VERSION};
use crate::swe::{write_encoded_values, TextEncoding};
use crate::xml::{XmlWriter, SPS_NS};

fn op(name: &str) -> XmlWriter {
    let mut w = XmlWriter::new();
    w.start(&format!("sps:{name}"))
        .attr("xmlns:sps", SPS_NS)
        .attr("service", SERVICE)
        .attr("version", VERSION);
    w
}

fn finish(mut w: XmlWriter) -> String {
    w.end();
    w.finish()
}

pub fn get_capabilities() -> String {
    finish(op("GetCapabilities"))
}

pub fn describe_sensor(procedure: &str) -> String {
    let mut w = op("DescribeSensor");
    w.leaf("sps:procedure", procedure);
    finish(w)
}

pub fn describe_tasking(procedure: &str) -> String {
    let mut w = op("DescribeTasking");
    w.leaf("sps:procedure", procedure);
    finish(w)
}

/// GetFeasibility, Submit or Reserve.
pub fn tasking(operation: &str, procedure: &str, enc: &TextEncoding, values: &str, feasibility_id: Option<&str>) -> String {
    let mut w = op(operation);
    w.leaf("sps:procedure", procedure);
    w.start("sps:taskingParameters");
    write_encoded_values(&mut w, enc, values);
    w.end();
    if let Some(f) = feasibility_id {
        w.leaf("sps:feasibilityID", f);
    }
    finish(w)
}

/// Confirm, Cancel, GetTask or DescribeResultAccess.
pub fn task_operation(operation: &str, task: &str) -> String {
    let mut w = op(operation);
    w.leaf("sps:task", task);
    finish(w)
}

pub fn update(task: &str, enc: &TextEncoding, values: &str) -> String {
    let mut w = op("Update");
    w.leaf("sps:task", task);
    w.start("sps:taskingParameters");
    write_encoded_values(&mut w, enc, values);
    w.end();
    finish(w)
}

/// GetStatus for a task id, or for a request id (`req_<n>`).
pub fn get_status(id: &str) -> String {
    let mut w = op("GetStatus");
    w.leaf(if id.starts_with("req_") { "sps:request" } else { "sps:task" }, id);
    finish(w)
}

pub fn subscribe(topic_filter: &str) -> String {
    let mut w = XmlWriter::new();
    w.start("sps:Subscribe")
        .attr("xmlns:sps", SPS_NS)
        .attr("topicFilter", topic_filter)
        .end();
    w.finish()
}
