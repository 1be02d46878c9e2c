use chrono::{DateTime, SecondsFormat, Utc};

use super::model::{RequestStatus, Task, TaskState, TaskingRequest};
use crate::swe::{write_encoded_values, TextEncoding};
use crate::xml::XmlWriter;

pub fn format_instant(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Parameter values already rendered with their encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedParameters {
    pub encoding: TextEncoding,
    pub values: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportedState {
    Task(TaskState),
    Request(RequestStatus),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatusReport {
    pub task_id: Option<String>,
    pub request_id: Option<String>,
    pub procedure_id: String,
    pub state: ReportedState,
    pub percent_completion: u8,
    pub message: String,
    pub timestamp: DateTime<Utc>,
    pub data_available: bool,
    pub alternatives: Vec<EncodedParameters>,
}

/// A status report that also carries the reservation deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservationReport {
    pub status: StatusReport,
    pub reservation_expiration: DateTime<Utc>,
}

fn state_message(task: &Task) -> String {
    match task.state {
        TaskState::Feasible => "tasking request is feasible".into(),
        TaskState::Infeasible => "tasking request is not feasible".into(),
        TaskState::Reserved => "resources reserved, awaiting confirmation".into(),
        TaskState::InExecution => format!("executing on {}", task.asset_id),
        TaskState::Completed => "execution completed".into(),
        TaskState::Failed => "execution failed".into(),
        TaskState::Cancelled => "task cancelled".into(),
        TaskState::ReservationExpired => "reservation expired".into(),
    }
}

/// Current status of a task. Completion is 100 exactly for Completed tasks.
pub fn status_report(task: &Task, now: DateTime<Utc>, data_available: bool) -> StatusReport {
    let percent_completion = match task.state {
        TaskState::Completed => 100,
        _ => task.progress.min(99),
    };
    StatusReport {
        task_id: Some(task.id.clone()),
        request_id: Some(task.request_id.clone()),
        procedure_id: task.procedure_id.clone(),
        state: ReportedState::Task(task.state),
        percent_completion,
        message: state_message(task),
        timestamp: now,
        data_available,
        alternatives: Vec::new(),
    }
}

pub fn request_report(req: &TaskingRequest, now: DateTime<Utc>, alternatives: Vec<EncodedParameters>) -> StatusReport {
    let message = if req.message.is_empty() {
        format!("{} request {}", req.kind.operation(), req.status().as_str().to_lowercase())
    } else {
        req.message.clone()
    };
    StatusReport {
        task_id: req.task_id.clone(),
        request_id: Some(req.id.clone()),
        procedure_id: req.procedure_id.clone(),
        state: ReportedState::Request(req.status()),
        percent_completion: 0,
        message,
        timestamp: now,
        data_available: false,
        alternatives,
    }
}

fn write_report_body(w: &mut XmlWriter, r: &StatusReport) {
    if let Some(t) = &r.task_id {
        w.leaf("sps:task", t);
    }
    if let Some(q) = &r.request_id {
        w.leaf("sps:request", q);
    }
    w.leaf("sps:procedure", &r.procedure_id);
    match r.state {
        ReportedState::Task(s) => w.leaf("sps:taskStatus", s.as_str()),
        ReportedState::Request(s) => w.leaf("sps:requestStatus", s.as_str()),
    };
    w.leaf("sps:percentCompletion", &r.percent_completion.to_string());
    w.leaf("sps:statusMessage", &r.message);
    w.leaf("sps:updateTime", &format_instant(r.timestamp));
    w.leaf("sps:dataAvailable", if r.data_available { "true" } else { "false" });
    if !r.alternatives.is_empty() {
        w.start("sps:alternatives");
        for a in &r.alternatives {
            write_encoded_values(w, &a.encoding, &a.values);
        }
        w.end();
    }
}

pub fn write_status_report(w: &mut XmlWriter, r: &StatusReport) {
    w.start("sps:StatusReport");
    write_report_body(w, r);
    w.end();
}

pub fn write_reservation_report(w: &mut XmlWriter, r: &ReservationReport) {
    w.start("sps:ReservationReport");
    write_report_body(w, &r.status);
    w.leaf("sps:reservationExpiration", &format_instant(r.reservation_expiration));
    w.end();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swe::{fixtures::reference_block, ParameterData};
    use crate::task::model::{create_task, transition, AcceptUpdates, Command, RequestKind};
    use chrono::Duration;

    fn task(kind: RequestKind) -> Task {
        let t0 = DateTime::parse_from_rfc3339("2010-08-20T10:00:00Z").unwrap().to_utc();
        let mut r = TaskingRequest::new("req_1", kind, "p", ParameterData::single(reference_block()), t0);
        r.accept().unwrap();
        create_task("task_1", &r, true, "a", t0, Duration::seconds(60)).unwrap()
    }

    #[test]
    fn completed_is_full() {
        let t = task(RequestKind::Submit);
        let done = transition(&t, Command::ExecutionCompleted, t.created_at, &AcceptUpdates).unwrap().task;
        let r = status_report(&done, done.created_at, true);
        assert_eq!(r.percent_completion, 100);
        assert!(r.data_available);
    }

    #[test]
    fn reserved_is_zero() {
        let t = task(RequestKind::Reserve);
        let r = status_report(&t, t.created_at, false);
        assert_eq!(r.percent_completion, 0);
        assert_eq!(r.state, ReportedState::Task(TaskState::Reserved));
    }

    #[test]
    fn cancelled_with_partial_data() {
        let mut t = task(RequestKind::Submit);
        t.progress = 50;
        let c = transition(&t, Command::Cancel, t.created_at, &AcceptUpdates).unwrap().task;
        let r = status_report(&c, c.created_at, true);
        assert_eq!(r.state, ReportedState::Task(TaskState::Cancelled));
        assert_eq!(r.percent_completion, 50);
        assert!(r.data_available);
    }
}
