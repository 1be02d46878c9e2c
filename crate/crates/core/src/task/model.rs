use std::fmt;

use chrono::{DateTime, Duration, Utc};

use crate::notify::EventKind;
use crate::swe::ParameterData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RequestKind {
    Feasibility,
    Submit,
    Reserve,
}

impl RequestKind {
    /// Name of the operation that carries this kind of request.
    pub fn operation(self) -> &'static str {
        match self {
            RequestKind::Feasibility => "GetFeasibility",
            RequestKind::Submit => "Submit",
            RequestKind::Reserve => "Reserve",
        }
    }

    pub fn from_operation(op: &str) -> Option<Self> {
        match op {
            "GetFeasibility" => Some(RequestKind::Feasibility),
            "Submit" => Some(RequestKind::Submit),
            "Reserve" => Some(RequestKind::Reserve),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RequestStatus {
    Pending,
    Accepted,
    Rejected,
    Expired,
}

impl RequestStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RequestStatus::Pending => "Pending",
            RequestStatus::Accepted => "Accepted",
            RequestStatus::Rejected => "Rejected",
            RequestStatus::Expired => "Expired",
        }
    }
}

impl fmt::Display for RequestStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("request {id} is {status}, not Pending")]
pub struct RequestNotPending {
    pub id: String,
    pub status: RequestStatus,
}

/// A GetFeasibility, Submit or Reserve request as received.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskingRequest {
    pub id: String,
    pub kind: RequestKind,
    pub procedure_id: String,
    pub parameters: ParameterData,
    pub received_at: DateTime<Utc>,
    status: RequestStatus,
    alternatives: Vec<ParameterData>,
    pub task_id: Option<String>,
    pub message: String,
}

impl TaskingRequest {
    pub fn new(
        id: impl Into<String>,
        kind: RequestKind,
        procedure_id: impl Into<String>,
        parameters: ParameterData,
        received_at: DateTime<Utc>,
    ) -> Self {
        TaskingRequest {
            id: id.into(),
            kind,
            procedure_id: procedure_id.into(),
            parameters,
            received_at,
            status: RequestStatus::Pending,
            alternatives: Vec::new(),
            task_id: None,
            message: String::new(),
        }
    }

    pub fn status(&self) -> RequestStatus {
        self.status
    }

    pub fn alternatives(&self) -> &[ParameterData] {
        &self.alternatives
    }

    fn resolve(&mut self, to: RequestStatus) -> Result<(), RequestNotPending> {
        if self.status != RequestStatus::Pending {
            return Err(RequestNotPending {
                id: self.id.clone(),
                status: self.status,
            });
        }
        self.status = to;
        Ok(())
    }

    pub fn accept(&mut self) -> Result<(), RequestNotPending> {
        self.resolve(RequestStatus::Accepted)
    }

    pub fn reject(&mut self, alternatives: Vec<ParameterData>, message: impl Into<String>) -> Result<(), RequestNotPending> {
        self.resolve(RequestStatus::Rejected)?;
        self.alternatives = alternatives;
        self.message = message.into();
        Ok(())
    }

    pub fn expire(&mut self, message: impl Into<String>) -> Result<(), RequestNotPending> {
        self.resolve(RequestStatus::Expired)?;
        self.message = message.into();
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    FeasibilityStudy,
    Submission,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::FeasibilityStudy => "FeasibilityStudy",
            TaskKind::Submission => "Submission",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskState {
    Feasible,
    Infeasible,
    Reserved,
    InExecution,
    Completed,
    Failed,
    Cancelled,
    ReservationExpired,
}

impl TaskState {
    pub const ALL: [TaskState; 8] = [
        TaskState::Feasible,
        TaskState::Infeasible,
        TaskState::Reserved,
        TaskState::InExecution,
        TaskState::Completed,
        TaskState::Failed,
        TaskState::Cancelled,
        TaskState::ReservationExpired,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskState::Feasible => "Feasible",
            TaskState::Infeasible => "Infeasible",
            TaskState::Reserved => "Reserved",
            TaskState::InExecution => "InExecution",
            TaskState::Completed => "Completed",
            TaskState::Failed => "Failed",
            TaskState::Cancelled => "Cancelled",
            TaskState::ReservationExpired => "ReservationExpired",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// States in which the task holds one unit of asset capacity.
    pub fn holds_capacity(self) -> bool {
        matches!(self, TaskState::Reserved | TaskState::InExecution)
    }

    pub fn is_terminal(self) -> bool {
        !self.holds_capacity()
    }
}

impl fmt::Display for TaskState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HistoryEvent {
    Created {
        state: TaskState,
        reservation_expiration: Option<DateTime<Utc>>,
    },
    Confirmed,
    Updated,
    Cancelled,
    ExecutionCompleted,
    ExecutionFailed,
    ReservationExpired,
}

impl HistoryEvent {
    pub fn label(&self) -> &'static str {
        match self {
            HistoryEvent::Created { .. } => "Created",
            HistoryEvent::Confirmed => "Confirmed",
            HistoryEvent::Updated => "Updated",
            HistoryEvent::Cancelled => "Cancelled",
            HistoryEvent::ExecutionCompleted => "ExecutionCompleted",
            HistoryEvent::ExecutionFailed => "ExecutionFailed",
            HistoryEvent::ReservationExpired => "ReservationExpired",
        }
    }
}

/// History entries are ordered by `seq`; `at` never decreases.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub event: HistoryEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: String,
    pub kind: TaskKind,
    pub state: TaskState,
    pub parameters: ParameterData,
    pub reservation_expiration: Option<DateTime<Utc>>,
    pub asset_id: String,
    pub procedure_id: String,
    pub request_id: String,
    pub created_at: DateTime<Utc>,
    /// Execution progress reported by the asset, 0..=100.
    pub progress: u8,
    history: Vec<HistoryEntry>,
}

impl Task {
    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    fn record(&mut self, at: DateTime<Utc>, event: HistoryEvent) {
        let at = match self.history.last() {
            Some(last) if last.at > at => last.at,
            _ => at,
        };
        self.history.push(HistoryEntry {
            seq: self.history.len() as u64,
            at,
            event,
        });
    }

    /// The expiration instant of the task's reservation, if it ever had one.
    pub fn reservation_deadline(&self) -> Option<DateTime<Utc>> {
        self.reservation_expiration.or_else(|| {
            self.history.iter().find_map(|h| match h.event {
                HistoryEvent::Created {
                    reservation_expiration, ..
                } => reservation_expiration,
                _ => None,
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("request {0} was not accepted")]
pub struct RejectedRequest(pub String);

/// Builds the task for an accepted request.
pub fn create_task(
    task_id: impl Into<String>,
    req: &TaskingRequest,
    feasible: bool,
    asset_id: impl Into<String>,
    now: DateTime<Utc>,
    reservation_lifetime: Duration,
) -> Result<Task, RejectedRequest> {
    if req.status() != RequestStatus::Accepted {
        return Err(RejectedRequest(req.id.clone()));
    }
    let (kind, state, reservation_expiration) = match req.kind {
        RequestKind::Feasibility => (
            TaskKind::FeasibilityStudy,
            if feasible { TaskState::Feasible } else { TaskState::Infeasible },
            None,
        ),
        RequestKind::Submit => (TaskKind::Submission, TaskState::InExecution, None),
        RequestKind::Reserve => (TaskKind::Submission, TaskState::Reserved, Some(now + reservation_lifetime)),
    };
    let mut task = Task {
        id: task_id.into(),
        kind,
        state,
        parameters: req.parameters.clone(),
        reservation_expiration,
        asset_id: asset_id.into(),
        procedure_id: req.procedure_id.clone(),
        request_id: req.id.clone(),
        created_at: now,
        progress: 0,
        history: Vec::new(),
    };
    task.record(
        now,
        HistoryEvent::Created {
            state,
            reservation_expiration,
        },
    );
    Ok(task)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Confirm,
    Update(ParameterData),
    Cancel,
    ExecutionCompleted,
    ExecutionFailed,
    ExpireReservation,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Confirm => "Confirm",
            Command::Update(_) => "Update",
            Command::Cancel => "Cancel",
            Command::ExecutionCompleted => "ExecutionCompleted",
            Command::ExecutionFailed => "ExecutionFailed",
            Command::ExpireReservation => "ExpireReservation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateRejection {
    pub reason: String,
    pub alternatives: Vec<ParameterData>,
}

/// Re-validation and feasibility re-check for Update commands.
pub trait UpdateCheck {
    fn check(&self, task: &Task, params: &ParameterData) -> Result<(), UpdateRejection>;
}

impl<F> UpdateCheck for F
where
    F: Fn(&Task, &ParameterData) -> Result<(), UpdateRejection>,
{
    fn check(&self, task: &Task, params: &ParameterData) -> Result<(), UpdateRejection> {
        self(task, params)
    }
}

/// Accepts every update.
pub struct AcceptUpdates;

impl UpdateCheck for AcceptUpdates {
    fn check(&self, _: &Task, _: &ParameterData) -> Result<(), UpdateRejection> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransitionError {
    #[error("{command} is not allowed on task {task} in state {state}")]
    IllegalTransition {
        task: String,
        state: TaskState,
        command: &'static str,
    },
    #[error("update of task {task} not feasible: {}", .rejection.reason)]
    UpdateNotFeasible { task: String, rejection: UpdateRejection },
    #[error("reservation of task {task} expires at {expires}, now is {now}")]
    NotYetExpired {
        task: String,
        expires: DateTime<Utc>,
        now: DateTime<Utc>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub task: Task,
    pub events: Vec<EventKind>,
}

/// Applies `command` to a copy of `task`. On error the original is untouched.
pub fn transition(
    task: &Task,
    command: Command,
    now: DateTime<Utc>,
    check: &dyn UpdateCheck,
) -> Result<Transition, TransitionError> {
    use TaskState::*;
    let illegal = || TransitionError::IllegalTransition {
        task: task.id.clone(),
        state: task.state,
        command: command.name(),
    };
    if task.kind == TaskKind::FeasibilityStudy {
        return Err(illegal());
    }
    let mut next = task.clone();
    let (state, history, event) = match (task.state, &command) {
        (Reserved, Command::Confirm) => (InExecution, HistoryEvent::Confirmed, EventKind::TaskConfirmation),
        (Reserved, Command::ExpireReservation) => {
            let expires = task.reservation_expiration.ok_or_else(illegal)?;
            if now < expires {
                return Err(TransitionError::NotYetExpired {
                    task: task.id.clone(),
                    expires,
                    now,
                });
            }
            (ReservationExpired, HistoryEvent::ReservationExpired, EventKind::ReservationExpiration)
        }
        (Reserved | InExecution, Command::Cancel) => (Cancelled, HistoryEvent::Cancelled, EventKind::TaskCancellation),
        (Reserved | InExecution, Command::Update(params)) => {
            check.check(task, params).map_err(|rejection| TransitionError::UpdateNotFeasible {
                task: task.id.clone(),
                rejection,
            })?;
            next.parameters = params.clone();
            (task.state, HistoryEvent::Updated, EventKind::TaskUpdate)
        }
        (InExecution, Command::ExecutionCompleted) => {
            next.progress = 100;
            (Completed, HistoryEvent::ExecutionCompleted, EventKind::TaskCompletion)
        }
        (InExecution, Command::ExecutionFailed) => (Failed, HistoryEvent::ExecutionFailed, EventKind::TaskFailure),
        _ => return Err(illegal()),
    };
    next.state = state;
    if state != Reserved {
        next.reservation_expiration = None;
    }
    next.record(now, history);
    Ok(Transition {
        task: next,
        events: vec![event],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swe::fixtures::reference_block;

    fn t0() -> DateTime<Utc> {
        DateTime::parse_from_rfc3339("2010-08-20T10:00:00Z").unwrap().to_utc()
    }

    fn accepted(kind: RequestKind) -> TaskingRequest {
        let mut r = TaskingRequest::new("req_1", kind, "pointable-imager-01", ParameterData::single(reference_block()), t0());
        r.accept().unwrap();
        r
    }

    #[test]
    fn submit_creates_executing_task() {
        let t = create_task("task_1", &accepted(RequestKind::Submit), true, "a", t0(), Duration::seconds(300)).unwrap();
        assert_eq!((t.kind, t.state), (TaskKind::Submission, TaskState::InExecution));
        assert_eq!(t.reservation_expiration, None);
    }

    #[test]
    fn reserve_sets_expiration_from_lifetime() {
        let at = t0() + Duration::seconds(100);
        let t = create_task("task_1", &accepted(RequestKind::Reserve), true, "a", at, Duration::seconds(60)).unwrap();
        assert_eq!(t.state, TaskState::Reserved);
        assert_eq!(t.reservation_expiration, Some(t0() + Duration::seconds(160)));
    }

    #[test]
    fn infeasible_study() {
        let t = create_task("task_1", &accepted(RequestKind::Feasibility), false, "a", t0(), Duration::seconds(60)).unwrap();
        assert_eq!((t.kind, t.state), (TaskKind::FeasibilityStudy, TaskState::Infeasible));
    }

    #[test]
    fn unaccepted_request_is_rejected() {
        let r = TaskingRequest::new("req_9", RequestKind::Submit, "p", ParameterData::single(reference_block()), t0());
        assert_eq!(
            create_task("task_1", &r, true, "a", t0(), Duration::seconds(1)),
            Err(RejectedRequest("req_9".into()))
        );
    }

    #[test]
    fn request_status_only_leaves_pending_once() {
        let mut r = TaskingRequest::new("req_1", RequestKind::Submit, "p", ParameterData::single(reference_block()), t0());
        r.reject(vec![ParameterData::single(reference_block())], "no window").unwrap();
        assert_eq!(r.alternatives().len(), 1);
        assert!(r.accept().is_err());
        assert!(r.expire("late").is_err());
        assert_eq!(r.status(), RequestStatus::Rejected);
    }

    #[test]
    fn confirm_then_complete() {
        let t = create_task("task_1", &accepted(RequestKind::Reserve), true, "a", t0(), Duration::seconds(60)).unwrap();
        let c = transition(&t, Command::Confirm, t0(), &AcceptUpdates).unwrap();
        assert_eq!(c.task.state, TaskState::InExecution);
        assert_eq!(c.events, vec![EventKind::TaskConfirmation]);
        assert_eq!(c.task.reservation_expiration, None);
        assert_eq!(c.task.reservation_deadline(), Some(t0() + Duration::seconds(60)));
        let err = transition(&c.task, Command::Confirm, t0(), &AcceptUpdates).unwrap_err();
        assert!(matches!(err, TransitionError::IllegalTransition { state: TaskState::InExecution, .. }));
        let done = transition(&c.task, Command::ExecutionCompleted, t0(), &AcceptUpdates).unwrap();
        assert_eq!(done.task.state, TaskState::Completed);
        assert!(matches!(
            transition(&done.task, Command::Cancel, t0(), &AcceptUpdates),
            Err(TransitionError::IllegalTransition { .. })
        ));
    }

    #[test]
    fn expiration_waits_for_the_instant() {
        let at = t0() + Duration::seconds(100);
        let t = create_task("task_1", &accepted(RequestKind::Reserve), true, "a", at, Duration::seconds(60)).unwrap();
        let early = transition(&t, Command::ExpireReservation, t0() + Duration::seconds(159), &AcceptUpdates);
        assert!(matches!(early, Err(TransitionError::NotYetExpired { .. })));
        let done = transition(&t, Command::ExpireReservation, t0() + Duration::seconds(160), &AcceptUpdates).unwrap();
        assert_eq!(done.task.state, TaskState::ReservationExpired);
        assert_eq!(done.events, vec![EventKind::ReservationExpiration]);
    }

    #[test]
    fn rejected_update_leaves_state() {
        let t = create_task("task_1", &accepted(RequestKind::Submit), true, "a", t0(), Duration::seconds(60)).unwrap();
        let deny = |_: &Task, _: &ParameterData| {
            Err(UpdateRejection {
                reason: "no".into(),
                alternatives: vec![],
            })
        };
        let err = transition(&t, Command::Update(t.parameters.clone()), t0(), &deny).unwrap_err();
        assert!(matches!(err, TransitionError::UpdateNotFeasible { .. }));
        let ok = transition(&t, Command::Update(t.parameters.clone()), t0(), &AcceptUpdates).unwrap();
        assert_eq!(ok.task.state, TaskState::InExecution);
        assert_eq!(ok.task.history().len(), 2);
    }
}
