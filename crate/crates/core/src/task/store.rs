use std::collections::HashMap;

use chrono::{DateTime, Duration, Utc};

use super::model::{
    create_task, transition, Command, RejectedRequest, RequestKind, Task, TaskingRequest, Transition, TransitionError,
    UpdateCheck,
};
use crate::asset::{CapacityError, CapacityLedger};
use crate::notify::EventKind;
use crate::swe::ParameterData;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StoreError {
    #[error("unknown task '{0}'")]
    UnknownTask(String),
    #[error("unknown request '{0}'")]
    UnknownRequest(String),
    #[error(transparent)]
    Rejected(#[from] RejectedRequest),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

/// In-memory owner of every request and task.
///
/// Capacity is kept in step with task states: a task holds one unit of its
/// asset's capacity exactly while it is Reserved or InExecution.
#[derive(Debug, Clone)]
pub struct TaskStore {
    tasks: Vec<Task>,
    task_index: HashMap<String, usize>,
    requests: Vec<TaskingRequest>,
    request_index: HashMap<String, usize>,
    reservation_lifetime: Duration,
}

impl TaskStore {
    pub fn new(reservation_lifetime: Duration) -> Self {
        TaskStore {
            tasks: Vec::new(),
            task_index: HashMap::new(),
            requests: Vec::new(),
            request_index: HashMap::new(),
            reservation_lifetime,
        }
    }

    pub fn reservation_lifetime(&self) -> Duration {
        self.reservation_lifetime
    }

    /// Registers a new Pending request with the next `req_<n>` identifier.
    pub fn new_request(
        &mut self,
        kind: RequestKind,
        procedure_id: &str,
        parameters: ParameterData,
        now: DateTime<Utc>,
    ) -> &mut TaskingRequest {
        let id = format!("req_{}", self.requests.len() + 1);
        self.request_index.insert(id.clone(), self.requests.len());
        self.requests
            .push(TaskingRequest::new(id, kind, procedure_id, parameters, now));
        self.requests.last_mut().unwrap()
    }

    pub fn request(&self, id: &str) -> Option<&TaskingRequest> {
        self.request_index.get(id).map(|&i| &self.requests[i])
    }

    pub fn request_mut(&mut self, id: &str) -> Option<&mut TaskingRequest> {
        self.request_index.get(id).map(|&i| &mut self.requests[i])
    }

    pub fn requests(&self) -> &[TaskingRequest] {
        &self.requests
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        self.task_index.get(id).map(|&i| &self.tasks[i])
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    /// Creates the task for an accepted request, blocking capacity when the
    /// task starts out Reserved or InExecution.
    pub fn create_task(
        &mut self,
        request_id: &str,
        feasible: bool,
        asset_id: &str,
        now: DateTime<Utc>,
        ledger: &CapacityLedger,
    ) -> Result<&Task, StoreError> {
        let ri = *self
            .request_index
            .get(request_id)
            .ok_or_else(|| StoreError::UnknownRequest(request_id.to_string()))?;
        let id = format!("task_{}", self.tasks.len() + 1);
        let task = create_task(&id, &self.requests[ri], feasible, asset_id, now, self.reservation_lifetime)?;
        if task.state.holds_capacity() {
            ledger.reserve(asset_id, &id)?;
        }
        self.requests[ri].task_id = Some(id.clone());
        self.task_index.insert(id, self.tasks.len());
        self.tasks.push(task);
        Ok(self.tasks.last().unwrap())
    }

    /// Applies a lifecycle command. Capacity is released when the task
    /// leaves the capacity-holding states.
    pub fn apply(
        &mut self,
        task_id: &str,
        command: Command,
        now: DateTime<Utc>,
        check: &dyn UpdateCheck,
        ledger: &CapacityLedger,
    ) -> Result<Transition, StoreError> {
        let i = *self
            .task_index
            .get(task_id)
            .ok_or_else(|| StoreError::UnknownTask(task_id.to_string()))?;
        let before = self.tasks[i].state;
        let t = transition(&self.tasks[i], command, now, check)?;
        if before.holds_capacity() && !t.task.state.holds_capacity() {
            // A missing hold means capacity was never blocked; nothing to give back.
            let _ = ledger.release(&t.task.asset_id, task_id);
        }
        self.tasks[i] = t.task.clone();
        Ok(t)
    }

    pub fn set_progress(&mut self, task_id: &str, progress: u8) -> Result<(), StoreError> {
        let i = *self
            .task_index
            .get(task_id)
            .ok_or_else(|| StoreError::UnknownTask(task_id.to_string()))?;
        let t = &mut self.tasks[i];
        t.progress = t.progress.max(progress.min(100));
        Ok(())
    }
}

/// Expires every Reserved task whose deadline is at or before `now` and
/// gives its capacity back. Running it twice at one instant is a no-op the
/// second time.
pub fn expiration_sweep(store: &mut TaskStore, now: DateTime<Utc>, ledger: &CapacityLedger) -> Vec<(Task, EventKind)> {
    let due: Vec<String> = store
        .tasks()
        .iter()
        .filter(|t| t.state == super::TaskState::Reserved && t.reservation_expiration.is_some_and(|e| e <= now))
        .map(|t| t.id.clone())
        .collect();
    let mut out = Vec::new();
    for id in due {
        if let Ok(t) = store.apply(&id, Command::ExpireReservation, now, &super::AcceptUpdates, ledger) {
            for e in t.events {
                out.push((t.task.clone(), e));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swe::fixtures::reference_block;
    use crate::task::TaskState;

    fn t(s: i64) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339("2010-08-20T10:00:00Z").unwrap().to_utc() + Duration::seconds(s)
    }

    fn reserve(store: &mut TaskStore, ledger: &CapacityLedger, at: i64) -> String {
        let req = store.new_request(RequestKind::Reserve, "p", ParameterData::single(reference_block()), t(at));
        req.accept().unwrap();
        let rid = req.id.clone();
        store.create_task(&rid, true, "a", t(at), ledger).unwrap().id.clone()
    }

    #[test]
    fn sweep_expires_only_due_tasks() {
        let ledger = CapacityLedger::new([("a".to_string(), 5)]);
        let mut store = TaskStore::new(Duration::seconds(60));
        let first = reserve(&mut store, &ledger, 100);
        let second = reserve(&mut store, &ledger, 140);
        assert_eq!(ledger.blocked("a"), 2);
        let swept = expiration_sweep(&mut store, t(170), &ledger);
        assert_eq!(swept.len(), 1);
        assert_eq!(swept[0].0.id, first);
        assert_eq!(swept[0].1, EventKind::ReservationExpiration);
        assert_eq!(store.task(&second).unwrap().state, TaskState::Reserved);
        assert_eq!(ledger.blocked("a"), 1);
        assert!(expiration_sweep(&mut store, t(170), &ledger).is_empty());
    }

    #[test]
    fn sweep_without_reservations() {
        let ledger = CapacityLedger::new([("a".to_string(), 1)]);
        let mut store = TaskStore::new(Duration::seconds(60));
        assert!(expiration_sweep(&mut store, t(1000), &ledger).is_empty());
    }

    #[test]
    fn ids_are_sequential() {
        let ledger = CapacityLedger::new([("a".to_string(), 5)]);
        let mut store = TaskStore::new(Duration::seconds(60));
        assert_eq!(reserve(&mut store, &ledger, 0), "task_1");
        assert_eq!(reserve(&mut store, &ledger, 0), "task_2");
        assert_eq!(store.requests()[1].id, "req_2");
        assert_eq!(store.request("req_2").unwrap().task_id.as_deref(), Some("task_2"));
    }

    #[test]
    fn capacity_exhaustion_creates_no_task() {
        let ledger = CapacityLedger::new([("a".to_string(), 1)]);
        let mut store = TaskStore::new(Duration::seconds(60));
        reserve(&mut store, &ledger, 0);
        let req = store.new_request(RequestKind::Submit, "p", ParameterData::single(reference_block()), t(0));
        req.accept().unwrap();
        let rid = req.id.clone();
        let err = store.create_task(&rid, true, "a", t(0), &ledger).unwrap_err();
        assert!(matches!(err, StoreError::Capacity(CapacityError::Exhausted { .. })));
        assert_eq!(store.tasks().len(), 1);
    }
}
