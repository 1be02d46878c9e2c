//! Tasking requests, tasks and the lifecycle state machine.

mod clock;
mod model;
mod report;
mod store;

pub use clock::{Clock, SystemClock, TimerQueue, VirtualClock};
pub use model::{
    create_task, transition, AcceptUpdates, Command, HistoryEntry, HistoryEvent, RejectedRequest, RequestKind,
    RequestNotPending, RequestStatus, Task, TaskKind, TaskState, TaskingRequest, Transition, TransitionError,
    UpdateCheck, UpdateRejection,
};
pub use report::{
    format_instant, request_report, status_report, write_reservation_report, write_status_report, EncodedParameters,
    ReportedState, ReservationReport, StatusReport,
};
pub use store::{expiration_sweep, StoreError, TaskStore};
