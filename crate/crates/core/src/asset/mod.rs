//! Simulated assets: availability, footprint, capacity and execution.

mod capacity;
mod execution;
mod feasibility;
mod profile;
mod results;

pub use capacity::{CapacityError, CapacityLedger};
pub use execution::{decides_failure, execution_plan, failure_draw, ExecutionStep, ScheduledStep};
pub use feasibility::{
    check_feasibility, haversine_km, target_point, FeasibilityResult, Infeasibility, EARTH_RADIUS_KM, END_FIELD,
    MAX_ALTERNATIVES, START_FIELD, TARGET_FIELD,
};
pub use profile::{AssetProfile, GeoPoint, Window};
pub use results::{ResultReference, ResultStore};

use crate::task::TaskState;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssetError {
    #[error("asset {asset} serves {expected}, not {got}")]
    ProcedureMismatch { asset: String, expected: String, got: String },
    #[error("task {task} is {state:?}, not InExecution")]
    NotExecuting { task: String, state: TaskState },
    #[error("invalid asset profile: {0}")]
    InvalidProfile(String),
    #[error("unknown task '{0}'")]
    UnknownTask(String),
}
