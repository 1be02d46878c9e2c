use chrono::{DateTime, Duration, Utc};
use sha2::{Digest, Sha256};

use super::profile::AssetProfile;
use super::AssetError;
use crate::task::{Task, TaskState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionStep {
    Progress(u8),
    Completed,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledStep {
    pub at: DateTime<Utc>,
    pub step: ExecutionStep,
}

/// Deterministic draw in [0, 1) from the seed and the task id.
pub fn failure_draw(seed: u64, task_id: &str) -> f64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(task_id.as_bytes());
    let digest = h.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(head) as f64 / 18_446_744_073_709_551_616.0
}

pub fn decides_failure(seed: u64, task_id: &str, failure_rate: f64) -> bool {
    failure_draw(seed, task_id) < failure_rate
}

/// Progress plan for a task entering execution at `start`: 0% at start,
/// 50% halfway, then completion or failure after the execution duration.
pub fn execution_plan(
    task: &Task,
    profile: &AssetProfile,
    start: DateTime<Utc>,
    seed: u64,
) -> Result<Vec<ScheduledStep>, AssetError> {
    if task.state != TaskState::InExecution {
        return Err(AssetError::NotExecuting {
            task: task.id.clone(),
            state: task.state,
        });
    }
    if task.asset_id != profile.asset_id {
        return Err(AssetError::InvalidProfile(format!(
            "task {} runs on {}, not {}",
            task.id, task.asset_id, profile.asset_id
        )));
    }
    let d = profile.execution_duration();
    let last = if decides_failure(seed, &task.id, profile.failure_rate) {
        ExecutionStep::Failed
    } else {
        ExecutionStep::Completed
    };
    Ok(vec![
        ScheduledStep {
            at: start,
            step: ExecutionStep::Progress(0),
        },
        ScheduledStep {
            at: start + Duration::milliseconds(d.num_milliseconds() / 2),
            step: ExecutionStep::Progress(50),
        },
        ScheduledStep { at: start + d, step: last },
    ])
}
