use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use super::AssetError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultReference {
    pub task_id: String,
    /// `results/<taskId>/<n>`, n counting from 1.
    pub uri: String,
    pub produced_at: DateTime<Utc>,
    pub partial: bool,
    pub description: String,
}

#[derive(Debug, Clone, Default)]
pub struct ResultStore {
    entries: BTreeMap<String, Vec<(ResultReference, String)>>,
}

impl ResultStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Makes a task known with no results yet.
    pub fn register(&mut self, task_id: &str) {
        self.entries.entry(task_id.to_string()).or_default();
    }

    pub fn publish(
        &mut self,
        task_id: &str,
        produced_at: DateTime<Utc>,
        partial: bool,
        description: &str,
        document: String,
    ) -> ResultReference {
        let list = self.entries.entry(task_id.to_string()).or_default();
        let r = ResultReference {
            task_id: task_id.to_string(),
            uri: format!("results/{task_id}/{}", list.len() + 1),
            produced_at,
            partial,
            description: description.to_string(),
        };
        list.push((r.clone(), document));
        r
    }

    pub fn result_references(&self, task_id: &str) -> Result<Vec<ResultReference>, AssetError> {
        self.entries
            .get(task_id)
            .map(|l| l.iter().map(|(r, _)| r.clone()).collect())
            .ok_or_else(|| AssetError::UnknownTask(task_id.to_string()))
    }

    pub fn document(&self, task_id: &str, n: usize) -> Option<&str> {
        self.entries
            .get(task_id)?
            .get(n.checked_sub(1)?)
            .map(|(_, d)| d.as_str())
    }
}
