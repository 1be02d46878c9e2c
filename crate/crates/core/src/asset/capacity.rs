use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CapacityError {
    #[error("asset {asset}: capacity of {capacity} exhausted")]
    Exhausted { asset: String, capacity: usize },
    #[error("asset {asset}: task {task} already holds capacity")]
    AlreadyHeld { asset: String, task: String },
    #[error("asset {asset}: task {task} holds no capacity")]
    NotHeld { asset: String, task: String },
    #[error("unknown asset '{0}'")]
    UnknownAsset(String),
}

#[derive(Debug)]
struct Slot {
    capacity: usize,
    holders: BTreeSet<String>,
}

/// Per-asset count of tasks that currently block capacity.
#[derive(Debug)]
pub struct CapacityLedger {
    slots: Mutex<HashMap<String, Slot>>,
}

impl CapacityLedger {
    pub fn new(assets: impl IntoIterator<Item = (String, usize)>) -> Self {
        let slots = assets
            .into_iter()
            .map(|(a, capacity)| {
                (
                    a,
                    Slot {
                        capacity,
                        holders: BTreeSet::new(),
                    },
                )
            })
            .collect();
        CapacityLedger { slots: Mutex::new(slots) }
    }

    pub fn reserve(&self, asset: &str, task: &str) -> Result<(), CapacityError> {
        let mut slots = self.slots.lock().unwrap();
        let slot = slots
            .get_mut(asset)
            .ok_or_else(|| CapacityError::UnknownAsset(asset.to_string()))?;
        if slot.holders.contains(task) {
            return Err(CapacityError::AlreadyHeld {
                asset: asset.to_string(),
                task: task.to_string(),
            });
        }
        if slot.holders.len() >= slot.capacity {
            return Err(CapacityError::Exhausted {
                asset: asset.to_string(),
                capacity: slot.capacity,
            });
        }
        slot.holders.insert(task.to_string());
        Ok(())
    }

    pub fn release(&self, asset: &str, task: &str) -> Result<(), CapacityError> {
        let mut slots = self.slots.lock().unwrap();
        let slot = slots
            .get_mut(asset)
            .ok_or_else(|| CapacityError::UnknownAsset(asset.to_string()))?;
        if slot.holders.remove(task) {
            Ok(())
        } else {
            Err(CapacityError::NotHeld {
                asset: asset.to_string(),
                task: task.to_string(),
            })
        }
    }

    /// Units in use; zero for unknown assets.
    pub fn blocked(&self, asset: &str) -> usize {
        self.slots.lock().unwrap().get(asset).map_or(0, |s| s.holders.len())
    }

    pub fn holds(&self, asset: &str, task: &str) -> bool {
        self.slots
            .lock()
            .unwrap()
            .get(asset)
            .is_some_and(|s| s.holders.contains(task))
    }

    pub fn capacity(&self, asset: &str) -> Option<usize> {
        self.slots.lock().unwrap().get(asset).map(|s| s.capacity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserve_and_release() {
        let l = CapacityLedger::new([("a".to_string(), 1)]);
        l.reserve("a", "t1").unwrap();
        assert!(matches!(l.reserve("a", "t2"), Err(CapacityError::Exhausted { capacity: 1, .. })));
        assert!(matches!(l.reserve("a", "t1"), Err(CapacityError::AlreadyHeld { .. })));
        assert!(l.holds("a", "t1"));
        l.release("a", "t1").unwrap();
        assert!(matches!(l.release("a", "t1"), Err(CapacityError::NotHeld { .. })));
        assert_eq!(l.blocked("a"), 0);
        assert_eq!(l.reserve("b", "t"), Err(CapacityError::UnknownAsset("b".into())));
    }
}
