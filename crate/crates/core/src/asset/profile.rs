use chrono::{DateTime, Duration, Utc};
use serde::Deserialize;

use super::AssetError;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct Window {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Window {
    pub fn length(&self) -> Duration {
        self.end - self.start
    }

    /// Length of the intersection with `[start, end]`, zero when disjoint.
    pub fn overlap(&self, start: DateTime<Utc>, end: DateTime<Utc>) -> Duration {
        let lo = self.start.max(start);
        let hi = self.end.min(end);
        if hi > lo {
            hi - lo
        } else {
            Duration::zero()
        }
    }
}

/// A simulated asset serving one procedure.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AssetProfile {
    pub asset_id: String,
    pub procedure_id: String,
    pub availability_windows: Vec<Window>,
    pub footprint_center: GeoPoint,
    pub footprint_radius_km: f64,
    pub capacity: usize,
    pub execution_duration_s: u64,
    #[serde(default)]
    pub failure_rate: f64,
    /// When set, tasking requests stay Pending this long before a decision.
    #[serde(default)]
    pub decision_delay_s: Option<u64>,
}

impl AssetProfile {
    pub fn execution_duration(&self) -> Duration {
        Duration::seconds(self.execution_duration_s as i64)
    }

    pub fn validate(&self) -> Result<(), AssetError> {
        let bad = |m: String| Err(AssetError::InvalidProfile(format!("{}: {m}", self.asset_id)));
        if self.asset_id.is_empty() || self.procedure_id.is_empty() {
            return bad("empty asset or procedure id".into());
        }
        if self.capacity < 1 {
            return bad("capacity must be at least 1".into());
        }
        if !(self.footprint_radius_km > 0.0 && self.footprint_radius_km.is_finite()) {
            return bad("footprint radius must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.failure_rate) {
            return bad("failure rate must lie in [0, 1]".into());
        }
        if self.execution_duration_s == 0 {
            return bad("execution duration must be positive".into());
        }
        for w in &self.availability_windows {
            if w.end <= w.start {
                return bad(format!("window {} .. {} is empty", w.start, w.end));
            }
        }
        for pair in self.availability_windows.windows(2) {
            if pair[1].start < pair[0].end {
                return bad("availability windows must be ordered and non-overlapping".into());
            }
        }
        Ok(())
    }
}
