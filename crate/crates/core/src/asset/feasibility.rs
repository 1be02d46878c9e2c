use chrono::{DateTime, Duration, Utc};

use super::profile::{AssetProfile, GeoPoint, Window};
use super::AssetError;
use crate::swe::{ParameterBlock, ParameterData, Value};

pub const START_FIELD: &str = "measurementStart";
pub const END_FIELD: &str = "measurementEnd";
pub const TARGET_FIELD: &str = "measurementTarget";

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const MAX_ALTERNATIVES: usize = 3;

/// Great-circle distance by the haversine formula.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    OutsideWindow,
    OutsideFootprint,
    CapacityExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub feasible: bool,
    pub asset_id: Option<String>,
    pub alternatives: Vec<ParameterData>,
    pub reason: String,
    pub cause: Option<Infeasibility>,
}

impl FeasibilityResult {
    fn feasible(asset: &str) -> Self {
        FeasibilityResult {
            feasible: true,
            asset_id: Some(asset.to_string()),
            alternatives: Vec::new(),
            reason: format!("feasible on {asset}"),
            cause: None,
        }
    }

    fn infeasible(cause: Infeasibility, reason: String, alternatives: Vec<ParameterData>) -> Self {
        FeasibilityResult {
            feasible: false,
            asset_id: None,
            alternatives,
            reason,
            cause: Some(cause),
        }
    }
}

fn interval(block: &ParameterBlock) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
    let s = block.get(START_FIELD)?.as_time()?;
    let e = block.get(END_FIELD)?.as_time()?;
    Some((s.utc(), e.utc()))
}

/// First vector inside the target choice, read as (lat, lon, ...).
pub fn target_point(block: &ParameterBlock) -> Option<GeoPoint> {
    fn first_vector(block: &ParameterBlock) -> Option<&Vec<f64>> {
        block.iter().find_map(|(_, v)| match v {
            Value::Vector(vs) if vs.len() >= 2 => Some(vs),
            Value::Choice { block, .. } => first_vector(block),
            _ => None,
        })
    }
    match block.get(TARGET_FIELD)? {
        Value::Choice { block, .. } => first_vector(block).map(|v| GeoPoint { lat: v[0], lon: v[1] }),
        Value::Vector(v) if v.len() >= 2 => Some(GeoPoint { lat: v[0], lon: v[1] }),
        _ => None,
    }
}

fn fits_window(profile: &AssetProfile, start: DateTime<Utc>, end: DateTime<Utc>) -> bool {
    let need = profile.execution_duration();
    profile.availability_windows.iter().any(|w| w.overlap(start, end) >= need)
}

fn shifted(block: &ParameterBlock, start: DateTime<Utc>, end: DateTime<Utc>) -> ParameterBlock {
    let mut out = block.clone();
    for (field, instant) in [(START_FIELD, start), (END_FIELD, end)] {
        if let Some(Value::Time(t)) = block.get(field) {
            out.insert(field, Value::Time(t.with_instant(instant)));
        }
    }
    out
}

/// Candidate intervals in window order: each window that can hold the
/// execution contributes one interval starting at the window start.
fn candidate_intervals(profile: &AssetProfile, requested: Duration) -> Vec<(DateTime<Utc>, DateTime<Utc>)> {
    let need = profile.execution_duration();
    let len = requested.max(need);
    profile
        .availability_windows
        .iter()
        .filter(|w: &&Window| w.length() >= need)
        .map(|w| (w.start, (w.start + len).min(w.end)))
        .take(MAX_ALTERNATIVES)
        .collect()
}

/// Decides whether `params` can be executed on `profile` given `blocked`
/// units of capacity already in use.
pub fn check_feasibility(
    profile: &AssetProfile,
    procedure_id: &str,
    params: &ParameterData,
    blocked: usize,
) -> Result<FeasibilityResult, AssetError> {
    if procedure_id != profile.procedure_id {
        return Err(AssetError::ProcedureMismatch {
            asset: profile.asset_id.clone(),
            expected: profile.procedure_id.clone(),
            got: procedure_id.to_string(),
        });
    }
    for (i, block) in params.blocks.iter().enumerate() {
        if let Some(p) = target_point(block) {
            let d = haversine_km(profile.footprint_center, p);
            if d > profile.footprint_radius_km {
                return Ok(FeasibilityResult::infeasible(
                    Infeasibility::OutsideFootprint,
                    format!(
                        "block {i}: target outside footprint ({d:.1} km from center, radius {} km)",
                        profile.footprint_radius_km
                    ),
                    Vec::new(),
                ));
            }
        }
    }
    let failing: Vec<usize> = params
        .blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| interval(b).is_some_and(|(s, e)| !fits_window(profile, s, e)))
        .map(|(i, _)| i)
        .collect();
    if !failing.is_empty() {
        let requested = failing
            .iter()
            .filter_map(|&i| interval(&params.blocks[i]))
            .map(|(s, e)| e - s)
            .max()
            .unwrap_or_else(Duration::zero);
        let alternatives = candidate_intervals(profile, requested)
            .into_iter()
            .filter(|&(s, e)| fits_window(profile, s, e))
            .map(|(s, e)| {
                let blocks = params
                    .blocks
                    .iter()
                    .enumerate()
                    .map(|(i, b)| if failing.contains(&i) { shifted(b, s, e) } else { b.clone() })
                    .collect();
                ParameterData::new(params.encoding.clone(), blocks)
            })
            .collect();
        return Ok(FeasibilityResult::infeasible(
            Infeasibility::OutsideWindow,
            format!(
                "no availability window covers {} s of the requested interval",
                profile.execution_duration_s
            ),
            alternatives,
        ));
    }
    if blocked >= profile.capacity {
        return Ok(FeasibilityResult::infeasible(
            Infeasibility::CapacityExhausted,
            format!("capacity exhausted ({blocked} of {} in use)", profile.capacity),
            Vec::new(),
        ));
    }
    Ok(FeasibilityResult::feasible(&profile.asset_id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swe::fixtures::{reference_block, REFERENCE_VALUES};
    use crate::swe::{decode_parameter_data, fixtures::pointable_imager, TextEncoding, Timestamp};

    fn at(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().to_utc()
    }

    fn profile(windows: &[(&str, &str)]) -> AssetProfile {
        AssetProfile {
            asset_id: "imager-sat-1".into(),
            procedure_id: "pointable-imager-01".into(),
            availability_windows: windows
                .iter()
                .map(|(s, e)| Window { start: at(s), end: at(e) })
                .collect(),
            footprint_center: GeoPoint { lat: 51.9, lon: 8.2 },
            footprint_radius_km: 50.0,
            capacity: 1,
            execution_duration_s: 600,
            failure_rate: 0.0,
            decision_delay_s: None,
        }
    }

    fn reference() -> ParameterData {
        decode_parameter_data(&pointable_imager(), &TextEncoding::default(), REFERENCE_VALUES).unwrap()
    }

    /// Chord-length route to the central angle, independent of haversine.
    fn chord_distance_km(a: GeoPoint, b: GeoPoint) -> f64 {
        let v = |p: GeoPoint| {
            let (la, lo) = (p.lat.to_radians(), p.lon.to_radians());
            [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
        };
        let (x, y) = (v(a), v(b));
        let c = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        2.0 * 6371.0 * (c / 2.0).asin()
    }

    #[test]
    fn haversine_matches_chord_oracle() {
        let c = GeoPoint { lat: 51.9, lon: 8.2 };
        let t = GeoPoint {
            lat: 51.902112,
            lon: 8.192728,
        };
        let d = haversine_km(c, t);
        assert!((d - chord_distance_km(c, t)).abs() < 1e-9);
        assert!((d - 0.55).abs() < 0.01, "{d}");
        let far = GeoPoint { lat: -33.0, lon: 151.0 };
        assert!((haversine_km(c, far) - chord_distance_km(c, far)).abs() < 1e-6);
    }

    #[test]
    fn reference_request_is_feasible() {
        let p = profile(&[("2010-08-20T12:00:00+02:00", "2010-08-20T15:00:00+02:00")]);
        let r = check_feasibility(&p, "pointable-imager-01", &reference(), 0).unwrap();
        assert!(r.feasible, "{}", r.reason);
        assert_eq!(r.asset_id.as_deref(), Some("imager-sat-1"));
        assert!(r.alternatives.is_empty());
    }

    #[test]
    fn next_day_window_yields_one_alternative() {
        let p = profile(&[("2010-08-21T12:00:00+02:00", "2010-08-21T15:00:00+02:00")]);
        let r = check_feasibility(&p, "pointable-imager-01", &reference(), 0).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.cause, Some(Infeasibility::OutsideWindow));
        assert_eq!(r.alternatives.len(), 1);
        let b = &r.alternatives[0].blocks[0];
        let start: Timestamp = "2010-08-21T12:00:00+02:00".parse().unwrap();
        let end: Timestamp = "2010-08-21T13:53:00+02:00".parse().unwrap();
        assert_eq!(b.get(START_FIELD), Some(&Value::Time(start)));
        assert_eq!(b.get(END_FIELD), Some(&Value::Time(end)));
        assert_eq!(b.get("priority"), reference_block().get("priority"));
        let again = check_feasibility(&p, "pointable-imager-01", &r.alternatives[0], 0).unwrap();
        assert!(again.feasible);
    }

    #[test]
    fn alternatives_are_capped() {
        let days: Vec<(String, String)> = (21..26)
            .map(|d| (format!("2010-08-{d}T12:00:00+02:00"), format!("2010-08-{d}T15:00:00+02:00")))
            .collect();
        let refs: Vec<(&str, &str)> = days.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let r = check_feasibility(&profile(&refs), "pointable-imager-01", &reference(), 0).unwrap();
        assert_eq!(r.alternatives.len(), MAX_ALTERNATIVES);
    }

    #[test]
    fn antipodal_target_outside_footprint() {
        let p = profile(&[("2010-08-20T12:00:00+02:00", "2010-08-20T15:00:00+02:00")]);
        let mut block = reference_block();
        block.insert(
            TARGET_FIELD,
            Value::Choice {
                branch: "pointToLookAt".into(),
                block: ParameterBlock::new().with("location", Value::Vector(vec![-51.9, -171.8, 0.0])),
            },
        );
        let r = check_feasibility(&p, "pointable-imager-01", &ParameterData::single(block), 0).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.cause, Some(Infeasibility::OutsideFootprint));
        assert!(r.reason.contains("outside footprint"));
    }

    #[test]
    fn capacity_counts() {
        let p = profile(&[("2010-08-20T12:00:00+02:00", "2010-08-20T15:00:00+02:00")]);
        let r = check_feasibility(&p, "pointable-imager-01", &reference(), 1).unwrap();
        assert_eq!(r.cause, Some(Infeasibility::CapacityExhausted));
    }

    #[test]
    fn procedure_mismatch() {
        let p = profile(&[]);
        assert!(matches!(
            check_feasibility(&p, "other", &reference(), 0),
            Err(AssetError::ProcedureMismatch { .. })
        ));
    }
}
