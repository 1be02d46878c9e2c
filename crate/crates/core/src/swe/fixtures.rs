//! The pointable-imager procedure and its reference value string.

use super::description::{Branch, Constraint, FieldDescriptor, ParameterDescription};
use super::value::{ParameterBlock, Value};

pub const POINTABLE_IMAGER: &str = "pointable-imager-01";

/// One block: start, end, target choice with a 3-component vector, priority.
pub const REFERENCE_VALUES: &str =
    "2010-08-20T12:37:00+02:00,2010-08-20T14:30:00+02:00,Y,pointToLookAt,51.902112,8.192728,0,Y,3.5";

fn ts(s: &str) -> Value {
    Value::Time(s.parse().expect("valid timestamp"))
}

pub fn pointable_imager() -> ParameterDescription {
    let fields = vec![
        FieldDescriptor::time("measurementStart").default_value(ts("2010-08-20T12:37:00+02:00")),
        FieldDescriptor::time("measurementEnd").default_value(ts("2010-08-20T14:30:00+02:00")),
        FieldDescriptor::choice(
            "measurementTarget",
            vec![Branch {
                name: "pointToLookAt".to_string(),
                fields: vec![FieldDescriptor::vector(
                    "location",
                    &[("lat", "deg"), ("lon", "deg"), ("alt", "m")],
                )],
            }],
        )
        .optional(),
        FieldDescriptor::quantity("priority", "1")
            .optional()
            .allowed(Constraint::Interval { min: 0.0, max: 5.0 })
            .default_value(Value::Quantity(1.0)),
    ];
    ParameterDescription::new(
        POINTABLE_IMAGER,
        fields,
        vec!["measurementTarget".to_string(), "priority".to_string()],
    )
    .expect("reference description is valid")
}

pub fn reference_block() -> ParameterBlock {
    ParameterBlock::new()
        .with("measurementStart", ts("2010-08-20T12:37:00+02:00"))
        .with("measurementEnd", ts("2010-08-20T14:30:00+02:00"))
        .with(
            "measurementTarget",
            Value::Choice {
                branch: "pointToLookAt".to_string(),
                block: ParameterBlock::new().with("location", Value::Vector(vec![51.902112, 8.192728, 0.0])),
            },
        )
        .with("priority", Value::Quantity(3.5))
}
