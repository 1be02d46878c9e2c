//! Random descriptions with conforming data.

use proptest::prelude::*;
use proptest::strategy::BoxedStrategy;

use chrono::{DateTime, FixedOffset, TimeZone};
use sps_core::swe::{
    Branch, Constraint, FieldDescriptor, FieldType, ParameterBlock, ParameterData, ParameterDescription, TextEncoding,
    Timestamp, Value,
};

pub const ENCODINGS: [(&str, &str); 4] = [(",", "@@"), (";", "|"), (" ", "\n"), ("~", "#")];

fn token_text() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_.-]{1,12}"
}

fn scalar_field(name: String) -> BoxedStrategy<FieldDescriptor> {
    prop_oneof![
        Just(FieldDescriptor::time(&name)),
        (any::<bool>(), -1.0e6f64..1.0e6, 0.0f64..1.0e6).prop_map({
            let name = name.clone();
            move |(bounded, lo, span)| {
                let f = FieldDescriptor::quantity(&name, "m");
                if bounded {
                    f.allowed(Constraint::Interval { min: lo, max: lo + span })
                } else {
                    f
                }
            }
        }),
        (any::<bool>(), -1000i64..1000, 0i64..1000).prop_map({
            let name = name.clone();
            move |(bounded, lo, span)| {
                let f = FieldDescriptor::count(&name);
                if bounded {
                    f.allowed(Constraint::Interval {
                        min: lo as f64,
                        max: (lo + span) as f64,
                    })
                } else {
                    f
                }
            }
        }),
        Just(FieldDescriptor::boolean(&name)),
        proptest::option::of(proptest::collection::btree_set(token_text(), 1..4)).prop_map({
            let name = name.clone();
            move |set| {
                let f = FieldDescriptor::text(&name);
                match set {
                    Some(s) => f.allowed(Constraint::Tokens(s.into_iter().collect())),
                    None => f,
                }
            }
        }),
        (1usize..4).prop_map({
            let name = name.clone();
            move |n| {
                let comps: Vec<(String, String)> = (0..n).map(|i| (format!("c{i}"), "deg".to_string())).collect();
                let refs: Vec<(&str, &str)> = comps.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                FieldDescriptor::vector(&name, &refs)
            }
        }),
    ]
    .boxed()
}

fn optionalize(f: BoxedStrategy<FieldDescriptor>) -> BoxedStrategy<FieldDescriptor> {
    (f, any::<bool>())
        .prop_map(|(f, opt)| if opt { f.optional() } else { f })
        .boxed()
}

fn field(name: String, depth: u32) -> BoxedStrategy<FieldDescriptor> {
    if depth == 0 {
        return optionalize(scalar_field(name));
    }
    let choice = proptest::collection::vec(proptest::collection::vec(Just(()), 1..3), 1..4).prop_flat_map({
        let name = name.clone();
        move |shape| {
            let branches: Vec<BoxedStrategy<Branch>> = shape
                .iter()
                .enumerate()
                .map(|(b, fields)| {
                    let fs: Vec<BoxedStrategy<FieldDescriptor>> = (0..fields.len())
                        .map(|i| field(format!("{name}_{b}_{i}"), depth - 1))
                        .collect();
                    let bname = format!("branch{b}");
                    fs.prop_map(move |fields| Branch {
                        name: bname.clone(),
                        fields,
                    })
                    .boxed()
                })
                .collect();
            let name = name.clone();
            branches.prop_map(move |bs| FieldDescriptor::choice(&name, bs))
        }
    });
    optionalize(prop_oneof![3 => scalar_field(name.clone()), 1 => choice.boxed()].boxed())
}

pub fn description() -> impl Strategy<Value = ParameterDescription> {
    (1usize..6)
        .prop_flat_map(|n| (0..n).map(|i| field(format!("f{i}"), 1)).collect::<Vec<_>>())
        .prop_map(|fields| ParameterDescription::new("generated", fields, vec![]).expect("valid description"))
}

fn timestamp() -> impl Strategy<Value = Timestamp> {
    (0i64..4_102_444_800, -56i32..=56, prop_oneof![Just(0u32), 0u32..1000]).prop_map(|(secs, quarter, millis)| {
        let off = FixedOffset::east_opt(quarter * 15 * 60).unwrap();
        let dt: DateTime<FixedOffset> = off.timestamp_opt(secs, millis * 1_000_000).unwrap();
        Timestamp::new(dt)
    })
}

fn value(f: &FieldDescriptor) -> BoxedStrategy<Value> {
    match (&f.field_type, &f.allowed) {
        (FieldType::Time, _) => timestamp().prop_map(Value::Time).boxed(),
        (FieldType::Quantity { .. }, Some(Constraint::Interval { min, max })) => {
            let (min, max) = (*min, *max);
            (0.0f64..=1.0).prop_map(move |t| Value::Quantity((min + t * (max - min)).clamp(min, max))).boxed()
        }
        (FieldType::Quantity { .. }, _) => (-1.0e9f64..1.0e9).prop_map(Value::Quantity).boxed(),
        (FieldType::Count, Some(Constraint::Interval { min, max })) => {
            ((*min as i64)..=(*max as i64)).prop_map(Value::Count).boxed()
        }
        (FieldType::Count, _) => any::<i64>().prop_map(Value::Count).boxed(),
        (FieldType::Boolean, _) => any::<bool>().prop_map(Value::Boolean).boxed(),
        (FieldType::Text, Some(Constraint::Tokens(set))) => {
            proptest::sample::select(set.clone()).prop_map(Value::Text).boxed()
        }
        (FieldType::Text, _) => token_text().prop_map(Value::Text).boxed(),
        (FieldType::Choice { branches }, _) => {
            let options: Vec<BoxedStrategy<Value>> = branches
                .iter()
                .map(|b| {
                    let name = b.name.clone();
                    block(&b.fields)
                        .prop_map(move |blk| Value::Choice {
                            branch: name.clone(),
                            block: blk,
                        })
                        .boxed()
                })
                .collect();
            proptest::strategy::Union::new(options).boxed()
        }
        (FieldType::Vector { components }, _) => proptest::collection::vec(-1.0e4f64..1.0e4, components.len())
            .prop_map(Value::Vector)
            .boxed(),
    }
}

pub fn block(fields: &[FieldDescriptor]) -> BoxedStrategy<ParameterBlock> {
    let entries: Vec<BoxedStrategy<(String, Option<Value>)>> = fields
        .iter()
        .map(|f| {
            let name = f.name.clone();
            if f.optional {
                proptest::option::of(value(f)).prop_map(move |v| (name.clone(), v)).boxed()
            } else {
                value(f).prop_map(move |v| (name.clone(), Some(v))).boxed()
            }
        })
        .collect();
    entries
        .prop_map(|es| {
            let mut b = ParameterBlock::new();
            for (n, v) in es {
                if let Some(v) = v {
                    b.insert(&n, v);
                }
            }
            b
        })
        .boxed()
}

pub fn data(desc: &ParameterDescription) -> BoxedStrategy<ParameterData> {
    (
        proptest::sample::select(ENCODINGS.to_vec()),
        proptest::collection::vec(block(desc.fields()), 1..4),
    )
        .prop_map(|((t, b), blocks)| ParameterData::new(TextEncoding::new(t, b).unwrap(), blocks))
        .boxed()
}

pub fn description_and_data() -> impl Strategy<Value = (ParameterDescription, ParameterData)> {
    description().prop_flat_map(|d| {
        let data = data(&d);
        (Just(d), data)
    })
}
