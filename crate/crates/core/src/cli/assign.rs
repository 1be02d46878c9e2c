//! `name=value` assignments turned into tasking parameters.

use super::CliError;
use crate::swe::{
    encode_parameter_data, format_scalar, parse_scalar, FieldDescriptor, FieldType, ParameterBlock, ParameterData,
    ParameterDescription, TextEncoding, Value,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub name: String,
    pub value: String,
}

pub fn parse_assignment(s: &str) -> Result<Assignment, CliError> {
    match s.split_once('=') {
        Some((n, v)) if !n.trim().is_empty() => Ok(Assignment {
            name: n.trim().to_string(),
            value: v.trim().to_string(),
        }),
        _ => Err(CliError::Usage(format!("expected name=value, got '{s}'"))),
    }
}

/// Exact name first, then a unique case-insensitive suffix
/// (`start` finds `measurementStart`).
pub fn resolve<'a>(fields: &'a [FieldDescriptor], name: &str) -> Result<&'a FieldDescriptor, CliError> {
    if let Some(f) = fields.iter().find(|f| f.name == name) {
        return Ok(f);
    }
    let lower = name.to_ascii_lowercase();
    let hits: Vec<_> = fields
        .iter()
        .filter(|f| f.name.to_ascii_lowercase().ends_with(&lower))
        .collect();
    match hits.as_slice() {
        [f] => Ok(f),
        [] => Err(CliError::Usage(format!(
            "no parameter '{name}'; known: {}",
            fields.iter().map(|f| f.name.as_str()).collect::<Vec<_>>().join(", ")
        ))),
        many => Err(CliError::Usage(format!(
            "'{name}' is ambiguous: {}",
            many.iter().map(|f| f.name.as_str()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn bad(field: &FieldDescriptor, text: &str) -> CliError {
    CliError::Usage(format!("'{text}' is not a valid {} for {}", field.kind().as_str(), field.name))
}

/// Parses `text` for one field. Vectors take comma-separated components;
/// choices take `branch:v1,v2,...` with one value per branch field.
pub fn parse_value(field: &FieldDescriptor, text: &str) -> Result<Value, CliError> {
    match &field.field_type {
        FieldType::Vector { components } => {
            let parts: Vec<&str> = text.split(',').map(str::trim).collect();
            if parts.len() != components.len() {
                return Err(CliError::Usage(format!(
                    "{} needs {} components, got {}",
                    field.name,
                    components.len(),
                    parts.len()
                )));
            }
            parts
                .iter()
                .map(|p| crate::swe::parse_decimal(p).ok_or_else(|| bad(field, text)))
                .collect::<Result<_, _>>()
                .map(Value::Vector)
        }
        FieldType::Choice { branches } => {
            let (name, rest) = text.split_once(':').unwrap_or((text, ""));
            let branch = branches
                .iter()
                .find(|b| b.name.eq_ignore_ascii_case(name.trim()))
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "{} has no branch '{name}'; branches: {}",
                        field.name,
                        branches.iter().map(|b| b.name.as_str()).collect::<Vec<_>>().join(", ")
                    ))
                })?;
            let mut parts: Vec<&str> = if rest.is_empty() { vec![] } else { rest.split(',').collect() };
            let mut block = ParameterBlock::new();
            for f in &branch.fields {
                let take = match &f.field_type {
                    FieldType::Vector { components } => components.len(),
                    _ => 1,
                };
                if parts.len() < take {
                    if f.optional {
                        continue;
                    }
                    return Err(CliError::Usage(format!("branch {} is missing a value for {}", branch.name, f.name)));
                }
                let chunk: Vec<&str> = parts.drain(..take).collect();
                block.insert(&f.name, parse_value(f, &chunk.join(","))?);
            }
            if !parts.is_empty() {
                return Err(CliError::Usage(format!("too many values for branch {}", branch.name)));
            }
            Ok(Value::Choice {
                branch: branch.name.clone(),
                block,
            })
        }
        _ => parse_scalar(field.kind(), text).ok_or_else(|| bad(field, text)),
    }
}

/// One block from the assignments. Unassigned fields take their default;
/// mandatory fields without one are an error.
pub fn build_block(desc: &ParameterDescription, assignments: &[Assignment]) -> Result<ParameterBlock, CliError> {
    let mut block = ParameterBlock::new();
    for a in assignments {
        let f = resolve(desc.fields(), &a.name)?;
        if block.insert(&f.name, parse_value(f, &a.value)?).is_some() {
            return Err(CliError::Usage(format!("{} assigned twice", f.name)));
        }
    }
    for f in desc.fields() {
        if block.contains(&f.name) {
            continue;
        }
        match (&f.default, f.optional) {
            (Some(v), _) => {
                block.insert(&f.name, v.clone());
            }
            (None, true) => {}
            (None, false) => return Err(CliError::Usage(format!("{} is required and has no default", f.name))),
        }
    }
    Ok(block)
}

/// Encoded value string for the assignments.
pub fn encode_assignments(
    desc: &ParameterDescription,
    enc: &TextEncoding,
    assignments: &[Assignment],
) -> Result<String, CliError> {
    let data = ParameterData::new(enc.clone(), vec![build_block(desc, assignments)?]);
    encode_parameter_data(desc, &data).map_err(|e| CliError::Usage(e.to_string()))
}

/// `name=value` rendering of a block, the inverse of [`build_block`].
pub fn describe_block(desc: &ParameterDescription, block: &ParameterBlock) -> Vec<String> {
    fn render(v: &Value) -> String {
        match v {
            Value::Vector(cs) => cs.iter().map(|c| crate::swe::format_decimal(*c)).collect::<Vec<_>>().join(","),
            Value::Choice { branch, block } => {
                let inner: Vec<String> = block.iter().map(|(_, v)| render(v)).collect();
                format!("{branch}:{}", inner.join(","))
            }
            other => format_scalar(other).unwrap_or_default(),
        }
    }
    desc.fields()
        .iter()
        .filter_map(|f| block.get(&f.name).map(|v| format!("{}={}", f.name, render(v))))
        .collect()
}
