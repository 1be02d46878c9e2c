use std::fmt;

use super::description::{FieldDescriptor, FieldType, ParameterDescription};
use super::value::{ParameterBlock, ParameterData, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    MissingMandatory,
    UnknownField,
    OutOfRange,
    NotAllowed,
    WrongKind,
    UnknownBranch,
    VectorArity,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::MissingMandatory => "missing mandatory",
            ViolationKind::UnknownField => "unknown field",
            ViolationKind::OutOfRange => "out of range",
            ViolationKind::NotAllowed => "not allowed",
            ViolationKind::WrongKind => "wrong kind",
            ViolationKind::UnknownBranch => "unknown branch",
            ViolationKind::VectorArity => "wrong vector arity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: String,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.kind.as_str())?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Violations found in a block. Empty means the block is acceptable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    fn push(&mut self, path: String, kind: ViolationKind, detail: impl Into<String>) {
        self.violations.push(Violation {
            path,
            kind,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks one block against a description. Defaults are never filled in.
pub fn validate_values(desc: &ParameterDescription, block: &ParameterBlock) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_block(desc.fields(), block, "", &mut report);
    report
}

/// Checks every block of `data`; paths are prefixed with the block index.
pub fn validate_data(desc: &ParameterDescription, data: &ParameterData) -> ValidationReport {
    let mut report = ValidationReport::default();
    if data.blocks.is_empty() {
        report.push("/".into(), ViolationKind::MissingMandatory, "no blocks");
    }
    for (i, block) in data.blocks.iter().enumerate() {
        check_block(desc.fields(), block, &format!("block[{i}]"), &mut report);
    }
    report
}

fn check_block(fields: &[FieldDescriptor], block: &ParameterBlock, prefix: &str, report: &mut ValidationReport) {
    for field in fields {
        let path = format!("{prefix}/{}", field.name);
        match block.get(&field.name) {
            None if !field.optional => report.push(path, ViolationKind::MissingMandatory, ""),
            None => {}
            Some(v) => check_value(field, v, &path, report),
        }
    }
    for (name, _) in block.iter() {
        if !fields.iter().any(|f| f.name == name) {
            report.push(format!("{prefix}/{name}"), ViolationKind::UnknownField, "");
        }
    }
}

fn check_value(field: &FieldDescriptor, value: &Value, path: &str, report: &mut ValidationReport) {
    if value.kind() != field.kind() {
        report.push(
            path.to_string(),
            ViolationKind::WrongKind,
            format!("expected {}, got {}", field.kind(), value.kind()),
        );
        return;
    }
    match (&field.field_type, value) {
        (FieldType::Quantity { .. }, Value::Quantity(v)) => {
            if !v.is_finite() {
                report.push(path.to_string(), ViolationKind::OutOfRange, "not finite");
            } else if let Some(c) = &field.allowed {
                if !c.admits_number(*v) {
                    report.push(path.to_string(), ViolationKind::OutOfRange, format!("{v}"));
                }
            }
        }
        (FieldType::Count, Value::Count(v)) => {
            if let Some(c) = &field.allowed {
                if !c.admits_number(*v as f64) {
                    report.push(path.to_string(), ViolationKind::OutOfRange, format!("{v}"));
                }
            }
        }
        (FieldType::Text, Value::Text(t)) => {
            if let Some(c) = &field.allowed {
                if !c.admits_token(t) {
                    report.push(path.to_string(), ViolationKind::NotAllowed, t.clone());
                }
            }
        }
        (FieldType::Choice { branches }, Value::Choice { branch, block }) => {
            match branches.iter().find(|b| &b.name == branch) {
                None => report.push(path.to_string(), ViolationKind::UnknownBranch, branch.clone()),
                Some(b) => {
                    if let Some(c) = &field.allowed {
                        if !c.admits_token(branch) {
                            report.push(path.to_string(), ViolationKind::NotAllowed, branch.clone());
                        }
                    }
                    check_block(&b.fields, block, &format!("{path}/{branch}"), report);
                }
            }
        }
        (FieldType::Vector { components }, Value::Vector(values)) => {
            if components.len() != values.len() {
                report.push(
                    path.to_string(),
                    ViolationKind::VectorArity,
                    format!("expected {}, got {}", components.len(), values.len()),
                );
            } else if values.iter().any(|v| !v.is_finite()) {
                report.push(path.to_string(), ViolationKind::OutOfRange, "not finite");
            }
        }
        _ => {}
    }
}
