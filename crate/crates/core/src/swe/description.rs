use std::collections::HashSet;
use std::fmt;

use super::value::Value;

/// Schema problem in a tasking-parameter description, with the element path
/// where it was found.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Time,
    Quantity,
    Count,
    Boolean,
    Text,
    Choice,
    Vector,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Time => "Time",
            FieldKind::Quantity => "Quantity",
            FieldKind::Count => "Count",
            FieldKind::Boolean => "Boolean",
            FieldKind::Text => "Text",
            FieldKind::Choice => "Choice",
            FieldKind::Vector => "Vector",
        }
    }

    pub fn parse(s: &str) -> Option<FieldKind> {
        Some(match s {
            "Time" => FieldKind::Time,
            "Quantity" => FieldKind::Quantity,
            "Count" => FieldKind::Count,
            "Boolean" => FieldKind::Boolean,
            "Text" => FieldKind::Text,
            "Choice" => FieldKind::Choice,
            "Vector" => FieldKind::Vector,
            _ => return None,
        })
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Value constraint attached to a field.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// Closed interval, for Quantity and Count.
    Interval { min: f64, max: f64 },
    /// Enumerated tokens, for Text values and Choice selectors.
    Tokens(Vec<String>),
}

impl Constraint {
    pub fn admits_number(&self, v: f64) -> bool {
        match self {
            Constraint::Interval { min, max } => *min <= v && v <= *max,
            Constraint::Tokens(_) => true,
        }
    }

    pub fn admits_token(&self, t: &str) -> bool {
        match self {
            Constraint::Tokens(set) => set.iter().any(|s| s == t),
            Constraint::Interval { .. } => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub name: String,
    pub fields: Vec<FieldDescriptor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    pub uom: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldType {
    Time,
    Quantity { uom: String },
    Count,
    Boolean,
    Text,
    Choice { branches: Vec<Branch> },
    Vector { components: Vec<Component> },
}

impl FieldType {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldType::Time => FieldKind::Time,
            FieldType::Quantity { .. } => FieldKind::Quantity,
            FieldType::Count => FieldKind::Count,
            FieldType::Boolean => FieldKind::Boolean,
            FieldType::Text => FieldKind::Text,
            FieldType::Choice { .. } => FieldKind::Choice,
            FieldType::Vector { .. } => FieldKind::Vector,
        }
    }
}

/// One tasking field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDescriptor {
    pub name: String,
    pub optional: bool,
    pub field_type: FieldType,
    pub allowed: Option<Constraint>,
    pub default: Option<Value>,
}

impl FieldDescriptor {
    fn with_type(name: &str, field_type: FieldType) -> Self {
        FieldDescriptor {
            name: name.to_string(),
            optional: false,
            field_type,
            allowed: None,
            default: None,
        }
    }

    pub fn time(name: &str) -> Self {
        Self::with_type(name, FieldType::Time)
    }

    pub fn quantity(name: &str, uom: &str) -> Self {
        Self::with_type(name, FieldType::Quantity { uom: uom.to_string() })
    }

    pub fn count(name: &str) -> Self {
        Self::with_type(name, FieldType::Count)
    }

    pub fn boolean(name: &str) -> Self {
        Self::with_type(name, FieldType::Boolean)
    }

    pub fn text(name: &str) -> Self {
        Self::with_type(name, FieldType::Text)
    }

    pub fn choice(name: &str, branches: Vec<Branch>) -> Self {
        Self::with_type(name, FieldType::Choice { branches })
    }

    pub fn vector(name: &str, components: &[(&str, &str)]) -> Self {
        let components = components
            .iter()
            .map(|(n, u)| Component {
                name: n.to_string(),
                uom: u.to_string(),
            })
            .collect();
        Self::with_type(name, FieldType::Vector { components })
    }

    pub fn optional(mut self) -> Self {
        self.optional = true;
        self
    }

    pub fn allowed(mut self, c: Constraint) -> Self {
        self.allowed = Some(c);
        self
    }

    pub fn default_value(mut self, v: Value) -> Self {
        self.default = Some(v);
        self
    }

    pub fn kind(&self) -> FieldKind {
        self.field_type.kind()
    }

    pub fn branch(&self, name: &str) -> Option<&Branch> {
        match &self.field_type {
            FieldType::Choice { branches } => branches.iter().find(|b| b.name == name),
            _ => None,
        }
    }

    fn check(&self, path: &str) -> Result<(), SchemaError> {
        let path = format!("{path}/{}", self.name);
        check_name(&self.name, &path)?;
        match (&self.field_type, &self.allowed) {
            (FieldType::Quantity { .. } | FieldType::Count, Some(Constraint::Interval { min, max })) => {
                if !(min.is_finite() && max.is_finite() && min <= max) {
                    return Err(SchemaError::new(&path, "allowed interval must satisfy min <= max"));
                }
            }
            (FieldType::Text | FieldType::Choice { .. }, Some(Constraint::Tokens(set))) => {
                if set.is_empty() {
                    return Err(SchemaError::new(&path, "allowed token set is empty"));
                }
            }
            (_, None) => {}
            (t, Some(_)) => {
                return Err(SchemaError::new(
                    &path,
                    format!("constraint not applicable to {}", t.kind()),
                ))
            }
        }
        match &self.field_type {
            FieldType::Choice { branches } => {
                if branches.is_empty() {
                    return Err(SchemaError::new(&path, "choice needs at least one branch"));
                }
                let mut seen = HashSet::new();
                for b in branches {
                    check_name(&b.name, &format!("{path}/{}", b.name))?;
                    if !seen.insert(b.name.as_str()) {
                        return Err(SchemaError::new(&path, format!("duplicate branch '{}'", b.name)));
                    }
                    check_fields(&b.fields, &format!("{path}/{}", b.name))?;
                }
            }
            FieldType::Vector { components } => {
                if components.is_empty() {
                    return Err(SchemaError::new(&path, "vector needs at least one component"));
                }
                for c in components {
                    check_name(&c.name, &format!("{path}/{}", c.name))?;
                }
            }
            _ => {}
        }
        if let Some(d) = &self.default {
            if !matches!(
                self.field_type,
                FieldType::Time | FieldType::Quantity { .. } | FieldType::Count | FieldType::Boolean | FieldType::Text
            ) {
                return Err(SchemaError::new(&path, "defaults are only supported on scalar fields"));
            }
            if d.kind() != self.kind() {
                return Err(SchemaError::new(&path, "default has the wrong kind"));
            }
            let admitted = match (&self.allowed, d) {
                (None, _) => true,
                (Some(c), Value::Quantity(v)) => c.admits_number(*v),
                (Some(c), Value::Count(v)) => c.admits_number(*v as f64),
                (Some(c), Value::Text(t)) => c.admits_token(t),
                _ => true,
            };
            if !admitted {
                return Err(SchemaError::new(&path, "default violates the allowed constraint"));
            }
        }
        Ok(())
    }
}

fn check_name(name: &str, path: &str) -> Result<(), SchemaError> {
    if name.is_empty() {
        return Err(SchemaError::new(path, "empty name"));
    }
    if name.chars().any(|c| c.is_whitespace() || c == ',' || c == '@' || c == ':' || c == '=') {
        return Err(SchemaError::new(path, format!("name '{name}' contains a reserved character")));
    }
    Ok(())
}

fn check_fields(fields: &[FieldDescriptor], path: &str) -> Result<(), SchemaError> {
    if fields.is_empty() {
        return Err(SchemaError::new(path, "no fields"));
    }
    let mut seen = HashSet::new();
    for f in fields {
        if !seen.insert(f.name.as_str()) {
            return Err(SchemaError::new(path, format!("duplicate field name '{}'", f.name)));
        }
        f.check(path)?;
    }
    Ok(())
}

/// The ordered tasking-parameter schema of one procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterDescription {
    procedure_id: String,
    fields: Vec<FieldDescriptor>,
    updatable: Vec<String>,
}

impl ParameterDescription {
    pub fn new(
        procedure_id: impl Into<String>,
        fields: Vec<FieldDescriptor>,
        updatable: Vec<String>,
    ) -> Result<Self, SchemaError> {
        let procedure_id = procedure_id.into();
        if procedure_id.trim().is_empty() {
            return Err(SchemaError::new("/", "empty procedure id"));
        }
        check_fields(&fields, "")?;
        for u in &updatable {
            if !fields.iter().any(|f| &f.name == u) {
                return Err(SchemaError::new(
                    "/updatable",
                    format!("updatable field '{u}' is not a field"),
                ));
            }
        }
        Ok(ParameterDescription {
            procedure_id,
            fields,
            updatable,
        })
    }

    pub fn procedure_id(&self) -> &str {
        &self.procedure_id
    }

    pub fn fields(&self) -> &[FieldDescriptor] {
        &self.fields
    }

    pub fn field(&self, name: &str) -> Option<&FieldDescriptor> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn updatable_field_names(&self) -> &[String] {
        &self.updatable
    }

    pub fn is_updatable(&self, name: &str) -> bool {
        self.updatable.iter().any(|u| u == name)
    }
}
