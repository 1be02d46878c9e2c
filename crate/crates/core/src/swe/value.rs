use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, SecondsFormat, Utc};

use super::description::FieldKind;

/// An instant together with the UTC offset it was written with.
///
/// Equality compares both, so re-encoding reproduces the original offset.
#[derive(Debug, Clone, Copy)]
pub struct Timestamp(DateTime<FixedOffset>);

impl Timestamp {
    pub fn new(dt: DateTime<FixedOffset>) -> Self {
        Timestamp(dt)
    }

    pub fn utc(&self) -> DateTime<Utc> {
        self.0.with_timezone(&Utc)
    }

    pub fn offset(&self) -> FixedOffset {
        *self.0.offset()
    }

    pub fn as_datetime(&self) -> DateTime<FixedOffset> {
        self.0
    }

    /// Same offset, different instant.
    pub fn with_instant(&self, instant: DateTime<Utc>) -> Self {
        Timestamp(instant.with_timezone(&self.offset()))
    }
}

impl PartialEq for Timestamp {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0 && self.0.offset() == other.0.offset()
    }
}

impl Eq for Timestamp {}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid timestamp '{0}': expected ISO-8601 date-time with numeric UTC offset")]
pub struct TimestampError(pub String);

impl FromStr for Timestamp {
    type Err = TimestampError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        // Numeric offset is mandatory: reject 'Z' and anything that is not
        // "YYYY-MM-DDThh:mm:ss[.f]±hh:mm".
        if bytes.len() < 25 || bytes[10] != b'T' || s.ends_with(['Z', 'z']) {
            return Err(TimestampError(s.to_string()));
        }
        let sign = bytes[bytes.len() - 6];
        if sign != b'+' && sign != b'-' {
            return Err(TimestampError(s.to_string()));
        }
        DateTime::parse_from_rfc3339(s)
            .map(Timestamp)
            .map_err(|_| TimestampError(s.to_string()))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_rfc3339_opts(SecondsFormat::AutoSi, false))
    }
}

/// A typed tasking-parameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Time(Timestamp),
    Quantity(f64),
    Count(i64),
    Boolean(bool),
    Text(String),
    Choice { branch: String, block: ParameterBlock },
    Vector(Vec<f64>),
}

impl Value {
    pub fn kind(&self) -> FieldKind {
        match self {
            Value::Time(_) => FieldKind::Time,
            Value::Quantity(_) => FieldKind::Quantity,
            Value::Count(_) => FieldKind::Count,
            Value::Boolean(_) => FieldKind::Boolean,
            Value::Text(_) => FieldKind::Text,
            Value::Choice { .. } => FieldKind::Choice,
            Value::Vector(_) => FieldKind::Vector,
        }
    }

    pub fn as_time(&self) -> Option<&Timestamp> {
        match self {
            Value::Time(t) => Some(t),
            _ => None,
        }
    }
}

/// Field name to value, for one block. Omitted optionals are absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterBlock {
    values: BTreeMap<String, Value>,
}

impl ParameterBlock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: Value) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: &str, value: Value) -> Option<Value> {
        self.values.insert(name.to_string(), value)
    }

    pub fn remove(&mut self, name: &str) -> Option<Value> {
        self.values.remove(name)
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodingError {
    #[error("separators must be nonempty")]
    EmptySeparator,
    #[error("separators '{0}' and '{1}' overlap")]
    Overlapping(String, String),
}

/// Token and block separators of the text encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextEncoding {
    token_separator: String,
    block_separator: String,
}

impl Default for TextEncoding {
    fn default() -> Self {
        TextEncoding {
            token_separator: ",".to_string(),
            block_separator: "@@".to_string(),
        }
    }
}

impl TextEncoding {
    pub fn new(token_separator: &str, block_separator: &str) -> Result<Self, EncodingError> {
        if token_separator.is_empty() || block_separator.is_empty() {
            return Err(EncodingError::EmptySeparator);
        }
        if token_separator.contains(block_separator) || block_separator.contains(token_separator) {
            return Err(EncodingError::Overlapping(
                token_separator.to_string(),
                block_separator.to_string(),
            ));
        }
        Ok(TextEncoding {
            token_separator: token_separator.to_string(),
            block_separator: block_separator.to_string(),
        })
    }

    pub fn token_separator(&self) -> &str {
        &self.token_separator
    }

    pub fn block_separator(&self) -> &str {
        &self.block_separator
    }

    /// True if `token` can be written without colliding with a separator.
    pub fn admits(&self, token: &str) -> bool {
        !token.is_empty() && !token.contains(&self.token_separator) && !token.contains(&self.block_separator)
    }
}

/// One or more blocks of tasking values together with their encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterData {
    pub encoding: TextEncoding,
    pub blocks: Vec<ParameterBlock>,
}

impl ParameterData {
    pub fn new(encoding: TextEncoding, blocks: Vec<ParameterBlock>) -> Self {
        ParameterData { encoding, blocks }
    }

    pub fn single(block: ParameterBlock) -> Self {
        ParameterData {
            encoding: TextEncoding::default(),
            blocks: vec![block],
        }
    }
}

/// Canonical rendering of a decimal: the shortest string that parses back to
/// the same `f64`.
pub fn format_decimal(v: f64) -> String {
    format!("{v}")
}

/// Decimal lexical grammar: `-?[0-9]+(\.[0-9]+)?`.
pub fn parse_decimal(s: &str) -> Option<f64> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    let all_digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int) || frac.is_some_and(|f| !all_digits(f)) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_count(s: &str) -> Option<i64> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn parse_boolean(s: &str) -> Option<bool> {
    match s {
        "Y" => Some(true),
        "N" => Some(false),
        _ => None,
    }
}

pub fn format_boolean(b: bool) -> &'static str {
    if b {
        "Y"
    } else {
        "N"
    }
}
