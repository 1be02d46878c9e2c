//! Text encoding of tasking-parameter values.
//!
//! A value string is split on the block separator, each block on the token
//! separator, and the tokens are consumed in field order. Optional fields
//! are preceded by a presence token (`Y`/`N`), choices by a selector token
//! naming the branch, and vectors take one token per component.

use super::description::{Constraint, FieldDescriptor, FieldType, ParameterDescription};
use super::validate::{validate_data, ValidationReport};
use super::value::{
    format_boolean, format_decimal, parse_boolean, parse_count, parse_decimal, ParameterBlock, ParameterData,
    TextEncoding, Timestamp, Value,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodecError {
    #[error("empty value string")]
    EmptyInput,
    #[error("block {block}, token {index}: '{token}' matches no branch of choice '{field}'")]
    UnknownSelector {
        block: usize,
        index: usize,
        field: String,
        token: String,
    },
    #[error("block {block}: {detail}")]
    TokenCountMismatch { block: usize, detail: String },
    #[error("block {block}, token {index}: {detail}")]
    LexicalError { block: usize, index: usize, detail: String },
    #[error("block {block}, field '{field}': {detail}")]
    ConstraintViolation { block: usize, field: String, detail: String },
    #[error("values do not conform to the description: {0}")]
    ValidationFailure(ValidationReport),
}

impl CodecError {
    /// Stable classification label.
    pub fn code(&self) -> &'static str {
        match self {
            CodecError::EmptyInput => "EmptyInput",
            CodecError::UnknownSelector { .. } => "UnknownSelector",
            CodecError::TokenCountMismatch { .. } => "TokenCountMismatch",
            CodecError::LexicalError { .. } => "LexicalError",
            CodecError::ConstraintViolation { .. } => "ConstraintViolation",
            CodecError::ValidationFailure(_) => "ValidationFailure",
        }
    }
}

struct Tokens<'a> {
    block: usize,
    items: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), CodecError> {
        match self.items.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok((self.pos - 1, t))
            }
            None => Err(CodecError::TokenCountMismatch {
                block: self.block,
                detail: format!(
                    "ran out of tokens reading {what} ({} available)",
                    self.items.len()
                ),
            }),
        }
    }

    fn lexical(&self, index: usize, detail: String) -> CodecError {
        CodecError::LexicalError {
            block: self.block,
            index,
            detail,
        }
    }
}

/// Decodes a value string into typed blocks.
pub fn decode_parameter_data(
    desc: &ParameterDescription,
    enc: &TextEncoding,
    text: &str,
) -> Result<ParameterData, CodecError> {
    if text.is_empty() {
        return Err(CodecError::EmptyInput);
    }
    let mut blocks = Vec::new();
    for (b, raw) in text.split(enc.block_separator()).enumerate() {
        let mut tokens = Tokens {
            block: b,
            items: raw.split(enc.token_separator()).collect(),
            pos: 0,
        };
        let block = decode_fields(desc.fields(), &mut tokens)?;
        if tokens.pos != tokens.items.len() {
            return Err(CodecError::TokenCountMismatch {
                block: b,
                detail: format!(
                    "{} leftover token(s) after consuming {}",
                    tokens.items.len() - tokens.pos,
                    tokens.pos
                ),
            });
        }
        blocks.push(block);
    }
    Ok(ParameterData::new(enc.clone(), blocks))
}

fn decode_fields(fields: &[FieldDescriptor], tokens: &mut Tokens<'_>) -> Result<ParameterBlock, CodecError> {
    let mut block = ParameterBlock::new();
    for field in fields {
        if field.optional {
            let (i, flag) = tokens.next(&format!("presence of '{}'", field.name))?;
            match parse_boolean(flag) {
                Some(true) => {}
                Some(false) => continue,
                None => return Err(tokens.lexical(i, format!("presence token '{flag}' is not Y or N"))),
            }
        }
        let value = decode_value(field, tokens)?;
        block.insert(&field.name, value);
    }
    Ok(block)
}

fn decode_value(field: &FieldDescriptor, tokens: &mut Tokens<'_>) -> Result<Value, CodecError> {
    let violation = |tokens: &Tokens<'_>, detail: String| CodecError::ConstraintViolation {
        block: tokens.block,
        field: field.name.clone(),
        detail,
    };
    let value = match &field.field_type {
        FieldType::Time => {
            let (i, t) = tokens.next(&field.name)?;
            let ts: Timestamp = t.parse().map_err(|e| tokens.lexical(i, format!("{e}")))?;
            Value::Time(ts)
        }
        FieldType::Quantity { .. } => {
            let (i, t) = tokens.next(&field.name)?;
            let v = parse_decimal(t).ok_or_else(|| tokens.lexical(i, format!("'{t}' is not a decimal")))?;
            Value::Quantity(v)
        }
        FieldType::Count => {
            let (i, t) = tokens.next(&field.name)?;
            let v = parse_count(t).ok_or_else(|| tokens.lexical(i, format!("'{t}' is not an integer")))?;
            Value::Count(v)
        }
        FieldType::Boolean => {
            let (i, t) = tokens.next(&field.name)?;
            let v = parse_boolean(t).ok_or_else(|| tokens.lexical(i, format!("'{t}' is not Y or N")))?;
            Value::Boolean(v)
        }
        FieldType::Text => {
            let (_, t) = tokens.next(&field.name)?;
            Value::Text(t.to_string())
        }
        FieldType::Choice { branches } => {
            let (i, t) = tokens.next(&format!("selector of '{}'", field.name))?;
            let branch = branches
                .iter()
                .find(|b| b.name == t)
                .ok_or_else(|| CodecError::UnknownSelector {
                    block: tokens.block,
                    index: i,
                    field: field.name.clone(),
                    token: t.to_string(),
                })?;
            if let Some(c) = &field.allowed {
                if !c.admits_token(t) {
                    return Err(violation(tokens, format!("branch '{t}' not allowed")));
                }
            }
            let nested = decode_fields(&branch.fields, tokens)?;
            Value::Choice {
                branch: branch.name.clone(),
                block: nested,
            }
        }
        FieldType::Vector { components } => {
            let mut out = Vec::with_capacity(components.len());
            for c in components {
                let (i, t) = tokens.next(&format!("{}.{}", field.name, c.name))?;
                out.push(parse_decimal(t).ok_or_else(|| tokens.lexical(i, format!("'{t}' is not a decimal")))?);
            }
            Value::Vector(out)
        }
    };
    if let Some(c) = &field.allowed {
        let number = match &value {
            Value::Quantity(v) => Some(*v),
            Value::Count(v) => Some(*v as f64),
            _ => None,
        };
        match (c, number, &value) {
            (Constraint::Interval { min, max }, Some(v), _) if !c.admits_number(v) => {
                return Err(violation(
                    tokens,
                    format!("out of range: {} outside [{}, {}]", format_decimal(v), format_decimal(*min), format_decimal(*max)),
                ));
            }
            (Constraint::Tokens(_), _, Value::Text(t)) if !c.admits_token(t) => {
                return Err(violation(tokens, format!("not allowed: '{t}'")));
            }
            _ => {}
        }
    }
    Ok(value)
}

/// Encodes validated data into a value string; the inverse of
/// [`decode_parameter_data`].
pub fn encode_parameter_data(desc: &ParameterDescription, data: &ParameterData) -> Result<String, CodecError> {
    let report = validate_data(desc, data);
    if !report.is_empty() {
        return Err(CodecError::ValidationFailure(report));
    }
    let enc = &data.encoding;
    let mut blocks = Vec::with_capacity(data.blocks.len());
    for (b, block) in data.blocks.iter().enumerate() {
        let mut tokens = Vec::new();
        encode_fields(desc.fields(), block, &mut tokens);
        for (i, t) in tokens.iter().enumerate() {
            if !enc.admits(t) {
                return Err(CodecError::LexicalError {
                    block: b,
                    index: i,
                    detail: format!("token '{t}' is empty or contains a separator"),
                });
            }
        }
        blocks.push(tokens.join(enc.token_separator()));
    }
    Ok(blocks.join(enc.block_separator()))
}

fn encode_fields(fields: &[FieldDescriptor], block: &ParameterBlock, out: &mut Vec<String>) {
    for field in fields {
        let value = block.get(&field.name);
        if field.optional {
            out.push(format_boolean(value.is_some()).to_string());
        }
        if let Some(v) = value {
            encode_value(field, v, out);
        }
    }
}

fn encode_value(field: &FieldDescriptor, value: &Value, out: &mut Vec<String>) {
    match value {
        Value::Time(t) => out.push(t.to_string()),
        Value::Quantity(v) => out.push(format_decimal(*v)),
        Value::Count(v) => out.push(v.to_string()),
        Value::Boolean(b) => out.push(format_boolean(*b).to_string()),
        Value::Text(t) => out.push(t.clone()),
        Value::Choice { branch, block } => {
            out.push(branch.clone());
            if let Some(b) = field.branch(branch) {
                encode_fields(&b.fields, block, out);
            }
        }
        Value::Vector(vs) => out.extend(vs.iter().map(|v| format_decimal(*v))),
    }
}

/// Tokens produced for a single field value, in wire order. Used by the
/// semantic mapping to store one literal per field.
pub fn field_tokens(field: &FieldDescriptor, value: &Value) -> Vec<String> {
    let mut out = Vec::new();
    encode_value(field, value, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swe::description::FieldDescriptor;
    use crate::swe::fixtures::{reference_block, pointable_imager, REFERENCE_VALUES};

    fn flag_desc() -> ParameterDescription {
        ParameterDescription::new("flagger", vec![FieldDescriptor::boolean("flag")], vec![]).unwrap()
    }

    #[test]
    fn reference_values_decode() {
        let desc = pointable_imager();
        let enc = TextEncoding::default();
        let data = decode_parameter_data(&desc, &enc, REFERENCE_VALUES).unwrap();
        assert_eq!(data.blocks.len(), 1);
        assert_eq!(REFERENCE_VALUES.split(',').count(), 9);
        assert_eq!(data.blocks[0], reference_block());
        assert_eq!(encode_parameter_data(&desc, &data).unwrap(), REFERENCE_VALUES);
    }

    #[test]
    fn single_boolean_block() {
        let data = decode_parameter_data(&flag_desc(), &TextEncoding::default(), "Y").unwrap();
        assert_eq!(data.blocks, vec![ParameterBlock::new().with("flag", Value::Boolean(true))]);
    }

    #[test]
    fn two_blocks() {
        let data = decode_parameter_data(&flag_desc(), &TextEncoding::default(), "Y@@N").unwrap();
        assert_eq!(
            data.blocks,
            vec![
                ParameterBlock::new().with("flag", Value::Boolean(true)),
                ParameterBlock::new().with("flag", Value::Boolean(false)),
            ]
        );
    }

    #[test]
    fn absent_priority_encodes_trailing_n() {
        let desc = pointable_imager();
        let mut block = reference_block();
        block.remove("priority");
        let s = encode_parameter_data(&desc, &ParameterData::single(block)).unwrap();
        assert!(s.ends_with(",0,N"), "{s}");
        assert_eq!(s.split(',').count(), 8);
    }

    #[test]
    fn error_classification() {
        let desc = pointable_imager();
        let enc = TextEncoding::default();
        let t = "2010-08-20T12:37:00+02:00,2010-08-20T14:30:00+02:00";
        let cases = [
            (format!("{t},Y,lookSideways,1,2,3,N"), "UnknownSelector"),
            (format!("{t},N,N,extra"), "TokenCountMismatch"),
            (format!("{t},Y,pointToLookAt,1,2"), "TokenCountMismatch"),
            (format!("{t},maybe,N"), "LexicalError"),
            ("2010-08-20T12:37:00+02:00,2010-0820T14:30:00+02:00,N,N".to_string(), "LexicalError"),
            (format!("{t},N,Y,abc"), "LexicalError"),
            (format!("{t},N,Y,7.0"), "ConstraintViolation"),
        ];
        for (input, code) in cases {
            let err = decode_parameter_data(&desc, &enc, &input).unwrap_err();
            assert_eq!(err.code(), code, "{input}: {err}");
        }
        assert_eq!(decode_parameter_data(&desc, &enc, "").unwrap_err(), CodecError::EmptyInput);
    }

    #[test]
    fn whitespace_is_significant() {
        let err = decode_parameter_data(&flag_desc(), &TextEncoding::default(), " Y").unwrap_err();
        assert_eq!(err.code(), "LexicalError");
    }

    #[test]
    fn encode_rejects_invalid_data() {
        let desc = pointable_imager();
        let mut block = reference_block();
        block.insert("priority", Value::Quantity(7.0));
        let err = encode_parameter_data(&desc, &ParameterData::single(block)).unwrap_err();
        assert_eq!(err.code(), "ValidationFailure");
    }

    #[test]
    fn encode_rejects_separator_in_text() {
        let desc = ParameterDescription::new("t", vec![FieldDescriptor::text("note")], vec![]).unwrap();
        let block = ParameterBlock::new().with("note", Value::Text("a,b".into()));
        let err = encode_parameter_data(&desc, &ParameterData::single(block)).unwrap_err();
        assert_eq!(err.code(), "LexicalError");
    }

    #[test]
    fn custom_separators() {
        let desc = flag_desc();
        let enc = TextEncoding::new(";", "|").unwrap();
        let data = decode_parameter_data(&desc, &enc, "Y|N|Y").unwrap();
        assert_eq!(data.blocks.len(), 3);
        assert_eq!(encode_parameter_data(&desc, &data).unwrap(), "Y|N|Y");
    }
}
