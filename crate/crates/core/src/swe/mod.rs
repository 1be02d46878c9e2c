//! Tasking-parameter descriptions and their text encoding.

mod codec;
mod description;
pub mod fixtures;
mod validate;
mod value;
mod xml;

pub use codec::{decode_parameter_data, encode_parameter_data, field_tokens, CodecError};
pub use description::{Branch, Component, Constraint, FieldDescriptor, FieldKind, FieldType, ParameterDescription, SchemaError};
pub use validate::{validate_data, validate_values, ValidationReport, Violation, ViolationKind};
pub use value::{
    format_decimal, parse_decimal, EncodingError, ParameterBlock, ParameterData, TextEncoding, Timestamp, TimestampError,
    Value,
};
pub use xml::{
    description_from_node, description_to_xml, format_scalar, parse_scalar, parse_tasking_description,
    read_parameter_data, write_description, write_encoded_values, write_parameter_data, ParameterDataXmlError,
};
