//! XML forms of tasking descriptions and `sps:ParameterData`.

use roxmltree::Node;

use super::codec::{encode_parameter_data, CodecError};
use super::description::{Branch, Component, Constraint, FieldDescriptor, FieldKind, FieldType, ParameterDescription, SchemaError};
use super::value::{format_boolean, format_decimal, parse_boolean, parse_count, parse_decimal, ParameterData, TextEncoding, Value};
use crate::xml::{self as x, XmlWriter, SPS_NS, SWE_NS};

/// Parses a description document. The root may be `sps:TaskingParameters`
/// or any document containing one (e.g. a DescribeTasking response).
pub fn parse_tasking_description(xml: &str) -> Result<ParameterDescription, SchemaError> {
    let doc = x::parse(xml).map_err(|(off, msg)| SchemaError::new(format!("@{off}"), msg))?;
    let node = doc
        .descendants()
        .find(|n| x::is_sps(n, "TaskingParameters"))
        .ok_or_else(|| SchemaError::new("/", "no sps:TaskingParameters element"))?;
    description_from_node(&node)
}

pub fn description_from_node(node: &Node) -> Result<ParameterDescription, SchemaError> {
    let path = "/TaskingParameters";
    check_attrs(node, &["procedure"], path)?;
    let procedure = node
        .attribute("procedure")
        .ok_or_else(|| SchemaError::new(path, "missing procedure attribute"))?;
    let mut fields = Vec::new();
    let mut updatable = Vec::new();
    for child in node.children().filter(|c| c.is_element()) {
        if x::is_sps(&child, "field") {
            fields.push(parse_field(&child, path)?);
        } else if x::is_sps(&child, "updatable") {
            check_attrs(&child, &["field"], &format!("{path}/updatable"))?;
            let f = child
                .attribute("field")
                .ok_or_else(|| SchemaError::new(format!("{path}/updatable"), "missing field attribute"))?;
            updatable.push(f.to_string());
        } else {
            return Err(unexpected(&child, path));
        }
    }
    ParameterDescription::new(procedure, fields, updatable).map_err(|e| SchemaError::new(format!("{path}{}", e.path), e.message))
}

fn unexpected(node: &Node, path: &str) -> SchemaError {
    SchemaError::new(path, format!("unexpected element <{}>", node.tag_name().name()))
}

fn check_attrs(node: &Node, allowed: &[&str], path: &str) -> Result<(), SchemaError> {
    for a in node.attributes() {
        if a.namespace().is_none() && !allowed.contains(&a.name()) {
            return Err(SchemaError::new(path, format!("unexpected attribute '{}'", a.name())));
        }
    }
    Ok(())
}

fn required_attr<'a>(node: &Node<'a, '_>, name: &str, path: &str) -> Result<&'a str, SchemaError> {
    node.attribute(name)
        .ok_or_else(|| SchemaError::new(path, format!("missing attribute '{name}'")))
}

fn parse_field(node: &Node, parent: &str) -> Result<FieldDescriptor, SchemaError> {
    let name = node.attribute("name").unwrap_or("");
    let path = format!("{parent}/field[{name}]");
    check_attrs(node, &["name", "kind", "optional", "uom"], &path)?;
    let name = required_attr(node, "name", &path)?;
    let kind_attr = required_attr(node, "kind", &path)?;
    let kind = FieldKind::parse(kind_attr).ok_or_else(|| SchemaError::new(&path, format!("unknown kind '{kind_attr}'")))?;
    let optional = match node.attribute("optional") {
        None | Some("false") => false,
        Some("true") => true,
        Some(o) => return Err(SchemaError::new(&path, format!("optional must be true or false, got '{o}'"))),
    };
    if node.attribute("uom").is_some() && kind != FieldKind::Quantity {
        return Err(SchemaError::new(&path, "uom only applies to Quantity fields"));
    }
    let mut allowed = None;
    let mut default_text = None;
    let mut branches = Vec::new();
    let mut components = Vec::new();
    for child in node.children().filter(|c| c.is_element()) {
        let local = child.tag_name().name();
        if child.tag_name().namespace() != Some(SPS_NS) {
            return Err(unexpected(&child, &path));
        }
        match local {
            "allowedInterval" => {
                let p = format!("{path}/allowedInterval");
                check_attrs(&child, &["min", "max"], &p)?;
                let num = |a: &str| -> Result<f64, SchemaError> {
                    let t = required_attr(&child, a, &p)?;
                    parse_decimal(t).ok_or_else(|| SchemaError::new(&p, format!("'{t}' is not a decimal")))
                };
                allowed = Some(Constraint::Interval {
                    min: num("min")?,
                    max: num("max")?,
                });
            }
            "allowedTokens" => {
                let tokens = x::sps_children(&child, "value").map(|v| x::text_of(&v)).collect();
                allowed = Some(Constraint::Tokens(tokens));
            }
            "default" => default_text = Some(x::text_of(&child)),
            "branch" if kind == FieldKind::Choice => {
                let bname = child.attribute("name").unwrap_or("");
                let bpath = format!("{path}/branch[{bname}]");
                check_attrs(&child, &["name"], &bpath)?;
                let bname = required_attr(&child, "name", &bpath)?;
                let mut fields = Vec::new();
                for f in child.children().filter(|c| c.is_element()) {
                    if !x::is_sps(&f, "field") {
                        return Err(unexpected(&f, &bpath));
                    }
                    fields.push(parse_field(&f, &bpath)?);
                }
                branches.push(Branch {
                    name: bname.to_string(),
                    fields,
                });
            }
            "component" if kind == FieldKind::Vector => {
                let cpath = format!("{path}/component");
                check_attrs(&child, &["name", "uom"], &cpath)?;
                components.push(Component {
                    name: required_attr(&child, "name", &cpath)?.to_string(),
                    uom: required_attr(&child, "uom", &cpath)?.to_string(),
                });
            }
            _ => return Err(unexpected(&child, &path)),
        }
    }
    let field_type = match kind {
        FieldKind::Time => FieldType::Time,
        FieldKind::Quantity => FieldType::Quantity {
            uom: required_attr(node, "uom", &path)?.to_string(),
        },
        FieldKind::Count => FieldType::Count,
        FieldKind::Boolean => FieldType::Boolean,
        FieldKind::Text => FieldType::Text,
        FieldKind::Choice => FieldType::Choice { branches },
        FieldKind::Vector => FieldType::Vector { components },
    };
    let default = match default_text {
        None => None,
        Some(t) => Some(parse_scalar(kind, &t).ok_or_else(|| SchemaError::new(format!("{path}/default"), format!("'{t}' is not a valid {kind}")))?),
    };
    Ok(FieldDescriptor {
        name: name.to_string(),
        optional,
        field_type,
        allowed,
        default,
    })
}

/// Parses the lexical form of a scalar value.
pub fn parse_scalar(kind: FieldKind, text: &str) -> Option<Value> {
    Some(match kind {
        FieldKind::Time => Value::Time(text.parse().ok()?),
        FieldKind::Quantity => Value::Quantity(parse_decimal(text)?),
        FieldKind::Count => Value::Count(parse_count(text)?),
        FieldKind::Boolean => Value::Boolean(parse_boolean(text)?),
        FieldKind::Text if !text.is_empty() => Value::Text(text.to_string()),
        _ => return None,
    })
}

pub fn format_scalar(value: &Value) -> Option<String> {
    Some(match value {
        Value::Time(t) => t.to_string(),
        Value::Quantity(v) => format_decimal(*v),
        Value::Count(v) => v.to_string(),
        Value::Boolean(b) => format_boolean(*b).to_string(),
        Value::Text(t) => t.clone(),
        _ => return None,
    })
}

/// Canonical serialization of a description.
pub fn description_to_xml(desc: &ParameterDescription) -> String {
    let mut w = XmlWriter::new();
    write_description(&mut w, desc);
    w.finish()
}

pub fn write_description(w: &mut XmlWriter, desc: &ParameterDescription) {
    w.start("sps:TaskingParameters")
        .attr("xmlns:sps", SPS_NS)
        .attr("procedure", desc.procedure_id());
    for f in desc.fields() {
        write_field(w, f);
    }
    for u in desc.updatable_field_names() {
        w.start("sps:updatable").attr("field", u).end();
    }
    w.end();
}

fn write_field(w: &mut XmlWriter, f: &FieldDescriptor) {
    w.start("sps:field").attr("name", &f.name).attr("kind", f.kind().as_str());
    if f.optional {
        w.attr("optional", "true");
    }
    if let FieldType::Quantity { uom } = &f.field_type {
        w.attr("uom", uom);
    }
    match &f.allowed {
        Some(Constraint::Interval { min, max }) => {
            w.start("sps:allowedInterval")
                .attr("min", &format_decimal(*min))
                .attr("max", &format_decimal(*max))
                .end();
        }
        Some(Constraint::Tokens(tokens)) => {
            w.start("sps:allowedTokens");
            for t in tokens {
                w.leaf("sps:value", t);
            }
            w.end();
        }
        None => {}
    }
    if let Some(d) = f.default.as_ref().and_then(format_scalar) {
        w.leaf("sps:default", &d);
    }
    match &f.field_type {
        FieldType::Choice { branches } => {
            for b in branches {
                w.start("sps:branch").attr("name", &b.name);
                for bf in &b.fields {
                    write_field(w, bf);
                }
                w.end();
            }
        }
        FieldType::Vector { components } => {
            for c in components {
                w.start("sps:component").attr("name", &c.name).attr("uom", &c.uom).end();
            }
        }
        _ => {}
    }
    w.end();
}

/// Writes `<sps:ParameterData>` for validated data.
pub fn write_parameter_data(
    w: &mut XmlWriter,
    desc: &ParameterDescription,
    data: &ParameterData,
) -> Result<(), CodecError> {
    let values = encode_parameter_data(desc, data)?;
    write_encoded_values(w, &data.encoding, &values);
    Ok(())
}

/// Writes `<sps:ParameterData>` for an already encoded value string.
pub fn write_encoded_values(w: &mut XmlWriter, enc: &TextEncoding, values: &str) {
    w.start("sps:ParameterData").attr("xmlns:swe", SWE_NS);
    w.start("sps:encoding");
    w.start("swe:TextEncoding")
        .attr("tokenSeparator", enc.token_separator())
        .attr("blockSeparator", enc.block_separator())
        .end();
    w.end();
    w.leaf("sps:values", values);
    w.end();
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ParameterDataXmlError(pub String);

/// Reads the encoding and the raw value string out of a
/// `<sps:ParameterData>` element. The value text is taken verbatim.
pub fn read_parameter_data(node: &Node) -> Result<(TextEncoding, String), ParameterDataXmlError> {
    if !x::is_sps(node, "ParameterData") {
        return Err(ParameterDataXmlError("expected sps:ParameterData".into()));
    }
    let enc_node = x::sps_child(node, "encoding")
        .and_then(|e| {
            e.children()
                .find(|c| c.is_element() && c.tag_name().name() == "TextEncoding" && c.tag_name().namespace() == Some(SWE_NS))
        })
        .ok_or_else(|| ParameterDataXmlError("missing sps:encoding/swe:TextEncoding".into()))?;
    let tok = enc_node.attribute("tokenSeparator").unwrap_or(",");
    let blk = enc_node.attribute("blockSeparator").unwrap_or("@@");
    let enc = TextEncoding::new(tok, blk).map_err(|e| ParameterDataXmlError(e.to_string()))?;
    let values = x::sps_child(node, "values")
        .map(|v| x::text_of(&v))
        .ok_or_else(|| ParameterDataXmlError("missing sps:values".into()))?;
    Ok((enc, values))
}
