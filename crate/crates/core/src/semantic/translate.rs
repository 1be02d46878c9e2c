use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use super::graph::Graph;
use super::term::{rdf_type, Term, Triple, SPS};
use crate::asset::ResultReference;
use crate::swe::{decode_parameter_data, field_tokens, CodecError, ParameterData, ParameterDescription, TextEncoding};
use crate::task::{format_instant, RequestKind, Task, TaskingRequest};

pub fn operation_class(kind: RequestKind) -> Term {
    Term::sps(kind.operation())
}

fn subject_stem(kind: RequestKind) -> &'static str {
    match kind {
        RequestKind::Feasibility => "getfes",
        RequestKind::Submit => "submit",
        RequestKind::Reserve => "reserve",
    }
}

/// `sps:getfes_<n>`, `sps:submit_<n>` or `sps:reserve_<n>` for request `req_<n>`.
pub fn request_subject(req_id: &str, kind: RequestKind) -> Term {
    let n = req_id.strip_prefix("req_").unwrap_or(req_id);
    Term::sps(&format!("{}_{n}", subject_stem(kind)))
}

pub fn task_subject(task_id: &str) -> Term {
    Term::sps(task_id)
}

pub fn procedure_iri(procedure_id: &str) -> Term {
    Term::sps(&format!("procedure/{procedure_id}"))
}

pub fn asset_iri(asset_id: &str) -> Term {
    Term::sps(&format!("asset/{asset_id}"))
}

pub fn result_iri(uri: &str) -> Term {
    Term::sps(uri)
}

fn t(s: &Term, p: &str, o: Term) -> Triple {
    Triple {
        s: s.clone(),
        p: Term::sps(p),
        o,
    }
}

fn node_suffix(s: &Term, suffix: &str) -> Term {
    match s {
        Term::Iri(i) => Term::Iri(format!("{i}{suffix}")),
        other => other.clone(),
    }
}

/// RDF description of a tasking request. Each present top-level field of
/// each block becomes one parameter node holding its wire tokens.
pub fn translate_request(req: &TaskingRequest, desc: &ParameterDescription) -> Vec<Triple> {
    let s = request_subject(&req.id, req.kind);
    let enc = &req.parameters.encoding;
    let mut out = vec![
        Triple {
            s: s.clone(),
            p: rdf_type(),
            o: operation_class(req.kind),
        },
        t(&s, "requestId", Term::string(&req.id)),
        t(&s, "procedure", procedure_iri(&req.procedure_id)),
        t(&s, "status", Term::string(req.status().as_str())),
        t(&s, "receivedAt", Term::date_time(format_instant(req.received_at))),
        t(&s, "tokenSeparator", Term::string(enc.token_separator())),
        t(&s, "blockSeparator", Term::string(enc.block_separator())),
    ];
    if let Some(task) = &req.task_id {
        out.push(t(&s, "createdTask", task_subject(task)));
    }
    for (i, block) in req.parameters.blocks.iter().enumerate() {
        for field in desc.fields() {
            let Some(v) = block.get(&field.name) else { continue };
            let node = node_suffix(&s, &format!("_b{i}_{}", field.name));
            out.push(t(&s, "parameter", node.clone()));
            out.push(t(&node, "name", Term::string(&field.name)));
            out.push(t(&node, "value", Term::string(field_tokens(field, v).join(enc.token_separator()))));
            out.push(t(&node, "blockIndex", Term::decimal(i.to_string())));
        }
    }
    out
}

/// RDF description of a task and its result references.
pub fn translate_task(task: &Task, results: &[ResultReference], updated_at: DateTime<Utc>) -> Vec<Triple> {
    let s = task_subject(&task.id);
    let mut out = vec![
        Triple {
            s: s.clone(),
            p: rdf_type(),
            o: Term::sps("Task"),
        },
        t(&s, "taskKind", Term::string(task.kind.as_str())),
        t(&s, "status", Term::string(task.state.as_str())),
        t(&s, "asset", asset_iri(&task.asset_id)),
        t(&s, "procedure", procedure_iri(&task.procedure_id)),
        t(&s, "createdAt", Term::date_time(format_instant(task.created_at))),
        t(&s, "updatedAt", Term::date_time(format_instant(updated_at))),
        t(&s, "percentCompletion", Term::decimal(task.progress.to_string())),
    ];
    if let Some(e) = task.reservation_expiration {
        out.push(t(&s, "reservationExpiration", Term::date_time(format_instant(e))));
    }
    for r in results {
        let ri = result_iri(&r.uri);
        out.push(t(&s, "hasResult", ri.clone()));
        out.push(Triple {
            s: ri.clone(),
            p: rdf_type(),
            o: Term::sps("ResultReference"),
        });
        out.push(t(&ri, "producedAt", Term::date_time(format_instant(r.produced_at))));
        out.push(t(&ri, "partial", Term::string(if r.partial { "true" } else { "false" })));
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error("{subject}: missing {what}")]
    Missing { subject: String, what: String },
    #[error("{subject}: {detail}")]
    Malformed { subject: String, detail: String },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// What [`extract_request`] recovers from the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedRequest {
    pub kind: RequestKind,
    pub request_id: String,
    pub procedure_id: String,
    pub status: String,
    pub parameters: ParameterData,
}

fn one(g: &Graph, s: &Term, p: &str) -> Option<Term> {
    g.matching(Some(s), Some(&Term::sps(p)), None).into_iter().next().map(|t| t.o)
}

/// Inverse of [`translate_request`]: rebuilds the request's operation,
/// procedure and parameter data.
pub fn extract_request(g: &Graph, subject: &Term, desc: &ParameterDescription) -> Result<ExtractedRequest, ExtractError> {
    let name = subject.compact();
    let missing = |what: &str| ExtractError::Missing {
        subject: name.clone(),
        what: what.to_string(),
    };
    let malformed = |detail: String| ExtractError::Malformed {
        subject: name.clone(),
        detail,
    };
    let kind = g
        .matching(Some(subject), Some(&rdf_type()), None)
        .into_iter()
        .find_map(|t| {
            let local = t.o.as_iri()?.strip_prefix(SPS)?.to_string();
            RequestKind::from_operation(&local)
        })
        .ok_or_else(|| missing("operation class"))?;
    let lit = |p: &str| -> Result<String, ExtractError> {
        one(g, subject, p)
            .and_then(|o| o.lexical().map(str::to_string))
            .ok_or_else(|| missing(p))
    };
    let procedure_id = one(g, subject, "procedure")
        .and_then(|o| o.as_iri()?.strip_prefix(&format!("{SPS}procedure/")).map(str::to_string))
        .ok_or_else(|| missing("procedure"))?;
    let enc = TextEncoding::new(&lit("tokenSeparator")?, &lit("blockSeparator")?)
        .map_err(|e| malformed(e.to_string()))?;

    let mut blocks: BTreeMap<usize, BTreeMap<String, String>> = BTreeMap::new();
    for p in g.matching(Some(subject), Some(&Term::sps("parameter")), None) {
        let node = p.o;
        let get = |prop: &str| {
            one(g, &node, prop)
                .and_then(|o| o.lexical().map(str::to_string))
                .ok_or_else(|| missing(&format!("{prop} of {}", node.compact())))
        };
        let index: usize = get("blockIndex")?
            .parse()
            .map_err(|_| malformed(format!("bad blockIndex on {}", node.compact())))?;
        blocks.entry(index).or_default().insert(get("name")?, get("value")?);
    }
    if blocks.is_empty() || blocks.keys().copied().ne(0..blocks.len()) {
        return Err(malformed("parameter blocks missing or not contiguous".into()));
    }
    let mut texts = Vec::with_capacity(blocks.len());
    for (_, fields) in blocks {
        let mut tokens: Vec<String> = Vec::new();
        for f in desc.fields() {
            match (fields.get(&f.name), f.optional) {
                (Some(v), true) => {
                    tokens.push("Y".into());
                    tokens.push(v.clone());
                }
                (Some(v), false) => tokens.push(v.clone()),
                (None, true) => tokens.push("N".into()),
                (None, false) => return Err(missing(&format!("mandatory parameter {}", f.name))),
            }
        }
        texts.push(tokens.join(enc.token_separator()));
    }
    let parameters = decode_parameter_data(desc, &enc, &texts.join(enc.block_separator()))?;
    Ok(ExtractedRequest {
        kind,
        request_id: lit("requestId")?,
        procedure_id,
        status: lit("status")?,
        parameters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swe::fixtures::{reference_block, pointable_imager};
    use crate::swe::ParameterBlock;
    use chrono::DateTime;

    fn at() -> DateTime<Utc> {
        DateTime::parse_from_rfc3339("2010-08-20T08:00:00Z").unwrap().to_utc()
    }

    fn graph(ts: &[Triple]) -> Graph {
        ts.iter().collect()
    }

    #[test]
    fn feasibility_request_typed_by_operation() {
        let req = TaskingRequest::new(
            "req_1",
            RequestKind::Feasibility,
            "pointable-imager-01",
            ParameterData::single(reference_block()),
            at(),
        );
        let ts = translate_request(&req, &pointable_imager());
        assert!(ts.contains(&Triple::new(Term::sps("getfes_1"), rdf_type(), Term::sps("GetFeasibility")).unwrap()));
        assert_eq!(ts, translate_request(&req, &pointable_imager()));
    }

    #[test]
    fn mandatory_only_gives_two_parameter_nodes() {
        let full = reference_block();
        let block = ParameterBlock::new()
            .with("measurementStart", full.get("measurementStart").unwrap().clone())
            .with("measurementEnd", full.get("measurementEnd").unwrap().clone());
        let req = TaskingRequest::new("req_4", RequestKind::Submit, "p", ParameterData::single(block), at());
        let ts = translate_request(&req, &pointable_imager());
        let n = ts.iter().filter(|t| t.p == Term::sps("parameter")).count();
        assert_eq!(n, 2);
    }

    #[test]
    fn extraction_inverts_translation() {
        let desc = pointable_imager();
        let data = ParameterData::new(TextEncoding::new(";", "|").unwrap(), vec![reference_block(), reference_block()]);
        let req = TaskingRequest::new("req_7", RequestKind::Reserve, "pointable-imager-01", data.clone(), at());
        let g = graph(&translate_request(&req, &desc));
        let x = extract_request(&g, &request_subject("req_7", RequestKind::Reserve), &desc).unwrap();
        assert_eq!(x.kind, RequestKind::Reserve);
        assert_eq!(x.procedure_id, "pointable-imager-01");
        assert_eq!(x.request_id, "req_7");
        assert_eq!(x.parameters, data);
    }
}
