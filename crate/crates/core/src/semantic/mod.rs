//! RDF view of requests and tasks with pattern queries and RDFS inference.

mod closure;
mod graph;
mod query;
mod store;
mod term;
mod translate;

pub use closure::{rdfs_closure, CyclicSchema, OntologySchema};
pub use graph::Graph;
pub use query::{bindings_to_xml, parse_bgp, query_bgp, Binding, MalformedPattern, TriplePattern};
pub use store::SemanticStore;
pub use term::{rdf_type, sub_class_of, sub_property_of, Datatype, InvalidTriple, Term, Triple, PREFIXES, RDF, RDFS, SPS, XSD};
pub use translate::{
    asset_iri, extract_request, operation_class, procedure_iri, request_subject, result_iri, task_subject,
    translate_request, translate_task, ExtractError, ExtractedRequest,
};
