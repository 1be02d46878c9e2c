use std::collections::{BTreeMap, HashMap};

use super::closure::{rdfs_closure, CyclicSchema, OntologySchema};
use super::graph::Graph;
use super::query::{query_bgp, Binding, MalformedPattern, TriplePattern};
use super::term::Triple;

/// Asserted triples grouped into named descriptions, plus the materialized
/// closure. Replacing a description retracts its previous triples.
#[derive(Debug, Clone)]
pub struct SemanticStore {
    schema: OntologySchema,
    descriptions: BTreeMap<String, Vec<Triple>>,
    counts: HashMap<Triple, usize>,
    base: Graph,
    closed: Graph,
    inference: bool,
}

impl SemanticStore {
    pub fn new(schema: OntologySchema) -> Result<Self, CyclicSchema> {
        schema.check_acyclic()?;
        let mut s = SemanticStore {
            schema,
            descriptions: BTreeMap::new(),
            counts: HashMap::new(),
            base: Graph::new(),
            closed: Graph::new(),
            inference: true,
        };
        let schema_triples = s.schema.triples();
        s.replace_batch([("schema".to_string(), schema_triples)]);
        Ok(s)
    }

    pub fn set_inference(&mut self, on: bool) {
        self.inference = on;
        self.recompute();
    }

    pub fn schema(&self) -> &OntologySchema {
        &self.schema
    }

    fn add(&mut self, t: &Triple) {
        let c = self.counts.entry(t.clone()).or_insert(0);
        *c += 1;
        if *c == 1 {
            self.base.insert(t);
        }
    }

    fn retract(&mut self, t: &Triple) {
        if let Some(c) = self.counts.get_mut(t) {
            *c -= 1;
            if *c == 0 {
                self.counts.remove(t);
                self.base.remove(t);
            }
        }
    }

    fn recompute(&mut self) {
        self.closed = if self.inference {
            // The schema was checked acyclic at construction.
            rdfs_closure(&self.base, &self.schema).expect("acyclic schema")
        } else {
            self.base.clone()
        };
    }

    /// Replaces each named description, then recomputes the closure once.
    pub fn replace_batch(&mut self, batch: impl IntoIterator<Item = (String, Vec<Triple>)>) {
        for (key, triples) in batch {
            if let Some(old) = self.descriptions.remove(&key) {
                for t in &old {
                    self.retract(t);
                }
            }
            let mut triples = triples;
            triples.sort();
            triples.dedup();
            for t in &triples {
                self.add(t);
            }
            self.descriptions.insert(key, triples);
        }
        self.recompute();
    }

    pub fn replace(&mut self, key: &str, triples: Vec<Triple>) {
        self.replace_batch([(key.to_string(), triples)]);
    }

    pub fn description(&self, key: &str) -> Option<&[Triple]> {
        self.descriptions.get(key).map(Vec::as_slice)
    }

    /// Asserted triples only.
    pub fn base(&self) -> &Graph {
        &self.base
    }

    /// Asserted plus inferred triples.
    pub fn graph(&self) -> &Graph {
        &self.closed
    }

    pub fn query(&self, patterns: &[TriplePattern]) -> Result<Vec<Binding>, MalformedPattern> {
        query_bgp(&self.closed, patterns)
    }

    pub fn dump(&self) -> String {
        self.closed.dump()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantic::term::{rdf_type, Term};

    fn ty(s: &str, c: &str) -> Triple {
        Triple::new(Term::sps(s), rdf_type(), Term::sps(c)).unwrap()
    }

    #[test]
    fn replacement_retracts_old_triples() {
        let mut st = SemanticStore::new(OntologySchema::sps()).unwrap();
        let status = |v: &str| Triple::new(Term::sps("task_1"), Term::sps("status"), Term::string(v)).unwrap();
        st.replace("task_1", vec![ty("task_1", "Task"), status("Reserved")]);
        st.replace("task_1", vec![ty("task_1", "Task"), status("InExecution")]);
        assert!(st.graph().contains(&status("InExecution")));
        assert!(!st.graph().contains(&status("Reserved")));
    }

    #[test]
    fn shared_triples_survive_one_retraction() {
        let mut st = SemanticStore::new(OntologySchema::new()).unwrap();
        st.replace("a", vec![ty("x", "C")]);
        st.replace("b", vec![ty("x", "C")]);
        st.replace("a", vec![]);
        assert!(st.graph().contains(&ty("x", "C")));
        st.replace("b", vec![]);
        assert!(st.graph().is_empty());
    }

    #[test]
    fn closure_materialized_on_insert() {
        let mut st = SemanticStore::new(OntologySchema::sps()).unwrap();
        st.replace("r", vec![ty("submit_1", "Submit")]);
        assert!(st.graph().contains(&ty("submit_1", "TaskingRequest")));
        st.set_inference(false);
        assert!(!st.graph().contains(&ty("submit_1", "TaskingRequest")));
    }
}
