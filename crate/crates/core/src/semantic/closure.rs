use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::graph::Graph;
use super::term::{rdf_type, sub_class_of, sub_property_of, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cyclic schema: {hierarchy} hierarchy cycles through {at}")]
pub struct CyclicSchema {
    pub hierarchy: &'static str,
    pub at: String,
}

/// Class and property hierarchies used by the closure rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OntologySchema {
    pub sub_class: BTreeSet<(Term, Term)>,
    pub sub_property: BTreeSet<(Term, Term)>,
}

impl OntologySchema {
    pub fn new() -> Self {
        Self::default()
    }

    /// The SPS classes and properties.
    pub fn sps() -> Self {
        let mut s = Self::new();
        for c in ["GetFeasibility", "Submit", "Reserve"] {
            s.sub_class.insert((Term::sps(c), Term::sps("TaskingRequest")));
        }
        for p in ["hasResult", "createdTask"] {
            s.sub_property.insert((Term::sps(p), Term::sps("relatedResource")));
        }
        s
    }

    pub fn with_class(mut self, sub: Term, sup: Term) -> Self {
        self.sub_class.insert((sub, sup));
        self
    }

    pub fn with_property(mut self, sub: Term, sup: Term) -> Self {
        self.sub_property.insert((sub, sup));
        self
    }

    /// The schema expressed as rdfs triples.
    pub fn triples(&self) -> Vec<Triple> {
        let mk = |(a, b): &(Term, Term), p: Term| Triple::new(a.clone(), p, b.clone());
        self.sub_class
            .iter()
            .filter_map(|e| mk(e, sub_class_of()).ok())
            .chain(self.sub_property.iter().filter_map(|e| mk(e, sub_property_of()).ok()))
            .collect()
    }

    pub fn check_acyclic(&self) -> Result<(), CyclicSchema> {
        find_cycle(&self.sub_class).map_or(Ok(()), |at| {
            Err(CyclicSchema {
                hierarchy: "class",
                at: at.to_string(),
            })
        })?;
        find_cycle(&self.sub_property).map_or(Ok(()), |at| {
            Err(CyclicSchema {
                hierarchy: "property",
                at: at.to_string(),
            })
        })
    }
}

fn adjacency(edges: &BTreeSet<(Term, Term)>) -> BTreeMap<&Term, Vec<&Term>> {
    let mut adj: BTreeMap<&Term, Vec<&Term>> = BTreeMap::new();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
    }
    adj
}

/// A node on a cycle, if any (Kahn's algorithm leftovers).
fn find_cycle(edges: &BTreeSet<(Term, Term)>) -> Option<&Term> {
    let mut indeg: BTreeMap<&Term, usize> = BTreeMap::new();
    for (a, b) in edges {
        indeg.entry(a).or_insert(0);
        *indeg.entry(b).or_insert(0) += 1;
    }
    let adj = adjacency(edges);
    let mut queue: VecDeque<&Term> = indeg.iter().filter(|(_, &d)| d == 0).map(|(t, _)| *t).collect();
    while let Some(n) = queue.pop_front() {
        for m in adj.get(n).into_iter().flatten() {
            let d = indeg.get_mut(m).unwrap();
            *d -= 1;
            if *d == 0 {
                queue.push_back(m);
            }
        }
        indeg.remove(n);
    }
    indeg.into_keys().next()
}

/// Materializes the subclass and subproperty entailments of `graph` to a
/// fixpoint. Each derived triple is expanded once (semi-naive).
pub fn rdfs_closure(graph: &Graph, schema: &OntologySchema) -> Result<Graph, CyclicSchema> {
    schema.check_acyclic()?;
    let supers_c = adjacency(&schema.sub_class);
    let supers_p = adjacency(&schema.sub_property);
    let ty = rdf_type();
    let mut out = graph.clone();
    let mut delta: VecDeque<Triple> = graph.iter().collect();
    while let Some(t) = delta.pop_front() {
        let mut derived = Vec::new();
        for q in supers_p.get(&t.p).into_iter().flatten() {
            derived.push(Triple {
                s: t.s.clone(),
                p: (*q).clone(),
                o: t.o.clone(),
            });
        }
        if t.p == ty {
            for d in supers_c.get(&t.o).into_iter().flatten() {
                derived.push(Triple {
                    s: t.s.clone(),
                    p: ty.clone(),
                    o: (*d).clone(),
                });
            }
        }
        for d in derived {
            if out.insert(&d) {
                delta.push_back(d);
            }
        }
    }
    Ok(out)
}
