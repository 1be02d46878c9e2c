//! Random graphs and queries plus brute-force reference evaluators.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use proptest::prelude::*;
use sps_core::semantic::{rdf_type, Binding, Graph, OntologySchema, Term, Triple, TriplePattern};

const NODES: usize = 60;
const PREDICATES: usize = 8;
const VARS: [&str; 4] = ["a", "b", "c", "d"];

fn node(i: usize) -> Term {
    Term::sps(&format!("n{i}"))
}

fn predicate(i: usize) -> Term {
    if i == 0 {
        rdf_type()
    } else {
        Term::sps(&format!("p{i}"))
    }
}

fn object(i: usize) -> Term {
    match i % 5 {
        4 => Term::string(format!("v{}", i % 7)),
        _ => node(i % NODES),
    }
}

fn triple() -> impl Strategy<Value = Triple> {
    (0..NODES, 0..PREDICATES, 0..NODES * 2)
        .prop_map(|(s, p, o)| Triple::new(node(s), predicate(p), object(o)).unwrap())
}

pub fn graph(max: usize) -> impl Strategy<Value = Graph> {
    proptest::collection::vec(triple(), 0..=max).prop_map(|ts| ts.iter().collect())
}

#[derive(Debug, Clone)]
enum Slot {
    Var(usize),
    Const(usize),
}

fn slot() -> impl Strategy<Value = Slot> {
    prop_oneof![(0..VARS.len()).prop_map(Slot::Var), (0..NODES * 2).prop_map(Slot::Const)]
}

/// 1 to 3 patterns. Each has at most two variables and every pattern
/// after the first shares a variable with an earlier one, which keeps
/// intermediate results small enough for the brute-force evaluator.
pub fn query() -> impl Strategy<Value = Vec<TriplePattern>> {
    proptest::collection::vec((slot(), (0..PREDICATES, any::<bool>()), slot()), 1..=3).prop_map(|raw| {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut out = Vec::new();
        for (i, (mut s, (p, pvar), o)) in raw.into_iter().enumerate() {
            let shares = [&s, &o].into_iter().any(|x| matches!(x, Slot::Var(v) if seen.contains(v)));
            if let (false, Some(&v)) = (shares || i == 0, seen.iter().next()) {
                s = Slot::Var(v);
            }
            let used: Vec<usize> = [&s, &o]
                .into_iter()
                .filter_map(|x| match x {
                    Slot::Var(v) => Some(*v),
                    Slot::Const(_) => None,
                })
                .collect();
            let p_term = match (pvar && used.len() < 2).then(|| (0..VARS.len()).find(|v| !used.contains(v))) {
                Some(Some(v)) => {
                    seen.insert(v);
                    Term::var(VARS[v])
                }
                _ => predicate(p),
            };
            seen.extend(used);
            let s_term = match s {
                Slot::Var(v) => Term::var(VARS[v]),
                Slot::Const(c) => node(c % NODES),
            };
            let o_term = match o {
                Slot::Var(v) => Term::var(VARS[v]),
                Slot::Const(c) => object(c),
            };
            out.push(TriplePattern::new(s_term, p_term, o_term));
        }
        out
    })
}

fn unify(b: &mut Binding, pat: &Term, val: &Term) -> bool {
    match pat {
        Term::Variable(v) => match b.get(v) {
            Some(bound) => bound == val,
            None => {
                b.insert(v.clone(), val.clone());
                true
            }
        },
        t => t == val,
    }
}

/// Tries every triple against every pattern in turn.
pub fn naive_bgp(graph: &Graph, patterns: &[TriplePattern]) -> BTreeSet<Binding> {
    let triples: Vec<Triple> = graph.iter().collect();
    let mut rows = vec![Binding::new()];
    for p in patterns {
        let mut next = Vec::new();
        for row in &rows {
            for t in &triples {
                let mut b = row.clone();
                if unify(&mut b, &p.s, &t.s) && unify(&mut b, &p.p, &t.p) && unify(&mut b, &p.o, &t.o) {
                    next.push(b);
                }
            }
        }
        rows = next;
    }
    rows.into_iter().collect()
}

fn reach(edges: &BTreeSet<(Term, Term)>, from: &Term) -> BTreeSet<Term> {
    let mut adj: BTreeMap<&Term, Vec<&Term>> = BTreeMap::new();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
    }
    let mut seen = BTreeSet::new();
    let mut q = VecDeque::from([from]);
    while let Some(n) = q.pop_front() {
        for m in adj.get(n).into_iter().flatten() {
            if seen.insert((*m).clone()) {
                q.push_back(m);
            }
        }
    }
    seen
}

/// Closure by per-triple breadth-first reachability over both hierarchies.
/// Assumes rdf:type has no super-properties.
pub fn naive_closure(graph: &Graph, schema: &OntologySchema) -> Graph {
    let ty = rdf_type();
    let mut out = graph.clone();
    for t in graph.iter() {
        let mut props = reach(&schema.sub_property, &t.p);
        props.insert(t.p.clone());
        for p in &props {
            out.insert(&Triple::new(t.s.clone(), p.clone(), t.o.clone()).unwrap());
            if *p == ty {
                for c in reach(&schema.sub_class, &t.o) {
                    out.insert(&Triple::new(t.s.clone(), ty.clone(), c).unwrap());
                }
            }
        }
    }
    out
}

/// Random DAG over up to 50 classes (edges only go to higher indices),
/// plus a small property DAG.
pub fn acyclic_schema() -> impl Strategy<Value = OntologySchema> {
    (2usize..=50)
        .prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec((0..n, 0..n), 0..n * 2),
                proptest::collection::vec((1..PREDICATES, 1..PREDICATES), 0..6),
            )
        })
        .prop_map(|(_, class_edges, prop_edges)| {
            let mut s = OntologySchema::new();
            for (a, b) in class_edges {
                if a < b {
                    s = s.with_class(node(a), node(b));
                }
            }
            for (a, b) in prop_edges {
                if a < b {
                    s = s.with_property(predicate(a), predicate(b));
                }
            }
            s
        })
}
