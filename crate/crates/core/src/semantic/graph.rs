use std::collections::{BTreeMap, BTreeSet};

use super::term::{Term, Triple};

type Index = BTreeMap<Term, BTreeMap<Term, BTreeSet<Term>>>;

fn index_insert(ix: &mut Index, a: &Term, b: &Term, c: &Term) -> bool {
    ix.entry(a.clone()).or_default().entry(b.clone()).or_default().insert(c.clone())
}

fn index_remove(ix: &mut Index, a: &Term, b: &Term, c: &Term) -> bool {
    let Some(inner) = ix.get_mut(a) else { return false };
    let Some(set) = inner.get_mut(b) else { return false };
    let removed = set.remove(c);
    if set.is_empty() {
        inner.remove(b);
        if inner.is_empty() {
            ix.remove(a);
        }
    }
    removed
}

/// A set of triples indexed by subject, predicate and object.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    spo: Index,
    pos: Index,
    osp: Index,
    len: usize,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Returns false if the triple was already present.
    pub fn insert(&mut self, t: &Triple) -> bool {
        if !index_insert(&mut self.spo, &t.s, &t.p, &t.o) {
            return false;
        }
        index_insert(&mut self.pos, &t.p, &t.o, &t.s);
        index_insert(&mut self.osp, &t.o, &t.s, &t.p);
        self.len += 1;
        true
    }

    pub fn remove(&mut self, t: &Triple) -> bool {
        if !index_remove(&mut self.spo, &t.s, &t.p, &t.o) {
            return false;
        }
        index_remove(&mut self.pos, &t.p, &t.o, &t.s);
        index_remove(&mut self.osp, &t.o, &t.s, &t.p);
        self.len -= 1;
        true
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.spo
            .get(&t.s)
            .and_then(|m| m.get(&t.p))
            .is_some_and(|set| set.contains(&t.o))
    }

    /// All triples in (s, p, o) order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().flat_map(|(s, m)| {
            m.iter().flat_map(move |(p, os)| {
                os.iter().map(move |o| Triple {
                    s: s.clone(),
                    p: p.clone(),
                    o: o.clone(),
                })
            })
        })
    }

    /// Triples matching the given positions; `None` is a wildcard.
    pub fn matching(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<Triple> {
        let mk = |s: &Term, p: &Term, o: &Term| Triple {
            s: s.clone(),
            p: p.clone(),
            o: o.clone(),
        };
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                let t = mk(s, p, o);
                if self.contains(&t) {
                    vec![t]
                } else {
                    vec![]
                }
            }
            (Some(s), Some(p), None) => self
                .spo
                .get(s)
                .and_then(|m| m.get(p))
                .map(|os| os.iter().map(|o| mk(s, p, o)).collect())
                .unwrap_or_default(),
            (Some(s), None, Some(o)) => self
                .osp
                .get(o)
                .and_then(|m| m.get(s))
                .map(|ps| ps.iter().map(|p| mk(s, p, o)).collect())
                .unwrap_or_default(),
            (None, Some(p), Some(o)) => self
                .pos
                .get(p)
                .and_then(|m| m.get(o))
                .map(|ss| ss.iter().map(|s| mk(s, p, o)).collect())
                .unwrap_or_default(),
            (Some(s), None, None) => self
                .spo
                .get(s)
                .map(|m| m.iter().flat_map(|(p, os)| os.iter().map(move |o| mk(s, p, o))).collect())
                .unwrap_or_default(),
            (None, Some(p), None) => self
                .pos
                .get(p)
                .map(|m| m.iter().flat_map(|(o, ss)| ss.iter().map(move |s| mk(s, p, o))).collect())
                .unwrap_or_default(),
            (None, None, Some(o)) => self
                .osp
                .get(o)
                .map(|m| m.iter().flat_map(|(s, ps)| ps.iter().map(move |p| mk(s, p, o))).collect())
                .unwrap_or_default(),
            (None, None, None) => self.iter().collect(),
        }
    }

    /// N-Triples-style dump, one sorted line per triple.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for t in self.iter() {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }
}

impl<'a> FromIterator<&'a Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = &'a Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        for t in iter {
            g.insert(t);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantic::term::rdf_type;

    fn t(s: &str, p: Term, o: &str) -> Triple {
        Triple::new(Term::sps(s), p, Term::sps(o)).unwrap()
    }

    #[test]
    fn set_semantics_and_indexes() {
        let mut g = Graph::new();
        assert!(g.insert(&t("a", rdf_type(), "Task")));
        assert!(!g.insert(&t("a", rdf_type(), "Task")));
        g.insert(&t("b", rdf_type(), "Task"));
        g.insert(&t("a", Term::sps("next"), "b"));
        assert_eq!(g.len(), 3);
        assert_eq!(g.matching(None, Some(&rdf_type()), Some(&Term::sps("Task"))).len(), 2);
        assert_eq!(g.matching(Some(&Term::sps("a")), None, None).len(), 2);
        assert_eq!(g.matching(Some(&Term::sps("a")), None, Some(&Term::sps("b"))).len(), 1);
        assert_eq!(g.matching(None, None, Some(&Term::sps("b"))).len(), 1);
        assert!(g.remove(&t("a", rdf_type(), "Task")));
        assert!(!g.remove(&t("a", rdf_type(), "Task")));
        assert_eq!(g.len(), 2);
        assert_eq!(g.matching(None, Some(&rdf_type()), None).len(), 1);
    }
}
