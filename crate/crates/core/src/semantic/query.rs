use std::collections::{BTreeMap, BTreeSet};

use super::graph::Graph;
use super::term::{Datatype, Term, Triple};
use crate::xml::{XmlWriter, SPS_NS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed pattern: {0}")]
pub struct MalformedPattern(pub String);

/// A triple whose positions may be variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriplePattern {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl TriplePattern {
    pub fn new(s: Term, p: Term, o: Term) -> Self {
        TriplePattern { s, p, o }
    }

    fn terms(&self) -> [&Term; 3] {
        [&self.s, &self.p, &self.o]
    }
}

pub type Binding = BTreeMap<String, Term>;

fn check_patterns(patterns: &[TriplePattern]) -> Result<(), MalformedPattern> {
    if patterns.is_empty() {
        return Err(MalformedPattern("empty pattern list".into()));
    }
    for (i, p) in patterns.iter().enumerate() {
        for (pos, t) in [("subject", &p.s), ("predicate", &p.p)] {
            if matches!(t, Term::Literal { .. }) {
                return Err(MalformedPattern(format!("pattern {}: literal in {pos} position", i + 1)));
            }
        }
        for t in p.terms() {
            if let Term::Variable(v) = t {
                if v.is_empty() {
                    return Err(MalformedPattern(format!("pattern {}: unnamed variable", i + 1)));
                }
            }
        }
    }
    Ok(())
}

fn resolve<'a>(t: &'a Term, b: &'a Binding) -> Option<&'a Term> {
    match t {
        Term::Variable(v) => b.get(v),
        other => Some(other),
    }
}

/// Extends `b` so that `pattern` matches `triple`; `None` on conflict.
fn unify(pattern: &TriplePattern, triple: &Triple, b: &Binding) -> Option<Binding> {
    let mut out = b.clone();
    for (pt, tt) in pattern.terms().into_iter().zip([&triple.s, &triple.p, &triple.o]) {
        match pt {
            Term::Variable(v) => match out.get(v) {
                Some(bound) if bound != tt => return None,
                Some(_) => {}
                None => {
                    out.insert(v.clone(), tt.clone());
                }
            },
            c if c != tt => return None,
            _ => {}
        }
    }
    Some(out)
}

fn bound_count(p: &TriplePattern, vars: &BTreeSet<String>) -> usize {
    p.terms()
        .iter()
        .filter(|t| match t {
            Term::Variable(v) => vars.contains(v),
            _ => true,
        })
        .count()
}

/// All solutions of the conjunctive pattern, without duplicates.
pub fn query_bgp(graph: &Graph, patterns: &[TriplePattern]) -> Result<Vec<Binding>, MalformedPattern> {
    check_patterns(patterns)?;
    // Greedy order: next pattern is the one with most positions already bound.
    let mut remaining: Vec<&TriplePattern> = patterns.iter().collect();
    let mut ordered = Vec::with_capacity(remaining.len());
    let mut vars = BTreeSet::new();
    while !remaining.is_empty() {
        let (i, _) = remaining
            .iter()
            .enumerate()
            .max_by_key(|(i, p)| (bound_count(p, &vars), std::cmp::Reverse(*i)))
            .unwrap();
        let p = remaining.remove(i);
        for t in p.terms() {
            if let Term::Variable(v) = t {
                vars.insert(v.clone());
            }
        }
        ordered.push(p);
    }
    let mut solutions = vec![Binding::new()];
    for p in ordered {
        let mut next = Vec::new();
        for b in &solutions {
            let candidates = graph.matching(resolve(&p.s, b), resolve(&p.p, b), resolve(&p.o, b));
            next.extend(candidates.iter().filter_map(|t| unify(p, t, b)));
        }
        solutions = next;
        if solutions.is_empty() {
            break;
        }
    }
    let set: BTreeSet<Binding> = solutions.into_iter().collect();
    Ok(set.into_iter().collect())
}

fn parse_term(tok: &str, line: usize) -> Result<Term, MalformedPattern> {
    let err = |m: &str| MalformedPattern(format!("line {line}: {m} '{tok}'"));
    if let Some(v) = tok.strip_prefix('?') {
        if v.is_empty() || !v.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(err("bad variable"));
        }
        return Ok(Term::Variable(v.to_string()));
    }
    if let Some(iri) = tok.strip_prefix('<') {
        return iri
            .strip_suffix('>')
            .filter(|i| !i.is_empty())
            .map(Term::iri)
            .ok_or_else(|| err("bad IRI"));
    }
    if let Some(rest) = tok.strip_prefix('"') {
        let (lex, dt) = match rest.rsplit_once("\"^^") {
            Some((lex, dt)) => (lex, Some(dt)),
            None => (rest.strip_suffix('"').ok_or_else(|| err("unterminated literal"))?, None),
        };
        let datatype = match dt {
            None => Datatype::String,
            Some(d) => {
                let iri = match d.strip_prefix('<').and_then(|x| x.strip_suffix('>')) {
                    Some(full) => full.to_string(),
                    None => Term::prefixed(d)
                        .and_then(|t| t.as_iri().map(str::to_string))
                        .ok_or_else(|| err("unknown datatype"))?,
                };
                Datatype::from_iri(&iri).ok_or_else(|| err("unsupported datatype"))?
            }
        };
        let lexical = lex.replace("\\\"", "\"").replace("\\n", "\n").replace("\\\\", "\\");
        return Ok(Term::Literal { lexical, datatype });
    }
    if tok == "a" {
        return Ok(super::term::rdf_type());
    }
    Term::prefixed(tok).ok_or_else(|| err("unknown prefix or token"))
}

/// Splits a line into whitespace-separated tokens, keeping quoted literals
/// (which may contain spaces) whole.
fn tokenize(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_lit = false;
    let mut escaped = false;
    for c in line.chars() {
        if in_lit {
            cur.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_lit = false;
            }
        } else if c.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            if c == '"' {
                in_lit = true;
            }
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Parses the text form: one `s p o .` pattern per non-empty line.
pub fn parse_bgp(text: &str) -> Result<Vec<TriplePattern>, MalformedPattern> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = tokenize(line);
        if toks.last().map(String::as_str) == Some(".") {
            toks.pop();
        } else if let Some(last) = toks.last_mut() {
            if last.ends_with('.') && !last.ends_with("\\.") && !last.ends_with('"') {
                last.pop();
            }
        }
        if toks.len() != 3 {
            return Err(MalformedPattern(format!("line {}: expected 3 terms, found {}", i + 1, toks.len())));
        }
        out.push(TriplePattern::new(
            parse_term(&toks[0], i + 1)?,
            parse_term(&toks[1], i + 1)?,
            parse_term(&toks[2], i + 1)?,
        ));
    }
    check_patterns(&out)?;
    Ok(out)
}

/// Bindings as an XML table, variables in sorted order.
pub fn bindings_to_xml(bindings: &[Binding], patterns: &[TriplePattern]) -> String {
    let vars: BTreeSet<&str> = patterns
        .iter()
        .flat_map(|p| p.terms())
        .filter_map(|t| match t {
            Term::Variable(v) => Some(v.as_str()),
            _ => None,
        })
        .collect();
    let mut w = XmlWriter::new();
    w.start("sps:QueryResult")
        .attr("xmlns:sps", SPS_NS)
        .attr("count", &bindings.len().to_string());
    w.start("sps:variables");
    for v in &vars {
        w.leaf("sps:variable", v);
    }
    w.end();
    for b in bindings {
        w.start("sps:row");
        for v in &vars {
            if let Some(t) = b.get(*v) {
                w.start("sps:binding").attr("name", v).text(&t.to_string()).end();
            }
        }
        w.end();
    }
    w.end();
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantic::term::rdf_type;

    fn graph() -> Graph {
        let mut g = Graph::new();
        for (task, status) in [("task_1", "Completed"), ("task_2", "InExecution"), ("task_3", "Completed")] {
            g.insert(&Triple::new(Term::sps(task), rdf_type(), Term::sps("Task")).unwrap());
            g.insert(&Triple::new(Term::sps(task), Term::sps("status"), Term::string(status)).unwrap());
        }
        g
    }

    #[test]
    fn type_scan_and_join() {
        let g = graph();
        let q = parse_bgp("?t rdf:type sps:Task .").unwrap();
        assert_eq!(query_bgp(&g, &q).unwrap().len(), 3);
        let q = parse_bgp("?t rdf:type sps:Task .\n?t sps:status \"Completed\"^^xsd:string .").unwrap();
        let r = query_bgp(&g, &q).unwrap();
        let ids: Vec<_> = r.iter().map(|b| b["t"].compact()).collect();
        assert_eq!(ids, vec!["sps:task_1", "sps:task_3"]);
    }

    #[test]
    fn unbound_predicate_enumerates() {
        let g = graph();
        let q = parse_bgp("sps:task_2 ?p ?o .").unwrap();
        assert_eq!(query_bgp(&g, &q).unwrap().len(), 2);
    }

    #[test]
    fn repeated_variable_in_one_pattern() {
        let mut g = graph();
        g.insert(&Triple::new(Term::sps("x"), Term::sps("knows"), Term::sps("x")).unwrap());
        g.insert(&Triple::new(Term::sps("x"), Term::sps("knows"), Term::sps("y")).unwrap());
        let q = parse_bgp("?a sps:knows ?a").unwrap();
        assert_eq!(query_bgp(&g, &q).unwrap().len(), 1);
    }

    #[test]
    fn malformed() {
        assert!(parse_bgp("").is_err());
        assert!(parse_bgp("?t rdf:type").is_err());
        assert!(parse_bgp("?t w:rain ?x .").is_err());
        assert!(parse_bgp("\"lit\" rdf:type ?x .").is_err());
        assert!(query_bgp(&Graph::new(), &[]).is_err());
    }

    #[test]
    fn literal_with_spaces_and_full_iris() {
        let q = parse_bgp("<urn:a> <urn:b> \"two words\" .").unwrap();
        assert_eq!(q[0].o, Term::string("two words"));
        assert_eq!(q[0].s, Term::iri("urn:a"));
    }
}
