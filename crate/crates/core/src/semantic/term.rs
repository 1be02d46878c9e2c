use std::fmt;

pub const SPS: &str = "http://www.opengis.net/sps/2.0#";
pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Built-in prefix table; arbitrary prefix declarations are not supported.
pub const PREFIXES: [(&str, &str); 4] = [("sps", SPS), ("rdf", RDF), ("rdfs", RDFS), ("xsd", XSD)];

pub fn rdf_type() -> Term {
    Term::Iri(format!("{RDF}type"))
}

pub fn sub_class_of() -> Term {
    Term::Iri(format!("{RDFS}subClassOf"))
}

pub fn sub_property_of() -> Term {
    Term::Iri(format!("{RDFS}subPropertyOf"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Datatype {
    String,
    Decimal,
    DateTime,
}

impl Datatype {
    pub fn iri(self) -> String {
        let local = match self {
            Datatype::String => "string",
            Datatype::Decimal => "decimal",
            Datatype::DateTime => "dateTime",
        };
        format!("{XSD}{local}")
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        match iri.strip_prefix(XSD)? {
            "string" => Some(Datatype::String),
            "decimal" => Some(Datatype::Decimal),
            "dateTime" => Some(Datatype::DateTime),
            _ => None,
        }
    }
}

/// IRIs are held in expanded form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal { lexical: String, datatype: Datatype },
    Variable(String),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term::Iri(iri.into())
    }

    pub fn sps(local: &str) -> Self {
        Term::Iri(format!("{SPS}{local}"))
    }

    pub fn string(lex: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lex.into(),
            datatype: Datatype::String,
        }
    }

    pub fn decimal(lex: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lex.into(),
            datatype: Datatype::Decimal,
        }
    }

    pub fn date_time(lex: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lex.into(),
            datatype: Datatype::DateTime,
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Variable(name.into())
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            _ => None,
        }
    }

    pub fn lexical(&self) -> Option<&str> {
        match self {
            Term::Literal { lexical, .. } => Some(lexical),
            _ => None,
        }
    }

    /// Expands `prefix:local` against the built-in table.
    pub fn prefixed(token: &str) -> Option<Self> {
        let (p, local) = token.split_once(':')?;
        PREFIXES
            .iter()
            .find(|(name, _)| *name == p)
            .map(|(_, ns)| Term::Iri(format!("{ns}{local}")))
    }

    /// Shortest prefixed form, when one applies.
    pub fn compact(&self) -> String {
        match self {
            Term::Iri(iri) => PREFIXES
                .iter()
                .find_map(|(p, ns)| iri.strip_prefix(ns).map(|l| format!("{p}:{l}")))
                .unwrap_or_else(|| format!("<{iri}>")),
            other => other.to_string(),
        }
    }
}

fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// N-Triples form.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "<{i}>"),
            Term::Literal { lexical, datatype } => write!(f, "\"{}\"^^<{}>", escape_literal(lexical), datatype.iri()),
            Term::Variable(v) => write!(f, "?{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid triple: {0}")]
pub struct InvalidTriple(pub String);

/// A stored statement: IRI subject and predicate, no variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl Triple {
    pub fn new(s: Term, p: Term, o: Term) -> Result<Self, InvalidTriple> {
        if !s.is_iri() || !p.is_iri() {
            return Err(InvalidTriple(format!("subject and predicate must be IRIs: {s} {p}")));
        }
        if o.is_variable() {
            return Err(InvalidTriple(format!("variable {o} in stored triple")));
        }
        Ok(Triple { s, p, o })
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.s, self.p, self.o)
    }
}
