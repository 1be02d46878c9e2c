use std::fmt;

use crate::task::EncodedParameters;
use crate::xml::{XmlWriter, OWS_NS, SPS_NS};

/// The closed set of error codes a response can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExceptionCode {
    OperationNotSupported,
    InvalidRequest,
    InvalidParameterValue,
    ValidationFailure,
    FeasibilityIdNotReusable,
    CapacityExhausted,
    UnknownTask,
    UnknownRequest,
    IllegalTransition,
    UpdateNotFeasible,
    UnknownTopic,
    UnknownSubscription,
    MalformedPattern,
}

impl ExceptionCode {
    pub const ALL: [ExceptionCode; 13] = [
        ExceptionCode::OperationNotSupported,
        ExceptionCode::InvalidRequest,
        ExceptionCode::InvalidParameterValue,
        ExceptionCode::ValidationFailure,
        ExceptionCode::FeasibilityIdNotReusable,
        ExceptionCode::CapacityExhausted,
        ExceptionCode::UnknownTask,
        ExceptionCode::UnknownRequest,
        ExceptionCode::IllegalTransition,
        ExceptionCode::UpdateNotFeasible,
        ExceptionCode::UnknownTopic,
        ExceptionCode::UnknownSubscription,
        ExceptionCode::MalformedPattern,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExceptionCode::OperationNotSupported => "OperationNotSupported",
            ExceptionCode::InvalidRequest => "InvalidRequest",
            ExceptionCode::InvalidParameterValue => "InvalidParameterValue",
            ExceptionCode::ValidationFailure => "ValidationFailure",
            ExceptionCode::FeasibilityIdNotReusable => "FeasibilityIdNotReusable",
            ExceptionCode::CapacityExhausted => "CapacityExhausted",
            ExceptionCode::UnknownTask => "UnknownTask",
            ExceptionCode::UnknownRequest => "UnknownRequest",
            ExceptionCode::IllegalTransition => "IllegalTransition",
            ExceptionCode::UpdateNotFeasible => "UpdateNotFeasible",
            ExceptionCode::UnknownTopic => "UnknownTopic",
            ExceptionCode::UnknownSubscription => "UnknownSubscription",
            ExceptionCode::MalformedPattern => "MalformedPattern",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    pub fn http_status(self) -> u16 {
        match self {
            ExceptionCode::UnknownTask | ExceptionCode::UnknownRequest | ExceptionCode::UnknownSubscription => 404,
            ExceptionCode::IllegalTransition | ExceptionCode::UpdateNotFeasible | ExceptionCode::CapacityExhausted => 409,
            _ => 400,
        }
    }
}

impl fmt::Display for ExceptionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An error response: one code, an optional locator, one or more lines of
/// text, and alternatives where the code admits them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceException {
    pub code: ExceptionCode,
    pub locator: Option<String>,
    pub texts: Vec<String>,
    pub alternatives: Vec<EncodedParameters>,
}

impl ServiceException {
    pub fn new(code: ExceptionCode, text: impl Into<String>) -> Self {
        ServiceException {
            code,
            locator: None,
            texts: vec![text.into()],
            alternatives: Vec::new(),
        }
    }

    pub fn at(mut self, locator: impl Into<String>) -> Self {
        self.locator = Some(locator.into());
        self
    }

    pub fn with_texts(mut self, texts: Vec<String>) -> Self {
        self.texts = texts;
        self
    }

    pub fn with_alternatives(mut self, alternatives: Vec<EncodedParameters>) -> Self {
        self.alternatives = alternatives;
        self
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        w.start("ows:ExceptionReport")
            .attr("xmlns:ows", OWS_NS)
            .attr("xmlns:sps", SPS_NS)
            .attr("version", "2.0");
        w.start("ows:Exception").attr("exceptionCode", self.code.as_str());
        if let Some(l) = &self.locator {
            w.attr("locator", l);
        }
        for t in &self.texts {
            w.leaf("ows:ExceptionText", t);
        }
        if !self.alternatives.is_empty() {
            w.start("sps:alternatives");
            for a in &self.alternatives {
                crate::swe::write_encoded_values(&mut w, &a.encoding, &a.values);
            }
            w.end();
        }
        w.end();
        w.end();
        w.finish()
    }
}

impl fmt::Display for ServiceException {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)?;
        if let Some(l) = &self.locator {
            write!(f, " at {l}")?;
        }
        write!(f, ": {}", self.texts.join("; "))
    }
}

impl std::error::Error for ServiceException {}

/// Code, locator and texts read back from an exception report.
pub fn parse_exception_report(xml: &str) -> Option<(String, Option<String>, Vec<String>)> {
    let doc = roxmltree::Document::parse(xml).ok()?;
    let root = doc.root_element();
    if root.tag_name().name() != "ExceptionReport" || root.tag_name().namespace() != Some(OWS_NS) {
        return None;
    }
    let e = root
        .children()
        .find(|n| n.is_element() && n.tag_name().name() == "Exception")?;
    let texts = e
        .children()
        .filter(|n| n.is_element() && n.tag_name().name() == "ExceptionText")
        .map(|n| crate::xml::text_of(&n))
        .collect();
    Some((
        e.attribute("exceptionCode")?.to_string(),
        e.attribute("locator").map(str::to_string),
        texts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trip() {
        let x = ServiceException::new(ExceptionCode::InvalidRequest, "bad <xml>").at("12");
        let (code, loc, texts) = parse_exception_report(&x.to_xml()).unwrap();
        assert_eq!(code, "InvalidRequest");
        assert_eq!(loc.as_deref(), Some("12"));
        assert_eq!(texts, vec!["bad <xml>"]);
    }

    #[test]
    fn codes_parse_and_map_to_status() {
        for c in ExceptionCode::ALL {
            assert_eq!(ExceptionCode::parse(c.as_str()), Some(c));
            assert!([400, 404, 409].contains(&c.http_status()));
        }
    }
}
