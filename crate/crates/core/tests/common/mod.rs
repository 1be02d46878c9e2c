#![allow(dead_code)]

pub mod generators;
pub mod semantic;

use sps_core::xml::SPS_NS;

/// Text of the first SPS-namespace element with this local name.
pub fn sps_text(xml: &str, local: &str) -> Option<String> {
    let doc = roxmltree::Document::parse(xml).ok()?;
    doc.descendants()
        .find(|n| n.is_element() && n.tag_name().name() == local && n.tag_name().namespace() == Some(SPS_NS))
        .map(|n| n.text().unwrap_or("").trim().to_string())
}

pub fn sps_count(xml: &str, local: &str) -> usize {
    let doc = roxmltree::Document::parse(xml).unwrap();
    doc.descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == local && n.tag_name().namespace() == Some(SPS_NS))
        .count()
}

pub fn exception_code(xml: &str) -> Option<String> {
    sps_core::service::parse_exception_report(xml).map(|(code, _, _)| code)
}

pub const REFERENCE: &str = sps_core::swe::fixtures::REFERENCE_VALUES;
