//! Small XML toolkit shared by the codec, the service documents and the CLI.
//!
//! Parsing goes through `roxmltree`; writing goes through [`XmlWriter`], a
//! forward-only builder that indents element-only content and leaves text
//! content untouched.

use quick_xml::escape::escape;
use roxmltree::{Document, Node};

pub const SPS_NS: &str = "http://www.opengis.net/sps/2.0";
pub const SWE_NS: &str = "http://www.opengis.net/swe/2.0";
pub const OWS_NS: &str = "http://www.opengis.net/ows/1.1";
pub const WSTOP_NS: &str = "http://docs.oasis-open.org/wsn/t-1";

pub const XML_DECL: &str = r#"<?xml version="1.0" encoding="UTF-8"?>"#;

#[derive(Debug)]
struct Open {
    name: String,
    has_children: bool,
    has_text: bool,
}

/// Forward-only XML builder.
#[derive(Debug)]
pub struct XmlWriter {
    buf: String,
    stack: Vec<Open>,
    tag_open: bool,
}

impl Default for XmlWriter {
    fn default() -> Self {
        Self::new()
    }
}

impl XmlWriter {
    pub fn new() -> Self {
        XmlWriter {
            buf: String::from(XML_DECL),
            stack: Vec::new(),
            tag_open: false,
        }
    }

    /// A writer without the XML declaration, for fragments.
    pub fn fragment() -> Self {
        XmlWriter {
            buf: String::new(),
            stack: Vec::new(),
            tag_open: false,
        }
    }

    fn close_start_tag(&mut self) {
        if self.tag_open {
            self.buf.push('>');
            self.tag_open = false;
        }
    }

    fn newline(&mut self, depth: usize) {
        if !self.buf.is_empty() {
            self.buf.push('\n');
        }
        for _ in 0..depth {
            self.buf.push_str("  ");
        }
    }

    pub fn start(&mut self, name: &str) -> &mut Self {
        self.close_start_tag();
        let depth = self.stack.len();
        if let Some(parent) = self.stack.last_mut() {
            parent.has_children = true;
        }
        self.newline(depth);
        self.buf.push('<');
        self.buf.push_str(name);
        self.stack.push(Open {
            name: name.to_string(),
            has_children: false,
            has_text: false,
        });
        self.tag_open = true;
        self
    }

    pub fn attr(&mut self, key: &str, value: &str) -> &mut Self {
        debug_assert!(self.tag_open, "attribute written outside a start tag");
        self.buf.push(' ');
        self.buf.push_str(key);
        self.buf.push_str("=\"");
        self.buf.push_str(&escape(value));
        self.buf.push('"');
        self
    }

    pub fn text(&mut self, text: &str) -> &mut Self {
        self.close_start_tag();
        if let Some(top) = self.stack.last_mut() {
            top.has_text = true;
        }
        self.buf.push_str(&escape(text));
        self
    }

    /// Inserts an already serialized fragment as child content.
    pub fn raw(&mut self, fragment: &str) -> &mut Self {
        self.close_start_tag();
        let depth = self.stack.len();
        if let Some(top) = self.stack.last_mut() {
            top.has_children = true;
        }
        for line in fragment.lines() {
            self.newline(depth);
            self.buf.push_str(line);
        }
        self
    }

    pub fn end(&mut self) -> &mut Self {
        let open = self.stack.pop().expect("end() without matching start()");
        if self.tag_open {
            self.buf.push_str("/>");
            self.tag_open = false;
            return self;
        }
        if open.has_children && !open.has_text {
            let depth = self.stack.len();
            self.newline(depth);
        }
        self.buf.push_str("</");
        self.buf.push_str(&open.name);
        self.buf.push('>');
        self
    }

    /// `<name>text</name>`
    pub fn leaf(&mut self, name: &str, text: &str) -> &mut Self {
        self.start(name);
        self.text(text);
        self.end()
    }

    pub fn finish(mut self) -> String {
        while !self.stack.is_empty() {
            self.end();
        }
        self.buf.push('\n');
        self.buf
    }
}

/// Converts a roxmltree row/column position into a byte offset of `text`.
pub fn byte_offset(text: &str, pos: roxmltree::TextPos) -> usize {
    let mut offset = 0usize;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if i + 1 == pos.row as usize {
            let col = pos.col.saturating_sub(1) as usize;
            return offset
                + line
                    .char_indices()
                    .nth(col)
                    .map(|(b, _)| b)
                    .unwrap_or(line.len());
        }
        offset += line.len();
    }
    text.len()
}

pub fn parse(text: &str) -> Result<Document<'_>, (usize, String)> {
    Document::parse(text).map_err(|e| (byte_offset(text, e.pos()), e.to_string()))
}

pub fn is_sps(node: &Node, local: &str) -> bool {
    node.is_element() && node.tag_name().name() == local && node.tag_name().namespace() == Some(SPS_NS)
}

pub fn sps_child<'a, 'input>(node: &Node<'a, 'input>, local: &str) -> Option<Node<'a, 'input>> {
    node.children().find(|c| is_sps(c, local))
}

pub fn sps_children<'a, 'input>(
    node: &Node<'a, 'input>,
    local: &'static str,
) -> impl Iterator<Item = Node<'a, 'input>> {
    node.children().filter(move |c| is_sps(c, local))
}

/// Concatenated text content of `node`, without trimming.
pub fn text_of(node: &Node) -> String {
    node.descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect()
}

/// Text of an `sps:` child, trimmed; identifiers never carry whitespace.
pub fn sps_child_text(node: &Node, local: &str) -> Option<String> {
    sps_child(node, local).map(|c| text_of(&c).trim().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writer_nests_and_escapes() {
        let mut w = XmlWriter::fragment();
        w.start("a").attr("k", "x<y");
        w.leaf("b", "1 & 2");
        w.start("c").end();
        w.end();
        assert_eq!(w.finish(), "<a k=\"x&lt;y\">\n  <b>1 &amp; 2</b>\n  <c/>\n</a>\n");
    }

    #[test]
    fn byte_offset_counts_lines() {
        let text = "<a>\n<b></a>";
        let (off, _) = parse(text).unwrap_err();
        assert!(off > 4 && off <= text.len(), "offset {off}");
    }
}
