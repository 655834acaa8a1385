//! N-Triples codec: one triple per line, UTF-8, canonical ordering.

use super::model::{KnowHowGraph, RawTriple, RdfNode};
use super::rdf::{self, RdfError};

pub fn serialize(graph: &KnowHowGraph) -> String {
    let triples = rdf::graph_to_triples(graph);
    let mut out = String::new();
    for t in &triples {
        out.push_str(&rdf::render_node(&t.subject));
        out.push(' ');
        out.push('<');
        out.push_str(&t.predicate);
        out.push('>');
        out.push(' ');
        out.push_str(&rdf::render_node(&t.object));
        out.push_str(" .\n");
    }
    out
}

pub fn parse(bytes: &[u8]) -> Result<KnowHowGraph, RdfError> {
    let text = std::str::from_utf8(bytes).map_err(|_| RdfError::Encoding)?;
    let mut triples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        triples.push(parse_line(trimmed, line_no)?);
    }
    rdf::triples_to_graph(triples)
}

struct Cursor<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, message: impl Into<String>) -> RdfError {
        RdfError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn node(&mut self) -> Result<RdfNode, RdfError> {
        self.skip_ws();
        let mut chars = self.rest.chars();
        match chars.next() {
            Some('<') => self.iri().map(RdfNode::Iri),
            Some('_') => self.blank(),
            Some('"') => self.literal(),
            Some(other) => Err(self.error(format!("unexpected character {other:?}"))),
            None => Err(self.error("unexpected end of line")),
        }
    }

    fn iri(&mut self) -> Result<String, RdfError> {
        debug_assert!(self.rest.starts_with('<'));
        let body = &self.rest[1..];
        let end = body
            .find('>')
            .ok_or_else(|| self.error("unterminated IRI"))?;
        let iri = &body[..end];
        if iri.chars().any(|c| {
            c.is_ascii_control()
                || matches!(c, ' ' | '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        }) {
            return Err(self.error(format!("invalid character in IRI <{iri}>")));
        }
        self.rest = &body[end + 1..];
        Ok(iri.to_string())
    }

    fn blank(&mut self) -> Result<RdfNode, RdfError> {
        let body = self
            .rest
            .strip_prefix("_:")
            .ok_or_else(|| self.error("malformed blank node"))?;
        let end = body
            .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '-' || c == '.'))
            .unwrap_or(body.len());
        if end == 0 {
            return Err(self.error("empty blank node label"));
        }
        let label = body[..end].trim_end_matches('.');
        if label.is_empty() {
            return Err(self.error("empty blank node label"));
        }
        self.rest = &body[label.len()..];
        Ok(RdfNode::Blank(label.to_string()))
    }

    fn literal(&mut self) -> Result<RdfNode, RdfError> {
        debug_assert!(self.rest.starts_with('"'));
        let mut value = String::new();
        let mut chars = self.rest[1..].char_indices();
        let mut consumed = None;
        while let Some((i, ch)) = chars.next() {
            match ch {
                '"' => {
                    consumed = Some(i + 1 + 1); // opening quote + body + closing quote
                    break;
                }
                '\\' => {
                    let (_, esc) = chars
                        .next()
                        .ok_or_else(|| self.error("dangling escape in literal"))?;
                    match esc {
                        '"' => value.push('"'),
                        '\\' => value.push('\\'),
                        'n' => value.push('\n'),
                        'r' => value.push('\r'),
                        't' => value.push('\t'),
                        'b' => value.push('\u{8}'),
                        'f' => value.push('\u{c}'),
                        'u' | 'U' => {
                            let len = if esc == 'u' { 4 } else { 8 };
                            let mut code = String::new();
                            for _ in 0..len {
                                let (_, h) = chars
                                    .next()
                                    .ok_or_else(|| self.error("truncated \\u escape"))?;
                                code.push(h);
                            }
                            let cp = u32::from_str_radix(&code, 16)
                                .map_err(|_| self.error(format!("bad \\u escape {code:?}")))?;
                            value.push(char::from_u32(cp).ok_or_else(|| {
                                self.error(format!("invalid code point {cp:#x}"))
                            })?);
                        }
                        other => return Err(self.error(format!("unknown escape \\{other}"))),
                    }
                }
                c => value.push(c),
            }
        }
        let consumed = consumed.ok_or_else(|| self.error("unterminated literal"))?;
        self.rest = &self.rest[consumed..];

        let mut datatype = None;
        let mut language = None;
        if let Some(rest) = self.rest.strip_prefix("^^") {
            self.rest = rest;
            if !self.rest.starts_with('<') {
                return Err(self.error("datatype must be an IRI"));
            }
            datatype = Some(self.iri()?);
        } else if let Some(rest) = self.rest.strip_prefix('@') {
            let end = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                .unwrap_or(rest.len());
            if end == 0 {
                return Err(self.error("empty language tag"));
            }
            language = Some(rest[..end].to_string());
            self.rest = &rest[end..];
        }
        Ok(RdfNode::Literal {
            value,
            datatype,
            language,
        })
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<RawTriple, RdfError> {
    let mut cursor = Cursor {
        rest: line,
        line: line_no,
    };
    let subject = cursor.node()?;
    if matches!(subject, RdfNode::Literal { .. }) {
        return Err(cursor.error("literal cannot be a subject"));
    }
    cursor.skip_ws();
    if !cursor.rest.starts_with('<') {
        return Err(cursor.error("predicate must be an IRI"));
    }
    let predicate = cursor.iri()?;
    let object = cursor.node()?;
    cursor.skip_ws();
    if !cursor.rest.starts_with('.') {
        return Err(cursor.error("missing terminating '.'"));
    }
    cursor.rest = cursor.rest[1..].trim();
    if !cursor.rest.is_empty() && !cursor.rest.starts_with('#') {
        return Err(cursor.error("trailing content after '.'"));
    }
    Ok(RawTriple {
        subject,
        predicate,
        object,
    })
}
