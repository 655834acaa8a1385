//! Turtle codec. Output is grouped by subject with a fixed prefix table and
//! fully deterministic ordering; the parser accepts the subset of Turtle we
//! emit plus prefixed names, blank nodes, and language-tagged literals from
//! foreign files.

use std::collections::BTreeMap;

use super::model::{KnowHowGraph, RawTriple, RdfNode};
use super::rdf::{self, RdfError};
use super::vocab;

fn prefixed(iri: &str) -> Option<String> {
    for (prefix, ns) in vocab::TURTLE_PREFIXES {
        if let Some(local) = iri.strip_prefix(ns) {
            let mut chars = local.chars();
            let head_ok = chars
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
            if head_ok && local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Some(format!("{prefix}:{local}"));
            }
        }
    }
    None
}

fn render_term(node: &RdfNode) -> String {
    match node {
        RdfNode::Iri(iri) => prefixed(iri).unwrap_or_else(|| format!("<{iri}>")),
        RdfNode::Blank(label) => format!("_:{label}"),
        RdfNode::Literal {
            value,
            datatype,
            language,
        } => {
            let plain = rdf::render_node(&RdfNode::Literal {
                value: value.clone(),
                datatype: None,
                language: None,
            });
            match (language, datatype) {
                (Some(lang), _) => format!("{plain}@{lang}"),
                (None, Some(dt)) => {
                    let dt_term = prefixed(dt).unwrap_or_else(|| format!("<{dt}>"));
                    format!("{plain}^^{dt_term}")
                }
                (None, None) => plain,
            }
        }
    }
}

fn render_predicate(iri: &str) -> String {
    if iri == vocab::RDF_TYPE {
        "a".to_string()
    } else {
        prefixed(iri).unwrap_or_else(|| format!("<{iri}>"))
    }
}

pub fn serialize(graph: &KnowHowGraph) -> String {
    let triples = rdf::graph_to_triples(graph);
    let mut out = String::new();
    for (prefix, ns) in vocab::TURTLE_PREFIXES {
        out.push_str(&format!("@prefix {prefix}: <{ns}> .\n"));
    }

    // Group by subject, keeping the canonical order of graph_to_triples.
    // rdf:type is listed first within a subject block.
    let mut by_subject: BTreeMap<String, Vec<&RawTriple>> = BTreeMap::new();
    for t in &triples {
        by_subject
            .entry(rdf::render_node(&t.subject))
            .or_default()
            .push(t);
    }

    for (_, group) in by_subject {
        out.push('\n');
        let subject = render_subject(&group[0].subject);
        let mut predicates: BTreeMap<(u8, String), Vec<String>> = BTreeMap::new();
        for t in &group {
            let rank = u8::from(t.predicate != vocab::RDF_TYPE);
            predicates
                .entry((rank, t.predicate.clone()))
                .or_default()
                .push(render_term(&t.object));
        }
        out.push_str(&subject);
        let mut first = true;
        for ((_, predicate), objects) in predicates {
            if first {
                out.push(' ');
                first = false;
            } else {
                out.push_str(" ;\n    ");
            }
            out.push_str(&render_predicate(&predicate));
            out.push(' ');
            out.push_str(&objects.join(" , "));
        }
        out.push_str(" .\n");
    }
    out
}

fn render_subject(node: &RdfNode) -> String {
    match node {
        RdfNode::Iri(iri) => format!("<{iri}>"),
        RdfNode::Blank(label) => format!("_:{label}"),
        RdfNode::Literal { .. } => unreachable!("literal subjects are rejected on input"),
    }
}

pub fn parse(bytes: &[u8]) -> Result<KnowHowGraph, RdfError> {
    let text = std::str::from_utf8(bytes).map_err(|_| RdfError::Encoding)?;
    let tokens = tokenize(text)?;
    let triples = parse_tokens(tokens)?;
    rdf::triples_to_graph(triples)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    PrefixDirective,
    Iri(String),
    PrefixedName(String, String),
    PrefixDecl(String), // "ns:" in a @prefix line
    Blank(String),
    Literal {
        value: String,
        datatype_raw: Option<DatatypeRef>,
        language: Option<String>,
    },
    A,
    Semicolon,
    Comma,
    Dot,
}

#[derive(Debug, Clone, PartialEq)]
enum DatatypeRef {
    Iri(String),
    Prefixed(String, String),
}

fn syntax(line: usize, message: impl Into<String>) -> RdfError {
    RdfError::Syntax {
        line,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, RdfError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut line = 1;
    while let Some(&(_, ch)) = chars.peek() {
        match ch {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '#' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '<' => {
                chars.next();
                let mut iri = String::new();
                let mut closed = false;
                for (_, c) in chars.by_ref() {
                    if c == '>' {
                        closed = true;
                        break;
                    }
                    iri.push(c);
                }
                if !closed {
                    return Err(syntax(line, "unterminated IRI"));
                }
                tokens.push((Token::Iri(iri), line));
            }
            '"' => {
                chars.next();
                let mut value = String::new();
                let mut closed = false;
                while let Some((_, c)) = chars.next() {
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\n' => return Err(syntax(line, "newline inside literal")),
                        '\\' => {
                            let (_, esc) = chars
                                .next()
                                .ok_or_else(|| syntax(line, "dangling escape"))?;
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
                                            .ok_or_else(|| syntax(line, "truncated \\u escape"))?;
                                        code.push(h);
                                    }
                                    let cp = u32::from_str_radix(&code, 16).map_err(|_| {
                                        syntax(line, format!("bad escape {code:?}"))
                                    })?;
                                    value.push(char::from_u32(cp).ok_or_else(|| {
                                        syntax(line, format!("invalid code point {cp:#x}"))
                                    })?);
                                }
                                other => {
                                    return Err(syntax(line, format!("unknown escape \\{other}")))
                                }
                            }
                        }
                        c => value.push(c),
                    }
                }
                if !closed {
                    return Err(syntax(line, "unterminated literal"));
                }
                // Optional datatype or language tag.
                let mut datatype_raw = None;
                let mut language = None;
                if let Some(&(_, '^')) = chars.peek() {
                    chars.next();
                    match chars.next() {
                        Some((_, '^')) => {}
                        _ => return Err(syntax(line, "expected ^^ before datatype")),
                    }
                    match chars.peek() {
                        Some(&(_, '<')) => {
                            chars.next();
                            let mut iri = String::new();
                            let mut closed = false;
                            for (_, c) in chars.by_ref() {
                                if c == '>' {
                                    closed = true;
                                    break;
                                }
                                iri.push(c);
                            }
                            if !closed {
                                return Err(syntax(line, "unterminated datatype IRI"));
                            }
                            datatype_raw = Some(DatatypeRef::Iri(iri));
                        }
                        Some(_) => {
                            let word = read_word(&mut chars);
                            let (prefix, local) = split_pname(&word)
                                .ok_or_else(|| syntax(line, format!("bad datatype {word:?}")))?;
                            datatype_raw = Some(DatatypeRef::Prefixed(prefix, local));
                        }
                        None => return Err(syntax(line, "missing datatype")),
                    }
                } else if let Some(&(_, '@')) = chars.peek() {
                    chars.next();
                    let mut tag = String::new();
                    while let Some(&(_, c)) = chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '-' {
                            tag.push(c);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    if tag.is_empty() {
                        return Err(syntax(line, "empty language tag"));
                    }
                    language = Some(tag);
                }
                tokens.push((
                    Token::Literal {
                        value,
                        datatype_raw,
                        language,
                    },
                    line,
                ));
            }
            ';' => {
                chars.next();
                tokens.push((Token::Semicolon, line));
            }
            ',' => {
                chars.next();
                tokens.push((Token::Comma, line));
            }
            '.' => {
                chars.next();
                tokens.push((Token::Dot, line));
            }
            '_' => {
                let word = read_word(&mut chars);
                let label = word
                    .strip_prefix("_:")
                    .ok_or_else(|| syntax(line, format!("bad blank node {word:?}")))?;
                if label.is_empty() {
                    return Err(syntax(line, "empty blank node label"));
                }
                tokens.push((Token::Blank(label.to_string()), line));
            }
            '@' => {
                let word = read_word(&mut chars);
                if word == "@prefix" {
                    tokens.push((Token::PrefixDirective, line));
                } else {
                    return Err(syntax(line, format!("unsupported directive {word:?}")));
                }
            }
            _ => {
                let word = read_word(&mut chars);
                if word == "a" {
                    tokens.push((Token::A, line));
                } else if let Some(ns) = word.strip_suffix(':') {
                    if !ns.contains(':') {
                        tokens.push((Token::PrefixDecl(ns.to_string()), line));
                        continue;
                    }
                    let (prefix, local) = split_pname(&word)
                        .ok_or_else(|| syntax(line, format!("cannot parse token {word:?}")))?;
                    tokens.push((Token::PrefixedName(prefix, local), line));
                } else if let Some((prefix, local)) = split_pname(&word) {
                    tokens.push((Token::PrefixedName(prefix, local), line));
                } else {
                    return Err(syntax(line, format!("cannot parse token {word:?}")));
                }
            }
        }
    }
    Ok(tokens)
}

fn read_word(chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>) -> String {
    let mut word = String::new();
    while let Some(&(_, c)) = chars.peek() {
        if c.is_whitespace() || matches!(c, ';' | ',' | '<' | '"' | '#') {
            break;
        }
        // A '.' ends the word unless it is interior (pname locals may
        // contain dots, e.g. ns:a.b, but a trailing '.' is the terminator).
        if c == '.' {
            let mut ahead = chars.clone();
            ahead.next();
            match ahead.peek() {
                Some(&(_, n)) if !n.is_whitespace() && n != ';' && n != ',' && n != '#' => {}
                _ => break,
            }
        }
        word.push(c);
        chars.next();
    }
    word
}

fn split_pname(word: &str) -> Option<(String, String)> {
    let colon = word.find(':')?;
    let prefix = &word[..colon];
    let local = &word[colon + 1..];
    if prefix
        .chars()
        .any(|c| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
    {
        return None;
    }
    if local.is_empty()
        || local
            .chars()
            .any(|c| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '%')))
    {
        return None;
    }
    Some((prefix.to_string(), local.to_string()))
}

fn parse_tokens(tokens: Vec<(Token, usize)>) -> Result<Vec<RawTriple>, RdfError> {
    let mut prefixes: BTreeMap<String, String> = BTreeMap::new();
    let mut triples = Vec::new();
    let mut i = 0;

    let resolve = |prefixes: &BTreeMap<String, String>, prefix: &str, local: &str, line: usize| {
        prefixes
            .get(prefix)
            .map(|ns| format!("{ns}{local}"))
            .ok_or_else(|| syntax(line, format!("undeclared prefix {prefix:?}")))
    };

    while i < tokens.len() {
        let (token, line) = &tokens[i];
        let line = *line;
        match token {
            Token::PrefixDirective => {
                let ns = match tokens.get(i + 1) {
                    Some((Token::PrefixDecl(ns), _)) => ns.clone(),
                    _ => return Err(syntax(line, "@prefix expects a prefix declaration")),
                };
                let iri = match tokens.get(i + 2) {
                    Some((Token::Iri(iri), _)) => iri.clone(),
                    _ => return Err(syntax(line, "@prefix expects an IRI")),
                };
                match tokens.get(i + 3) {
                    Some((Token::Dot, _)) => {}
                    _ => return Err(syntax(line, "@prefix missing terminating '.'")),
                }
                prefixes.insert(ns, iri);
                i += 4;
            }
            _ => {
                // subject
                let subject = match token {
                    Token::Iri(iri) => RdfNode::Iri(iri.clone()),
                    Token::PrefixedName(p, l) => RdfNode::Iri(resolve(&prefixes, p, l, line)?),
                    Token::Blank(label) => RdfNode::Blank(label.clone()),
                    other => return Err(syntax(line, format!("bad subject token {other:?}"))),
                };
                i += 1;
                loop {
                    // predicate
                    let (ptoken, pline) = tokens
                        .get(i)
                        .ok_or_else(|| syntax(line, "unexpected end of input in triple"))?;
                    let predicate = match ptoken {
                        Token::A => vocab::RDF_TYPE.to_string(),
                        Token::Iri(iri) => iri.clone(),
                        Token::PrefixedName(p, l) => resolve(&prefixes, p, l, *pline)?,
                        other => {
                            return Err(syntax(*pline, format!("bad predicate token {other:?}")))
                        }
                    };
                    i += 1;
                    loop {
                        // object
                        let (otoken, oline) = tokens
                            .get(i)
                            .ok_or_else(|| syntax(line, "unexpected end of input in triple"))?;
                        let object = match otoken {
                            Token::Iri(iri) => RdfNode::Iri(iri.clone()),
                            Token::PrefixedName(p, l) => {
                                RdfNode::Iri(resolve(&prefixes, p, l, *oline)?)
                            }
                            Token::Blank(label) => RdfNode::Blank(label.clone()),
                            Token::Literal {
                                value,
                                datatype_raw,
                                language,
                            } => {
                                let datatype = match datatype_raw {
                                    Some(DatatypeRef::Iri(iri)) => Some(iri.clone()),
                                    Some(DatatypeRef::Prefixed(p, l)) => {
                                        Some(resolve(&prefixes, p, l, *oline)?)
                                    }
                                    None => None,
                                };
                                RdfNode::Literal {
                                    value: value.clone(),
                                    datatype,
                                    language: language.clone(),
                                }
                            }
                            other => {
                                return Err(syntax(*oline, format!("bad object token {other:?}")))
                            }
                        };
                        triples.push(RawTriple {
                            subject: subject.clone(),
                            predicate: predicate.clone(),
                            object,
                        });
                        i += 1;
                        match tokens.get(i) {
                            Some((Token::Comma, _)) => {
                                i += 1;
                                continue;
                            }
                            _ => break,
                        }
                    }
                    match tokens.get(i) {
                        Some((Token::Semicolon, _)) => {
                            i += 1;
                            // A dangling ';' before '.' is legal Turtle.
                            if matches!(tokens.get(i), Some((Token::Dot, _))) {
                                break;
                            }
                            continue;
                        }
                        _ => break,
                    }
                }
                match tokens.get(i) {
                    Some((Token::Dot, _)) => i += 1,
                    other => {
                        let at = other.map(|(_, l)| *l).unwrap_or(line);
                        return Err(syntax(at, "expected '.' at end of triple block"));
                    }
                }
            }
        }
    }
    Ok(triples)
}
