//! Just enough HTML parsing for the archived-page adapters: a tolerant tag
//! scanner that builds a small element tree with character offsets for text
//! runs. Not a general HTML5 parser.

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Element(Element),
    Text {
        text: String,
        start: usize,
        end: usize,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
}

impl Element {
    fn new(name: String, attrs: Vec<(String, String)>) -> Self {
        Element {
            name,
            attrs,
            children: Vec::new(),
        }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    /// Concatenated text of all descendant text runs.
    pub fn text(&self) -> String {
        let mut out = String::new();
        self.collect_text(&mut out);
        out
    }

    fn collect_text(&self, out: &mut String) {
        for child in &self.children {
            match child {
                Node::Text { text, .. } => out.push_str(text),
                Node::Element(el) => el.collect_text(out),
            }
        }
    }

    /// Character span covered by this element's text runs, if any.
    pub fn text_span(&self) -> Option<(usize, usize)> {
        let mut span: Option<(usize, usize)> = None;
        for child in &self.children {
            let child_span = match child {
                Node::Text { start, end, .. } => Some((*start, *end)),
                Node::Element(el) => el.text_span(),
            };
            if let Some((s, e)) = child_span {
                span = Some(match span {
                    None => (s, e),
                    Some((s0, e0)) => (s0.min(s), e0.max(e)),
                });
            }
        }
        span
    }

    /// Descendant elements with the given tag name, in document order.
    pub fn find_all<'a>(&'a self, name: &str, out: &mut Vec<&'a Element>) {
        for child in &self.children {
            if let Node::Element(el) = child {
                if el.name == name {
                    out.push(el);
                }
                el.find_all(name, out);
            }
        }
    }

    pub fn first<'a>(&'a self, name: &str) -> Option<&'a Element> {
        for child in &self.children {
            if let Node::Element(el) = child {
                if el.name == name {
                    return Some(el);
                }
                if let Some(found) = el.first(name) {
                    return Some(found);
                }
            }
        }
        None
    }

    pub fn child_elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|c| match c {
            Node::Element(el) => Some(el),
            Node::Text { .. } => None,
        })
    }
}

const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track",
    "wbr",
];

/// Parse a page into a synthetic root element.
pub(crate) fn parse(page: &str) -> Element {
    let chars: Vec<char> = page.chars().collect();
    let mut stack: Vec<Element> = vec![Element::new("#root".to_string(), Vec::new())];
    let mut i = 0;

    while i < chars.len() {
        if chars[i] == '<' {
            if starts_with(&chars, i, "<!--") {
                i = skip_until(&chars, i + 4, "-->");
                continue;
            }
            if starts_with(&chars, i, "<!") || starts_with(&chars, i, "<?") {
                i = skip_until(&chars, i + 2, ">");
                continue;
            }
            if starts_with(&chars, i, "</") {
                let (name, next) = read_tag_name(&chars, i + 2);
                i = skip_until(&chars, next, ">");
                close_element(&mut stack, &name);
                continue;
            }
            let (name, mut j) = read_tag_name(&chars, i + 1);
            if name.is_empty() {
                // Stray '<' in text.
                append_text(&mut stack, "<", i, i + 1);
                i += 1;
                continue;
            }
            let mut attrs = Vec::new();
            let mut self_closing = false;
            loop {
                while j < chars.len() && chars[j].is_whitespace() {
                    j += 1;
                }
                if j >= chars.len() {
                    break;
                }
                if chars[j] == '>' {
                    j += 1;
                    break;
                }
                if chars[j] == '/' {
                    self_closing = true;
                    j += 1;
                    continue;
                }
                let (attr_name, attr_next) = read_attr_name(&chars, j);
                j = attr_next;
                let mut value = String::new();
                if j < chars.len() && chars[j] == '=' {
                    j += 1;
                    if j < chars.len() && (chars[j] == '"' || chars[j] == '\'') {
                        let quote = chars[j];
                        j += 1;
                        while j < chars.len() && chars[j] != quote {
                            value.push(chars[j]);
                            j += 1;
                        }
                        j += 1; // closing quote
                    } else {
                        while j < chars.len() && !chars[j].is_whitespace() && chars[j] != '>' {
                            value.push(chars[j]);
                            j += 1;
                        }
                    }
                }
                if !attr_name.is_empty() {
                    attrs.push((attr_name, decode_entities(&value)));
                }
            }
            i = j;
            if name == "script" || name == "style" {
                i = skip_raw_text(&chars, i, &name);
                continue;
            }
            let element = Element::new(name.clone(), attrs);
            if self_closing || VOID_ELEMENTS.contains(&name.as_str()) {
                attach(&mut stack, Node::Element(element));
            } else {
                stack.push(element);
            }
        } else {
            let start = i;
            let mut text = String::new();
            while i < chars.len() && chars[i] != '<' {
                text.push(chars[i]);
                i += 1;
            }
            append_text(&mut stack, &decode_entities(&text), start, i);
        }
    }

    while stack.len() > 1 {
        let el = stack.pop().expect("stack underflow");
        attach(&mut stack, Node::Element(el));
    }
    stack.pop().expect("root element")
}

fn starts_with(chars: &[char], at: usize, pattern: &str) -> bool {
    pattern
        .chars()
        .enumerate()
        .all(|(k, p)| chars.get(at + k) == Some(&p))
}

fn skip_until(chars: &[char], mut i: usize, pattern: &str) -> usize {
    while i < chars.len() {
        if starts_with(chars, i, pattern) {
            return i + pattern.chars().count();
        }
        i += 1;
    }
    i
}

fn skip_raw_text(chars: &[char], i: usize, name: &str) -> usize {
    let close = format!("</{name}");
    let mut j = i;
    while j < chars.len() {
        if starts_with(chars, j, &close) {
            return skip_until(chars, j, ">");
        }
        j += 1;
    }
    j
}

fn read_tag_name(chars: &[char], mut i: usize) -> (String, usize) {
    let mut name = String::new();
    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '-') {
        name.push(chars[i].to_ascii_lowercase());
        i += 1;
    }
    (name, i)
}

fn read_attr_name(chars: &[char], mut i: usize) -> (String, usize) {
    let mut name = String::new();
    while i < chars.len() && !chars[i].is_whitespace() && !matches!(chars[i], '=' | '>' | '/' | '<')
    {
        name.push(chars[i].to_ascii_lowercase());
        i += 1;
    }
    (name, i)
}

fn attach(stack: &mut [Element], node: Node) {
    stack
        .last_mut()
        .expect("non-empty stack")
        .children
        .push(node);
}

fn append_text(stack: &mut [Element], text: &str, start: usize, end: usize) {
    if text.is_empty() {
        return;
    }
    attach(
        stack,
        Node::Text {
            text: text.to_string(),
            start,
            end,
        },
    );
}

fn close_element(stack: &mut Vec<Element>, name: &str) {
    let Some(depth) = stack.iter().rposition(|el| el.name == name) else {
        return; // unmatched close tag, ignore
    };
    if depth == 0 {
        return;
    }
    while stack.len() > depth {
        let el = stack.pop().expect("stack underflow");
        attach(stack, Node::Element(el));
    }
}

fn decode_entities(text: &str) -> String {
    if !text.contains('&') {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        let semi = rest[..rest.len().min(12)].find(';');
        match semi {
            Some(end) => {
                let entity = &rest[1..end];
                let decoded = match entity {
                    "amp" => Some('&'),
                    "lt" => Some('<'),
                    "gt" => Some('>'),
                    "quot" => Some('"'),
                    "apos" => Some('\''),
                    "nbsp" => Some(' '),
                    _ if entity.starts_with("#x") || entity.starts_with("#X") => {
                        u32::from_str_radix(&entity[2..], 16)
                            .ok()
                            .and_then(char::from_u32)
                    }
                    _ if entity.starts_with('#') => {
                        entity[1..].parse::<u32>().ok().and_then(char::from_u32)
                    }
                    _ => None,
                };
                match decoded {
                    Some(ch) => {
                        out.push(ch);
                        rest = &rest[end + 1..];
                    }
                    None => {
                        out.push('&');
                        rest = &rest[1..];
                    }
                }
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}
