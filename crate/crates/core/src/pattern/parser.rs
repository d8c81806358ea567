use std::collections::HashSet;

use thiserror::Error;

use super::lexicon::macro_refs;
use super::{Attr, Direction, NodePattern, PatternAst, RelationConstraint, ValueMatcher};

/// A syntax error with the byte offset where it was detected.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message} at offset {offset}")]
pub struct PatternError {
    pub offset: usize,
    pub message: String,
}

pub fn parse_pattern(source: &str) -> Result<PatternAst, PatternError> {
    let mut parser = Parser {
        src: source,
        pos: 0,
        captures: HashSet::new(),
    };
    let ast = parser.pattern()?;
    parser.skip_ws();
    match parser.peek() {
        None => Ok(ast),
        Some(')') => Err(parser.error_here("unbalanced ')'")),
        Some(c) => Err(parser.error_here(&format!("unexpected character '{c}'"))),
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    captures: HashSet<String>,
}

fn is_literal_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, ';' | '{' | '}' | '(' | ')' | '/')
}

fn is_label_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, ';' | '{' | '}' | '(' | ')' | '/' | '<' | '>' | '=')
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn error_at(&self, offset: usize, message: &str) -> PatternError {
        PatternError {
            offset,
            message: message.to_string(),
        }
    }

    fn error_here(&self, message: &str) -> PatternError {
        self.error_at(self.pos, message)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
        &self.src[start..self.pos]
    }

    fn pattern(&mut self) -> Result<PatternAst, PatternError> {
        self.skip_ws();
        let mut ast = self.node()?;
        loop {
            self.skip_ws();
            let direction = match self.peek() {
                Some('>') => Direction::Governs,
                Some('<') => Direction::GovernedBy,
                _ => break,
            };
            self.bump();
            self.skip_ws();
            let label = match self.peek() {
                Some('/') => Some(self.regex()?),
                Some(c) if is_label_char(c) => Some(ValueMatcher::Literal(
                    self.take_while(is_label_char).to_string(),
                )),
                _ => None,
            };
            self.skip_ws();
            let child = self.node()?;
            ast.relations.push(RelationConstraint {
                direction,
                label,
                child,
            });
        }
        Ok(ast)
    }

    fn node(&mut self) -> Result<PatternAst, PatternError> {
        match self.peek() {
            Some('{') => {
                let head = self.node_body()?;
                Ok(PatternAst::node(head))
            }
            Some('(') => {
                let open = self.pos;
                self.bump();
                let inner = self.pattern()?;
                self.skip_ws();
                match self.peek() {
                    Some(')') => {
                        self.bump();
                        Ok(inner)
                    }
                    None => Err(self.error_at(open, "unbalanced '('")),
                    Some(c) => Err(self.error_here(&format!("expected ')', found '{c}'"))),
                }
            }
            Some(c) => Err(self.error_here(&format!("expected '{{' or '(', found '{c}'"))),
            None => Err(self.error_here("expected '{' or '(', found end of pattern")),
        }
    }

    fn node_body(&mut self) -> Result<NodePattern, PatternError> {
        let open = self.pos;
        self.bump();
        let mut node = NodePattern::default();
        self.skip_ws();
        if self.peek() != Some('}') {
            loop {
                self.skip_ws();
                let key_start = self.pos;
                let key = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
                if key.is_empty() {
                    return match self.peek() {
                        None => Err(self.error_at(open, "unbalanced '{'")),
                        Some(c) => {
                            Err(self.error_here(&format!("expected attribute, found '{c}'")))
                        }
                    };
                }
                let attr = Attr::from_name(key).ok_or_else(|| {
                    self.error_at(key_start, &format!("unknown attribute '{key}'"))
                })?;
                if node.constraints.contains_key(&attr) {
                    return Err(self.error_at(key_start, &format!("duplicate attribute '{key}'")));
                }
                self.skip_ws();
                match self.peek() {
                    Some(':') => {
                        self.bump();
                    }
                    None => return Err(self.error_at(open, "unbalanced '{'")),
                    Some(c) => return Err(self.error_here(&format!("expected ':', found '{c}'"))),
                }
                self.skip_ws();
                let value = match self.peek() {
                    Some('/') => self.regex()?,
                    Some(c) if is_literal_char(c) => {
                        ValueMatcher::Literal(self.take_while(is_literal_char).to_string())
                    }
                    None => return Err(self.error_at(open, "unbalanced '{'")),
                    Some(c) => return Err(self.error_here(&format!("expected value, found '{c}'"))),
                };
                node.constraints.insert(attr, value);
                self.skip_ws();
                match self.peek() {
                    Some(';') => {
                        self.bump();
                    }
                    Some('}') => break,
                    None => return Err(self.error_at(open, "unbalanced '{'")),
                    Some(c) => {
                        return Err(self.error_here(&format!("expected ';' or '}}', found '{c}'")))
                    }
                }
            }
        }
        // at '}'
        self.bump();
        if self.peek() == Some('=') {
            self.bump();
            let start = self.pos;
            let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
            let valid = name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
            if !valid {
                return Err(self.error_at(start, "invalid capture name"));
            }
            if !self.captures.insert(name.to_string()) {
                return Err(self.error_at(start, &format!("duplicate capture name '{name}'")));
            }
            node.capture = Some(name.to_string());
        }
        Ok(node)
    }

    fn regex(&mut self) -> Result<ValueMatcher, PatternError> {
        let open = self.pos;
        self.bump();
        let mut body = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error_at(open, "unterminated regex")),
                Some('/') => break,
                Some('\\') => match self.bump() {
                    None => return Err(self.error_at(open, "unterminated regex")),
                    Some('/') => body.push('/'),
                    Some(c) => {
                        body.push('\\');
                        body.push(c);
                    }
                },
                Some(c) => body.push(c),
            }
        }
        // Validate with macros stubbed out; they are expanded later.
        let mut probe = String::new();
        let mut last = 0;
        for m in macro_refs(&body) {
            probe.push_str(&body[last..m.start]);
            probe.push_str("(?:x)");
            last = m.end;
        }
        probe.push_str(&body[last..]);
        if let Err(e) = regex::Regex::new(&format!("^(?:{probe})$")) {
            let detail = e.to_string();
            let first = detail.lines().last().unwrap_or("").trim();
            return Err(self.error_at(open, &format!("invalid regex: {first}")));
        }
        Ok(ValueMatcher::Regex(body))
    }
}
