//! Tokenizer for grammar (`.mc`) and tool (`.mctool`) files.

use std::fmt;

use super::ast::Loc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetaTokenKind {
    Ident(String),
    Str(String),
    Regex(String),
    Punct(char),
    Eof,
}

impl fmt::Display for MetaTokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetaTokenKind::Ident(s) => write!(f, "'{s}'"),
            MetaTokenKind::Str(s) => write!(f, "string \"{s}\""),
            MetaTokenKind::Regex(s) => write!(f, "regex /{s}/"),
            MetaTokenKind::Punct(c) => write!(f, "'{c}'"),
            MetaTokenKind::Eof => f.write_str("end of file"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MetaToken {
    pub kind: MetaTokenKind,
    pub loc: Loc,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub loc: Loc,
}

const PUNCT: &str = "{}()[]=;|?*+:,.<>";

pub fn tokenize(text: &str) -> Result<Vec<MetaToken>, LexError> {
    let mut lx = Lexer { text, pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia()?;
        let loc = Loc::new(lx.line, lx.col);
        let start = lx.pos;
        let Some(c) = lx.peek() else {
            out.push(MetaToken { kind: MetaTokenKind::Eof, loc, start, end: start });
            return Ok(out);
        };
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            while matches!(lx.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                lx.bump();
            }
            MetaTokenKind::Ident(text[start..lx.pos].to_string())
        } else if c == '"' {
            lx.bump();
            MetaTokenKind::Str(lx.quoted('"', loc, "string")?)
        } else if c == '/' {
            lx.bump();
            MetaTokenKind::Regex(lx.regex(loc)?)
        } else if PUNCT.contains(c) {
            lx.bump();
            MetaTokenKind::Punct(c)
        } else {
            return Err(LexError { message: format!("unexpected character '{c}'"), loc });
        };
        out.push(MetaToken { kind, loc, start, end: lx.pos });
    }
}

struct Lexer<'t> {
    text: &'t str,
    pos: usize,
    line: u32,
    col: u32,
}

impl Lexer<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        self.text[self.pos..].chars().nth(1)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match (self.peek(), self.peek2()) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    let loc = Loc::new(self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match self.bump() {
                            None => {
                                return Err(LexError {
                                    message: "unterminated block comment".into(),
                                    loc,
                                })
                            }
                            Some('*') if self.peek() == Some('/') => {
                                self.bump();
                                break;
                            }
                            _ => {}
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    /// Reads up to the closing quote; `\"` and `\\` are the only escapes.
    fn quoted(&mut self, close: char, loc: Loc, what: &str) -> Result<String, LexError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(LexError { message: format!("unterminated {what}"), loc })
                }
                Some('\\') => match self.bump() {
                    Some(c) if c == close || c == '\\' => s.push(c),
                    Some(c) => {
                        s.push('\\');
                        s.push(c);
                    }
                    None => return Err(LexError { message: format!("unterminated {what}"), loc }),
                },
                Some(c) if c == close => return Ok(s),
                Some(c) => s.push(c),
            }
        }
    }

    /// Regex bodies keep their escapes verbatim except `\/`.
    fn regex(&mut self, loc: Loc) -> Result<String, LexError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(LexError { message: "unterminated regex".into(), loc })
                }
                Some('\\') => match self.bump() {
                    Some('/') => s.push('/'),
                    Some(c) => {
                        s.push('\\');
                        s.push(c);
                    }
                    None => return Err(LexError { message: "unterminated regex".into(), loc }),
                },
                Some('/') => return Ok(s),
                Some(c) => s.push(c),
            }
        }
    }
}

/// Quotes a string for the meta-language.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn quote_regex(s: &str) -> String {
    let mut out = String::from("/");
    let mut escaped = false;
    for c in s.chars() {
        if c == '/' && !escaped {
            out.push('\\');
        }
        escaped = c == '\\' && !escaped;
        out.push(c);
    }
    out.push('/');
    out
}

pub fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
