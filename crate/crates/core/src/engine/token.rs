use std::collections::BTreeSet;
use std::ops::Range;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::span::{LineIndex, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Keyword,
    Ident,
    Symbol,
    /// Text matched by a fragment-local `token` production.
    Literal,
    CommentLine,
    CommentBlock,
    Whitespace,
    ErrorChar,
}

impl TokenKind {
    pub fn is_trivia(self) -> bool {
        matches!(self, TokenKind::Whitespace | TokenKind::CommentLine | TokenKind::CommentBlock)
    }

    pub fn is_comment(self) -> bool {
        matches!(self, TokenKind::CommentLine | TokenKind::CommentBlock)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
    /// Byte range in the document.
    pub range: Range<usize>,
}

impl Token {
    pub(crate) fn new(kind: TokenKind, text: &str, range: Range<usize>, index: &LineIndex) -> Token {
        Token { kind, text: text[range.clone()].to_string(), span: index.span(text, range.start, range.end), range }
    }

    /// True for a block comment that runs into the end of the document.
    pub fn is_unterminated_comment(&self) -> bool {
        self.kind == TokenKind::CommentBlock && (self.text.len() < 4 || !self.text.ends_with("*/"))
    }
}

fn is_word_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn is_word(s: &str) -> bool {
    s.starts_with(is_word_start) && s.chars().all(is_word_char)
}

/// Whitespace or comment starting at `pos`, as (kind, byte length).
pub(crate) fn trivia_at(text: &str, pos: usize) -> Option<(TokenKind, usize)> {
    let rest = &text[pos..];
    if rest.starts_with(char::is_whitespace) {
        let len = rest.find(|c: char| !c.is_whitespace()).unwrap_or(rest.len());
        Some((TokenKind::Whitespace, len))
    } else if rest.starts_with("//") {
        Some((TokenKind::CommentLine, rest.find('\n').unwrap_or(rest.len())))
    } else if rest.starts_with("/*") {
        let len = rest[2..].find("*/").map_or(rest.len(), |i| i + 4);
        Some((TokenKind::CommentBlock, len))
    } else {
        None
    }
}

pub(crate) fn word_len(rest: &str) -> usize {
    if !rest.starts_with(is_word_start) {
        return 0;
    }
    rest.find(|c: char| !is_word_char(c)).unwrap_or(rest.len())
}

/// Lexical configuration of one fragment: its keywords, the non-word
/// terminals its productions use, and its token productions.
#[derive(Clone, Debug)]
pub struct Mode {
    pub fragment: String,
    pub keywords: BTreeSet<String>,
    symbols: Vec<String>,
    tokens: Vec<TokenDef>,
}

#[derive(Clone, Debug)]
struct TokenDef {
    name: String,
    prefix: Regex,
    full: Regex,
}

impl Mode {
    pub fn new<'a>(
        fragment: &str,
        keywords: impl IntoIterator<Item = &'a String>,
        terminals: impl IntoIterator<Item = &'a String>,
        tokens: &[(String, String)],
    ) -> Result<Mode, regex::Error> {
        let mut symbols: Vec<String> = terminals.into_iter().filter(|t| !is_word(t) && !t.is_empty()).cloned().collect();
        symbols.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        symbols.dedup();
        let tokens = tokens
            .iter()
            .map(|(name, pattern)| {
                Ok(TokenDef {
                    name: name.clone(),
                    prefix: Regex::new(&format!("^(?:{pattern})"))?,
                    full: Regex::new(&format!("^(?:{pattern})$"))?,
                })
            })
            .collect::<Result<_, regex::Error>>()?;
        Ok(Mode { fragment: fragment.to_string(), keywords: keywords.into_iter().cloned().collect(), symbols, tokens })
    }

    pub(crate) fn token_index(&self, name: &str) -> Option<usize> {
        self.tokens.iter().position(|t| t.name == name)
    }

    pub(crate) fn token_name(&self, index: usize) -> &str {
        &self.tokens[index].name
    }

    /// Does `text` as a whole match token production `index`?
    pub(crate) fn token_matches(&self, index: usize, text: &str) -> bool {
        !self.keywords.contains(text) && self.tokens[index].full.is_match(text)
    }

    /// Classifies the non-trivia token at `pos` by maximal munch; ties go
    /// to words, then token productions, then symbols.
    pub fn scan_token(&self, text: &str, pos: usize) -> (TokenKind, usize) {
        let rest = &text[pos..];
        let word = word_len(rest);
        let regex = self.tokens.iter().filter_map(|t| t.prefix.find(rest).map(|m| m.end())).max().unwrap_or(0);
        let symbol = self.symbols.iter().find(|s| rest.starts_with(s.as_str())).map_or(0, |s| s.len());
        let best = word.max(regex).max(symbol);
        if best == 0 {
            return (TokenKind::ErrorChar, rest.chars().next().map_or(0, char::len_utf8));
        }
        if word == best {
            let kind = if self.keywords.contains(&rest[..word]) { TokenKind::Keyword } else { TokenKind::Ident };
            (kind, word)
        } else if regex == best {
            (TokenKind::Literal, regex)
        } else {
            (TokenKind::Symbol, symbol)
        }
    }

    /// Tokenizes the whole text in this mode, whitespace and comments
    /// included, so the token texts concatenate back to `text`.
    pub fn lex(&self, text: &str) -> Vec<Token> {
        let index = LineIndex::new(text);
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < text.len() {
            let (kind, len) = trivia_at(text, pos).unwrap_or_else(|| self.scan_token(text, pos));
            out.push(Token::new(kind, text, pos..pos + len, &index));
            pos += len;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msc_mode() -> Mode {
        let kws: Vec<String> =
            "msc instance in out to from condition shared all".split(' ').map(String::from).collect();
        let terms: Vec<String> = ["{", "}", ";", ","].iter().map(|s| s.to_string()).collect();
        Mode::new("MSC", &kws, &terms, &[]).unwrap()
    }

    fn kinds(toks: &[Token]) -> Vec<(TokenKind, &str)> {
        toks.iter().filter(|t| t.kind != TokenKind::Whitespace).map(|t| (t.kind, t.text.as_str())).collect()
    }

    #[test]
    fn msc_header() {
        let toks = msc_mode().lex("msc mail{");
        assert_eq!(
            kinds(&toks),
            vec![(TokenKind::Keyword, "msc"), (TokenKind::Ident, "mail"), (TokenKind::Symbol, "{")]
        );
    }

    #[test]
    fn empty_and_comments() {
        assert!(msc_mode().lex("").is_empty());
        let toks = msc_mode().lex("/* a\nb */ in");
        assert_eq!(toks[0].kind, TokenKind::CommentBlock);
        assert_eq!(toks[0].span, Span::new(1, 1, 2, 5));
        assert_eq!(kinds(&toks)[1], (TokenKind::Keyword, "in"));
        assert_eq!(toks[2].span, Span::new(2, 6, 2, 8));
    }

    #[test]
    fn unterminated_comment_runs_to_end() {
        let toks = msc_mode().lex("msc /* open");
        let last = toks.last().unwrap();
        assert!(last.is_unterminated_comment());
        assert_eq!(last.text, "/* open");
        assert!(!msc_mode().lex("/**/").last().unwrap().is_unterminated_comment());
    }

    #[test]
    fn maximal_munch_and_error_chars() {
        let terms: Vec<String> = ["<", "<=", "."].iter().map(|s| s.to_string()).collect();
        let m = Mode::new("J", &[], &terms, &[("NUMBER".into(), "[0-9]+".into())]).unwrap();
        assert_eq!(
            kinds(&m.lex("a<=10.x#")),
            vec![
                (TokenKind::Ident, "a"),
                (TokenKind::Symbol, "<="),
                (TokenKind::Literal, "10"),
                (TokenKind::Symbol, "."),
                (TokenKind::Ident, "x"),
                (TokenKind::ErrorChar, "#"),
            ]
        );
        assert!(m.token_matches(0, "42"));
        assert!(!m.token_matches(0, "4a"));
    }

    #[test]
    fn coverage() {
        let text = "msc m { // c\n instance  a {} } é";
        let joined: String = msc_mode().lex(text).iter().map(|t| t.text.as_str()).collect();
        assert_eq!(joined, text);
    }
}
