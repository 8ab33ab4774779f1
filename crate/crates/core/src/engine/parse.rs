//! Packrat interpreter over the compiled rules. Scanning is driven by the
//! parser: the active fragment's lexical mode decides what a token is.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::build::{Expr, ParserHandle, RuleKind};
use super::token::{trivia_at, Token, TokenKind};
use super::tree::{AttrValue, NodeItem, SyntaxNode};
use crate::grammar::{AttributeShape, Cardinality};
use crate::report::ProblemReport;
use crate::span::LineIndex;

const SOURCE: &str = "parser";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParseOutcome {
    pub root: Option<SyntaxNode>,
    pub tokens: Vec<Token>,
    pub problems: Vec<ProblemReport>,
}

pub fn parse(text: &str, handle: &ParserHandle, file: impl AsRef<Path>) -> ParseOutcome {
    run(text, handle, file.as_ref(), handle.start)
}

/// Parses `text` as one production (qualified name) instead of the start
/// symbol.
pub fn parse_production(
    text: &str,
    handle: &ParserHandle,
    file: impl AsRef<Path>,
    production: &str,
) -> Option<ParseOutcome> {
    let rule = *handle.by_name.get(production)?;
    Some(run(text, handle, file.as_ref(), rule))
}

struct Scanned {
    comments: Vec<Token>,
    /// None at end of input.
    token: Option<Token>,
}

#[derive(Debug)]
struct Built {
    rule: usize,
    items: Vec<BItem>,
    attrs: Vec<(String, BVal)>,
    /// Byte range of the node's tokens; empty at the start position when
    /// the node matched nothing.
    start: usize,
    end: usize,
    empty: bool,
}

#[derive(Debug)]
enum BItem {
    Tok(Token),
    Child(Rc<Built>),
}

#[derive(Debug)]
enum BVal {
    Text(String),
    Flag,
    Item(usize),
}

#[derive(Default)]
struct Frame {
    items: Vec<BItem>,
    attrs: Vec<(String, BVal)>,
}

impl Frame {
    fn mark(&self) -> (usize, usize) {
        (self.items.len(), self.attrs.len())
    }

    fn reset(&mut self, m: (usize, usize)) {
        self.items.truncate(m.0);
        self.attrs.truncate(m.1);
    }
}

struct Failure {
    at: usize,
    expected: BTreeSet<String>,
    found: Option<Token>,
}

struct Parser<'a> {
    h: &'a ParserHandle,
    text: &'a str,
    index: Rc<LineIndex>,
    scans: HashMap<(usize, usize), Rc<Scanned>>,
    memo: HashMap<(usize, usize), Option<(usize, Rc<Built>)>>,
    failure: Option<Failure>,
    recover: bool,
    recovered: Vec<Failure>,
}

impl<'a> Parser<'a> {
    fn new(h: &'a ParserHandle, text: &'a str, index: Rc<LineIndex>) -> Self {
        Parser {
            h,
            text,
            index,
            scans: HashMap::new(),
            memo: HashMap::new(),
            failure: None,
            recover: false,
            recovered: Vec::new(),
        }
    }

    fn scan(&mut self, pos: usize, mode: usize) -> Rc<Scanned> {
        if let Some(s) = self.scans.get(&(pos, mode)) {
            return s.clone();
        }
        let text = self.text;
        let mut p = pos;
        let mut comments = Vec::new();
        while let Some((kind, len)) = trivia_at(text, p) {
            if kind.is_comment() {
                comments.push(Token::new(kind, text, p..p + len, &self.index));
            }
            p += len;
        }
        let token = (p < text.len()).then(|| {
            let (kind, len) = self.h.modes[mode].scan_token(text, p);
            Token::new(kind, text, p..p + len, &self.index)
        });
        let s = Rc::new(Scanned { comments, token });
        self.scans.insert((pos, mode), s.clone());
        s
    }

    fn fail(&mut self, scanned: &Scanned, expected: String) {
        let at = scanned.token.as_ref().map_or(self.text.len(), |t| t.range.start);
        match &mut self.failure {
            Some(f) if f.at > at => {}
            Some(f) if f.at == at => {
                f.expected.insert(expected);
            }
            _ => {
                self.failure = Some(Failure { at, expected: [expected].into(), found: scanned.token.clone() })
            }
        }
    }

    /// Matches one token satisfying `accept`; pushes it (and preceding
    /// comments) into the frame.
    fn terminal(
        &mut self,
        pos: usize,
        mode: usize,
        frame: &mut Frame,
        expected: impl FnOnce() -> String,
        accept: impl FnOnce(&Token) -> bool,
    ) -> Option<(usize, String)> {
        let s = self.scan(pos, mode);
        match &s.token {
            Some(t) if accept(t) => {
                frame.items.extend(s.comments.iter().cloned().map(BItem::Tok));
                frame.items.push(BItem::Tok(t.clone()));
                Some((t.range.end, t.text.clone()))
            }
            _ => {
                self.fail(&s, expected());
                None
            }
        }
    }

    fn eval(&mut self, e: &Expr, pos: usize, mode: usize, frame: &mut Frame, top: bool) -> Option<usize> {
        let label_text = |frame: &mut Frame, label: &Option<String>, text: String| {
            if let Some(l) = label {
                frame.attrs.push((l.clone(), BVal::Text(text)));
            }
        };
        match e {
            Expr::Seq(items) => {
                let mut p = pos;
                for i in items {
                    p = self.eval(i, p, mode, frame, top)?;
                }
                Some(p)
            }
            Expr::Alt(items) => {
                for i in items {
                    let m = frame.mark();
                    if let Some(p) = self.eval(i, pos, mode, frame, false) {
                        return Some(p);
                    }
                    frame.reset(m);
                }
                None
            }
            Expr::Block { inner, label } => {
                let end = self.eval(inner, pos, mode, frame, top)?;
                let text = self.text[pos..end].trim().to_string();
                label_text(frame, label, text);
                Some(end)
            }
            Expr::Word { text, label } => {
                let (end, t) = self.terminal(
                    pos,
                    mode,
                    frame,
                    || format!("'{text}'"),
                    |t| matches!(t.kind, TokenKind::Keyword | TokenKind::Ident) && t.text == *text,
                )?;
                label_text(frame, label, t);
                Some(end)
            }
            Expr::Sym { text, label } => {
                let (end, t) = self.terminal(
                    pos,
                    mode,
                    frame,
                    || format!("'{text}'"),
                    |t| t.kind == TokenKind::Symbol && t.text == *text,
                )?;
                label_text(frame, label, t);
                Some(end)
            }
            Expr::Ident { label } => {
                let (end, t) =
                    self.terminal(pos, mode, frame, || "identifier".into(), |t| t.kind == TokenKind::Ident)?;
                label_text(frame, label, t);
                Some(end)
            }
            Expr::Tok { index, label } => {
                let m = &self.h.modes[mode];
                let name = m.token_name(*index);
                let name = name.rsplit('.').next().unwrap_or(name).to_string();
                let (end, t) = self.terminal(
                    pos,
                    mode,
                    frame,
                    || name,
                    |t| matches!(t.kind, TokenKind::Ident | TokenKind::Literal) && m.token_matches(*index, &t.text),
                )?;
                label_text(frame, label, t);
                Some(end)
            }
            Expr::Flag { label, text } => {
                let (end, _) =
                    self.terminal(pos, mode, frame, || format!("'{text}'"), |t| !t.kind.is_trivia() && t.text == *text)?;
                frame.attrs.push((label.clone(), BVal::Flag));
                Some(end)
            }
            Expr::Call { rule, label } => {
                let (end, node) = self.call(*rule, pos)?;
                frame.items.push(BItem::Child(node));
                if let Some(l) = label {
                    frame.attrs.push((l.clone(), BVal::Item(frame.items.len() - 1)));
                }
                Some(end)
            }
            Expr::Repeat { inner, card } => {
                let mut p = pos;
                let mut count = 0;
                loop {
                    let m = frame.mark();
                    match self.eval(inner, p, mode, frame, false) {
                        // A nullable body would spin forever; one empty match ends the loop.
                        Some(q) if q == p => break,
                        Some(q) => {
                            p = q;
                            count += 1;
                            if *card == Cardinality::Optional {
                                break;
                            }
                        }
                        None => {
                            frame.reset(m);
                            if top && self.recover && *card != Cardinality::Optional {
                                if let Some(q) = self.skip_to_next_item(inner, p, mode, frame) {
                                    p = q;
                                    count += 1;
                                    continue;
                                }
                            }
                            break;
                        }
                    }
                }
                (*card != Cardinality::Plus || count > 0).then_some(p)
            }
        }
    }

    /// Recovery inside a top-level loop of the start production: records
    /// why the item at `pos` failed, then skips tokens until an item
    /// parses again.
    fn skip_to_next_item(&mut self, item: &Expr, pos: usize, mode: usize, frame: &mut Frame) -> Option<usize> {
        let mut probe = Parser::new(self.h, self.text, self.index.clone());
        probe.eval(item, pos, mode, &mut Frame::default(), false);
        let mut q = pos;
        loop {
            let s = self.scan(q, mode);
            q = s.token.as_ref()?.range.end;
            let m = frame.mark();
            match self.eval(item, q, mode, frame, false) {
                Some(end) if end > q => {
                    self.recovered.extend(probe.failure);
                    return Some(end);
                }
                _ => frame.reset(m),
            }
        }
    }

    fn call(&mut self, rule: usize, pos: usize) -> Option<(usize, Rc<Built>)> {
        if let Some(r) = self.memo.get(&(rule, pos)) {
            return r.clone();
        }
        let result = match &self.h.rules[rule].kind {
            RuleKind::Interface { implementors } => implementors.iter().find_map(|&i| self.call(i, pos)),
            RuleKind::Production { .. } => self.production(rule, pos, false),
        };
        self.memo.insert((rule, pos), result.clone());
        result
    }

    fn production(&mut self, rule: usize, pos: usize, top: bool) -> Option<(usize, Rc<Built>)> {
        let h = self.h;
        let RuleKind::Production { body, .. } = &h.rules[rule].kind else { unreachable!() };
        let mut frame = Frame::default();
        let end = self.eval(body, pos, h.rules[rule].mode, &mut frame, top)?;
        Some((end, Rc::new(finish(rule, frame, pos))))
    }
}

fn finish(rule: usize, frame: Frame, pos: usize) -> Built {
    let mut range: Option<(usize, usize)> = None;
    for item in &frame.items {
        let r = match item {
            BItem::Tok(t) if !t.kind.is_comment() => Some((t.range.start, t.range.end)),
            BItem::Child(c) if !c.empty => Some((c.start, c.end)),
            _ => None,
        };
        if let Some((s, e)) = r {
            range = Some(range.map_or((s, e), |(s0, _)| (s0, e)));
        }
    }
    let (start, end) = range.unwrap_or((pos, pos));
    Built { rule, items: frame.items, attrs: frame.attrs, start, end, empty: range.is_none() }
}

fn to_node(b: &Built, h: &ParserHandle, text: &str, index: &LineIndex) -> SyntaxNode {
    let rule = &h.rules[b.rule];
    let mut children = Vec::new();
    let mut items = Vec::new();
    let mut child_of_item = HashMap::new();
    for (i, item) in b.items.iter().enumerate() {
        match item {
            BItem::Tok(t) => items.push(NodeItem::Token(t.clone())),
            BItem::Child(c) => {
                child_of_item.insert(i, children.len());
                items.push(NodeItem::Child(children.len()));
                children.push(to_node(c, h, text, index));
            }
        }
    }
    let mut attributes = BTreeMap::new();
    if let RuleKind::Production { shapes, .. } = &rule.kind {
        for (label, shape) in shapes {
            let values: Vec<AttrValue> = b
                .attrs
                .iter()
                .filter(|(l, _)| l == label)
                .map(|(_, v)| match v {
                    BVal::Text(s) => AttrValue::Text(s.clone()),
                    BVal::Flag => AttrValue::Bool(true),
                    BVal::Item(i) => AttrValue::Node(child_of_item[i]),
                })
                .collect();
            let value = match shape {
                AttributeShape::List => Some(AttrValue::List(values)),
                AttributeShape::Flag => Some(AttrValue::Bool(!values.is_empty())),
                AttributeShape::Scalar { .. } => values.into_iter().last(),
            };
            if let Some(v) = value {
                attributes.insert(label.clone(), v);
            }
        }
    }
    SyntaxNode {
        production: rule.name.clone(),
        fragment: rule.fragment.clone(),
        attributes,
        children,
        items,
        span: index.span(text, b.start, b.end),
        range: b.start..b.end,
    }
}

fn failure_report(f: &Failure, text: &str, index: &LineIndex, file: &Path) -> ProblemReport {
    let (line, col) = index.position(text, f.at);
    let message = match &f.found {
        Some(t) if t.kind == TokenKind::ErrorChar => format!("unexpected character '{}'", t.text),
        found => {
            let expected: Vec<&str> = f.expected.iter().map(String::as_str).collect();
            let expected = match expected.split_last() {
                Some((last, rest)) if !rest.is_empty() => format!("{} or {last}", rest.join(", ")),
                _ => expected.join(""),
            };
            let found = found.as_ref().map_or("end of input".to_string(), |t| format!("'{}'", t.text));
            format!("expected {expected}, found {found}")
        }
    };
    ProblemReport::error(message, file, line, col, SOURCE)
}

/// Parses the whole text as `rule`.
fn attempt(p: &mut Parser<'_>, rule: usize) -> Option<Rc<Built>> {
    let h = p.h;
    let (end, built) = match h.rules[rule].kind {
        RuleKind::Production { .. } => p.production(rule, 0, true)?,
        RuleKind::Interface { .. } => p.call(rule, 0)?,
    };
    let s = p.scan(end, h.rules[built.rule].mode);
    if s.token.is_some() {
        p.fail(&s, "end of input".into());
        return None;
    }
    // Trailing comments belong to the root.
    let mut built = Rc::try_unwrap(built).unwrap_or_else(|rc| Built {
        rule: rc.rule,
        items: rc.items.iter().map(clone_item).collect(),
        attrs: rc.attrs.iter().map(clone_val).collect(),
        start: rc.start,
        end: rc.end,
        empty: rc.empty,
    });
    built.items.extend(s.comments.iter().cloned().map(BItem::Tok));
    Some(Rc::new(built))
}

fn clone_item(i: &BItem) -> BItem {
    match i {
        BItem::Tok(t) => BItem::Tok(t.clone()),
        BItem::Child(c) => BItem::Child(c.clone()),
    }
}

fn clone_val((l, v): &(String, BVal)) -> (String, BVal) {
    let v = match v {
        BVal::Text(s) => BVal::Text(s.clone()),
        BVal::Flag => BVal::Flag,
        BVal::Item(i) => BVal::Item(*i),
    };
    (l.clone(), v)
}

/// Flattens the tree's tokens and fills the gaps with whitespace and
/// comments so the result covers the text.
fn covering_tokens(b: &Built, text: &str, h: &ParserHandle, index: &LineIndex) -> Vec<Token> {
    fn collect(b: &Built, out: &mut Vec<Token>) {
        for item in &b.items {
            match item {
                BItem::Tok(t) if !t.kind.is_comment() => out.push(t.clone()),
                BItem::Child(c) => collect(c, out),
                _ => {}
            }
        }
    }
    let mut code = Vec::new();
    collect(b, &mut code);
    let mode = &h.modes[h.rules[b.rule].mode];
    let mut out = Vec::new();
    let mut pos = 0;
    let gap = |from: usize, to: usize, out: &mut Vec<Token>| {
        let mut p = from;
        while p < to {
            let (kind, len) = trivia_at(text, p).unwrap_or_else(|| mode.scan_token(text, p));
            let len = len.min(to - p).max(1);
            out.push(Token::new(kind, text, p..p + len, index));
            p += len;
        }
    };
    for t in code {
        gap(pos, t.range.start, &mut out);
        pos = t.range.end;
        out.push(t);
    }
    gap(pos, text.len(), &mut out);
    out
}

fn run(text: &str, h: &ParserHandle, file: &Path, rule: usize) -> ParseOutcome {
    let index = Rc::new(LineIndex::new(text));
    let file: PathBuf = file.to_path_buf();
    let mut p = Parser::new(h, text, index.clone());
    let built = attempt(&mut p, rule);

    let (root, tokens, mut problems) = match built {
        Some(b) => {
            let tokens = covering_tokens(&b, text, h, &index);
            (Some(to_node(&b, h, text, &index)), tokens, Vec::new())
        }
        None => {
            let mut problems = Vec::new();
            match &p.failure {
                Some(f) => problems.push(failure_report(f, text, &index, &file)),
                None => problems.push(ProblemReport::error("syntax error", &file, 1, 1, SOURCE)),
            }
            let mut r = Parser::new(h, text, index.clone());
            r.recover = true;
            attempt(&mut r, rule);
            problems.extend(r.recovered.iter().map(|f| failure_report(f, text, &index, &file)));
            let tokens = h.modes[h.rules[rule].mode].lex(text);
            (None, tokens, problems)
        }
    };

    for t in tokens.iter().filter(|t| t.is_unterminated_comment()) {
        problems.push(ProblemReport::error(
            "unterminated block comment",
            &file,
            t.span.start_line,
            t.span.start_col,
            SOURCE,
        ));
    }
    let mut seen = BTreeSet::new();
    problems.retain(|r| seen.insert((r.line, r.column)));
    problems.sort_by_key(|r| (r.line, r.column));
    let root = if problems.iter().any(|r| r.is_error()) { None } else { root };
    ParseOutcome { root, tokens, problems }
}
