//! Parser for grammar fragment files.
//!
//! ```text
//! file       := "grammar" IDENT ("extends" qname ("," qname)*)? "{" member* "}"
//! member     := "interface" IDENT ";"
//!             | "external" IDENT ";"
//!             | "token" IDENT "=" REGEX ";"
//!             | "concept" IDENT "{" ... "}"
//!             | IDENT ("implements" IDENT ("," IDENT)*)? "=" alt ";"
//! alt        := seq ("|" seq)*
//! seq        := item+
//! item       := (IDENT ":")? (STRING | IDENT | "(" alt ")" | "[" STRING "]") card?
//! card       := "?" | "*" | "+"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::ast::*;
use super::lexer::{tokenize, MetaToken, MetaTokenKind};
use crate::report::ProblemReport;

pub(crate) const SOURCE: &str = "grammar";

pub(crate) struct MetaParser<'t> {
    pub text: &'t str,
    pub toks: Vec<MetaToken>,
    pub pos: usize,
    pub origin: PathBuf,
}

pub(crate) type PResult<T> = Result<T, ProblemReport>;

impl<'t> MetaParser<'t> {
    pub fn new(text: &'t str, origin: &Path) -> Result<Self, ProblemReport> {
        let toks = tokenize(text).map_err(|e| {
            ProblemReport::error(e.message, origin, e.loc.line, e.loc.col, SOURCE)
        })?;
        Ok(MetaParser { text, toks, pos: 0, origin: origin.to_path_buf() })
    }

    pub fn peek(&self) -> &MetaToken {
        &self.toks[self.pos]
    }

    pub fn peek_at(&self, n: usize) -> &MetaTokenKind {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].kind
    }

    pub fn loc(&self) -> Loc {
        self.peek().loc
    }

    pub fn bump(&mut self) -> MetaToken {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub fn at_punct(&self, c: char) -> bool {
        self.peek().kind == MetaTokenKind::Punct(c)
    }

    pub fn at_word(&self, w: &str) -> bool {
        matches!(&self.peek().kind, MetaTokenKind::Ident(s) if s == w)
    }

    pub fn at_eof(&self) -> bool {
        self.peek().kind == MetaTokenKind::Eof
    }

    pub fn error_here(&self, msg: impl Into<String>) -> ProblemReport {
        let loc = self.loc();
        ProblemReport::error(msg, &self.origin, loc.line, loc.col, SOURCE)
    }

    pub fn error_at(&self, loc: Loc, msg: impl Into<String>) -> ProblemReport {
        ProblemReport::error(msg, &self.origin, loc.line, loc.col, SOURCE)
    }

    pub fn unexpected(&self, expected: &str) -> ProblemReport {
        self.error_here(format!("expected {expected}, found {}", self.peek().kind))
    }

    pub fn eat_punct(&mut self, c: char) -> bool {
        if self.at_punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, c: char) -> PResult<()> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{c}'")))
        }
    }

    pub fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{w}'")))
        }
    }

    pub fn ident(&mut self, what: &str) -> PResult<(String, Loc)> {
        let loc = self.loc();
        match &self.peek().kind {
            MetaTokenKind::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok((s, loc))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn string(&mut self, what: &str) -> PResult<String> {
        match &self.peek().kind {
            MetaTokenKind::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub fn qualified_name(&mut self) -> PResult<QualifiedName> {
        let mut parts = vec![self.ident("a name")?.0];
        while self.at_punct('.') {
            self.bump();
            parts.push(self.ident("a name after '.'")?.0);
        }
        Ok(QualifiedName(parts))
    }

    pub fn ident_list(&mut self, what: &str) -> PResult<Vec<Declared>> {
        let mut out = Vec::new();
        loop {
            let (name, loc) = self.ident(what)?;
            out.push(Declared::new(name, loc));
            if !self.eat_punct(',') {
                return Ok(out);
            }
        }
    }

    /// Skips a balanced `{ ... }` block and returns its inner source text.
    pub fn opaque_block(&mut self) -> PResult<String> {
        let open = self.peek().clone();
        self.expect_punct('{')?;
        let mut depth = 1;
        loop {
            let t = self.bump();
            match t.kind {
                MetaTokenKind::Punct('{') => depth += 1,
                MetaTokenKind::Punct('}') => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(self.text[open.end..t.start].trim().to_string());
                    }
                }
                MetaTokenKind::Eof => return Err(self.error_at(open.loc, "unclosed '{'")),
                _ => {}
            }
        }
    }
}

/// Parses one grammar fragment. On failure the reports point at the first
/// offending token (duplicate declarations are all reported).
pub fn parse_grammar(text: &str, origin: impl AsRef<Path>) -> Result<GrammarFragment, Vec<ProblemReport>> {
    let origin = origin.as_ref();
    let mut p = MetaParser::new(text, origin).map_err(|r| vec![r])?;
    if p.at_eof() {
        return Err(vec![p.error_here("no grammar found")]);
    }
    let fragment = grammar_file(&mut p).map_err(|r| vec![r])?;
    let dups = duplicate_declarations(&fragment);
    if dups.is_empty() {
        Ok(fragment)
    } else {
        Err(dups)
    }
}

fn grammar_file(p: &mut MetaParser<'_>) -> PResult<GrammarFragment> {
    let loc = p.loc();
    p.expect_word("grammar")?;
    let (name, _) = p.ident("a grammar name")?;
    let mut f = GrammarFragment::new(name);
    f.origin = p.origin.clone();
    f.loc = loc;
    if p.eat_word("extends") {
        loop {
            f.super_grammars.push(p.qualified_name()?);
            if !p.eat_punct(',') {
                break;
            }
        }
    }
    p.expect_punct('{')?;
    while !p.at_punct('}') {
        if p.at_eof() {
            return Err(p.unexpected("'}'"));
        }
        member(p, &mut f)?;
    }
    p.bump();
    if !p.at_eof() {
        return Err(p.unexpected("end of file"));
    }
    Ok(f)
}

fn member(p: &mut MetaParser<'_>, f: &mut GrammarFragment) -> PResult<()> {
    // Keywords of the meta-language are contextual: `interface X;` declares,
    // while `interface = ...` would be a production named "interface".
    let next_is_name = matches!(p.peek_at(1), MetaTokenKind::Ident(_));
    if p.at_word("interface") && next_is_name {
        p.bump();
        let (name, loc) = p.ident("an interface name")?;
        p.expect_punct(';')?;
        f.interfaces.push(Declared::new(name, loc));
    } else if p.at_word("external") && next_is_name {
        p.bump();
        let (name, loc) = p.ident("an external name")?;
        p.expect_punct(';')?;
        f.externals.push(Declared::new(name, loc));
    } else if p.at_word("token") && next_is_name {
        p.bump();
        let (name, loc) = p.ident("a token name")?;
        p.expect_punct('=')?;
        let pattern = match &p.peek().kind {
            MetaTokenKind::Regex(r) => r.clone(),
            _ => return Err(p.unexpected("a /regex/")),
        };
        p.bump();
        p.expect_punct(';')?;
        f.tokens.push(TokenProduction { name, pattern, loc });
    } else if p.at_word("concept") && next_is_name {
        let loc = p.loc();
        p.bump();
        let (name, _) = p.ident("a concept name")?;
        if name == "texteditor" {
            let concept = texteditor_concept(p, loc)?;
            match &mut f.editor_concept {
                None => f.editor_concept = Some(concept),
                Some(existing) => {
                    existing.keywords.extend(concept.keywords);
                    existing.foldable.extend(concept.foldable);
                    existing.segments.extend(concept.segments);
                }
            }
        } else {
            let body = p.opaque_block()?;
            f.opaque_concepts.push(OpaqueConcept { name, body, loc });
        }
    } else {
        f.productions.push(production(p)?);
    }
    Ok(())
}

fn production(p: &mut MetaParser<'_>) -> PResult<Production> {
    let (name, loc) = p.ident("a production, 'interface', 'external', 'token' or 'concept'")?;
    let mut implements = Vec::new();
    if p.at_word("implements") && !matches!(p.peek_at(1), MetaTokenKind::Punct('=')) {
        p.bump();
        implements = p.ident_list("an interface name")?.into_iter().map(|d| d.name).collect();
    }
    p.expect_punct('=')?;
    let body = alternative(p)?;
    p.expect_punct(';')?;
    Ok(Production { name, implements, body, loc })
}

fn alternative(p: &mut MetaParser<'_>) -> PResult<BodyExpr> {
    let mut branches = vec![sequence(p)?];
    while p.eat_punct('|') {
        branches.push(sequence(p)?);
    }
    Ok(if branches.len() == 1 { branches.pop().unwrap() } else { BodyExpr::Alternative(branches) })
}

fn starts_item(k: &MetaTokenKind) -> bool {
    matches!(k, MetaTokenKind::Ident(_) | MetaTokenKind::Str(_) | MetaTokenKind::Punct('(' | '['))
}

fn sequence(p: &mut MetaParser<'_>) -> PResult<BodyExpr> {
    let mut items = Vec::new();
    while starts_item(&p.peek().kind) {
        items.push(item(p)?);
    }
    match items.len() {
        0 => Err(p.unexpected("a grammar element")),
        1 => Ok(items.pop().unwrap()),
        _ => Ok(BodyExpr::Sequence(items)),
    }
}

fn item(p: &mut MetaParser<'_>) -> PResult<BodyExpr> {
    let label = match (&p.peek().kind, p.peek_at(1)) {
        (MetaTokenKind::Ident(l), MetaTokenKind::Punct(':')) => {
            let l = l.clone();
            p.bump();
            p.bump();
            Some(l)
        }
        _ => None,
    };
    let loc = p.loc();
    let primary = match p.peek().kind.clone() {
        MetaTokenKind::Str(text) => {
            p.bump();
            if text.is_empty() || text.chars().any(char::is_whitespace) {
                return Err(p.error_at(loc, "terminals must be non-empty and contain no whitespace"));
            }
            BodyExpr::Terminal { text, label }
        }
        MetaTokenKind::Ident(target) => {
            p.bump();
            BodyExpr::NonterminalRef { target, label, loc }
        }
        MetaTokenKind::Punct('(') => {
            p.bump();
            let inner = alternative(p)?;
            p.expect_punct(')')?;
            BodyExpr::Block { inner: Box::new(inner), label }
        }
        MetaTokenKind::Punct('[') => {
            p.bump();
            let keyword = p.string("a keyword string")?;
            p.expect_punct(']')?;
            let Some(label) = label else {
                return Err(p.error_at(loc, "presence flag [\"...\"] requires a label"));
            };
            BodyExpr::PresenceFlag { label, keyword }
        }
        _ => return Err(p.unexpected("a grammar element")),
    };
    let card = match p.peek().kind {
        MetaTokenKind::Punct('?') => Some(Cardinality::Optional),
        MetaTokenKind::Punct('*') => Some(Cardinality::Star),
        MetaTokenKind::Punct('+') => Some(Cardinality::Plus),
        _ => None,
    };
    Ok(match card {
        Some(card) => {
            p.bump();
            BodyExpr::Repeat { inner: Box::new(primary), card }
        }
        None => primary,
    })
}

fn texteditor_concept(p: &mut MetaParser<'_>, loc: Loc) -> PResult<FragmentEditorConcept> {
    let mut c = FragmentEditorConcept { loc, ..Default::default() };
    p.expect_punct('{')?;
    while !p.eat_punct('}') {
        let (clause, cloc) = p.ident("'keywords', 'foldable' or 'segment'")?;
        p.expect_punct(':')?;
        match clause.as_str() {
            "keywords" => loop {
                let kw = match &p.peek().kind {
                    MetaTokenKind::Ident(s) | MetaTokenKind::Str(s) => s.clone(),
                    _ => return Err(p.unexpected("a keyword")),
                };
                p.bump();
                c.keywords.push(kw);
                if !p.eat_punct(',') {
                    p.expect_punct(';')?;
                    break;
                }
            },
            "foldable" => {
                c.foldable.extend(p.ident_list("a nonterminal name")?);
                p.expect_punct(';')?;
            }
            "segment" => {
                let (nonterminal, sloc) = p.ident("a nonterminal name")?;
                p.expect_punct('(')?;
                let icon_path = p.string("an icon path string")?;
                p.expect_punct(')')?;
                p.expect_word("show")?;
                p.expect_punct(':')?;
                let mut template = Vec::new();
                loop {
                    match &p.peek().kind {
                        MetaTokenKind::Str(s) => template.push(TemplateItem::Literal(s.clone())),
                        MetaTokenKind::Ident(s) => {
                            template.push(TemplateItem::AttributeRef(s.clone()))
                        }
                        _ => break,
                    }
                    p.bump();
                }
                p.expect_punct(';')?;
                c.segments.push(SegmentDef { nonterminal, icon_path, template, loc: sloc });
            }
            other => {
                return Err(p.error_at(cloc, format!("unknown texteditor clause '{other}'")));
            }
        }
    }
    Ok(c)
}

fn duplicate_declarations(f: &GrammarFragment) -> Vec<ProblemReport> {
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    let mut out = Vec::new();
    let decls = f
        .interfaces
        .iter()
        .map(|d| ("interface", d.name.as_str(), d.loc))
        .chain(f.externals.iter().map(|d| ("external", d.name.as_str(), d.loc)))
        .chain(f.tokens.iter().map(|t| ("token", t.name.as_str(), t.loc)))
        .chain(f.productions.iter().map(|p| ("production", p.name.as_str(), p.loc)));
    let mut decls: Vec<_> = decls.collect();
    decls.sort_by_key(|(_, _, loc)| (loc.line, loc.col));
    for (kind, name, loc) in decls {
        if let Some(prev) = seen.insert(name, kind) {
            let msg = if prev == kind && kind == "production" {
                format!("duplicate production name {name}")
            } else {
                format!("duplicate declaration of {name} (already declared as {prev})")
            };
            out.push(ProblemReport::error(msg, &f.origin, loc.line, loc.col, SOURCE));
        }
    }
    out
}
