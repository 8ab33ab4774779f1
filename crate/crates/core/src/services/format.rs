//! Pretty printing. Each fragment has a printer; the default one lays out
//! tokens: single spaces, `{ }` blocks indented by two, `;` ends a line.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::engine::{NodeItem, ParserHandle, SyntaxNode, Token, TokenKind};

/// Prints the nodes of one fragment. Implementations call back into the
/// chain for children, which may belong to other fragments.
pub trait FragmentPrinter: Send + Sync {
    fn print(&self, node: &SyntaxNode, out: &mut Layout<'_>, chain: &PrinterChain);
}

/// Walks a node's items and hands every token to the layout.
#[derive(Clone, Copy, Debug, Default)]
pub struct DefaultPrinter;

impl FragmentPrinter for DefaultPrinter {
    fn print(&self, node: &SyntaxNode, out: &mut Layout<'_>, chain: &PrinterChain) {
        for item in &node.items {
            match item {
                NodeItem::Token(t) => out.token(t, &node.fragment),
                NodeItem::Child(i) => chain.print(&node.children[*i], out),
            }
        }
    }
}

#[derive(Clone)]
pub struct PrinterChain {
    by_fragment: BTreeMap<String, Arc<dyn FragmentPrinter>>,
    fallback: Arc<dyn FragmentPrinter>,
}

impl Default for PrinterChain {
    fn default() -> Self {
        PrinterChain { by_fragment: BTreeMap::new(), fallback: Arc::new(DefaultPrinter) }
    }
}

impl PrinterChain {
    pub fn with(mut self, fragment: impl Into<String>, printer: Arc<dyn FragmentPrinter>) -> Self {
        self.by_fragment.insert(fragment.into(), printer);
        self
    }

    pub fn fragments(&self) -> impl Iterator<Item = &str> {
        self.by_fragment.keys().map(String::as_str)
    }

    pub fn print(&self, node: &SyntaxNode, out: &mut Layout<'_>) {
        self.by_fragment.get(&node.fragment).unwrap_or(&self.fallback).print(node, out, self);
    }
}

/// Token sink that decides spacing, line breaks and indentation. Breaks
/// are deferred so a trailing line comment can stay on its line.
pub struct Layout<'h> {
    engine: &'h ParserHandle,
    out: String,
    indent: usize,
    break_pending: bool,
    prev: Option<(Token, String)>,
}

impl<'h> Layout<'h> {
    pub fn new(engine: &'h ParserHandle) -> Self {
        Layout { engine, out: String::new(), indent: 0, break_pending: false, prev: None }
    }

    pub fn newline(&mut self) {
        self.break_pending = !self.out.is_empty();
    }

    fn write(&mut self, text: &str, glue: bool) {
        if self.break_pending {
            self.out.push('\n');
            self.out.push_str(&"  ".repeat(self.indent));
            self.break_pending = false;
        } else if !self.out.is_empty() && !glue {
            self.out.push(' ');
        }
        self.out.push_str(text);
    }

    /// Whether `next` may follow the previous token without a space and
    /// still scan as two tokens.
    fn may_glue(&self, next: &Token) -> bool {
        let Some((prev, fragment)) = &self.prev else { return false };
        if prev.kind.is_comment() || next.kind.is_comment() {
            return false;
        }
        let wanted = matches!(next.text.as_str(), ";" | "," | ")" | ".")
            || matches!(prev.text.as_str(), "(" | ".")
            || (next.text == "(" && prev.kind == TokenKind::Ident);
        if !wanted {
            return false;
        }
        let Some(mode) = self.engine.mode(fragment) else { return false };
        let joined = format!("{}{}", prev.text, next.text);
        mode.scan_token(&joined, 0) == (prev.kind, prev.text.len())
    }

    pub fn token(&mut self, t: &Token, fragment: &str) {
        match t.kind {
            TokenKind::Whitespace => return,
            TokenKind::CommentLine => {
                let trailing = self.prev.as_ref().is_some_and(|(p, _)| p.span.end_line == t.span.start_line);
                if trailing && self.break_pending {
                    self.out.push(' ');
                    self.out.push_str(&t.text);
                } else {
                    self.write(&t.text, false);
                }
                self.break_pending = true;
            }
            _ => {
                if t.text == "}" {
                    self.newline();
                    self.indent = self.indent.saturating_sub(1);
                }
                let glue = self.may_glue(t);
                self.write(&t.text, glue);
                match t.text.as_str() {
                    "{" => {
                        self.indent += 1;
                        self.newline();
                    }
                    ";" | "}" => self.newline(),
                    _ => {}
                }
            }
        }
        self.prev = Some((t.clone(), fragment.to_string()));
    }

    pub fn finish(mut self) -> String {
        if !self.out.is_empty() {
            self.out.push('\n');
        }
        self.out
    }
}

pub fn format(root: &SyntaxNode, chain: &PrinterChain, engine: &ParserHandle) -> String {
    let mut layout = Layout::new(engine);
    chain.print(root, &mut layout);
    layout.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::build::tests::engine;
    use crate::engine::parse;

    const G: &str = "grammar G { B = \"b\" n:IDENT \"{\" (B | C)* \"}\"; \
        C = \"call\" f:IDENT \"(\" (a:IDENT (\",\" a:IDENT)*)? \")\" \";\"; \
        concept texteditor { keywords: b, call; } }";

    #[test]
    fn blocks_indent() {
        let h = engine(G, "B");
        let root = parse("b x{b y{}call f(p,q);}", &h, "t").root.unwrap();
        let text = format(&root, &PrinterChain::default(), &h);
        assert_eq!(text, "b x {\n  b y {\n  }\n  call f(p, q);\n}\n");
        let again = parse(&text, &h, "t").root.unwrap();
        assert!(again.same_structure(&root));
    }

    #[test]
    fn comments_survive() {
        let h = engine(G, "B");
        let src = "// head\nb x { /* inner */ call f(); // tail\n}";
        let root = parse(src, &h, "t").root.unwrap();
        let text = format(&root, &PrinterChain::default(), &h);
        assert_eq!(text, "// head\nb x {\n  /* inner */ call f(); // tail\n}\n");
        assert_eq!(format(&parse(&text, &h, "t").root.unwrap(), &PrinterChain::default(), &h), text);
    }

    /// Prints only the children of its nodes.
    struct ChildrenOnly;
    impl FragmentPrinter for ChildrenOnly {
        fn print(&self, node: &SyntaxNode, out: &mut Layout<'_>, chain: &PrinterChain) {
            node.children.iter().for_each(|c| chain.print(c, out));
        }
    }

    #[test]
    fn chain_dispatches_by_fragment() {
        let h = engine(G, "B");
        let root = parse("b x { call f(); }", &h, "t").root.unwrap();
        let other = PrinterChain::default().with("Other", Arc::new(ChildrenOnly));
        assert_eq!(format(&root, &other, &h), "b x {\n  call f();\n}\n");
        let own = PrinterChain::default().with("G", Arc::new(ChildrenOnly));
        assert_eq!(format(&root, &own, &h), "");
        assert_eq!(own.fragments().collect::<Vec<_>>(), vec!["G"]);
    }
}
