use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::token::Token;
use crate::span::Span;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttrValue {
    Text(String),
    Bool(bool),
    /// Index into the owning node's `children`.
    Node(usize),
    List(Vec<AttrValue>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeItem {
    Token(Token),
    Child(usize),
}

/// Generic syntax tree node. `items` interleaves the node's own tokens
/// (comments included) with its children in source order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxNode {
    /// Qualified production name, e.g. `MSC.Instance`.
    pub production: String,
    pub fragment: String,
    pub attributes: BTreeMap<String, AttrValue>,
    pub children: Vec<SyntaxNode>,
    pub items: Vec<NodeItem>,
    pub span: Span,
    pub range: Range<usize>,
}

impl SyntaxNode {
    pub fn local_name(&self) -> &str {
        self.production.rsplit('.').next().unwrap_or(&self.production)
    }

    pub fn attr(&self, label: &str) -> Option<&AttrValue> {
        self.attributes.get(label)
    }

    pub fn text(&self, label: &str) -> Option<&str> {
        match self.attr(label)? {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn flag(&self, label: &str) -> bool {
        matches!(self.attr(label), Some(AttrValue::Bool(true)))
    }

    pub fn node(&self, label: &str) -> Option<&SyntaxNode> {
        match self.attr(label)? {
            AttrValue::Node(i) => self.children.get(*i),
            _ => None,
        }
    }

    /// Values of a label as a list; scalars yield one element.
    pub fn values(&self, label: &str) -> Vec<&AttrValue> {
        match self.attr(label) {
            Some(AttrValue::List(vs)) => vs.iter().collect(),
            Some(v) => vec![v],
            None => Vec::new(),
        }
    }

    pub fn texts(&self, label: &str) -> Vec<&str> {
        self.values(label)
            .into_iter()
            .filter_map(|v| match v {
                AttrValue::Text(s) => Some(s.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn nodes(&self, label: &str) -> Vec<&SyntaxNode> {
        self.values(label)
            .into_iter()
            .filter_map(|v| match v {
                AttrValue::Node(i) => self.children.get(*i),
                _ => None,
            })
            .collect()
    }

    pub fn source<'t>(&self, text: &'t str) -> &'t str {
        &text[self.range.clone()]
    }

    /// Preorder traversal.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a SyntaxNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    /// All tokens of the subtree in source order (no whitespace).
    pub fn tokens(&self) -> Vec<&Token> {
        let mut out = Vec::new();
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens<'a>(&'a self, out: &mut Vec<&'a Token>) {
        for item in &self.items {
            match item {
                NodeItem::Token(t) => out.push(t),
                NodeItem::Child(i) => self.children[*i].collect_tokens(out),
            }
        }
    }

    /// Equality ignoring spans and comments.
    pub fn same_structure(&self, other: &SyntaxNode) -> bool {
        let code = |n: &SyntaxNode| -> Vec<(Option<(super::TokenKind, String)>, Option<usize>)> {
            n.items
                .iter()
                .filter_map(|i| match i {
                    NodeItem::Token(t) if t.kind.is_comment() => None,
                    NodeItem::Token(t) => Some((Some((t.kind, t.text.clone())), None)),
                    NodeItem::Child(c) => Some((None, Some(*c))),
                })
                .collect()
        };
        self.production == other.production
            && self.attributes == other.attributes
            && self.children.len() == other.children.len()
            && code(self) == code(other)
            && self.children.iter().zip(&other.children).all(|(a, b)| a.same_structure(b))
    }
}
