//! Executable parsing of composed languages: modal scanning, ordered-choice
//! descent with memoization, and generic syntax trees.

pub(crate) mod build;
mod parse;
mod token;
mod tree;

pub use build::{build_engine, lex, ParserHandle};
pub use parse::{parse, parse_production, ParseOutcome};
pub use token::{Mode, Token, TokenKind};
pub use tree::{AttrValue, NodeItem, SyntaxNode};
