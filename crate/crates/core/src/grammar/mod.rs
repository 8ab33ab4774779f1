//! The grammar-definition language: fragments, tool configs, validation and
//! meta-level printing.

mod ast;
mod lexer;
mod parser;
mod printer;
mod tool;
mod validate;

pub use ast::*;
pub use lexer::{is_ident, quote};
pub use parser::parse_grammar;
pub use printer::{print_body, print_grammar};
pub use tool::{
    parse_tool_config, ActionKind, EmbeddingBinding, NamedAction, StartBinding, ToolConfig,
    ToolEditorConcept,
};
pub use validate::validate_fragment;
