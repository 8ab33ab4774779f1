//! Grammar fragments, their composition into languages, an interpreting
//! parser and the editor services built on top of it.

pub mod compose;
pub mod engine;
pub mod grammar;
pub mod report;
pub mod services;
pub mod span;

pub use report::{has_errors, ProblemReport, Severity};
pub use span::{LineIndex, Span};
