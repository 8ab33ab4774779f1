use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::service::LanguageService;
use super::workflow::Workspace;
use crate::report::ProblemReport;
use crate::span::Span;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextEdit {
    pub span: Span,
    pub new_text: String,
}

/// What an action produced; applying it is up to the caller.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionResult {
    TextEdits { path: PathBuf, edits: Vec<TextEdit> },
    NewFiles { files: BTreeMap<PathBuf, String> },
    Reports { reports: Vec<ProblemReport> },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActionError {
    #[error("unknown action {0}")]
    Unknown(String),
    #[error("{action}: {message}")]
    InvalidArguments { action: String, message: String },
}

/// Everything an editor action sees: the document exactly as in the
/// editor, its path and the selection (possibly zero-width).
pub struct EditorContext<'a> {
    pub text: &'a str,
    pub path: &'a Path,
    pub selection: Span,
    pub service: &'a LanguageService,
}

pub trait EditorAction: Send + Sync {
    fn run(&self, ctx: &EditorContext<'_>) -> Result<ActionResult, ActionError>;
}

/// Selected files with their projects, in selection order.
pub struct NavigatorContext<'a> {
    pub files: &'a [(PathBuf, String)],
    pub service: &'a LanguageService,
    pub workspace: &'a dyn Workspace,
}

pub trait NavigatorAction: Send + Sync {
    fn run(&self, ctx: &NavigatorContext<'_>) -> Result<ActionResult, ActionError>;
}
