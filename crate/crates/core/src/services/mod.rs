//! Editor features computed from a parse: highlighting, folding, outline,
//! diagnostics, formatting and actions.

mod actions;
pub mod demo;
mod features;
mod format;
mod service;
mod workflow;

pub use actions::{
    ActionError, ActionResult, EditorAction, EditorContext, NavigatorAction, NavigatorContext, TextEdit,
};
pub use features::{
    folding_ranges, highlight, outline, render_segment_label, FoldingRange, HighlightCategory, HighlightSpan,
    OutlineSymbol,
};
pub use format::{format, DefaultPrinter, FragmentPrinter, Layout, PrinterChain};
pub use service::{EditorFeatureSet, Extensions, LanguageService};
pub use workflow::{diagnostics, FsWorkspace, MemoryWorkspace, Workspace, WorkflowPass};
