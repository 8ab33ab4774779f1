use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::engine::{ParseOutcome, SyntaxNode};
use crate::report::ProblemReport;

/// Read access to other documents, e.g. open editor buffers over disk.
pub trait Workspace {
    fn read(&self, path: &Path) -> Option<String>;
}

/// Reads from the file system.
#[derive(Clone, Copy, Debug, Default)]
pub struct FsWorkspace;

impl Workspace for FsWorkspace {
    fn read(&self, path: &Path) -> Option<String> {
        std::fs::read_to_string(path).ok()
    }
}

/// In-memory documents, falling back to nothing.
#[derive(Clone, Debug, Default)]
pub struct MemoryWorkspace {
    pub documents: BTreeMap<PathBuf, String>,
}

impl Workspace for MemoryWorkspace {
    fn read(&self, path: &Path) -> Option<String> {
        self.documents.get(path).cloned()
    }
}

/// A named analysis run after a successful parse. Must not modify
/// documents; everything it finds goes into the returned reports.
pub trait WorkflowPass: Send + Sync {
    fn name(&self) -> &str;
    fn run(&self, root: &SyntaxNode, file: &Path, workspace: &dyn Workspace) -> Vec<ProblemReport>;
}

/// Parser reports first, then each pass in order; passes only run on a
/// tree.
pub fn diagnostics(
    outcome: &ParseOutcome,
    passes: &[&dyn WorkflowPass],
    file: &Path,
    workspace: &dyn Workspace,
) -> Vec<ProblemReport> {
    let mut out = outcome.problems.clone();
    if let Some(root) = &outcome.root {
        for p in passes {
            out.extend(p.run(root, file, workspace));
        }
    }
    out
}
