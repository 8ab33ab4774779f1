use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::actions::{ActionError, ActionResult, EditorAction, EditorContext, NavigatorAction, NavigatorContext};
use super::demo;
use super::features::{folding_ranges, highlight, outline, FoldingRange, HighlightSpan, OutlineSymbol};
use super::format::{format, DefaultPrinter, FragmentPrinter, PrinterChain};
use super::workflow::{diagnostics, WorkflowPass, Workspace};
use crate::compose::{compose, ComposedLanguage, GrammarPathLoader};
use crate::engine::{build_engine, parse, ParseOutcome, ParserHandle};
use crate::grammar::{parse_tool_config, ActionKind, NamedAction, ToolConfig};
use crate::report::ProblemReport;
use crate::span::Span;

/// Named implementations that tool configs refer to: workflows by name,
/// actions and pretty printers by their identifiers.
#[derive(Clone, Default)]
pub struct Extensions {
    workflows: BTreeMap<String, Arc<dyn WorkflowPass>>,
    editor_actions: BTreeMap<String, Arc<dyn EditorAction>>,
    navigator_actions: BTreeMap<String, Arc<dyn NavigatorAction>>,
    printers: BTreeMap<String, Arc<dyn FragmentPrinter>>,
}

impl Extensions {
    pub fn new() -> Self {
        Self::default()
    }

    /// The MSC example's workflows and actions.
    pub fn demo() -> Self {
        Self::new()
            .with_workflow(Arc::new(demo::SymtabPass))
            .with_workflow(Arc::new(demo::CheckPass))
            .with_editor_action(demo::TRACE_ACTION, Arc::new(demo::TraceAction))
            .with_navigator_action(demo::COMPOSE_ACTION, Arc::new(demo::ComposeAction))
    }

    pub fn with_workflow(mut self, pass: Arc<dyn WorkflowPass>) -> Self {
        self.workflows.insert(pass.name().to_string(), pass);
        self
    }

    pub fn with_editor_action(mut self, id: &str, action: Arc<dyn EditorAction>) -> Self {
        self.editor_actions.insert(id.to_string(), action);
        self
    }

    pub fn with_navigator_action(mut self, id: &str, action: Arc<dyn NavigatorAction>) -> Self {
        self.navigator_actions.insert(id.to_string(), action);
        self
    }

    pub fn with_printer(mut self, name: &str, printer: Arc<dyn FragmentPrinter>) -> Self {
        self.printers.insert(name.to_string(), printer);
        self
    }
}

/// Everything an editor shows for one document version.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditorFeatureSet {
    pub highlights: Vec<HighlightSpan>,
    pub folds: Vec<FoldingRange>,
    pub outline: Vec<OutlineSymbol>,
    pub diagnostics: Vec<ProblemReport>,
}

impl EditorFeatureSet {
    /// Canonical dump: sorted keys, spans as `[sl, sc, el, ec]`.
    pub fn to_json(&self) -> Value {
        fn symbol(s: &OutlineSymbol) -> Value {
            json!({
                "label": s.label,
                "icon": s.icon_path,
                "span": s.span.to_array(),
                "children": s.children.iter().map(symbol).collect::<Vec<_>>(),
            })
        }
        json!({
            "highlights": self.highlights.iter()
                .map(|h| json!({"span": h.span.to_array(), "category": h.category}))
                .collect::<Vec<_>>(),
            "folds": self.folds.iter()
                .map(|f| json!({"span": f.span.to_array(), "placeholder": f.placeholder}))
                .collect::<Vec<_>>(),
            "outline": self.outline.iter().map(symbol).collect::<Vec<_>>(),
            "diagnostics": self.diagnostics.iter()
                .map(|d| json!({
                    "severity": d.severity,
                    "message": d.message,
                    "file": d.file,
                    "line": d.line,
                    "column": d.column,
                    "source": d.source,
                }))
                .collect::<Vec<_>>(),
        })
    }
}

/// A composed language with its engine and resolved extensions; the
/// stand-in for the generated editor of one language.
pub struct LanguageService {
    pub language: ComposedLanguage,
    pub engine: ParserHandle,
    workflows: Vec<Arc<dyn WorkflowPass>>,
    editor_actions: BTreeMap<String, Arc<dyn EditorAction>>,
    navigator_actions: BTreeMap<String, Arc<dyn NavigatorAction>>,
    printers: Option<PrinterChain>,
    warnings: Vec<ProblemReport>,
}

impl LanguageService {
    pub fn new(language: ComposedLanguage, ext: &Extensions) -> Result<Self, Vec<ProblemReport>> {
        let engine = build_engine(&language)?;
        let mut warnings = engine.warnings().to_vec();
        let cfg = &language.effective_editor;
        let warn = |msg: String| ProblemReport::warning(msg, "", 1, 1, "service");

        let mut workflows = Vec::new();
        for name in &cfg.workflows {
            match ext.workflows.get(name) {
                Some(w) => workflows.push(w.clone()),
                None => warnings.push(warn(format!("unknown workflow {name} is skipped"))),
            }
        }
        let mut editor_actions = BTreeMap::new();
        let mut navigator_actions = BTreeMap::new();
        for a in cfg.actions() {
            let found = match a.kind {
                ActionKind::Editor => ext
                    .editor_actions
                    .get(&a.action_id)
                    .map(|x| editor_actions.insert(a.action_id.clone(), x.clone()))
                    .is_some(),
                ActionKind::Navigator => ext
                    .navigator_actions
                    .get(&a.action_id)
                    .map(|x| navigator_actions.insert(a.action_id.clone(), x.clone()))
                    .is_some(),
            };
            if !found {
                warnings.push(warn(format!("no implementation for action {}", a.action_id)));
            }
        }

        let printers = cfg.format_available.then(|| {
            let mut chain = PrinterChain::default();
            for name in &language.pretty_printers {
                let simple = name.rsplit('.').next().unwrap_or(name);
                let printer: Arc<dyn FragmentPrinter> = ext
                    .printers
                    .get(name)
                    .or_else(|| ext.printers.get(simple))
                    .cloned()
                    .unwrap_or_else(|| Arc::new(DefaultPrinter));
                let fragment = language.fragments.keys().filter(|f| simple.starts_with(f.as_str())).max_by_key(|f| f.len());
                match fragment {
                    Some(f) => chain = chain.with(f.clone(), printer),
                    None => warnings.push(warn(format!("printer {name} matches no fragment; the default printer is used"))),
                }
            }
            chain
        });

        Ok(LanguageService { language, engine, workflows, editor_actions, navigator_actions, printers, warnings })
    }

    /// Reads a tool config, composes it from grammars below `roots` and
    /// builds the service.
    pub fn load(tool: &Path, roots: &[PathBuf], ext: &Extensions) -> Result<Self, Vec<ProblemReport>> {
        let text = std::fs::read_to_string(tool)
            .map_err(|e| vec![ProblemReport::error(format!("cannot read file: {e}"), tool, 1, 1, "service")])?;
        let cfg = parse_tool_config(&text, tool)?;
        Self::from_config(&cfg, roots, ext)
    }

    pub fn from_config(cfg: &ToolConfig, roots: &[PathBuf], ext: &Extensions) -> Result<Self, Vec<ProblemReport>> {
        let language = compose(cfg, &GrammarPathLoader::new(roots.iter().cloned()))?;
        let mut svc = Self::new(language, ext)?;
        svc.warnings.splice(0..0, cfg.warnings());
        Ok(svc)
    }

    pub fn warnings(&self) -> &[ProblemReport] {
        &self.warnings
    }

    pub fn parse(&self, text: &str, file: &Path) -> ParseOutcome {
        parse(text, &self.engine, file)
    }

    pub fn workflow_names(&self) -> Vec<&str> {
        self.workflows.iter().map(|w| w.name()).collect()
    }

    pub fn diagnostics(&self, outcome: &ParseOutcome, file: &Path, workspace: &dyn Workspace) -> Vec<ProblemReport> {
        let passes: Vec<&dyn WorkflowPass> = self.workflows.iter().map(|w| w.as_ref()).collect();
        diagnostics(outcome, &passes, file, workspace)
    }

    pub fn features(&self, text: &str, file: &Path, workspace: &dyn Workspace) -> EditorFeatureSet {
        let outcome = self.parse(text, file);
        self.features_of(&outcome, text, file, workspace)
    }

    pub fn features_of(
        &self,
        outcome: &ParseOutcome,
        text: &str,
        file: &Path,
        workspace: &dyn Workspace,
    ) -> EditorFeatureSet {
        let cfg = &self.language.effective_editor;
        let (folds, outline) = match &outcome.root {
            Some(root) => (folding_ranges(root, cfg, text), outline(root, cfg, text)),
            None => (Vec::new(), Vec::new()),
        };
        EditorFeatureSet {
            highlights: highlight(&outcome.tokens),
            folds,
            outline,
            diagnostics: self.diagnostics(outcome, file, workspace),
        }
    }

    pub fn format_available(&self) -> bool {
        self.printers.is_some()
    }

    /// The format action: only offered when the tool configures printers.
    pub fn format(&self, text: &str, file: &Path) -> Result<String, Vec<ProblemReport>> {
        let Some(chain) = &self.printers else {
            return Err(vec![ProblemReport::error("no pretty printer is configured", file, 1, 1, "format")]);
        };
        self.format_with(chain, text, file)
    }

    /// Formats with the configured printers, or the default printer when
    /// there are none.
    pub fn format_or_default(&self, text: &str, file: &Path) -> Result<String, Vec<ProblemReport>> {
        match &self.printers {
            Some(chain) => self.format_with(chain, text, file),
            None => self.format_with(&PrinterChain::default(), text, file),
        }
    }

    fn format_with(&self, chain: &PrinterChain, text: &str, file: &Path) -> Result<String, Vec<ProblemReport>> {
        let outcome = self.parse(text, file);
        match outcome.root {
            Some(root) => Ok(format(&root, chain, &self.engine)),
            None => Err(outcome.problems),
        }
    }

    pub fn actions(&self) -> Vec<&NamedAction> {
        self.language.effective_editor.actions().collect()
    }

    pub fn run_editor_action(
        &self,
        id: &str,
        text: &str,
        path: &Path,
        selection: Span,
    ) -> Result<ActionResult, ActionError> {
        let action = self.editor_actions.get(id).ok_or_else(|| ActionError::Unknown(id.to_string()))?;
        action.run(&EditorContext { text, path, selection, service: self })
    }

    pub fn run_navigator_action(
        &self,
        id: &str,
        files: &[(PathBuf, String)],
        workspace: &dyn Workspace,
    ) -> Result<ActionResult, ActionError> {
        let action = self.navigator_actions.get(id).ok_or_else(|| ActionError::Unknown(id.to_string()))?;
        if files.is_empty() {
            return Err(ActionError::InvalidArguments { action: id.to_string(), message: "no files selected".into() });
        }
        action.run(&NavigatorContext { files, service: self, workspace })
    }
}
