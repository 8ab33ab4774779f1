//! Language server for one composed language: full document sync,
//! diagnostics, folding, outline, semantic highlighting, formatting and
//! the configured actions as commands.

mod convert;
mod semantic;

use std::collections::BTreeMap;
use std::error::Error;
use std::path::{Path, PathBuf};

use fragmentc_core::engine::ParseOutcome;
use fragmentc_core::grammar::ActionKind;
use fragmentc_core::services::{EditorFeatureSet, LanguageService, Workspace};
use fragmentc_core::{ProblemReport, Severity, Span};
use lsp_server::{Connection, ErrorCode, Message, Notification, Request, RequestId, Response};
use lsp_types::notification::{
    DidChangeTextDocument, DidCloseTextDocument, DidOpenTextDocument, Notification as _, PublishDiagnostics,
};
use lsp_types::request::{
    DocumentSymbolRequest, ExecuteCommand, FoldingRangeRequest, Formatting, Request as _, SemanticTokensFullRequest,
};
use lsp_types::{
    Diagnostic, DiagnosticSeverity, DocumentSymbol, DocumentSymbolResponse, ExecuteCommandOptions,
    FoldingRange, FoldingRangeKind, FoldingRangeProviderCapability, OneOf, PublishDiagnosticsParams,
    SemanticTokens, SemanticTokensFullOptions, SemanticTokensOptions, SemanticTokensResult,
    SemanticTokensServerCapabilities, ServerCapabilities, SymbolKind, TextDocumentSyncCapability,
    TextDocumentSyncKind, TextEdit, Uri,
};
use serde_json::Value;

pub use convert::{path_to_uri, uri_to_path, Text};

pub type BoxError = Box<dyn Error + Send + Sync>;

/// One language of a served bundle. An empty extension list claims every
/// file no other language claims.
pub struct Language {
    pub extensions: Vec<String>,
    pub service: LanguageService,
}

impl Language {
    pub fn new(service: LanguageService, extensions: Vec<String>) -> Self {
        Language { extensions, service }
    }
}

fn language_of(languages: &[Language], path: &Path) -> Option<usize> {
    let ext = path.extension().and_then(|e| e.to_str());
    ext.and_then(|e| languages.iter().position(|l| l.extensions.iter().any(|x| x == e)))
        .or_else(|| languages.iter().position(|l| l.extensions.is_empty()))
}

pub fn capabilities(languages: &[Language]) -> ServerCapabilities {
    let mut commands: Vec<String> = Vec::new();
    for l in languages {
        for a in l.service.actions() {
            if !commands.contains(&a.action_id) {
                commands.push(a.action_id.clone());
            }
        }
    }
    ServerCapabilities {
        text_document_sync: Some(TextDocumentSyncCapability::Kind(TextDocumentSyncKind::FULL)),
        folding_range_provider: Some(FoldingRangeProviderCapability::Simple(true)),
        document_symbol_provider: Some(OneOf::Left(true)),
        semantic_tokens_provider: Some(SemanticTokensServerCapabilities::SemanticTokensOptions(
            SemanticTokensOptions {
                legend: semantic::legend(),
                full: Some(SemanticTokensFullOptions::Bool(true)),
                ..Default::default()
            },
        )),
        document_formatting_provider: languages.iter().any(|l| l.service.format_available()).then_some(OneOf::Left(true)),
        execute_command_provider: (!commands.is_empty())
            .then(|| ExecuteCommandOptions { commands, ..Default::default() }),
        ..Default::default()
    }
}

/// Performs the initialize handshake, then serves until shutdown.
pub fn run(conn: &Connection, languages: &[Language]) -> Result<(), BoxError> {
    conn.initialize(serde_json::to_value(capabilities(languages))?)?;
    let names: Vec<&str> = languages.iter().map(|l| l.service.language.name.as_str()).collect();
    log::info!("initialized for {}", names.join(", "));
    Server::new(conn, languages).main_loop()
}

/// Parse and features of one document version.
struct Analysis {
    version: i32,
    features: EditorFeatureSet,
}

struct Document {
    text: String,
    version: i32,
    path: PathBuf,
    language: Option<usize>,
    analysis: Option<Analysis>,
}

/// Open documents shadow the file system for workflow passes and
/// navigator actions.
struct Overlay<'a>(&'a BTreeMap<Uri, Document>);

impl Workspace for Overlay<'_> {
    fn read(&self, path: &Path) -> Option<String> {
        match self.0.values().find(|d| d.path == path) {
            Some(d) => Some(d.text.clone()),
            None => std::fs::read_to_string(path).ok(),
        }
    }
}

struct RequestError(ErrorCode, String);

impl<E: Error> From<E> for RequestError {
    fn from(e: E) -> Self {
        RequestError(ErrorCode::InvalidParams, e.to_string())
    }
}

fn invalid(msg: String) -> RequestError {
    RequestError(ErrorCode::InvalidParams, msg)
}

type Handled = Result<Value, RequestError>;

pub struct Server<'a> {
    conn: &'a Connection,
    languages: &'a [Language],
    docs: BTreeMap<Uri, Document>,
}

impl<'a> Server<'a> {
    pub fn new(conn: &'a Connection, languages: &'a [Language]) -> Self {
        Server { conn, languages, docs: BTreeMap::new() }
    }

    pub fn main_loop(mut self) -> Result<(), BoxError> {
        for msg in &self.conn.receiver {
            match msg {
                Message::Request(req) => {
                    if self.conn.handle_shutdown(&req)? {
                        log::info!("shutdown");
                        return Ok(());
                    }
                    log::debug!("request {} {}", req.id, req.method);
                    let id = req.id.clone();
                    let resp = match self.request(req) {
                        Ok(v) => Response::new_ok(id, v),
                        Err(RequestError(code, msg)) => {
                            log::warn!("request {id} failed: {msg}");
                            Response::new_err(id, code as i32, msg)
                        }
                    };
                    self.conn.sender.send(resp.into())?;
                }
                Message::Notification(n) => self.notification(n)?,
                Message::Response(_) => {}
            }
        }
        Ok(())
    }

    fn notification(&mut self, n: Notification) -> Result<(), BoxError> {
        match n.method.as_str() {
            DidOpenTextDocument::METHOD => {
                let p: lsp_types::DidOpenTextDocumentParams = serde_json::from_value(n.params)?;
                let doc = p.text_document;
                let path = uri_to_path(&doc.uri);
                let language = language_of(self.languages, &path);
                if language.is_none() {
                    log::warn!("no bundled language for {}", doc.uri.as_str());
                }
                let entry = Document { text: doc.text, version: doc.version, path, language, analysis: None };
                self.docs.insert(doc.uri.clone(), entry);
                self.refresh(&doc.uri)
            }
            DidChangeTextDocument::METHOD => {
                let p: lsp_types::DidChangeTextDocumentParams = serde_json::from_value(n.params)?;
                let uri = p.text_document.uri;
                if let (Some(doc), Some(change)) = (self.docs.get_mut(&uri), p.content_changes.into_iter().last()) {
                    doc.text = change.text;
                    doc.version = p.text_document.version;
                    doc.analysis = None;
                }
                self.refresh(&uri)
            }
            DidCloseTextDocument::METHOD => {
                let p: lsp_types::DidCloseTextDocumentParams = serde_json::from_value(n.params)?;
                if self.docs.remove(&p.text_document.uri).is_some_and(|d| d.language.is_some()) {
                    self.send_diagnostics(p.text_document.uri, Vec::new(), None)?;
                }
                Ok(())
            }
            other => {
                log::debug!("ignored notification {other}");
                Ok(())
            }
        }
    }

    /// Re-analyses a document and publishes its diagnostics.
    fn refresh(&mut self, uri: &Uri) -> Result<(), BoxError> {
        let Some(doc) = self.docs.get(uri) else { return Ok(()) };
        let Some(lang) = doc.language.map(|i| &self.languages[i]) else { return Ok(()) };
        let outcome = lang.service.parse(&doc.text, &doc.path);
        let features = lang.service.features_of(&outcome, &doc.text, &doc.path, &Overlay(&self.docs));
        let text = Text::new(&doc.text);
        let diags = features.diagnostics.iter().map(|r| diagnostic(r, &outcome, &text)).collect();
        let version = doc.version;
        if let Some(doc) = self.docs.get_mut(uri) {
            doc.analysis = Some(Analysis { version, features });
        }
        self.send_diagnostics(uri.clone(), diags, Some(version))
    }

    fn send_diagnostics(&self, uri: Uri, diagnostics: Vec<Diagnostic>, version: Option<i32>) -> Result<(), BoxError> {
        let params = PublishDiagnosticsParams { uri, diagnostics, version };
        let n = Notification::new(PublishDiagnostics::METHOD.to_string(), params);
        self.conn.sender.send(n.into())?;
        Ok(())
    }

    fn document(&self, uri: &Uri) -> Result<&Document, RequestError> {
        self.docs.get(uri).ok_or_else(|| invalid(format!("document not open: {}", uri.as_str())))
    }

    /// The current analysis of an open document in a bundled language;
    /// None (after logging) for files no language claims.
    fn analysis(&self, uri: &Uri) -> Result<Option<(&Document, &Analysis)>, RequestError> {
        let doc = self.document(uri)?;
        match &doc.analysis {
            Some(a) if a.version == doc.version => Ok(Some((doc, a))),
            Some(_) => Err(RequestError(ErrorCode::ContentModified, "analysis is stale".into())),
            None => {
                log::warn!("no bundled language for {}", uri.as_str());
                Ok(None)
            }
        }
    }

    fn request(&mut self, req: Request) -> Handled {
        match req.method.as_str() {
            FoldingRangeRequest::METHOD => {
                let p: lsp_types::FoldingRangeParams = serde_json::from_value(req.params)?;
                let ranges: Vec<FoldingRange> = match self.analysis(&p.text_document.uri)? {
                    None => Vec::new(),
                    Some((_, a)) => a
                        .features
                        .folds
                        .iter()
                        .map(|f| FoldingRange {
                            start_line: f.span.start_line - 1,
                            end_line: f.span.end_line - 1,
                            kind: Some(FoldingRangeKind::Region),
                            collapsed_text: Some(f.placeholder.clone()),
                            ..Default::default()
                        })
                        .collect(),
                };
                Ok(serde_json::to_value(ranges)?)
            }
            DocumentSymbolRequest::METHOD => {
                let p: lsp_types::DocumentSymbolParams = serde_json::from_value(req.params)?;
                let symbols = match self.analysis(&p.text_document.uri)? {
                    None => Vec::new(),
                    Some((doc, a)) => {
                        let text = Text::new(&doc.text);
                        a.features.outline.iter().map(|s| symbol(s, &text)).collect()
                    }
                };
                Ok(serde_json::to_value(DocumentSymbolResponse::Nested(symbols))?)
            }
            SemanticTokensFullRequest::METHOD => {
                let p: lsp_types::SemanticTokensParams = serde_json::from_value(req.params)?;
                let data = match self.analysis(&p.text_document.uri)? {
                    None => Vec::new(),
                    Some((doc, a)) => semantic::encode(&a.features.highlights, &Text::new(&doc.text)),
                };
                Ok(serde_json::to_value(SemanticTokensResult::Tokens(SemanticTokens { result_id: None, data }))?)
            }
            Formatting::METHOD => {
                let p: lsp_types::DocumentFormattingParams = serde_json::from_value(req.params)?;
                let doc = self.document(&p.text_document.uri)?;
                let Some(lang) = doc.language.map(|i| &self.languages[i]) else {
                    log::warn!("no bundled language for {}", p.text_document.uri.as_str());
                    return Ok(serde_json::to_value(Vec::<TextEdit>::new())?);
                };
                let formatted = lang.service.format(&doc.text, &doc.path).map_err(|reports| {
                    let first = reports.iter().find(|r| r.is_error()).or(reports.first());
                    RequestError(ErrorCode::RequestFailed, first.map_or("cannot format".into(), |r| r.to_string()))
                })?;
                let edits = if formatted == doc.text {
                    Vec::new()
                } else {
                    vec![TextEdit::new(Text::new(&doc.text).full_range(), formatted)]
                };
                Ok(serde_json::to_value(edits)?)
            }
            ExecuteCommand::METHOD => {
                let p: lsp_types::ExecuteCommandParams = serde_json::from_value(req.params)?;
                self.execute(&p.command, p.arguments)
            }
            other => Err(RequestError(ErrorCode::MethodNotFound, format!("unsupported request {other}"))),
        }
    }

    /// Editor actions take `[uri, range?]`, navigator actions a list of
    /// URIs; both answer with the action result as JSON. The language is
    /// the first argument's, else the first one offering the command.
    fn execute(&self, command: &str, args: Vec<Value>) -> Handled {
        let uris: Vec<Uri> = args.iter().filter_map(|a| serde_json::from_value(a.clone()).ok()).collect();
        let offers = |l: &Language| l.service.actions().iter().any(|a| a.action_id == command);
        let lang = uris
            .first()
            .and_then(|u| language_of(self.languages, &uri_to_path(u)))
            .map(|i| &self.languages[i])
            .filter(|l| offers(l))
            .or_else(|| self.languages.iter().find(|l| offers(l)))
            .ok_or_else(|| invalid(format!("unknown command {command}")))?;
        let action = lang.service.actions().into_iter().find(|a| a.action_id == command).expect("offered");
        let result = match action.kind {
            ActionKind::Editor => {
                let uri = uris.first().ok_or_else(|| invalid(format!("{command} needs a document URI")))?;
                let doc = self.document(uri)?;
                let text = Text::new(&doc.text);
                let selection = args
                    .get(1)
                    .and_then(|r| serde_json::from_value::<lsp_types::Range>(r.clone()).ok())
                    .map_or(Span::new(1, 1, 1, 1), |r| text.span(r));
                lang.service.run_editor_action(command, &doc.text, &doc.path, selection)
            }
            ActionKind::Navigator => {
                let files: Vec<(PathBuf, String)> = uris
                    .iter()
                    .map(|u| {
                        let path = uri_to_path(u);
                        let project = path.parent().map(|p| p.display().to_string()).unwrap_or_default();
                        (path, project)
                    })
                    .collect();
                lang.service.run_navigator_action(command, &files, &Overlay(&self.docs))
            }
        };
        let result = result.map_err(|e| invalid(e.to_string()))?;
        Ok(serde_json::to_value(result)?)
    }
}

fn diagnostic(r: &ProblemReport, outcome: &ParseOutcome, text: &Text<'_>) -> Diagnostic {
    // Underline the token the report points at, or one character.
    let span = outcome
        .tokens
        .iter()
        .find(|t| t.span.start() == (r.line, r.column) && !t.kind.is_trivia())
        .map_or(Span::new(r.line, r.column, r.line, r.column + 1), |t| t.span);
    Diagnostic {
        range: text.range(span),
        severity: Some(match r.severity {
            Severity::Error => DiagnosticSeverity::ERROR,
            Severity::Warning => DiagnosticSeverity::WARNING,
            Severity::Info => DiagnosticSeverity::INFORMATION,
        }),
        source: Some(r.source.clone()),
        message: r.message.clone(),
        ..Default::default()
    }
}

#[allow(deprecated)]
fn symbol(s: &fragmentc_core::services::OutlineSymbol, text: &Text<'_>) -> DocumentSymbol {
    let range = text.range(s.span);
    DocumentSymbol {
        name: s.label.clone(),
        detail: None,
        kind: if s.children.is_empty() { SymbolKind::EVENT } else { SymbolKind::OBJECT },
        tags: None,
        deprecated: None,
        range,
        selection_range: range,
        children: (!s.children.is_empty()).then(|| s.children.iter().map(|c| symbol(c, text)).collect()),
    }
}

/// Sends a request over `conn` and waits for its response; skips
/// notifications. For tests and simple clients.
pub fn round_trip(conn: &Connection, id: i32, method: &str, params: Value) -> Result<Response, BoxError> {
    conn.sender.send(Request::new(RequestId::from(id), method.to_string(), params).into())?;
    for msg in &conn.receiver {
        if let Message::Response(r) = msg {
            return Ok(r);
        }
    }
    Err("connection closed".into())
}
