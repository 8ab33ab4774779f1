use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use fragmentc_core::compose::{
    bundle_tools, check_fragment, compose, BundleManifest, ComposedLanguage, GrammarPathLoader, LoadError,
};
use fragmentc_core::engine::{AttrValue, SyntaxNode};
use fragmentc_core::grammar::{parse_tool_config, ToolConfig, IDENT};
use fragmentc_core::services::{ActionResult, Extensions, FsWorkspace, LanguageService, TextEdit};
use fragmentc_core::{has_errors, LineIndex, ProblemReport, Span};
use fragmentc_lsp::Language;
use serde_json::{json, Value};

use crate::{Cli, Command};

pub const GRAMMAR_PATH_ENV: &str = "FRAGMENTC_GRAMMAR_PATH";

/// Outcome of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    /// The inputs have errors; exit code 1.
    InputError,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> ExitCode {
        match s {
            Status::Success => ExitCode::SUCCESS,
            Status::InputError => ExitCode::from(1),
        }
    }
}

/// Internal failures (exit code 2).
type Fallible<T> = Result<T, String>;

fn status_of(reports: &[ProblemReport]) -> Status {
    if has_errors(reports) {
        Status::InputError
    } else {
        Status::Success
    }
}

fn print_reports(reports: &[ProblemReport]) {
    for r in reports {
        eprintln!("{r}");
    }
}

fn read_error(path: &Path, e: std::io::Error) -> Vec<ProblemReport> {
    vec![ProblemReport::error(format!("cannot read file: {e}"), path, 1, 1, "cli")]
}

fn read(path: &Path) -> Result<String, Vec<ProblemReport>> {
    std::fs::read_to_string(path).map_err(|e| read_error(path, e))
}

/// Grammar roots: the flags, else the environment, else `fallback`.
fn roots(cli: &Cli, fallback: &Path) -> Vec<PathBuf> {
    if !cli.grammar_path.is_empty() {
        return cli.grammar_path.clone();
    }
    if let Some(paths) = std::env::var_os(GRAMMAR_PATH_ENV) {
        let list: Vec<PathBuf> = std::env::split_paths(&paths).filter(|p| !p.as_os_str().is_empty()).collect();
        if !list.is_empty() {
            return list;
        }
    }
    let dir = fallback.parent().unwrap_or(Path::new("."));
    vec![if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir.to_path_buf() }]
}

/// Writes to `--out` or stdout.
fn emit(cli: &Cli, text: &str) -> Fallible<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn tool_config(path: &Path) -> Result<ToolConfig, Vec<ProblemReport>> {
    parse_tool_config(&read(path)?, path)
}

fn load_service(cli: &Cli, tool: &Path) -> Result<LanguageService, Vec<ProblemReport>> {
    let svc = LanguageService::load(tool, &roots(cli, tool), &Extensions::demo())?;
    print_reports(svc.warnings());
    Ok(svc)
}

pub fn run(cli: &Cli) -> Fallible<Status> {
    let result = match &cli.command {
        Command::Check { files } => check(cli, files),
        Command::Compose { tool } => compose_cmd(cli, tool),
        Command::Parse { tool, document } => parse_cmd(cli, tool, document),
        Command::Features { tool, document } => features(cli, tool, document),
        Command::Format { tool, document, write } => format_cmd(cli, tool, document, *write),
        Command::Action { tool, action, files } => run_action(cli, tool, action, files),
        Command::Bundle { tools } => bundle(cli, tools),
        Command::Serve { target, extensions } => serve(cli, target, extensions),
    };
    match result {
        Ok(status) => Ok(status),
        Err(Failure::Input(reports)) => {
            print_reports(&reports);
            Ok(Status::InputError)
        }
        Err(Failure::Internal(e)) => Err(e),
    }
}

enum Failure {
    Input(Vec<ProblemReport>),
    Internal(String),
}

impl From<Vec<ProblemReport>> for Failure {
    fn from(r: Vec<ProblemReport>) -> Self {
        Failure::Input(r)
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Internal(e)
    }
}

type CmdResult = Result<Status, Failure>;

fn check(cli: &Cli, files: &[PathBuf]) -> CmdResult {
    let mut all = Vec::new();
    for file in files {
        let reports = if file.extension().is_some_and(|e| e == "mctool") {
            match tool_config(file) {
                Ok(cfg) => match compose(&cfg, &GrammarPathLoader::new(roots(cli, file))) {
                    Ok(_) => cfg.warnings(),
                    Err(r) => r,
                },
                Err(r) => r,
            }
        } else {
            let loader = GrammarPathLoader::new(roots(cli, file));
            match loader.load_file(file) {
                Ok(f) => check_fragment(&f, &loader),
                Err(LoadError::Invalid { reports, .. }) => reports,
                Err(LoadError::NotFound(_)) => read_error(file, std::io::ErrorKind::NotFound.into()),
            }
        };
        all.extend(reports);
    }
    let text = if cli.json {
        pretty(&json!({ "reports": all }))
    } else {
        all.iter().map(|r| format!("{r}\n")).collect()
    };
    emit(cli, &text)?;
    Ok(status_of(&all))
}

/// References that name neither a production, an interface, a token nor
/// the identifier token.
fn unbound_references(lang: &ComposedLanguage) -> Vec<String> {
    let mut out = Vec::new();
    for p in lang.productions.values() {
        for (target, _) in p.body.references() {
            let known = lang.productions.contains_key(target)
                || lang.interface_impls.contains_key(target)
                || lang.tokens.values().any(|t| t.name == target)
                || target == IDENT;
            if !known && !out.iter().any(|o| o == target) {
                out.push(target.to_string());
            }
        }
    }
    out
}

fn default_extension(lang: &ComposedLanguage) -> String {
    lang.name.to_lowercase()
}

fn compose_cmd(cli: &Cli, tool: &Path) -> CmdResult {
    let cfg = tool_config(tool)?;
    let lang = compose(&cfg, &GrammarPathLoader::new(roots(cli, tool)))?;
    print_reports(&cfg.warnings());
    let manifest = bundle_tools(&[(&cfg, &lang, vec![default_extension(&lang)])])?;
    let unbound = unbound_references(&lang);
    let editor = &lang.effective_editor;
    let summary = json!({
        "language": lang.name,
        "start": lang.start_symbol,
        "fragments": lang.fragment_order(),
        "productions": lang.productions.len(),
        "keywords": editor.keywords.len(),
        "foldable": editor.foldable.len(),
        "segments": editor.segments.len(),
        "unbound_externals": unbound.len(),
        "workflows": editor.workflows,
        "actions": editor.actions().map(|a| &a.action_id).collect::<Vec<_>>(),
        "format_available": editor.format_available,
    });
    let text = if cli.json {
        pretty(&json!({ "summary": summary, "manifest": manifest }))
    } else {
        let mut s = format!("language {}\nstart {}\n", lang.name, lang.start_symbol);
        s += &format!("fragments {}\n", lang.fragment_order().join(", "));
        s += &format!("productions {}\n", lang.productions.len());
        s += &format!("keywords {}\n", editor.keywords.len());
        s += &format!("unbound externals {}\n", unbound.len());
        s += &format!("workflows {}\n", editor.workflows.join(", "));
        for a in editor.actions() {
            s += &format!("action {} ({})\n", a.display_name, a.action_id);
        }
        s += &manifest.to_json();
        s.push('\n');
        s
    };
    emit(cli, &text)?;
    Ok(if unbound.is_empty() { Status::Success } else { Status::InputError })
}

fn node_json(n: &SyntaxNode) -> Value {
    fn attr(v: &AttrValue, n: &SyntaxNode) -> Value {
        match v {
            AttrValue::Text(s) => json!(s),
            AttrValue::Bool(b) => json!(b),
            AttrValue::Node(i) => json!({ "node": n.children[*i].production }),
            AttrValue::List(vs) => Value::Array(vs.iter().map(|v| attr(v, n)).collect()),
        }
    }
    json!({
        "production": n.production,
        "span": n.span.to_array(),
        "attributes": n.attributes.iter().map(|(k, v)| (k.clone(), attr(v, n))).collect::<BTreeMap<_, _>>(),
        "children": n.children.iter().map(node_json).collect::<Vec<_>>(),
    })
}

fn node_text(n: &SyntaxNode, depth: usize, out: &mut String) {
    let attrs: Vec<String> = n
        .attributes
        .iter()
        .filter_map(|(k, v)| match v {
            AttrValue::Text(s) => Some(format!("{k}={s}")),
            AttrValue::Bool(b) => Some(format!("{k}={b}")),
            AttrValue::List(vs) => {
                let texts: Vec<&str> = vs
                    .iter()
                    .filter_map(|v| if let AttrValue::Text(s) = v { Some(s.as_str()) } else { None })
                    .collect();
                (!texts.is_empty()).then(|| format!("{k}=[{}]", texts.join(",")))
            }
            AttrValue::Node(_) => None,
        })
        .collect();
    out.push_str(&format!("{}{} {}", "  ".repeat(depth), n.production, n.span));
    for a in attrs {
        out.push(' ');
        out.push_str(&a);
    }
    out.push('\n');
    for c in &n.children {
        node_text(c, depth + 1, out);
    }
}

fn parse_cmd(cli: &Cli, tool: &Path, document: &Path) -> CmdResult {
    let svc = load_service(cli, tool)?;
    let text = read(document)?;
    let outcome = svc.parse(&text, document);
    print_reports(&outcome.problems);
    let out = match (&outcome.root, cli.json) {
        (Some(root), true) => pretty(&node_json(root)),
        (Some(root), false) => {
            let mut s = String::new();
            node_text(root, 0, &mut s);
            s
        }
        (None, _) => return Ok(Status::InputError),
    };
    emit(cli, &out)?;
    Ok(status_of(&outcome.problems))
}

fn features(cli: &Cli, tool: &Path, document: &Path) -> CmdResult {
    let svc = load_service(cli, tool)?;
    let text = read(document)?;
    let set = svc.features(&text, document, &FsWorkspace);
    emit(cli, &pretty(&set.to_json()))?;
    Ok(status_of(&set.diagnostics))
}

fn format_cmd(cli: &Cli, tool: &Path, document: &Path, write: bool) -> CmdResult {
    let svc = load_service(cli, tool)?;
    let text = read(document)?;
    let formatted = svc.format_or_default(&text, document)?;
    if write {
        std::fs::write(document, &formatted).map_err(|e| format!("cannot write {}: {e}", document.display()))?;
    } else {
        emit(cli, &formatted)?;
    }
    Ok(Status::Success)
}

fn apply_edits(text: &str, edits: &[TextEdit]) -> String {
    let index = LineIndex::new(text);
    let offset = |(l, c): (u32, u32)| index.offset(text, l, c);
    let mut sorted: Vec<&TextEdit> = edits.iter().collect();
    sorted.sort_by_key(|e| std::cmp::Reverse(e.span.start()));
    let mut out = text.to_string();
    for e in sorted {
        out.replace_range(offset(e.span.start())..offset(e.span.end()), &e.new_text);
    }
    out
}

fn run_action(cli: &Cli, tool: &Path, id: &str, files: &[PathBuf]) -> CmdResult {
    let svc = load_service(cli, tool)?;
    let Some(declared) = svc.actions().into_iter().find(|a| a.action_id == id || a.display_name == id) else {
        let known: Vec<String> = svc.actions().iter().map(|a| format!("{} ({})", a.display_name, a.action_id)).collect();
        let msg = format!("unknown action {id}; available: {}", known.join(", "));
        return Err(vec![ProblemReport::error(msg, tool, 1, 1, "cli")].into());
    };
    let id = declared.action_id.clone();
    let result = match declared.kind {
        fragmentc_core::grammar::ActionKind::Editor => {
            let path = &files[0];
            let text = read(path)?;
            svc.run_editor_action(&id, &text, path, Span::new(1, 1, 1, 1))
        }
        fragmentc_core::grammar::ActionKind::Navigator => {
            let selection: Vec<(PathBuf, String)> = files
                .iter()
                .map(|f| (f.clone(), f.parent().map(|p| p.display().to_string()).unwrap_or_default()))
                .collect();
            svc.run_navigator_action(&id, &selection, &FsWorkspace)
        }
    };
    let result = result.map_err(|e| vec![ProblemReport::error(e.to_string(), tool, 1, 1, "cli")])?;
    if cli.json {
        emit(cli, &pretty(&serde_json::to_value(&result).map_err(|e| e.to_string())?))?;
        return Ok(match &result {
            ActionResult::Reports { reports } => status_of(reports),
            _ => Status::Success,
        });
    }
    match result {
        ActionResult::NewFiles { files } => {
            for (path, content) in files {
                std::fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                println!("wrote {}", path.display());
            }
            Ok(Status::Success)
        }
        ActionResult::TextEdits { path, edits } => {
            let text = read(&path)?;
            std::fs::write(&path, apply_edits(&text, &edits))
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            println!("edited {}", path.display());
            Ok(Status::Success)
        }
        ActionResult::Reports { reports } => {
            print_reports(&reports);
            Ok(status_of(&reports))
        }
    }
}

/// Config path as recorded in a manifest: relative to the manifest's
/// directory when written with `--out`, else absolute.
fn manifest_relative(cli: &Cli, tool: &Path) -> PathBuf {
    let abs = tool.canonicalize().unwrap_or_else(|_| tool.to_path_buf());
    let base = cli
        .out
        .as_ref()
        .map(|o| o.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")))
        .and_then(|d| d.canonicalize().ok());
    match base {
        Some(base) => relative_to(&abs, &base),
        None => abs,
    }
}

fn relative_to(path: &Path, base: &Path) -> PathBuf {
    let p: Vec<_> = path.components().collect();
    let b: Vec<_> = base.components().collect();
    let common = p.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let mut out: PathBuf = std::iter::repeat("..").take(b.len() - common).collect();
    out.extend(&p[common..]);
    out
}

fn bundle(cli: &Cli, specs: &[String]) -> CmdResult {
    let mut loaded = Vec::new();
    for spec in specs {
        let (tool, exts) = match spec.split_once('=') {
            Some((t, e)) => (PathBuf::from(t), e.split(',').filter(|x| !x.is_empty()).map(String::from).collect()),
            None => (PathBuf::from(spec), Vec::new()),
        };
        let mut cfg = tool_config(&tool)?;
        let lang = compose(&cfg, &GrammarPathLoader::new(roots(cli, &tool)))?;
        let exts = if exts.is_empty() { vec![default_extension(&lang)] } else { exts };
        cfg.origin = manifest_relative(cli, &tool);
        loaded.push((cfg, lang, exts));
    }
    let refs: Vec<_> = loaded.iter().map(|(c, l, e)| (c, l, e.clone())).collect();
    let manifest = bundle_tools(&refs)?;
    emit(cli, &(manifest.to_json() + "\n"))?;
    Ok(Status::Success)
}

/// Languages to serve: one tool config, or every language of a manifest
/// (config paths relative to the manifest).
fn languages(cli: &Cli, target: &Path, extensions: &[String]) -> Result<Vec<Language>, Vec<ProblemReport>> {
    if target.extension().is_some_and(|e| e == "json") {
        let manifest = BundleManifest::from_json(&read(target)?).map_err(|e| {
            vec![ProblemReport::error(format!("invalid manifest: {e}"), target, e.line() as u32, e.column() as u32, "cli")]
        })?;
        let base = target.parent().unwrap_or(Path::new("."));
        let mut out = Vec::new();
        for l in &manifest.languages {
            let Some(config) = &l.config else {
                return Err(vec![ProblemReport::error(
                    format!("language {} has no config path", l.name),
                    target,
                    1,
                    1,
                    "cli",
                )]);
            };
            let svc = load_service(cli, &base.join(config))?;
            out.push(Language::new(svc, l.extensions.clone()));
        }
        Ok(out)
    } else {
        let exts = extensions.iter().map(|e| e.trim_start_matches('.').to_string()).collect();
        Ok(vec![Language::new(load_service(cli, target)?, exts)])
    }
}

fn serve(cli: &Cli, target: &Path, extensions: &[String]) -> CmdResult {
    let langs = languages(cli, target, extensions)?;
    let (conn, io) = lsp_server::Connection::stdio();
    fragmentc_lsp::run(&conn, &langs).map_err(|e| e.to_string())?;
    drop(conn);
    io.join().map_err(|e| e.to_string())?;
    Ok(Status::Success)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edits_apply_back_to_front() {
        let edits = vec![
            TextEdit { span: Span::new(1, 1, 1, 4), new_text: "msc".into() },
            TextEdit { span: Span::new(2, 3, 2, 3), new_text: "!".into() },
        ];
        assert_eq!(apply_edits("abc d\nxyz", &edits), "msc d\nxy!z");
    }

    #[test]
    fn relative_paths() {
        assert_eq!(relative_to(Path::new("/a/b/c.mctool"), Path::new("/a/d")), PathBuf::from("../b/c.mctool"));
        assert_eq!(relative_to(Path::new("/a/b/c.mctool"), Path::new("/a/b")), PathBuf::from("c.mctool"));
    }
}
