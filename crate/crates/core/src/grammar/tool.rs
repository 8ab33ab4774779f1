//! Tool configuration files (`.mctool`): the root factory that names the
//! start nonterminal and embedding bindings, the pretty printer chain, and
//! the language-level `texteditor` concept.
//!
//! ```text
//! rootfactory MSCRootFactory for MSCRoot<MCCompilationUnit> {
//!   mc.examples.msc.msc.MSC.MSC mscdefinition <<start>>;
//!   mc.examples.msc.java.JavaDSL.Expression cond in mscdefinition.cond;
//!   prettyprint { mc.examples.msc.msc.prettyprint.MSCConcretePrettyPrinter; }
//! }
//! concept texteditor {
//!   tool: "mc.examples.msc.msc.MSCTool";
//!   workflows: symtab, check;
//!   menuitem Generate Trace ("mc.examples.msc.msc.action.GenerateTraceAction");
//!   navigatoritem Compose ("mc.examples.msc.msc.compose.ComposeAction");
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ast::{Loc, OpaqueConcept, QualifiedName};
use super::lexer::MetaTokenKind;
use super::parser::{MetaParser, PResult, SOURCE};
use crate::report::ProblemReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolConfig {
    pub origin: PathBuf,
    pub root_factory_name: String,
    /// Opaque, e.g. `MSCRoot<MCCompilationUnit>`.
    pub root_type_name: String,
    pub start: StartBinding,
    pub embeddings: Vec<EmbeddingBinding>,
    pub pretty_printers: Vec<String>,
    pub editor: ToolEditorConcept,
    pub opaque_concepts: Vec<OpaqueConcept>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartBinding {
    /// `package.Grammar.Nonterminal`.
    pub nonterminal: QualifiedName,
    pub alias: String,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingBinding {
    pub filler: QualifiedName,
    pub alias: String,
    /// `mscdefinition.cond`: start alias followed by the external's name.
    pub host_path: Vec<String>,
    pub loc: Loc,
}

impl EmbeddingBinding {
    /// The external named by the last segment of the host path.
    pub fn external_name(&self) -> &str {
        self.host_path.last().map(String::as_str).unwrap_or("")
    }

    pub fn filler_grammar(&self) -> QualifiedName {
        QualifiedName(self.filler.qualifier().to_vec())
    }

    pub fn filler_nonterminal(&self) -> &str {
        self.filler.simple()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Editor,
    Navigator,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedAction {
    pub display_name: String,
    pub action_id: String,
    pub kind: ActionKind,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ToolEditorConcept {
    pub tool_class_name: String,
    pub workflows: Vec<String>,
    pub menu_items: Vec<NamedAction>,
    pub navigator_items: Vec<NamedAction>,
}

impl ToolConfig {
    /// Warnings that do not prevent use of the config.
    pub fn warnings(&self) -> Vec<ProblemReport> {
        self.opaque_concepts
            .iter()
            .map(|c| {
                ProblemReport::warning(
                    format!("concept '{}' is not supported and is ignored", c.name),
                    &self.origin,
                    c.loc.line,
                    c.loc.col,
                    SOURCE,
                )
            })
            .collect()
    }
}

pub fn parse_tool_config(text: &str, origin: impl AsRef<Path>) -> Result<ToolConfig, Vec<ProblemReport>> {
    let origin = origin.as_ref();
    let mut p = MetaParser::new(text, origin).map_err(|r| vec![r])?;
    tool_file(&mut p).map_err(|r| vec![r])
}

fn tool_file(p: &mut MetaParser<'_>) -> PResult<ToolConfig> {
    let mut root: Option<Root> = None;
    let mut editor = ToolEditorConcept::default();
    let mut opaque_concepts = Vec::new();
    let file_start = p.loc();
    while !p.at_eof() {
        let (section, loc) = p.ident("'rootfactory' or 'concept'")?;
        match section.as_str() {
            "rootfactory" => {
                if root.is_some() {
                    return Err(p.error_at(loc, "duplicate rootfactory"));
                }
                root = Some(rootfactory(p)?);
            }
            "concept" => {
                let (name, _) = p.ident("a concept name")?;
                if name == "texteditor" {
                    tool_editor(p, &mut editor)?;
                } else {
                    let body = p.opaque_block()?;
                    opaque_concepts.push(OpaqueConcept { name, body, loc });
                }
            }
            other => return Err(p.error_at(loc, format!("unknown section '{other}'"))),
        }
    }
    let Some((root_factory_name, root_type_name, start, embeddings, pretty_printers)) = root else {
        return Err(p.error_at(file_start, "missing rootfactory section"));
    };
    let Some(start) = start else {
        return Err(p.error_at(file_start, "missing <<start>> binding in rootfactory"));
    };
    Ok(ToolConfig {
        origin: p.origin.clone(),
        root_factory_name,
        root_type_name,
        start,
        embeddings,
        pretty_printers,
        editor,
        opaque_concepts,
    })
}

type Root = (String, String, Option<StartBinding>, Vec<EmbeddingBinding>, Vec<String>);

fn rootfactory(p: &mut MetaParser<'_>) -> PResult<Root> {
    let (name, _) = p.ident("a root factory name")?;
    p.expect_word("for")?;
    let type_start = p.peek().start;
    p.ident("a root type name")?;
    if p.at_punct('<') {
        let mut depth = 0;
        loop {
            match p.bump().kind {
                MetaTokenKind::Punct('<') => depth += 1,
                MetaTokenKind::Punct('>') => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                MetaTokenKind::Eof => return Err(p.unexpected("'>'")),
                _ => {}
            }
        }
    }
    let type_end = p.toks[p.pos - 1].end;
    let root_type: String = p.text[type_start..type_end].split_whitespace().collect();

    p.expect_punct('{')?;
    let mut start: Option<StartBinding> = None;
    let mut embeddings = Vec::new();
    let mut printers = Vec::new();
    while !p.eat_punct('}') {
        if p.at_eof() {
            return Err(p.unexpected("'}'"));
        }
        let loc = p.loc();
        if p.at_word("prettyprint") && p.peek_at(1) == &MetaTokenKind::Punct('{') {
            p.bump();
            p.bump();
            while !p.eat_punct('}') {
                printers.push(p.qualified_name()?.to_string());
                p.expect_punct(';')?;
            }
            continue;
        }
        if matches!(p.peek_at(1), MetaTokenKind::Punct('{')) {
            let (name, _) = p.ident("a binding")?;
            return Err(p.error_at(loc, format!("unknown section '{name}'")));
        }
        let nonterminal = p.qualified_name()?;
        let (alias, _) = p.ident("a binding alias")?;
        if p.at_punct('<') {
            let marker = p.loc();
            p.expect_punct('<')?;
            p.expect_punct('<')?;
            p.expect_word("start")?;
            p.expect_punct('>')?;
            p.expect_punct('>')?;
            p.expect_punct(';')?;
            if start.is_some() {
                return Err(p.error_at(marker, "duplicate <<start>> marker"));
            }
            if nonterminal.0.len() < 2 {
                return Err(p.error_at(loc, "start binding needs Grammar.Nonterminal"));
            }
            start = Some(StartBinding { nonterminal, alias, loc });
        } else if p.eat_word("in") {
            let path = p.qualified_name()?;
            p.expect_punct(';')?;
            if nonterminal.0.len() < 2 {
                return Err(p.error_at(loc, "embedding binding needs Grammar.Nonterminal"));
            }
            embeddings.push(EmbeddingBinding { filler: nonterminal, alias, host_path: path.0, loc });
        } else {
            return Err(p.unexpected("'<<start>>' or 'in'"));
        }
    }
    Ok((name, root_type, start, embeddings, printers))
}

fn tool_editor(p: &mut MetaParser<'_>, editor: &mut ToolEditorConcept) -> PResult<()> {
    p.expect_punct('{')?;
    while !p.eat_punct('}') {
        let (clause, loc) = p.ident("'tool', 'workflows', 'menuitem' or 'navigatoritem'")?;
        match clause.as_str() {
            "tool" => {
                p.expect_punct(':')?;
                editor.tool_class_name = p.string("a tool class name string")?;
                p.expect_punct(';')?;
            }
            "workflows" => {
                p.expect_punct(':')?;
                editor.workflows.extend(p.ident_list("a workflow name")?.into_iter().map(|d| d.name));
                p.expect_punct(';')?;
            }
            "menuitem" | "navigatoritem" => {
                let mut words = Vec::new();
                while let MetaTokenKind::Ident(w) = &p.peek().kind {
                    words.push(w.clone());
                    p.bump();
                }
                if words.is_empty() {
                    return Err(p.unexpected("a display name"));
                }
                p.expect_punct('(')?;
                let action_id = p.string("an action class name string")?;
                p.expect_punct(')')?;
                p.eat_punct(';');
                let (kind, list) = if clause == "menuitem" {
                    (ActionKind::Editor, &mut editor.menu_items)
                } else {
                    (ActionKind::Navigator, &mut editor.navigator_items)
                };
                list.push(NamedAction { display_name: words.join(" "), action_id, kind });
            }
            other => return Err(p.error_at(loc, format!("unknown section '{other}'"))),
        }
    }
    Ok(())
}
