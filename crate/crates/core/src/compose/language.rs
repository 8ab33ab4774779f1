//! Language-level composition: binding external nonterminals to productions
//! of filler grammars and qualifying every name by its owning fragment.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::editor::{merge_editor_concepts, EffectiveEditorConfig};
use super::inherit::flatten_checked;
use super::loader::{FragmentLoader, LoadError};
use crate::grammar::*;
use crate::report::ProblemReport;

const SOURCE: &str = "compose";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposedProduction {
    /// `Fragment.Production`.
    pub name: String,
    pub local_name: String,
    pub fragment: String,
    pub implements: Vec<String>,
    /// Body with every reference qualified (or `IDENT`).
    pub body: BodyExpr,
    pub origin: PathBuf,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposedToken {
    pub name: String,
    pub fragment: String,
    pub pattern: String,
}

/// Lexical view of one contributing fragment: keyword status is scoped to
/// the productions of the fragment that declares the keyword.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FragmentLexicon {
    pub keywords: BTreeSet<String>,
    /// Terminal texts used by the fragment's productions.
    pub terminals: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposedLanguage {
    pub name: String,
    /// Qualified start production.
    pub start_symbol: String,
    pub productions: BTreeMap<String, ComposedProduction>,
    pub tokens: BTreeMap<String, ComposedToken>,
    /// Interface to implementors in declaration order.
    pub interface_impls: BTreeMap<String, Vec<String>>,
    pub fragments: BTreeMap<String, FragmentLexicon>,
    pub effective_editor: EffectiveEditorConfig,
    /// Every contributing fragment, host first, including supergrammars.
    pub source_fragments: Vec<String>,
    pub pretty_printers: Vec<String>,
    pub tool_class_name: String,
}

impl ComposedLanguage {
    pub fn production(&self, qualified: &str) -> Option<&ComposedProduction> {
        self.productions.get(qualified)
    }

    /// Fragment names in composition order (host first).
    pub fn fragment_order(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for f in self.source_fragments.iter().map(String::as_str) {
            if self.fragments.contains_key(f) && !out.contains(&f) {
                out.push(f);
            }
        }
        out
    }

    /// A language made of a single fragment with no holes; convenient for
    /// tests and standalone grammars.
    pub fn standalone(
        fragment: &GrammarFragment,
        start: &str,
        loader: &dyn FragmentLoader,
    ) -> Result<ComposedLanguage, Vec<ProblemReport>> {
        let cfg = ToolConfig {
            origin: fragment.origin.clone(),
            root_factory_name: format!("{}Root", fragment.name),
            root_type_name: fragment.name.clone(),
            start: StartBinding {
                nonterminal: QualifiedName(vec![fragment.name.clone(), start.to_string()]),
                alias: "start".into(),
                loc: fragment.loc,
            },
            embeddings: Vec::new(),
            pretty_printers: Vec::new(),
            editor: ToolEditorConcept::default(),
            opaque_concepts: Vec::new(),
        };
        bind_embeddings(fragment, &cfg, loader)
    }
}

fn cfg_error(cfg: &ToolConfig, loc: Loc, msg: String) -> ProblemReport {
    ProblemReport::error(msg, &cfg.origin, loc.line, loc.col, SOURCE)
}

/// Loads the host named by the start binding, then composes.
pub fn compose(cfg: &ToolConfig, loader: &dyn FragmentLoader) -> Result<ComposedLanguage, Vec<ProblemReport>> {
    let (grammar, _) = cfg
        .start
        .nonterminal
        .split_nonterminal()
        .ok_or_else(|| vec![cfg_error(cfg, cfg.start.loc, "start binding needs Grammar.Nonterminal".into())])?;
    let host = load(cfg, cfg.start.loc, &grammar, loader)?;
    bind_embeddings(&host, cfg, loader)
}

fn load(
    cfg: &ToolConfig,
    loc: Loc,
    grammar: &QualifiedName,
    loader: &dyn FragmentLoader,
) -> Result<GrammarFragment, Vec<ProblemReport>> {
    loader.load(grammar).map_err(|e| match e {
        LoadError::NotFound(n) => vec![cfg_error(cfg, loc, format!("unknown grammar {n}"))],
        LoadError::Invalid { reports, .. } => reports,
    })
}

/// Binds every external named in `cfg` to its filler nonterminal, imports
/// filler productions under qualified names and merges editor concepts.
/// Host and fillers are flattened and validated on the way.
pub fn bind_embeddings(
    host: &GrammarFragment,
    cfg: &ToolConfig,
    loader: &dyn FragmentLoader,
) -> Result<ComposedLanguage, Vec<ProblemReport>> {
    let mut errors = Vec::new();
    let (host, mut source_fragments, _) = flatten_checked(host, loader)?;

    let start_local = cfg.start.nonterminal.simple();
    if host.production(start_local).is_none() {
        errors.push(cfg_error(
            cfg,
            cfg.start.loc,
            format!("start symbol {start_local} is not a production of {}", host.name),
        ));
    }

    // Fragments in import order; fillers merged once per distinct grammar.
    let mut fragments: Vec<GrammarFragment> = vec![host.clone()];
    let mut bound: BTreeMap<String, String> = BTreeMap::new();
    for b in &cfg.embeddings {
        let path = b.external_name();
        let external = host
            .externals
            .iter()
            .find(|e| e.name == path)
            .or_else(|| {
                let mut ci = host.externals.iter().filter(|e| e.name.eq_ignore_ascii_case(path));
                match (ci.next(), ci.next()) {
                    (Some(e), None) => Some(e),
                    _ => None,
                }
            })
            .map(|e| e.name.clone());
        let Some(external) = external else {
            errors.push(cfg_error(cfg, b.loc, format!("binding names an external not declared: {path}")));
            continue;
        };
        if bound.contains_key(&external) {
            errors.push(cfg_error(cfg, b.loc, format!("external {external} is bound twice")));
            continue;
        }
        let grammar = b.filler_grammar();
        let filler = match fragments.iter().find(|f| f.name == grammar.simple()) {
            Some(f) => f.clone(),
            None => {
                let raw = match load(cfg, b.loc, &grammar, loader) {
                    Ok(f) => f,
                    Err(r) => {
                        errors.extend(r);
                        continue;
                    }
                };
                match flatten_checked(&raw, loader) {
                    Ok((flat, lineage, _)) => {
                        for n in lineage {
                            if !source_fragments.contains(&n) {
                                source_fragments.push(n);
                            }
                        }
                        fragments.push(flat.clone());
                        flat
                    }
                    Err(r) => {
                        errors.extend(r);
                        continue;
                    }
                }
            }
        };
        let nt = b.filler_nonterminal();
        if filler.production(nt).is_none() && !filler.has_interface(nt) {
            errors.push(cfg_error(
                cfg,
                b.loc,
                format!("filler nonterminal {nt} not found in grammar {}", filler.name),
            ));
            continue;
        }
        bound.insert(external, format!("{}.{nt}", filler.name));
    }

    for e in &host.externals {
        if !bound.contains_key(&e.name) {
            errors.push(cfg_error(cfg, cfg.start.loc, format!("unbound external {}", e.name)));
        }
    }
    for f in &fragments[1..] {
        for e in &f.externals {
            errors.push(cfg_error(cfg, cfg.start.loc, format!("unbound external {}.{}", f.name, e.name)));
        }
    }

    let mut lang = ComposedLanguage {
        name: host.name.clone(),
        start_symbol: format!("{}.{start_local}", host.name),
        productions: BTreeMap::new(),
        tokens: BTreeMap::new(),
        interface_impls: BTreeMap::new(),
        fragments: BTreeMap::new(),
        effective_editor: EffectiveEditorConfig::default(),
        source_fragments,
        pretty_printers: cfg.pretty_printers.clone(),
        tool_class_name: cfg.editor.tool_class_name.clone(),
    };

    for (idx, f) in fragments.iter().enumerate() {
        let qualify = |target: &str| -> Option<String> {
            if target == IDENT {
                Some(IDENT.to_string())
            } else if f.production(target).is_some() || f.has_interface(target) || f.has_token(target) {
                Some(format!("{}.{target}", f.name))
            } else if idx == 0 && f.has_external(target) {
                bound.get(target).cloned()
            } else {
                None
            }
        };
        let mut lexicon = FragmentLexicon {
            keywords: f.keywords().iter().cloned().collect(),
            terminals: BTreeSet::new(),
        };
        for p in &f.productions {
            let mut body = p.body.clone();
            body.walk_mut(&mut |e| {
                if let BodyExpr::NonterminalRef { target, .. } = e {
                    if let Some(q) = qualify(target) {
                        *target = q;
                    }
                }
            });
            lexicon.terminals.extend(p.body.terminals().into_iter().map(String::from));
            let name = format!("{}.{}", f.name, p.name);
            let implements: Vec<String> = p.implements.iter().map(|i| format!("{}.{i}", f.name)).collect();
            for i in &implements {
                lang.interface_impls.entry(i.clone()).or_default().push(name.clone());
            }
            lang.productions.insert(
                name.clone(),
                ComposedProduction {
                    name,
                    local_name: p.name.clone(),
                    fragment: f.name.clone(),
                    implements,
                    body,
                    origin: f.origin.clone(),
                    loc: p.loc,
                },
            );
        }
        for i in &f.interfaces {
            lang.interface_impls.entry(format!("{}.{}", f.name, i.name)).or_default();
        }
        for t in &f.tokens {
            let name = format!("{}.{}", f.name, t.name);
            lang.tokens.insert(
                name.clone(),
                ComposedToken { name, fragment: f.name.clone(), pattern: t.pattern.clone() },
            );
        }
        lang.fragments.insert(f.name.clone(), lexicon);
    }

    for p in lang.productions.values() {
        for (target, loc) in p.body.references() {
            if let Some(impls) = lang.interface_impls.get(target) {
                if impls.is_empty() {
                    errors.push(ProblemReport::error(
                        format!("interface {target} has no implementing production"),
                        &p.origin,
                        loc.line,
                        loc.col,
                        SOURCE,
                    ));
                }
            }
        }
    }

    let contributions: Vec<(String, FragmentEditorConcept)> = fragments
        .iter()
        .filter_map(|f| f.editor_concept.clone().map(|c| (f.name.clone(), c)))
        .collect();
    lang.effective_editor = merge_editor_concepts(&contributions, &cfg.editor, &cfg.pretty_printers);

    let mut ids = BTreeSet::new();
    for a in lang.effective_editor.actions() {
        if !ids.insert(a.action_id.clone()) {
            errors.push(cfg_error(cfg, cfg.start.loc, format!("action {} is declared twice", a.action_id)));
        }
    }

    if errors.is_empty() {
        Ok(lang)
    } else {
        errors.dedup();
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::MemoryLoader;

    const HOST: &str = "grammar H { external Val; A = \"let\" n:IDENT \"=\" Val \";\"; \
        concept texteditor { keywords: let; } }";
    const FILLER: &str = "grammar E { token NUM = /[0-9]+/; Expr = n:NUM | \"true\"; \
        concept texteditor { keywords: true; } }";

    fn loader() -> MemoryLoader {
        MemoryLoader::new().with_source(HOST).with_source(FILLER)
    }

    fn cfg(bindings: &str) -> ToolConfig {
        parse_tool_config(&format!("rootfactory F for R {{ H.A a <<start>>; {bindings} }}"), "t.mctool").unwrap()
    }

    #[test]
    fn binds_and_qualifies() {
        let lang = compose(&cfg("E.Expr v in a.val;"), &loader()).unwrap();
        assert_eq!(lang.start_symbol, "H.A");
        assert_eq!(lang.source_fragments, vec!["H", "E"]);
        let refs: Vec<_> = lang.productions["H.A"].body.references().into_iter().map(|(t, _)| t).collect();
        assert_eq!(refs, vec!["IDENT", "E.Expr"]);
        assert_eq!(lang.productions["E.Expr"].body.references()[0].0, "E.NUM");
        assert_eq!(lang.effective_editor.keywords, ["let", "true"].into_iter().map(String::from).collect());
        assert_eq!(lang.fragments["E"].keywords.len(), 1);
    }

    #[test]
    fn unbound_external_is_error() {
        let errs = compose(&cfg(""), &loader()).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].message, "unbound external Val");
    }

    #[test]
    fn bad_bindings() {
        let errs = compose(&cfg("E.Expr v in a.nothing;"), &loader()).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("external not declared: nothing")));
        let errs = compose(&cfg("E.Missing v in a.Val;"), &loader()).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("filler nonterminal Missing")));
        let errs = compose(&cfg("Z.Expr v in a.Val;"), &loader()).unwrap_err();
        assert!(errs.iter().any(|e| e.message == "unknown grammar Z"));
    }

    #[test]
    fn interface_without_implementor() {
        let l = MemoryLoader::new().with_source("grammar I { interface X; A = \"a\" X; }");
        let f = l.load(&QualifiedName::parse("I")).unwrap();
        let errs = ComposedLanguage::standalone(&f, "A", &l).unwrap_err();
        assert!(errs[0].message.contains("interface I.X has no implementing production"));
    }

    #[test]
    fn deterministic() {
        let a = compose(&cfg("E.Expr v in a.Val;"), &loader()).unwrap();
        let b = compose(&cfg("E.Expr v in a.Val;"), &loader()).unwrap();
        assert_eq!(a, b);
    }
}
