//! Fragment-level composition: flattening multiple grammar inheritance.

use std::collections::BTreeSet;

use super::loader::{FragmentLoader, LoadError};
use crate::grammar::*;
use crate::report::{has_errors, ProblemReport};

const SOURCE: &str = "compose";

/// Flattens `f`: supergrammar productions, interfaces, externals, tokens and
/// editor attributes are copied in, `f`'s own definitions take precedence.
/// The result has no supergrammars, so flattening it again is the identity.
pub fn resolve_inheritance(
    f: &GrammarFragment,
    loader: &dyn FragmentLoader,
) -> Result<GrammarFragment, Vec<ProblemReport>> {
    flatten(f, loader, &mut vec![f.qualified_name()], false).map(|(f, _)| f)
}

/// Validates `f` and its supergrammars, then flattens; returns every
/// report, warnings included. Empty means well-formed.
pub fn check_fragment(f: &GrammarFragment, loader: &dyn FragmentLoader) -> Vec<ProblemReport> {
    match flatten_checked(f, loader) {
        Ok((_, _, warnings)) => warnings,
        Err(reports) => reports,
    }
}

/// Flattens and validates `f` and, transitively, its supergrammars. Returns
/// the flattened fragment, its lineage (self first) and any warnings.
pub(crate) fn flatten_checked(
    f: &GrammarFragment,
    loader: &dyn FragmentLoader,
) -> Result<(GrammarFragment, Vec<String>, Vec<ProblemReport>), Vec<ProblemReport>> {
    let mut warnings = Vec::new();
    let (flat, lineage) = flatten_inner(f, loader, &mut vec![f.qualified_name()], true, &mut warnings)?;
    Ok((flat, lineage, warnings))
}

fn flatten(
    f: &GrammarFragment,
    loader: &dyn FragmentLoader,
    stack: &mut Vec<QualifiedName>,
    validate: bool,
) -> Result<(GrammarFragment, Vec<String>), Vec<ProblemReport>> {
    flatten_inner(f, loader, stack, validate, &mut Vec::new())
}

fn load_super(
    f: &GrammarFragment,
    name: &QualifiedName,
    loader: &dyn FragmentLoader,
) -> Result<GrammarFragment, Vec<ProblemReport>> {
    let mut candidates = Vec::new();
    if name.0.len() == 1 && !f.package.is_empty() {
        let mut q = f.package.clone();
        q.push(name.simple().to_string());
        candidates.push(QualifiedName(q));
    }
    candidates.push(name.clone());
    for c in &candidates {
        match loader.load(c) {
            Ok(s) => return Ok(s),
            Err(LoadError::NotFound(_)) => continue,
            Err(LoadError::Invalid { reports, .. }) => return Err(reports),
        }
    }
    Err(vec![ProblemReport::error(
        format!("unknown supergrammar {name}"),
        &f.origin,
        f.loc.line,
        f.loc.col,
        SOURCE,
    )])
}

fn flatten_inner(
    f: &GrammarFragment,
    loader: &dyn FragmentLoader,
    stack: &mut Vec<QualifiedName>,
    validate: bool,
    warnings: &mut Vec<ProblemReport>,
) -> Result<(GrammarFragment, Vec<String>), Vec<ProblemReport>> {
    let mut supers = Vec::new();
    let mut lineage = vec![f.name.clone()];
    for name in &f.super_grammars {
        let s = load_super(f, name, loader)?;
        let q = s.qualified_name();
        if let Some(i) = stack.iter().position(|n| *n == q) {
            let cycle: Vec<String> =
                stack[i..].iter().chain(std::iter::once(&q)).map(|n| n.simple().to_string()).collect();
            return Err(vec![ProblemReport::error(
                format!("inheritance cycle: {}", cycle.join(" -> ")),
                &f.origin,
                f.loc.line,
                f.loc.col,
                SOURCE,
            )]);
        }
        stack.push(q);
        let (flat, sub_lineage) = flatten_inner(&s, loader, stack, validate, warnings)?;
        stack.pop();
        for n in sub_lineage {
            if !lineage.contains(&n) {
                lineage.push(n);
            }
        }
        supers.push(flat);
    }
    if validate {
        let reports = crate::grammar::validate_fragment(f, &supers);
        if has_errors(&reports) {
            return Err(reports);
        }
        warnings.extend(reports);
    }
    if supers.is_empty() {
        return Ok((f.clone(), lineage));
    }
    merge(f, &supers).map(|m| (m, lineage))
}

fn merge(f: &GrammarFragment, supers: &[GrammarFragment]) -> Result<GrammarFragment, Vec<ProblemReport>> {
    let mut errors = Vec::new();
    let err = |msg: String| ProblemReport::error(msg, &f.origin, f.loc.line, f.loc.col, SOURCE);
    let mut out = GrammarFragment::new(f.name.clone());
    out.package = f.package.clone();
    out.origin = f.origin.clone();
    out.loc = f.loc;

    // Productions: first inherited definition keeps its slot; a second one
    // must agree with it unless `f` overrides.
    let mut owners: Vec<&str> = Vec::new();
    for s in supers {
        for p in &s.productions {
            match out.productions.iter().position(|q| q.name == p.name) {
                None => {
                    out.productions.push(p.clone());
                    owners.push(&s.name);
                }
                Some(i) => {
                    let same = strip(&out.productions[i]) == strip(p);
                    if !same && f.production(&p.name).is_none() {
                        errors.push(err(format!(
                            "conflicting definitions of production {} inherited from {} and {}",
                            p.name, owners[i], s.name
                        )));
                    }
                }
            }
        }
    }
    for p in &f.productions {
        match out.productions.iter().position(|q| q.name == p.name) {
            Some(i) => out.productions[i] = p.clone(),
            None => out.productions.push(p.clone()),
        }
    }

    let all_supers = supers.iter().chain(std::iter::once(f));
    for s in all_supers.clone() {
        for i in &s.interfaces {
            if !out.has_interface(&i.name) {
                out.interfaces.push(i.clone());
            }
        }
        for t in &s.tokens {
            match out.tokens.iter().position(|x| x.name == t.name) {
                Some(i) if s.name == f.name => out.tokens[i] = t.clone(),
                Some(_) => {}
                None => out.tokens.push(t.clone()),
            }
        }
        out.opaque_concepts.extend(s.opaque_concepts.iter().cloned());
    }
    // An inherited hole filled by a production is no longer a hole.
    for s in all_supers {
        for e in &s.externals {
            if !out.has_external(&e.name) && out.production(&e.name).is_none() {
                out.externals.push(e.clone());
            }
        }
    }

    let contributions: Vec<&FragmentEditorConcept> =
        supers.iter().chain(std::iter::once(f)).filter_map(|s| s.editor_concept.as_ref()).collect();
    if !contributions.is_empty() {
        let mut concept = FragmentEditorConcept {
            loc: f.editor_concept.as_ref().map(|c| c.loc).unwrap_or_default(),
            ..Default::default()
        };
        let mut seen = BTreeSet::new();
        for c in &contributions {
            for k in &c.keywords {
                if seen.insert(k.clone()) {
                    concept.keywords.push(k.clone());
                }
            }
            for d in &c.foldable {
                if !concept.foldable.iter().any(|x| x.name == d.name) {
                    concept.foldable.push(d.clone());
                }
            }
        }
        let own = f.editor_concept.as_ref();
        let overridden = |nt: &str| own.is_some_and(|c| c.segments.iter().any(|s| s.nonterminal == nt));
        let mut seg_owner: Vec<&str> = Vec::new();
        for s in supers {
            let Some(c) = &s.editor_concept else { continue };
            for seg in &c.segments {
                if overridden(&seg.nonterminal) {
                    continue;
                }
                match concept.segments.iter().position(|x| x.nonterminal == seg.nonterminal) {
                    None => {
                        concept.segments.push(seg.clone());
                        seg_owner.push(&s.name);
                    }
                    Some(i) => {
                        let mut a = concept.segments[i].clone();
                        let mut b = seg.clone();
                        a.loc = Loc::default();
                        b.loc = Loc::default();
                        if a != b {
                            errors.push(err(format!(
                                "segment for {} is defined by both {} and {}; {} must override it",
                                seg.nonterminal, seg_owner[i], s.name, f.name
                            )));
                        }
                    }
                }
            }
        }
        if let Some(c) = own {
            concept.segments.extend(c.segments.iter().cloned());
        }
        out.editor_concept = Some(concept);
    }

    // Cross-kind collisions between inherited names.
    let mut names = BTreeSet::new();
    let decls = out
        .productions
        .iter()
        .map(|p| &p.name)
        .chain(out.interfaces.iter().map(|d| &d.name))
        .chain(out.externals.iter().map(|d| &d.name))
        .chain(out.tokens.iter().map(|t| &t.name));
    for n in decls {
        if !names.insert(n.clone()) {
            errors.push(err(format!("inherited name {n} is declared with different kinds")));
        }
    }

    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

fn strip(p: &Production) -> Production {
    let mut p = p.clone();
    p.loc = Loc::default();
    p.body.walk_mut(&mut |e| {
        if let BodyExpr::NonterminalRef { loc, .. } = e {
            *loc = Loc::default();
        }
    });
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::MemoryLoader;

    #[test]
    fn no_supers_is_identity() {
        let f = parse_grammar("grammar G { A = \"a\"; }", "g.mc").unwrap();
        assert_eq!(resolve_inheritance(&f, &MemoryLoader::new()).unwrap(), f);
    }

    #[test]
    fn two_cycle_names_both() {
        let l = MemoryLoader::new()
            .with_source("grammar A extends B { X = \"x\"; }")
            .with_source("grammar B extends A { Y = \"y\"; }");
        let a = l.load(&QualifiedName::parse("A")).unwrap();
        let errs = resolve_inheritance(&a, &l).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].message, "inheritance cycle: A -> B -> A");
    }

    #[test]
    fn unknown_super() {
        let f = parse_grammar("grammar G extends Nope { A = \"a\"; }", "g.mc").unwrap();
        let errs = resolve_inheritance(&f, &MemoryLoader::new()).unwrap_err();
        assert_eq!(errs[0].message, "unknown supergrammar Nope");
    }

    #[test]
    fn sibling_conflicts_need_override() {
        let l = MemoryLoader::new()
            .with_source("grammar S1 { P = \"a\"; }")
            .with_source("grammar S2 { P = \"b\"; }");
        let sub = parse_grammar("grammar G extends S1, S2 { Q = P; }", "g.mc").unwrap();
        let errs = resolve_inheritance(&sub, &l).unwrap_err();
        assert!(errs[0].message.contains("conflicting definitions of production P"));

        let sub = parse_grammar("grammar G extends S1, S2 { P = \"c\"; }", "g.mc").unwrap();
        let flat = resolve_inheritance(&sub, &l).unwrap();
        assert_eq!(flat.production("P").unwrap().body, BodyExpr::terminal("c"));
    }

    #[test]
    fn diamond_is_not_a_conflict() {
        let l = MemoryLoader::new()
            .with_source("grammar Base { P = \"a\"; }")
            .with_source("grammar L extends Base { X = P; }")
            .with_source("grammar R extends Base { Y = P; }");
        let sub = parse_grammar("grammar G extends L, R { Z = X Y; }", "g.mc").unwrap();
        let flat = resolve_inheritance(&sub, &l).unwrap();
        let names: Vec<_> = flat.productions.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["P", "X", "Y", "Z"]);
    }

    #[test]
    fn sibling_segment_collision() {
        let l = MemoryLoader::new()
            .with_source("grammar S1 { P = n:IDENT; concept texteditor { segment: P (\"a\") show: n; } }")
            .with_source("grammar S2 { concept texteditor { segment: P (\"b\") show: n; } }");
        let sub = parse_grammar("grammar G extends S1, S2 { }", "g.mc").unwrap();
        let errs = resolve_inheritance(&sub, &l).unwrap_err();
        assert!(errs[0].message.contains("segment for P"));
        let sub = parse_grammar(
            "grammar G extends S1, S2 { concept texteditor { segment: P (\"c\") show: n; } }",
            "g.mc",
        )
        .unwrap();
        let flat = resolve_inheritance(&sub, &l).unwrap();
        assert_eq!(flat.editor_concept.unwrap().segments[0].icon_path, "c");
    }

    #[test]
    fn external_filled_by_subgrammar_production() {
        let l = MemoryLoader::new().with_source("grammar S { external E; A = E; }");
        let sub = parse_grammar("grammar G extends S { E = \"e\"; }", "g.mc").unwrap();
        let flat = resolve_inheritance(&sub, &l).unwrap();
        assert!(flat.externals.is_empty());
        assert!(flat.production("E").is_some());
    }
}
