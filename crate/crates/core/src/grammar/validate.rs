use std::collections::BTreeMap;

use super::ast::*;
use super::parser::SOURCE;
use crate::report::ProblemReport;

#[derive(Clone, Copy, PartialEq, Eq)]
enum NameKind {
    Production,
    Interface,
    External,
    Token,
}

/// Checks the well-formedness of `f` against its (already flattened)
/// supergrammars. Returns one report per violation, ordered by position.
pub fn validate_fragment(f: &GrammarFragment, resolved_supers: &[GrammarFragment]) -> Vec<ProblemReport> {
    let mut reports = Vec::new();
    let err = |loc: Loc, msg: String| ProblemReport::error(msg, &f.origin, loc.line, loc.col, SOURCE);

    let mut local: BTreeMap<&str, NameKind> = BTreeMap::new();
    let decls = f
        .productions
        .iter()
        .map(|p| (p.name.as_str(), NameKind::Production, p.loc))
        .chain(f.interfaces.iter().map(|d| (d.name.as_str(), NameKind::Interface, d.loc)))
        .chain(f.externals.iter().map(|d| (d.name.as_str(), NameKind::External, d.loc)))
        .chain(f.tokens.iter().map(|t| (t.name.as_str(), NameKind::Token, t.loc)));
    for (name, kind, loc) in decls {
        if name == IDENT {
            reports.push(err(loc, format!("{IDENT} is built in and cannot be redeclared")));
        }
        if local.insert(name, kind).is_some() {
            reports.push(err(loc, format!("name {name} is declared more than once")));
        }
    }

    let lookup = |name: &str| -> Option<NameKind> {
        if let Some(k) = local.get(name) {
            return Some(*k);
        }
        resolved_supers.iter().find_map(|s| {
            if s.production(name).is_some() {
                Some(NameKind::Production)
            } else if s.has_interface(name) {
                Some(NameKind::Interface)
            } else if s.has_external(name) {
                Some(NameKind::External)
            } else if s.has_token(name) {
                Some(NameKind::Token)
            } else {
                None
            }
        })
    };
    // Production as seen from this fragment: local definitions override.
    let production = |name: &str| -> Option<&Production> {
        f.production(name).or_else(|| resolved_supers.iter().find_map(|s| s.production(name)))
    };

    for t in &f.tokens {
        match regex::Regex::new(&format!("^(?:{})", t.pattern)) {
            Ok(re) if re.is_match("") => {
                reports.push(err(t.loc, format!("token {} matches the empty string", t.name)))
            }
            Ok(_) => {}
            Err(e) => reports.push(err(t.loc, format!("token {} has an invalid pattern: {e}", t.name))),
        }
    }

    for p in &f.productions {
        for i in &p.implements {
            if lookup(i) != Some(NameKind::Interface) {
                reports.push(err(p.loc, format!("production {} implements unknown interface {i}", p.name)));
            }
        }
        for (target, loc) in p.body.references() {
            if target != IDENT && lookup(target).is_none() {
                reports.push(err(loc, format!("unresolved nonterminal {target}")));
            }
        }
        let (_, conflicts) = attribute_shapes(&p.body);
        for l in conflicts {
            reports.push(err(
                p.loc,
                format!("label {l} in {} is used both as presence flag and as value", p.name),
            ));
        }
    }

    if let Some(c) = &f.editor_concept {
        for k in &c.keywords {
            if k.is_empty() || k.chars().any(char::is_whitespace) {
                reports.push(err(c.loc, format!("invalid keyword \"{k}\"")));
            }
        }
        for d in &c.foldable {
            if production(&d.name).is_none() {
                reports.push(err(d.loc, format!("foldable {} is not a production", d.name)));
            }
        }
        for s in &c.segments {
            let Some(target) = production(&s.nonterminal) else {
                reports.push(err(s.loc, format!("segment {} is not bound to a production", s.nonterminal)));
                continue;
            };
            let labels = target.attribute_shapes();
            for item in &s.template {
                if let TemplateItem::AttributeRef(a) = item {
                    if !labels.contains_key(a) {
                        reports.push(err(
                            s.loc,
                            format!(
                                "segment {} refers to {a}, which is not an attribute of {}",
                                s.nonterminal, target.name
                            ),
                        ));
                    }
                }
            }
        }
    }

    for c in &f.opaque_concepts {
        reports.push(ProblemReport::warning(
            format!("concept '{}' is not supported and is ignored", c.name),
            &f.origin,
            c.loc.line,
            c.loc.col,
            SOURCE,
        ));
    }

    reports.sort_by_key(|r| (r.line, r.column));
    reports
}
