//! Renders fragments back to grammar source.

use std::fmt::Write;

use super::ast::*;
use super::lexer::{is_ident, quote, quote_regex};

pub fn print_grammar(f: &GrammarFragment) -> String {
    let mut out = String::new();
    write!(out, "grammar {}", f.name).unwrap();
    if !f.super_grammars.is_empty() {
        let supers: Vec<String> = f.super_grammars.iter().map(|q| q.to_string()).collect();
        write!(out, " extends {}", supers.join(", ")).unwrap();
    }
    out.push_str(" {\n");
    for i in &f.interfaces {
        writeln!(out, "  interface {};", i.name).unwrap();
    }
    for e in &f.externals {
        writeln!(out, "  external {};", e.name).unwrap();
    }
    for t in &f.tokens {
        writeln!(out, "  token {} = {};", t.name, quote_regex(&t.pattern)).unwrap();
    }
    for p in &f.productions {
        out.push_str("  ");
        out.push_str(&p.name);
        if !p.implements.is_empty() {
            write!(out, " implements {}", p.implements.join(", ")).unwrap();
        }
        writeln!(out, " = {};", print_body(&p.body)).unwrap();
    }
    if let Some(c) = &f.editor_concept {
        out.push_str("  concept texteditor {\n");
        if !c.keywords.is_empty() {
            let kws: Vec<String> =
                c.keywords.iter().map(|k| if is_ident(k) { k.clone() } else { quote(k) }).collect();
            writeln!(out, "    keywords: {};", kws.join(", ")).unwrap();
        }
        if !c.foldable.is_empty() {
            let names: Vec<&str> = c.foldable.iter().map(|d| d.name.as_str()).collect();
            writeln!(out, "    foldable: {};", names.join(", ")).unwrap();
        }
        for s in &c.segments {
            write!(out, "    segment: {} ({}) show:", s.nonterminal, quote(&s.icon_path)).unwrap();
            for item in &s.template {
                match item {
                    TemplateItem::Literal(l) => write!(out, " {}", quote(l)).unwrap(),
                    TemplateItem::AttributeRef(a) => write!(out, " {a}").unwrap(),
                }
            }
            out.push_str(";\n");
        }
        out.push_str("  }\n");
    }
    for c in &f.opaque_concepts {
        writeln!(out, "  concept {} {{ {} }}", c.name, c.body).unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn print_body(e: &BodyExpr) -> String {
    let mut out = String::new();
    body(e, &mut out);
    out
}

fn label(out: &mut String, l: &Option<String>) {
    if let Some(l) = l {
        out.push_str(l);
        out.push(':');
    }
}

fn body(e: &BodyExpr, out: &mut String) {
    match e {
        BodyExpr::Sequence(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                // A bare alternative inside a sequence needs its own parentheses.
                if matches!(item, BodyExpr::Alternative(_) | BodyExpr::Sequence(_)) {
                    out.push('(');
                    body(item, out);
                    out.push(')');
                } else {
                    body(item, out);
                }
            }
        }
        BodyExpr::Alternative(branches) => {
            for (i, b) in branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                if matches!(b, BodyExpr::Alternative(_)) {
                    out.push('(');
                    body(b, out);
                    out.push(')');
                } else {
                    body(b, out);
                }
            }
        }
        BodyExpr::Block { inner, label: l } => {
            label(out, l);
            out.push('(');
            body(inner, out);
            out.push(')');
        }
        BodyExpr::Terminal { text, label: l } => {
            label(out, l);
            out.push_str(&quote(text));
        }
        BodyExpr::NonterminalRef { target, label: l, .. } => {
            label(out, l);
            out.push_str(target);
        }
        BodyExpr::PresenceFlag { label: l, keyword } => {
            write!(out, "{l}:[{}]", quote(keyword)).unwrap();
        }
        BodyExpr::Repeat { inner, card } => {
            // Cardinality binds to a single primary; anything else needs parentheses.
            match inner.as_ref() {
                BodyExpr::Sequence(_) | BodyExpr::Alternative(_) | BodyExpr::Repeat { .. } => {
                    out.push('(');
                    body(inner, out);
                    out.push(')');
                }
                _ => body(inner, out),
            }
            out.push(card.symbol());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    #[test]
    fn prints_labels_flags_and_cards() {
        let src = r#"grammar G { C = "c" name:IDENT (s:["shared"] (a:["all"] | w:IDENT ("," w:IDENT)*))? ("{" X "}" | ";"); }"#;
        let f = parse_grammar(src, "g.mc").unwrap();
        let printed = print_body(&f.productions[0].body);
        assert_eq!(
            printed,
            r#""c" name:IDENT (s:["shared"] (a:["all"] | w:IDENT ("," w:IDENT)*))? ("{" X "}" | ";")"#
        );
    }
}
