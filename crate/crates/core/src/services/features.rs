//! Highlighting, folding and outline: pure functions of a parse.

use serde::{Deserialize, Serialize};

use crate::compose::EffectiveEditorConfig;
use crate::engine::{AttrValue, SyntaxNode, Token, TokenKind};
use crate::grammar::{SegmentDef, TemplateItem};
use crate::span::{LineIndex, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HighlightCategory {
    Keyword,
    Comment,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightSpan {
    pub span: Span,
    pub category: HighlightCategory,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldingRange {
    pub span: Span,
    pub placeholder: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineSymbol {
    pub label: String,
    pub icon_path: String,
    pub span: Span,
    pub children: Vec<OutlineSymbol>,
}

pub fn highlight(tokens: &[Token]) -> Vec<HighlightSpan> {
    tokens
        .iter()
        .filter_map(|t| {
            let category = match t.kind {
                TokenKind::Keyword => HighlightCategory::Keyword,
                TokenKind::CommentLine | TokenKind::CommentBlock => HighlightCategory::Comment,
                _ => return None,
            };
            Some(HighlightSpan { span: t.span, category })
        })
        .collect()
}

/// One range per foldable node spanning at least two lines. The
/// placeholder is the node's first line, trimmed, followed by "..".
pub fn folding_ranges(root: &SyntaxNode, cfg: &EffectiveEditorConfig, text: &str) -> Vec<FoldingRange> {
    let index = LineIndex::new(text);
    let mut out = Vec::new();
    root.walk(&mut |n| {
        if cfg.foldable.contains(&n.production) && n.span.line_count() >= 2 {
            let line = index.line_text(text, n.span.start_line as usize - 1);
            let first: String = line.chars().skip(n.span.start_col as usize - 1).collect();
            out.push(FoldingRange { span: n.span, placeholder: format!("{}..", first.trim()) });
        }
    });
    out
}

pub fn outline(root: &SyntaxNode, cfg: &EffectiveEditorConfig, text: &str) -> Vec<OutlineSymbol> {
    fn visit(n: &SyntaxNode, cfg: &EffectiveEditorConfig, text: &str, out: &mut Vec<OutlineSymbol>) {
        match cfg.segments.get(&n.production) {
            Some(seg) => {
                let mut children = Vec::new();
                n.children.iter().for_each(|c| visit(c, cfg, text, &mut children));
                out.push(OutlineSymbol {
                    label: render_segment_label(seg, n, text),
                    icon_path: seg.icon_path.clone(),
                    span: n.span,
                    children,
                });
            }
            None => n.children.iter().for_each(|c| visit(c, cfg, text, out)),
        }
    }
    let mut out = Vec::new();
    visit(root, cfg, text, &mut out);
    out
}

/// Concatenates the template with no implicit separators. Lists join with
/// ", ", absent values render empty, node values render as their source.
pub fn render_segment_label(seg: &SegmentDef, node: &SyntaxNode, text: &str) -> String {
    fn value(v: &AttrValue, node: &SyntaxNode, text: &str) -> String {
        match v {
            AttrValue::Text(s) => s.clone(),
            AttrValue::Bool(b) => b.to_string(),
            AttrValue::Node(i) => node.children.get(*i).map_or(String::new(), |c| c.source(text).trim().to_string()),
            AttrValue::List(vs) => vs.iter().map(|v| value(v, node, text)).collect::<Vec<_>>().join(", "),
        }
    }
    seg.template
        .iter()
        .map(|item| match item {
            TemplateItem::Literal(s) => s.clone(),
            TemplateItem::AttributeRef(l) => node.attr(l).map_or(String::new(), |v| value(v, node, text)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::parse;
    use crate::grammar::Loc;

    fn node(attrs: &[(&str, AttrValue)]) -> SyntaxNode {
        SyntaxNode {
            production: "G.P".into(),
            fragment: "G".into(),
            attributes: attrs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            children: Vec::new(),
            items: Vec::new(),
            span: Span::default(),
            range: 0..0,
        }
    }

    fn seg(template: Vec<TemplateItem>) -> SegmentDef {
        SegmentDef { nonterminal: "P".into(), icon_path: "pict/p.gif".into(), template, loc: Loc::default() }
    }

    use TemplateItem::{AttributeRef as Ref, Literal as Lit};

    #[test]
    fn labels() {
        let n = node(&[("receiver", AttrValue::Text("receiver".into())), ("message", AttrValue::Text("message".into()))]);
        let s = seg(vec![Lit("Send to ".into()), Ref("receiver".into()), Lit(":".into()), Ref("message".into())]);
        assert_eq!(render_segment_label(&s, &n, ""), "Send to receiver:message");
        assert_eq!(render_segment_label(&seg(vec![Lit("X".into())]), &n, ""), "X");
        let n = node(&[(
            "sharedWith",
            AttrValue::List(vec![AttrValue::Text("a".into()), AttrValue::Text("b".into())]),
        )]);
        assert_eq!(render_segment_label(&seg(vec![Ref("sharedWith".into())]), &n, ""), "a, b");
        assert_eq!(render_segment_label(&seg(vec![Lit("[".into()), Ref("absent".into()), Lit("]".into())]), &n, ""), "[]");
    }

    #[test]
    fn person_segment() {
        let src = "grammar Greeting { Greeting = \"hello\" persons:Person (\",\" persons:Person)* \";\"; \
                   Person = name:IDENT; \
                   concept texteditor { keywords: hello; foldable: Greeting; \
                   segment: Person (\"pict/person.gif\") show: \"Person \" name; } }";
        let lang = crate::engine::build::tests::language(src, "Greeting");
        let h = crate::engine::build_engine(&lang).unwrap();
        let text = "hello Alice,\n Bob;";
        let root = parse(text, &h, "g").root.unwrap();
        let symbols = outline(&root, &lang.effective_editor, text);
        assert_eq!(symbols.len(), 2);
        assert_eq!(symbols[0].label, "Person Alice");
        assert_eq!(symbols[0].icon_path, "pict/person.gif");
        let folds = folding_ranges(&root, &lang.effective_editor, text);
        assert_eq!(folds, vec![FoldingRange { span: Span::new(1, 1, 2, 6), placeholder: "hello Alice,..".into() }]);
        let one_line = parse("hello Al;", &h, "g").root.unwrap();
        assert!(folding_ranges(&one_line, &lang.effective_editor, "hello Al;").is_empty());
        assert!(folding_ranges(&root, &EffectiveEditorConfig::default(), text).is_empty());
        assert!(outline(&root, &EffectiveEditorConfig::default(), text).is_empty());
    }

    #[test]
    fn highlight_categories() {
        assert!(highlight(&[]).is_empty());
        let mode = crate::engine::Mode::new("G", &["kw".to_string()], &[], &[]).unwrap();
        let hs = highlight(&mode.lex("kw x // c\n/* d */"));
        let cats: Vec<_> = hs.iter().map(|h| h.category).collect();
        assert_eq!(cats, vec![HighlightCategory::Keyword, HighlightCategory::Comment, HighlightCategory::Comment]);
        let only = highlight(&mode.lex("/* all\n comment */"));
        assert_eq!(only, vec![HighlightSpan { span: Span::new(1, 1, 2, 12), category: HighlightCategory::Comment }]);
    }
}
