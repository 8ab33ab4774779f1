use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::grammar::{FragmentEditorConcept, NamedAction, SegmentDef, ToolEditorConcept};

/// Editor configuration of one composed language.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EffectiveEditorConfig {
    pub keywords: BTreeSet<String>,
    /// Qualified nonterminal names (`Fragment.Production`).
    pub foldable: BTreeSet<String>,
    pub segments: BTreeMap<String, SegmentDef>,
    pub workflows: Vec<String>,
    pub menu_items: Vec<NamedAction>,
    pub navigator_items: Vec<NamedAction>,
    pub format_available: bool,
}

impl EffectiveEditorConfig {
    pub fn actions(&self) -> impl Iterator<Item = &NamedAction> {
        self.menu_items.iter().chain(self.navigator_items.iter())
    }
}

/// Combines fragment concepts (host first, then fillers in binding order;
/// each already inheritance-flattened) with the language-level concept.
/// Later contributions win segment collisions.
pub fn merge_editor_concepts(
    contributions: &[(String, FragmentEditorConcept)],
    tool_editor: &ToolEditorConcept,
    pretty_printers: &[String],
) -> EffectiveEditorConfig {
    let mut cfg = EffectiveEditorConfig::default();
    for (fragment, concept) in contributions {
        cfg.keywords.extend(concept.keywords.iter().cloned());
        cfg.foldable.extend(concept.foldable.iter().map(|d| format!("{fragment}.{}", d.name)));
        for seg in &concept.segments {
            cfg.segments.insert(format!("{fragment}.{}", seg.nonterminal), seg.clone());
        }
    }
    cfg.workflows = tool_editor.workflows.clone();
    cfg.menu_items = tool_editor.menu_items.clone();
    cfg.navigator_items = tool_editor.navigator_items.clone();
    cfg.format_available = !pretty_printers.is_empty();
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_grammar, TemplateItem};

    fn concept(src: &str) -> FragmentEditorConcept {
        parse_grammar(src, "g.mc").unwrap().editor_concept.unwrap()
    }

    #[test]
    fn singleton_with_empty_tool_editor() {
        let c = concept(
            "grammar G { A = n:IDENT; concept texteditor { keywords: a, b; foldable: A; segment: A (\"i\") show: n; } }",
        );
        let cfg = merge_editor_concepts(&[("G".into(), c.clone())], &ToolEditorConcept::default(), &[]);
        assert_eq!(cfg.keywords, ["a", "b"].into_iter().map(String::from).collect());
        assert_eq!(cfg.foldable, ["G.A".to_string()].into_iter().collect());
        assert_eq!(cfg.segments["G.A"], c.segments[0]);
        assert!(cfg.workflows.is_empty() && cfg.menu_items.is_empty() && !cfg.format_available);
    }

    #[test]
    fn later_contribution_wins_segment() {
        let a = concept("grammar G { A = n:IDENT; concept texteditor { segment: A (\"1\") show: n; } }");
        let b = concept("grammar G { A = n:IDENT; concept texteditor { segment: A (\"2\") show: \"x\"; } }");
        let cfg = merge_editor_concepts(
            &[("G".into(), a), ("G".into(), b)],
            &ToolEditorConcept::default(),
            &["P".into()],
        );
        assert_eq!(cfg.segments["G.A"].icon_path, "2");
        assert_eq!(cfg.segments["G.A"].template, vec![TemplateItem::Literal("x".into())]);
        assert!(cfg.format_available);
    }
}
