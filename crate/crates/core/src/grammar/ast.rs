//! Meta-level syntax tree of grammar fragments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Position of a declaration in its grammar file. Ignored by structural
/// comparisons (see [`GrammarFragment::structurally_eq`]).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl Loc {
    pub fn new(line: u32, col: u32) -> Self {
        Loc { line, col }
    }
}

/// Name of the built-in identifier token.
pub const IDENT: &str = "IDENT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrammarFragment {
    pub name: String,
    /// Package path, derived from the file location below a grammar root.
    pub package: Vec<String>,
    pub origin: PathBuf,
    pub loc: Loc,
    pub super_grammars: Vec<QualifiedName>,
    pub interfaces: Vec<Declared>,
    pub externals: Vec<Declared>,
    pub tokens: Vec<TokenProduction>,
    pub productions: Vec<Production>,
    pub editor_concept: Option<FragmentEditorConcept>,
    /// Concepts other than `texteditor`, kept verbatim.
    pub opaque_concepts: Vec<OpaqueConcept>,
}

/// A declared name (interface or external) and where it was declared.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declared {
    pub name: String,
    pub loc: Loc,
}

impl Declared {
    pub fn new(name: impl Into<String>, loc: Loc) -> Self {
        Declared { name: name.into(), loc }
    }
}

/// Dotted name such as `mc.examples.msc.msc.MSC.MSC`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QualifiedName(pub Vec<String>);

impl QualifiedName {
    pub fn parse(dotted: &str) -> Self {
        QualifiedName(dotted.split('.').map(str::to_string).collect())
    }

    pub fn simple(&self) -> &str {
        self.0.last().map(String::as_str).unwrap_or("")
    }

    /// Everything before the last segment.
    pub fn qualifier(&self) -> &[String] {
        &self.0[..self.0.len().saturating_sub(1)]
    }

    /// Splits a nonterminal reference into (grammar name, nonterminal).
    pub fn split_nonterminal(&self) -> Option<(QualifiedName, &str)> {
        if self.0.len() < 2 {
            return None;
        }
        Some((QualifiedName(self.qualifier().to_vec()), self.simple()))
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("."))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Production {
    pub name: String,
    pub implements: Vec<String>,
    pub body: BodyExpr,
    pub loc: Loc,
}

/// `token NAME = /regex/;` — a fragment-local lexical nonterminal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenProduction {
    pub name: String,
    pub pattern: String,
    pub loc: Loc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cardinality {
    Optional,
    Star,
    Plus,
}

impl Cardinality {
    pub fn symbol(self) -> char {
        match self {
            Cardinality::Optional => '?',
            Cardinality::Star => '*',
            Cardinality::Plus => '+',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BodyExpr {
    Sequence(Vec<BodyExpr>),
    Alternative(Vec<BodyExpr>),
    Block { inner: Box<BodyExpr>, label: Option<String> },
    Terminal { text: String, label: Option<String> },
    NonterminalRef { target: String, label: Option<String>, loc: Loc },
    /// `label:["kw"]`: boolean attribute, true iff the keyword matched.
    PresenceFlag { label: String, keyword: String },
    Repeat { inner: Box<BodyExpr>, card: Cardinality },
}

impl BodyExpr {
    pub fn terminal(text: &str) -> Self {
        BodyExpr::Terminal { text: text.to_string(), label: None }
    }

    pub fn reference(target: &str) -> Self {
        BodyExpr::NonterminalRef { target: target.to_string(), label: None, loc: Loc::default() }
    }

    /// Visits every node, parents before children.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a BodyExpr)) {
        f(self);
        match self {
            BodyExpr::Sequence(items) | BodyExpr::Alternative(items) => {
                items.iter().for_each(|i| i.walk(f))
            }
            BodyExpr::Block { inner, .. } | BodyExpr::Repeat { inner, .. } => inner.walk(f),
            _ => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut dyn FnMut(&mut BodyExpr)) {
        f(self);
        match self {
            BodyExpr::Sequence(items) | BodyExpr::Alternative(items) => {
                items.iter_mut().for_each(|i| i.walk_mut(f))
            }
            BodyExpr::Block { inner, .. } | BodyExpr::Repeat { inner, .. } => inner.walk_mut(f),
            _ => {}
        }
    }

    /// Nonterminal references in source order.
    pub fn references(&self) -> Vec<(&str, Loc)> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let BodyExpr::NonterminalRef { target, loc, .. } = e {
                out.push((target.as_str(), *loc));
            }
        });
        out
    }

    pub fn terminals(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| match e {
            BodyExpr::Terminal { text, .. } => out.push(text.as_str()),
            BodyExpr::PresenceFlag { keyword, .. } => out.push(keyword.as_str()),
            _ => {}
        });
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FragmentEditorConcept {
    pub keywords: Vec<String>,
    pub foldable: Vec<Declared>,
    pub segments: Vec<SegmentDef>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentDef {
    pub nonterminal: String,
    pub icon_path: String,
    pub template: Vec<TemplateItem>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemplateItem {
    Literal(String),
    AttributeRef(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpaqueConcept {
    pub name: String,
    /// Source text between the braces.
    pub body: String,
    pub loc: Loc,
}

impl GrammarFragment {
    pub fn new(name: impl Into<String>) -> Self {
        GrammarFragment {
            name: name.into(),
            package: Vec::new(),
            origin: PathBuf::new(),
            loc: Loc::default(),
            super_grammars: Vec::new(),
            interfaces: Vec::new(),
            externals: Vec::new(),
            tokens: Vec::new(),
            productions: Vec::new(),
            editor_concept: None,
            opaque_concepts: Vec::new(),
        }
    }

    pub fn qualified_name(&self) -> QualifiedName {
        let mut parts = self.package.clone();
        parts.push(self.name.clone());
        QualifiedName(parts)
    }

    pub fn production(&self, name: &str) -> Option<&Production> {
        self.productions.iter().find(|p| p.name == name)
    }

    pub fn has_interface(&self, name: &str) -> bool {
        self.interfaces.iter().any(|d| d.name == name)
    }

    pub fn has_external(&self, name: &str) -> bool {
        self.externals.iter().any(|d| d.name == name)
    }

    pub fn has_token(&self, name: &str) -> bool {
        self.tokens.iter().any(|t| t.name == name)
    }

    /// Keywords of the fragment's editor concept (empty without one).
    pub fn keywords(&self) -> &[String] {
        self.editor_concept.as_ref().map(|c| c.keywords.as_slice()).unwrap_or(&[])
    }

    /// Productions implementing `interface`, in declaration order.
    pub fn implementors(&self, interface: &str) -> Vec<&str> {
        self.productions
            .iter()
            .filter(|p| p.implements.iter().any(|i| i == interface))
            .map(|p| p.name.as_str())
            .collect()
    }

    /// Copy with every location, origin and package cleared.
    pub fn without_locations(&self) -> GrammarFragment {
        let mut f = self.clone();
        f.origin = PathBuf::new();
        f.package.clear();
        f.loc = Loc::default();
        f.interfaces.iter_mut().for_each(|d| d.loc = Loc::default());
        f.externals.iter_mut().for_each(|d| d.loc = Loc::default());
        f.tokens.iter_mut().for_each(|t| t.loc = Loc::default());
        for p in &mut f.productions {
            p.loc = Loc::default();
            p.body.walk_mut(&mut |e| {
                if let BodyExpr::NonterminalRef { loc, .. } = e {
                    *loc = Loc::default();
                }
            });
        }
        if let Some(c) = &mut f.editor_concept {
            c.loc = Loc::default();
            c.foldable.iter_mut().for_each(|d| d.loc = Loc::default());
            c.segments.iter_mut().for_each(|s| s.loc = Loc::default());
        }
        for c in &mut f.opaque_concepts {
            c.loc = Loc::default();
            c.body = c.body.split_whitespace().collect::<Vec<_>>().join(" ");
        }
        f
    }

    /// Equality ignoring whitespace and source positions.
    pub fn structurally_eq(&self, other: &GrammarFragment) -> bool {
        self.without_locations() == other.without_locations()
    }
}

/// How a production attribute is stored on syntax nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttributeShape {
    /// At most one value; `optional` when some derivation omits it.
    Scalar { optional: bool },
    /// Any number of values; always present, possibly empty.
    List,
    /// Boolean presence flag; always present.
    Flag,
}

/// Occurrence bounds of one label: (min, max) where max 2 stands for "many".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Bounds {
    min: u8,
    max: u8,
}

#[derive(Debug, Default)]
struct LabelUse {
    flag: bool,
    value: bool,
}

fn add(a: u8, b: u8) -> u8 {
    (a + b).min(2)
}

fn occurrences(e: &BodyExpr, uses: &mut BTreeMap<String, LabelUse>) -> BTreeMap<String, Bounds> {
    let mut out: BTreeMap<String, Bounds> = BTreeMap::new();
    let mut single = |label: &str, flag: bool, out: &mut BTreeMap<String, Bounds>| {
        let u = uses.entry(label.to_string()).or_default();
        if flag {
            u.flag = true;
        } else {
            u.value = true;
        }
        out.insert(label.to_string(), Bounds { min: 1, max: 1 });
    };
    match e {
        BodyExpr::Terminal { label, .. } | BodyExpr::NonterminalRef { label, .. } => {
            if let Some(l) = label {
                single(l, false, &mut out);
            }
        }
        BodyExpr::PresenceFlag { label, .. } => single(label, true, &mut out),
        BodyExpr::Block { inner, label } => {
            out = occurrences(inner, uses);
            if let Some(l) = label {
                let u = uses.entry(l.clone()).or_default();
                u.value = true;
                let b = out.entry(l.clone()).or_insert(Bounds { min: 0, max: 0 });
                *b = Bounds { min: add(b.min, 1), max: add(b.max, 1) };
            }
        }
        BodyExpr::Sequence(items) => {
            for item in items {
                for (l, b) in occurrences(item, uses) {
                    let acc = out.entry(l).or_insert(Bounds { min: 0, max: 0 });
                    *acc = Bounds { min: add(acc.min, b.min), max: add(acc.max, b.max) };
                }
            }
        }
        BodyExpr::Alternative(branches) => {
            let per: Vec<_> = branches.iter().map(|b| occurrences(b, uses)).collect();
            let labels: std::collections::BTreeSet<String> =
                per.iter().flat_map(|m| m.keys().cloned()).collect();
            for l in labels {
                let min = per.iter().map(|m| m.get(&l).map_or(0, |b| b.min)).min().unwrap_or(0);
                let max = per.iter().map(|m| m.get(&l).map_or(0, |b| b.max)).max().unwrap_or(0);
                out.insert(l, Bounds { min, max });
            }
        }
        BodyExpr::Repeat { inner, card } => {
            for (l, b) in occurrences(inner, uses) {
                let bounds = match card {
                    Cardinality::Optional => Bounds { min: 0, max: b.max },
                    Cardinality::Star => Bounds { min: 0, max: if b.max > 0 { 2 } else { 0 } },
                    Cardinality::Plus => Bounds { min: b.min, max: if b.max > 0 { 2 } else { 0 } },
                };
                out.insert(l, bounds);
            }
        }
    }
    out
}

/// Attribute shapes of a production body, keyed by label. Labels used both
/// as presence flag and as value label are returned in the second map.
pub fn attribute_shapes(body: &BodyExpr) -> (BTreeMap<String, AttributeShape>, Vec<String>) {
    let mut uses = BTreeMap::new();
    let bounds = occurrences(body, &mut uses);
    let mut shapes = BTreeMap::new();
    let mut conflicts = Vec::new();
    for (label, b) in bounds {
        let u = &uses[&label];
        if u.flag && u.value {
            conflicts.push(label.clone());
        }
        let shape = if u.flag && !u.value {
            AttributeShape::Flag
        } else if b.max >= 2 {
            AttributeShape::List
        } else {
            AttributeShape::Scalar { optional: b.min == 0 }
        };
        shapes.insert(label, shape);
    }
    (shapes, conflicts)
}

impl Production {
    pub fn attribute_shapes(&self) -> BTreeMap<String, AttributeShape> {
        attribute_shapes(&self.body).0
    }

    pub fn labels(&self) -> Vec<String> {
        self.attribute_shapes().into_keys().collect()
    }
}
